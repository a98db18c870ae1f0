"""Parameter cascade for the constant measure at several scales eta.

    python scripts/plan_table.py --depth 6 --etas 1 0.5 0.25
"""

import argparse

from soficlab import Infeasible, Integers, measure_from_spec, plan_parameters


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--depth", type=int, default=6)
    ap.add_argument("--etas", type=float, nargs="+", default=[1.0, 0.5, 0.25])
    ap.add_argument("--measure", default="constant")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    mu = measure_from_spec(args.measure, Integers(), args.depth)
    print(f"{'eta':>6} {'eps':>8} {'delta':>8} {'M':>7} {'|F1|':>8} {'|F2|':>12} {'min |V|':>10} {'bound':>10}")
    for eta in args.etas:
        try:
            p = plan_parameters(eta, args.depth, mu, seed=args.seed)
        except Infeasible as e:
            print(f"{eta:6.3f} infeasible at {e.condition}: {e}")
            continue
        print(f"{eta:6.3f} {p.eps:8.5f} {p.delta:8.5f} {p.M:7d} {p.F1_size:8d} {p.F2_size:12d} "
              f"{float(p.min_vertices):10.3e} {p.separation_bound():10.7f}")


if __name__ == "__main__":
    main()
