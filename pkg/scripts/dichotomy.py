"""Finite-scale entropy bounds for a free and a non-free measure as n grows.

    python scripts/dichotomy.py --sizes 250 500 1000 2000 --seed 1
"""

import argparse
import json
import math

from soficlab import Integers, Neighborhood, StabBlock, build_cyclic, finite_scale_entropy, interval, measure_from_spec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[250, 500, 1000, 2000])
    ap.add_argument("--delta", type=float, default=0.01)
    ap.add_argument("--budget", type=int, default=200)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    Z = Integers()
    fair = measure_from_spec("fair", Z, 1)
    fixed = measure_from_spec("fixed-points", Z, 1)
    free_nbhd = Neighborhood({0, 1}, fair, 0.05)
    stab_nbhd = Neighborhood({0, 1}, fixed, 0.05, StabBlock(5, 0.4, 0.01, interval(-2, 2), interval(-2, 2)))
    rows = []
    for n in args.sizes:
        xi = build_cyclic(n, interval(-12, 12))
        a = finite_scale_entropy(fair, xi, free_nbhd, args.delta, args.budget, args.seed, threads=args.threads)
        b = finite_scale_entropy(fixed, xi, stab_nbhd, args.delta, args.budget, args.seed, threads=args.threads)
        row = {"n": n, "fair_lower": a.value_lower, "fair_upper": a.value_upper,
               "fixed_points_upper": b.value_upper if isinstance(b.value_upper, float) else str(b.value_upper)}
        rows.append(row)
        print(f"n={n:6d}  fair in [{a.value_lower:.4f}, {a.value_upper:.4f}]  fixed points <= {row['fixed_points_upper']}")
    print(json.dumps({"log2": math.log(2), "rows": rows}, indent=2))


if __name__ == "__main__":
    main()
