"""Monte Carlo check of the dominating-set lemma over a grid of (k, kappa).

    python scripts/lemma_sweep.py --n 4096 --trials 400 --seed 1
"""

import argparse
import json

from soficlab import HypothesisViolated, lemma_montecarlo


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=4096)
    ap.add_argument("--ks", type=int, nargs="+", default=[4, 9, 16])
    ap.add_argument("--kappas", type=float, nargs="+", default=[0.25, 0.3, 0.4])
    ap.add_argument("--trials", type=int, default=400)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    rows = []
    for k in args.ks:
        for kappa in args.kappas:
            try:
                r = lemma_montecarlo(f"perms:{k}", args.n, k, k, kappa, args.trials, args.seed, args.threads)
            except HypothesisViolated:
                print(f"k={k:3d} kappa={kappa:.2f}  outside hypotheses, skipped")
                continue
            rows.append(r.to_json())
            print(f"k={k:3d} kappa={kappa:.2f}  failure rate {r.failure_rate:.3f}  "
                  f"mean Y {r.mean_Y:8.1f} (bound {r.bound_E_Y:.0f})  var Y {r.var_Y:9.1f} (bound {r.bound_var_Y:.0f})")
    print(json.dumps(rows, indent=2))


if __name__ == "__main__":
    main()
