"""Exact S(L) against Monte Carlo and the linear bounds, for several K."""

import argparse

from signcompute import analysis
from signcompute.protocol import simulate_slot_count


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, nargs="+", default=[1, 2, 4, 8, 16])
    ap.add_argument("--l-max", type=int, default=20)
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    worst = 0.0
    for K in args.k:
        table = analysis.slot_count_table(K, args.l_max)
        report = analysis.check_bounds(table)
        print(f"K={K}: alpha*={float(analysis.alpha_star(K)):.4f} beta*={float(analysis.beta_star(K)):.4f} "
              f"bounds {'hold' if report.ok else 'VIOLATED'}")
        for L in range(1, args.l_max + 1):
            mean, se = simulate_slot_count(L, K, args.trials, seed=[args.seed, K, L])
            exact = float(table[L])
            z = abs(mean - exact) / se if se else 0.0
            worst = max(worst, z)
            print(f"  L={L:3d}  S={exact:10.4f}  mc={mean:10.4f} +- {se:.4f}  z={z:5.2f}")
    print(f"largest |z| = {worst:.2f}")


if __name__ == "__main__":
    main()
