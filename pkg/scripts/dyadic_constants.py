"""Decay exponents of the two dyadic constants over a grid of (alpha, lam)."""

import argparse
import json

from fracnls.experiments import dyadic_table


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--alphas", type=float, nargs="+", default=[1.7, 1.8, 1.9])
    p.add_argument("--fractions", type=float, nargs="+", default=[0.25, 0.3, 0.4],
                   help="lam = (alpha-1)/2 + fraction * (1/2 - (alpha-1)/2)")
    p.add_argument("--out", default="dyadic_constants.json")
    a = p.parse_args()
    pairs = []
    for alpha in a.alphas:
        lo = (alpha - 1) / 2
        pairs += [(alpha, lo + f * (0.5 - lo)) for f in a.fractions]
    rows = dyadic_table(pairs)
    for r in rows:
        print(f"alpha={r['alpha']:.2f} lam={r['lam']:.4f}  C1 {r['C1']:+.4f} ({r['C1_expected']:+.4f})"
              f"  C2 {r['C2']:+.4f} ({r['C2_expected']:+.4f})")
    with open(a.out, "w") as fh:
        json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
