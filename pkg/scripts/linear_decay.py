"""Radial linear decay table and the shell-to-shell prefactor ratio."""

import argparse
import json

from fracnls.experiments import linear_decay, prefactor_ratio


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--alphas", type=float, nargs="+", default=[1.25, 1.5, 1.75])
    p.add_argument("--shells", type=int, nargs="+", default=[-1, 0, 1])
    p.add_argument("--out", default="linear_decay.json")
    a = p.parse_args()
    rows = []
    for alpha in a.alphas:
        for k in a.shells:
            r = linear_decay(alpha, k)
            print(f"alpha={alpha:<5} k={k:>2}  sup {r['sup']:+.3f}  L4 {r['l4']:+.3f}  L6 {r['l6']:+.3f}")
            rows.append({key: r[key] for key in ("alpha", "k", "sup", "l4", "l6")})
    ratios = [prefactor_ratio(alpha, 0) for alpha in a.alphas]
    for r in ratios:
        print(f"alpha={r['alpha']:<5} prefactor ratio {r['ratio']:.4f} (expected {r['expected']:.4f})")
    with open(a.out, "w") as fh:
        json.dump({"exponents": rows, "prefactor_ratios": ratios}, fh, indent=2)


if __name__ == "__main__":
    main()
