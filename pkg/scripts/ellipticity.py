"""Ellipticity spreads and symbol-class constants over the dyadic region sweep."""

import argparse
import json

from fracnls.experiments import ellipticity_table


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--alphas", type=float, nargs="+", default=[1.25, 1.5, 1.75])
    p.add_argument("--offset-range", type=int, default=10)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--out", default="ellipticity.json")
    a = p.parse_args()
    rows = ellipticity_table(a.alphas, offset_range=a.offset_range, samples=a.samples)
    for r in rows:
        s = "  ".join(f"{k} {v:.3g}" for k, v in r["spread"].items())
        print(f"alpha={r['alpha']:<5} {r['kind']}  regions {r['regions']:>3}  spread: {s}")
    with open(a.out, "w") as fh:
        json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
