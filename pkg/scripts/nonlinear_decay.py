"""Smallness threshold search and small-data decay on a 96^3 grid."""

import argparse
import json

from fracnls.experiments import nonlinear_decay


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--threshold", type=float, default=None,
                   help="skip the bisection and use this threshold")
    p.add_argument("--n", type=int, default=96)
    p.add_argument("--half-width", type=float, default=60.0)
    p.add_argument("--out", default="nonlinear_decay.json")
    a = p.parse_args()
    r = nonlinear_decay(n=a.n, half_width=a.half_width, threshold=a.threshold)
    print(f"threshold {r['threshold']:.4g}, run amplitude {r['amplitude']:.4g}, wrap {r['wrap_time']:.3f}")
    print(f"sup-norm exponent {r['fit']['exponent']:+.3f} (residual {r['fit']['residual']:.3g})")
    for k, v in r["settle_ratio"].items():
        print(f"{k} settle ratio after t={r['t_transient']:.2f}: {v:.4f}")
    with open(a.out, "w") as fh:
        json.dump(r, fh, indent=2, default=str)


if __name__ == "__main__":
    main()
