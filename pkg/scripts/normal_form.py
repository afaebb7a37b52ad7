"""Normal-form equivalence residual under step halving on a 48^3 grid."""

import argparse
import json

from fracnls.experiments import normal_form_orders


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--dts", type=float, nargs="+", default=[0.25, 0.125, 0.0625])
    p.add_argument("--amplitude", type=float, default=0.2)
    p.add_argument("--out", default="normal_form.json")
    a = p.parse_args()
    r = normal_form_orders(amplitude=a.amplitude, dts=a.dts)
    for dt, res in zip(r["dts"], r["residuals"]):
        print(f"dt={dt:<8} residual {res:.3e}")
    print("observed orders", ", ".join(f"{o:.2f}" for o in r["orders"]))
    with open(a.out, "w") as fh:
        json.dump(r, fh, indent=2)


if __name__ == "__main__":
    main()
