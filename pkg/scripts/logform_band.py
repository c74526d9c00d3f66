"""Equivalence band between the exact S^2 average and its logarithmic form.

Samples nonincreasing step functions and reports the smallest and largest
ratio over all samples and grid points.
"""

import argparse
import json

from lgt.verification import logform_band


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    c1, c2 = logform_band(samples=args.samples, seed=args.seed)
    print(json.dumps({"c1": c1, "c2": c2, "c2_over_c1": c2 / c1}, indent=2))


if __name__ == "__main__":
    main()
