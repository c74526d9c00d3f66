"""Ratio of the Stieltjes transform on truncated powers to its sharp L^p constant.

The extremal family s^{-1/p} on [eps, 1/eps] approaches pi / sin(pi/p) as
eps -> 0, slowly (roughly like 1/log(1/eps)).
"""

import argparse
import json
import math

from lgt.verification import hilbert_ratio, hilbert_ratio_oracle


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=float, nargs="+", default=[2.0, 4 / 3, 4.0])
    ap.add_argument("--eps", type=float, nargs="+", default=[1e-2, 1e-4, 1e-6])
    args = ap.parse_args()
    rows = []
    for p in args.p:
        sharp = math.pi / math.sin(math.pi / p)
        for eps in args.eps:
            r = hilbert_ratio(p, eps)
            rows.append({"p": p, "eps": eps, "ratio": r, "sharp": sharp,
                         "ratio_over_sharp": r / sharp, "oracle": hilbert_ratio_oracle(p, eps)})
    print(json.dumps(rows, indent=2))


if __name__ == "__main__":
    main()
