"""Compare the S^2 condition verdicts with the empirical norm-ratio verdicts.

Runs power-weight configurations phi1 = t^a1, phi2 = t^a2 and prints one JSON
record per configuration.  The operator is bounded iff the exponent gap
e = (a1+1)/q - (a2+1)/p vanishes.
"""

import argparse
import json
import time

from lgt.conditions import corollary_s2_check
from lgt.operators import OperatorSpec
from lgt.verification import estimate_norm_ratio
from lgt.weights import PowerLogWeight, WeightedLpSpec, associated_weight_q, dual_weight

CONFIGS = [
    (2, 2, 0.0, 0.0), (2, 2, 0.5, 0.5), (2, 2, -0.5, -0.5), (2, 3, 0.5, 0.0),
    (1.5, 2, 1 / 3, 0.0), (2, 3, 1.25, 0.5),
    (2, 2, 0.5, 0.0), (2, 2, 0.0, 0.5), (2, 3, -0.25, 0.0), (1.5, 2, 0.0, 0.25),
    (2, 2, -0.5, 0.5), (3, 3, 1.5, 0.0),
]


def run(p, q, a1, a2, samples, seed):
    phi1, phi2 = PowerLogWeight(1, a1, a1), PowerLogWeight(1, a2, a2)
    start = time.perf_counter()
    rep = corollary_s2_check(phi1, phi2, p, q)
    src = WeightedLpSpec(p, dual_weight(phi2, p) ** (1 - p))
    tgt = WeightedLpSpec(q, associated_weight_q(phi1, q))
    est = estimate_norm_ratio(OperatorSpec("s2_exact"), src, tgt, "I34", samples=samples, seed=seed)
    expected = {"bounded": "saturating", "unbounded": "growing"}.get(rep.verdict)
    return {"p": p, "q": q, "a1": a1, "a2": a2, "e": (a1 + 1) / q - (a2 + 1) / p,
            "condition": rep.verdict, "empirical": est.verdict, "agree": expected == est.verdict,
            "ratio_by_scale": [r for _, r in est.ratio_by_scale],
            "seconds": round(time.perf_counter() - start, 3)}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=12)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rows = [run(*c, args.samples, args.seed) for c in CONFIGS]
    print(json.dumps({"configs": rows, "mismatches": sum(not r["agree"] for r in rows)}, indent=2))


if __name__ == "__main__":
    main()
