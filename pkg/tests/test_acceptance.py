"""The ten acceptance criteria, each at its stated tolerance and time budget.

Every test records one line in the "acceptance criteria" section of the
pytest terminal summary, whether it passes or fails.
"""

import math
import time

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad

from conftest import ACCEPTANCE
from lgt.conditions import corollary_s2_check, neugebauer_check
from lgt.errors import NonIntegrableTail
from lgt.operators import OperatorSpec, s2_exact_kernel
from lgt.quadrature import DEFAULT_GRID
from lgt.rearrangement import SampledKernel, StepFunction, hlp_dominates, rearrange, verify_reduction
from lgt.verification import (estimate_norm_ratio, lg_norm, logform_band, random_sampled_kernel,
                              random_step_function, verify_theorem_chain)
from lgt.weights import (LGSpaceSpec, PowerLogWeight as P, WeightedLpSpec, associated_weight_q,
                         dual_weight)

X = DEFAULT_GRID.nodes


def record(number, name, ok, detail):
    ACCEPTANCE.append((number, name, bool(ok), detail))
    assert ok, detail


def _random_step(rng, max_knots):
    n = int(rng.integers(1, max_knots + 1))
    knots = np.cumsum(rng.exponential(size=n)) * 10.0 ** rng.uniform(-3, 3)
    values = rng.exponential(size=n)
    values[rng.uniform(size=n) < 0.15] = 0.0
    # repeated levels exercise tie handling
    if n > 2:
        values[rng.integers(n)] = values[rng.integers(n)]
    return StepFunction(knots, values)


def test_1_rearrangement_exactness():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    bad = 0
    for _ in range(1000):
        f = _random_step(rng, 30)
        fs = rearrange(f)
        levels = np.unique(np.concatenate([[0.0], f.values]))
        meas_f = np.array([np.sum(f.widths[f.values > lam]) for lam in levels])
        meas_s = np.array([np.sum(fs.widths[fs.values > lam]) for lam in levels])
        # interval lengths are sums of the same widths in another order
        equi = np.allclose(meas_f, meas_s, rtol=1e-13, atol=0)
        mass = math.isclose(fs.total, f.total, rel_tol=1e-13, abs_tol=0)
        if not (equi and mass and rearrange(fs) == fs):
            bad += 1
    elapsed = time.perf_counter() - start
    record(1, "rearrangement exactness", bad == 0 and elapsed < 5,
           f"{bad} failures over 1000 functions in {elapsed:.2f}s (< 5s)")


def test_2_reduction_inequality():
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    bad = 0
    for _ in range(500):
        n, m = rng.integers(1, 21, size=2)
        K = SampledKernel(rng.exponential(size=n), rng.exponential(size=m),
                          rng.exponential(size=(n, m)) * (rng.uniform(size=(n, m)) > 0.2))
        f = _random_step(rng, 50)
        if not verify_reduction(K, f):
            bad += 1
    elapsed = time.perf_counter() - start
    record(2, "reduction inequality", bad == 0 and elapsed < 30,
           f"{bad} violations over 500 pairs in {elapsed:.2f}s (< 30s)")


def test_3_neugebauer_identity():
    worst = 0.0
    cells = []
    skipped = []
    for a in (-0.5, 0.0, 0.7):
        for q in (1.5, 2.0, 3.0):
            u = P(1, a, a)
            if a >= q - 1:
                # u^(q) does not exist: int_t^inf s^-q u diverges
                with pytest.raises(NonIntegrableTail):
                    associated_weight_q(u, q)
                skipped.append((a, q))
                continue
            rep = neugebauer_check(u, associated_weight_q(u, q), q)
            dev = float(np.max(np.abs(rep.conditions[0].values - 1)))
            worst = max(worst, dev)
            cells.append(dev <= 1e-6)
    record(3, "Neugebauer identity", all(cells),
           f"max |B-1| = {worst:.2e} over {len(cells)} cells; (a,q) outside a<q-1: {skipped}")


def test_4_dual_weight_of_lebesgue():
    dev_const, dev_oracle = 0.0, 0.0
    mpmath.mp.dps = 40
    for p in (1.5, 2.0, 3.0):
        psi = dual_weight(P(), p, symbolic=False)(X)
        dev_const = max(dev_const, float(np.max(psi) / np.min(psi) - 1))
        # substitute A = t, B = t^{1-p}/(p-1) into the formula at t = 1
        pm = mpmath.mpf(p)
        pp = pm / (pm - 1)
        A, B = mpmath.mpf(1), 1 / (pm - 1)
        oracle = float(A * B / (A + B) ** (pp + 1))
        dev_oracle = max(dev_oracle, float(np.max(np.abs(psi / oracle - 1))))
    record(4, "dual weight of phi=1", dev_const <= 1e-8 and dev_oracle <= 1e-8,
           f"max relative spread {dev_const:.2e}, max deviation from oracle {dev_oracle:.2e}")


def test_5_hilbert_constant():
    start = time.perf_counter()
    lines, ok = [], True
    for p in (2.0, 4 / 3, 4.0):
        lp = WeightedLpSpec(p, P())
        est = estimate_norm_ratio(OperatorSpec("stieltjes"), lp, lp, samples=10, family="extremal",
                                  eps=1e-6)
        sharp = math.pi / math.sin(math.pi / p)
        inside = 0.9 * sharp <= est.max_ratio <= sharp * (1 + 1e-3)
        ok &= inside
        lines.append(f"p={p:.3g}: {est.max_ratio / sharp:.4f}*sharp")
    elapsed = time.perf_counter() - start
    record(5, "Hilbert/Stieltjes constant", ok and elapsed < 10,
           f"{', '.join(lines)} in {elapsed:.2f}s (< 10s)")


def test_6_s2_kernel():
    pts = np.geomspace(1e-4, 1e4, 20)
    worst = 0.0
    for t in pts:
        for s in pts:
            direct = _double_quad(t, s)
            worst = max(worst, abs(s2_exact_kernel(t, s) / direct - 1))
    mpmath.mp.dps = 50
    spike = 0.0
    t = 1.7
    for k in range(1, 13):
        for sign in (1, -1):
            s = t * (1 + sign * 10.0 ** -k)
            exact = mpmath.log(mpmath.mpf(t) / mpmath.mpf(s)) / (mpmath.mpf(t) - mpmath.mpf(s))
            spike = max(spike, abs(float(s2_exact_kernel(t, s) / exact) - 1))
    record(6, "S^2 kernel", worst <= 1e-6 and spike <= 1e-12,
           f"max rel error vs double quadrature {worst:.2e} on 20x20 grid; "
           f"near-diagonal max rel error {spike:.2e} down to |t-s|/t = 1e-12")


def _double_quad(t, s):
    # int_0^inf dy / ((t+y)(y+s)), split at the larger scale for quad
    f = lambda y: 1 / ((t + y) * (y + s))
    m = max(t, s)
    lo = quad(f, 0, m, epsabs=0, epsrel=1e-12, limit=200)[0]
    hi = quad(lambda u: f(m / u) * m / u ** 2, 0, 1, epsabs=0, epsrel=1e-12, limit=200)[0]
    return lo + hi


def test_7_logform_band():
    c1, c2 = logform_band(samples=300, seed=7)
    record(7, "log-form equivalence", c2 / c1 <= 10,
           f"band [c1, c2] = [{c1:.4f}, {c2:.4f}], c2/c1 = {c2 / c1:.3f} (<= 10)")


def test_8_hlp_norm_monotonicity():
    specs = [LGSpaceSpec(2, P()), LGSpaceSpec(3, P(1, 0.5, 0.5)), LGSpaceSpec(1.5, P(1, -0.5, -0.5)),
             LGSpaceSpec(2, P(1, 0.3, 0.6, 1.0)), LGSpaceSpec(4, P(1, 1.0, 1.0)),
             LGSpaceSpec(1.5, P(1, 0.2, -0.3))]
    rng = np.random.default_rng(8)
    violations = 0
    pairs = 0
    while pairs < 1000:
        f = _random_step(rng, 12)
        if f.is_zero:
            continue
        fs = rearrange(f)
        # concentrate f* by c >= 1 (same mass) and add a nonnegative bump
        c = 10.0 ** rng.uniform(0, 1)
        bump = rng.exponential(size=len(fs.values)) * (rng.uniform() < 0.5)
        g = StepFunction(fs.knots / c, fs.values * c + bump)
        if not hlp_dominates(f, g):
            continue
        pairs += 1
        for spec in specs:
            if lg_norm(f, spec) > lg_norm(g, spec) * (1 + 1e-9):
                violations += 1
    record(8, "HLP + LG-norm monotonicity", violations == 0,
           f"{violations} violations over {pairs} dominating pairs x {len(specs)} specs")


# exponent gap e = (a1+1)/q - (a2+1)/p; bounded iff e = 0
CONCORDANCE = [
    (2, 2, 0.0, 0.0), (2, 2, 0.5, 0.5), (2, 2, -0.5, -0.5), (2, 3, 0.5, 0.0),
    (1.5, 2, 1 / 3, 0.0), (2, 3, 1.25, 0.5),
    (2, 2, 0.5, 0.0), (2, 2, 0.0, 0.5), (2, 3, -0.25, 0.0), (1.5, 2, 0.0, 0.25),
    (2, 2, -0.5, 0.5), (3, 3, 1.5, 0.0),
]


def test_9_condition_empirical_concordance():
    start = time.perf_counter()
    rows, mismatches, bounded, unbounded, excluded = [], 0, 0, 0, 0
    for p, q, a1, a2 in CONCORDANCE:
        e = (a1 + 1) / q - (a2 + 1) / p
        if 0 < abs(e) < 0.05:
            excluded += 1
            continue
        assert e == 0 or abs(e) >= 0.25, (p, q, a1, a2)
        phi1, phi2 = P(1, a1, a1), P(1, a2, a2)
        rep = corollary_s2_check(phi1, phi2, p, q)
        src = WeightedLpSpec(p, dual_weight(phi2, p) ** (1 - p))
        tgt = WeightedLpSpec(q, associated_weight_q(phi1, q))
        est = estimate_norm_ratio(OperatorSpec("s2_exact"), src, tgt, "I34", samples=12, seed=9)
        expected = {"bounded": "saturating", "unbounded": "growing"}.get(rep.verdict)
        if expected != est.verdict:
            mismatches += 1
        bounded += e == 0
        unbounded += e != 0
        rows.append(f"{rep.verdict}/{est.verdict}")
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and bounded >= 6 and unbounded >= 6 and elapsed < 300
    record(9, "condition/empirical concordance", ok,
           f"{len(rows)} configs ({bounded} bounded, {unbounded} unbounded, {excluded} borderline "
           f"excluded), {mismatches} mismatches in {elapsed:.1f}s (< 300s)")


def test_10_theorem_chain():
    p, q = 2.0, 3.0
    lorentz1 = P(1, q / p - 1, q / p - 1)
    configs = [("Lebesgue", P(), P()), ("Lorentz", lorentz1, lorentz1)]
    kernels = [("sampled 12x12", random_sampled_kernel(10, (12, 12))), ("1/(t+s)", "stieltjes")]
    details, total = [], 0
    for wname, phi1, phi2 in configs:
        for kname, K in kernels:
            rep = verify_theorem_chain(K, phi1, phi2, p, q, samples=100, seed=10)
            total += len(rep.violations)
            cd = rep.to_dict()["c_over_d"]
            details.append(f"{wname}/{kname}: {len(rep.violations)} (c/d in "
                           f"[{cd['min']:.3g}, {cd['max']:.3g}])")
    record(10, "theorem chain", total == 0, "; ".join(details))
