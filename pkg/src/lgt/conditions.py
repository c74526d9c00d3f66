"""Decision procedures for weighted inequalities.

A condition function ``c(x)`` is evaluated at every grid node.  "``c <= const``"
is judged from its sup and from the outward log-log slope over the first and
last decade of the grid: power-type divergence shows up as a definite
positive slope long before any magnitude threshold is reached.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import AdmissibilityFailed, GrowthConditionViolated, NonIntegrableTail
from .quadrature import (DEFAULT_GRID, GeometricGrid, TailSpec, cumulative_from_zero,
                         cumulative_to_infinity, quadrature_rule)
from .weights import (PowerLogWeight, Weight, associated_weight_q, check_admissible,
                      dual_weight)

SLOPE_TOL = 0.02
OVERFLOW = 1e12
# relative rise over the boundary decade that marks a slowly (log-) growing function
GROWTH_TOL = 1e-3
_EXP_TOL = 1e-12


@dataclass
class ConditionResult:
    name: str
    sup: float
    argmax_t: float
    slope_lo: float
    slope_hi: float
    values: np.ndarray = field(repr=False, default=None)

    def to_dict(self):
        return {"name": self.name, "sup": _num(self.sup), "argmax_t": _num(self.argmax_t),
                "slope_lo": _num(self.slope_lo), "slope_hi": _num(self.slope_hi)}


@dataclass
class ConditionReport:
    verdict: str
    conditions: list
    params: dict
    diagnostics: dict = field(default_factory=dict)

    @property
    def sup(self) -> float:
        return max((c.sup for c in self.conditions), default=0.0)

    def condition(self, name) -> ConditionResult:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {"verdict": self.verdict,
                "conditions": [c.to_dict() for c in self.conditions],
                "params": self.params,
                "diagnostics": {k: _num(v) for k, v in self.diagnostics.items()}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _num(x):
    """JSON-safe float: non-finite values become strings."""
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


def _decade_slope(x, c, which):
    n_dec = max(2, int(np.sum(x <= x[0] * 10.0)))
    sl = slice(0, n_dec) if which == "lo" else slice(len(x) - n_dec, len(x))
    xs, cs = x[sl], c[sl]
    if np.any(~np.isfinite(cs)):
        return math.inf
    if np.all(cs == 0):
        return 0.0
    if np.any(cs <= 0):
        # a function vanishing on part of the boundary decade cannot diverge there
        return 0.0
    slope = np.polyfit(np.log(xs), np.log(cs), 1)[0]
    return float(-slope if which == "lo" else slope)


def _decade_rise(x, c, which):
    """Relative, monotone rise of ``c`` towards the boundary over the boundary decade."""
    n_dec = max(2, int(np.sum(x <= x[0] * 10.0)))
    cs = c[:n_dec][::-1] if which == "lo" else c[len(x) - n_dec:]
    if not np.all(np.isfinite(cs)) or cs[0] <= 0:
        return 0.0
    if np.any(np.diff(cs) < -1e-14 * np.abs(cs[1:])):
        return 0.0
    return float(cs[-1] / cs[0] - 1.0)


def summarize(name: str, x: np.ndarray, values: np.ndarray) -> ConditionResult:
    values = np.asarray(values, dtype=float)
    if np.any(np.isnan(values)):
        values = np.where(np.isnan(values), np.inf, values)
    i = int(np.argmax(values))
    return ConditionResult(name, float(values[i]), float(x[i]),
                           _decade_slope(x, values, "lo"), _decade_slope(x, values, "hi"),
                           values)


def decide(results, x, slope_tol: float = SLOPE_TOL, overflow: float = OVERFLOW,
           growth_tol: float = GROWTH_TOL) -> str:
    """Verdict from a list of :class:`ConditionResult` on nodes ``x``."""
    for r in results:
        if not math.isfinite(r.sup) or r.sup > overflow:
            return "unbounded"
        if r.slope_lo > slope_tol or r.slope_hi > slope_tol:
            return "unbounded"
    for r in results:
        for which, slope in (("lo", r.slope_lo), ("hi", r.slope_hi)):
            if 0 < slope <= slope_tol and _decade_rise(x, r.values, which) > growth_tol:
                return "inconclusive"
    return "bounded"


def _finite_inf(e, log_power):
    return e < -1 - _EXP_TOL or (abs(e + 1) <= _EXP_TOL and log_power < -1)


def _finite_zero(a):
    return a > -1 + _EXP_TOL


def _from_zero(w: Weight, x, grid, breaks=()):
    """``int_0^x w`` at each node, ``inf`` if not integrable at 0."""
    if not _finite_zero(w.a0):
        return np.full(len(x), np.inf)
    return cumulative_from_zero(w, x, TailSpec(w.a0, None), grid, breaks)


def _to_inf(w: Weight, x, grid, log_power=0.0, breaks=()):
    """``int_x^inf w`` at each node, ``inf`` if not integrable at infinity."""
    if not _finite_inf(w.a_inf, w.log_inf + log_power):
        return np.full(len(x), np.inf)
    return cumulative_to_infinity(w, x, TailSpec(None, w.a_inf), grid, breaks)


def _kernel_from_zero(k: Callable, power: float, w: Weight, x, grid):
    """``int_0^x k(x, y)**power w(y) dy`` per node (``k`` may blow up like a log at 0)."""
    if not _finite_zero(w.a0):
        return np.full(len(x), np.inf)
    out = np.empty(len(x))
    for i, xi in enumerate(x):
        rule = quadrature_rule(0.0, float(xi), TailSpec(w.a0, None), grid)
        kv = k(xi, rule.nodes)
        out[i] = rule.weights @ (np.power(kv, power) * w(rule.nodes))
    return out


def _kernel_to_inf(k: Callable, power: float, w: Weight, x, grid, log_growth: float):
    """``int_x^inf k(y, x)**power w(y) dy`` per node."""
    if not _finite_inf(w.a_inf, w.log_inf + power * log_growth):
        return np.full(len(x), np.inf)
    out = np.empty(len(x))
    for i, xi in enumerate(x):
        rule = quadrature_rule(float(xi), math.inf, TailSpec(None, w.a_inf), grid)
        kv = k(rule.nodes, xi)
        out[i] = rule.weights @ (np.power(kv, power) * w(rule.nodes))
    return out


def _product(a, ea, b, eb):
    """``a**ea * b**eb`` with ``0 * inf = 0``."""
    with np.errstate(invalid="ignore", over="ignore"):
        fa = np.power(a, ea)
        fb = np.power(b, eb)
        out = fa * fb
    return np.where((fa == 0) | (fb == 0), 0.0, out)


def _params(**kw):
    return {k: (str(v) if isinstance(v, Weight) else _num(v)) for k, v in kw.items()}


# --- Neugebauer -------------------------------------------------------------

def neugebauer_check(u: Weight, v: Weight, q: float, grid: GeometricGrid = DEFAULT_GRID,
                     tol: float = 1e-6) -> ConditionReport:
    """``int_0^t u + t^q int_t^inf s^{-q} u <= int_0^t v`` for all ``t``.

    ``B(t)`` is the ratio of the two sides; the verdict is ``bounded`` iff
    ``sup B <= 1 + tol`` (the inequality with constant one).  The raw sup is
    reported so callers can accept other constants.
    """
    if not q > 1:
        raise ValueError("q must exceed 1")
    x = grid.nodes
    tail_w = u.times_power(-q)
    if not _finite_inf(tail_w.a_inf, tail_w.log_inf):
        raise NonIntegrableTail(f"int_t^inf s^-q u(s) ds diverges for u={u}, q={q:g}")
    num = _from_zero(u, x, grid) + x ** q * _to_inf(tail_w, x, grid)
    den = _from_zero(v, x, grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        B = num / den
    res = summarize("B", x, B)
    if res.sup <= 1 + tol:
        verdict = "bounded"
    else:
        verdict = "unbounded"
    return ConditionReport(verdict, [res], _params(check="neugebauer", q=q, u=u, v=v, tol=tol),
                           {"sup_minus_one": res.sup - 1.0})


# --- Bloom-Kerman -----------------------------------------------------------

@dataclass(frozen=True)
class HardyKernel:
    """``K(x, y)`` on ``y < x``; ``log_growth`` is its power of ``log`` growth."""

    func: Callable
    log_growth: float = 0.0
    name: str = "K"
    vanishes: bool = False

    def __call__(self, x, y):
        return np.asarray(self.func(np.asarray(x, dtype=float), np.asarray(y, dtype=float)),
                          dtype=float)


def named_kernel(name: str) -> HardyKernel:
    if name == "one":
        return HardyKernel(lambda x, y: np.ones(np.broadcast(x, y).shape), 0.0, "one")
    if name == "zero":
        return HardyKernel(lambda x, y: np.zeros(np.broadcast(x, y).shape), 0.0, "zero", True)
    if name == "log":
        return HardyKernel(lambda x, y: np.log(x / y), 1.0, "log")
    raise ValueError(f"unknown kernel {name!r}; expected one, zero or log")


def estimate_growth_constant(kernel: HardyKernel, grid: GeometricGrid = DEFAULT_GRID,
                             samples: int = 10_000, seed: int = 0):
    """Largest sampled ``K(x,y) / (K(x,z) + K(z,y))`` over ``y < z < x``; returns ``(D, witness)``."""
    rng = np.random.default_rng(seed)
    lo, hi = math.log(grid.t_min), math.log(grid.t_max)
    pts = np.sort(rng.uniform(lo, hi, size=(samples, 3)), axis=1)
    y, z, x = np.exp(pts[:, 0]), np.exp(pts[:, 1]), np.exp(pts[:, 2])
    num = kernel(x, y)
    den = kernel(x, z) + kernel(z, y)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(num == 0, 0.0, num / den)
    i = int(np.argmax(ratio))
    return float(ratio[i]), (float(y[i]), float(z[i]), float(x[i]))


def bloom_kerman_check(kernel: HardyKernel, t: Weight, u: Weight, v: Weight, w: Weight,
                       p: float, q: float, grid: GeometricGrid = DEFAULT_GRID,
                       form: str = "standard", max_growth: float = 1e3,
                       growth_samples: int = 10_000) -> ConditionReport:
    """Two conditions for ``(int (w(x) int_0^x K f)^q t)^{1/q} <= C (int (u f)^p v)^{1/p}``.

    ``form="standard"``::

        BK-1(x) = (int_0^x K(x,y)^{p'} u^{-p'} v^{1-p'})^{1/p'} (int_x^inf w^q t)^{1/q}
        BK-2(x) = (int_0^x u^{-p'} v^{1-p'})^{1/p'} (int_x^inf K(y,x)^q w^q t)^{1/q}

    ``form="printed"`` drops the kernel powers and uses ``w^{-q} t^{1-q}``.
    """
    if not 1 < p <= q:
        raise ValueError("need 1 < p <= q")
    D, witness = estimate_growth_constant(kernel, grid, growth_samples)
    if not D <= max_growth:
        raise GrowthConditionViolated(
            f"kernel {kernel.name} fails K(x,y) <= D[K(x,z)+K(z,y)] (sampled D={D:.3g})", witness)
    pp = p / (p - 1)
    x = grid.nodes
    sigma = u ** (-pp) * v ** (1 - pp)
    if form == "standard":
        right = w ** q * t
        k1, k2 = pp, q
    elif form == "printed":
        right = w ** (-q) * t ** (1 - q)
        k1 = k2 = 1.0
    else:
        raise ValueError(f"form must be 'standard' or 'printed', got {form!r}")
    lg = kernel.log_growth
    if kernel.vanishes:
        zero = np.zeros(len(x))
        results = [summarize("BK-1", x, zero), summarize("BK-2", x, zero)]
        return ConditionReport("bounded", results,
                               _params(check="bloom-kerman", kernel=kernel.name, p=p, q=q,
                                       t=t, u=u, v=v, w=w, form=form),
                               {"growth_constant": D})
    bk1 = _product(_kernel_from_zero(kernel, k1, sigma, x, grid), 1 / pp,
                   _to_inf(right, x, grid), 1 / q)
    bk2 = _product(_from_zero(sigma, x, grid), 1 / pp,
                   _kernel_to_inf(kernel, k2, right, x, grid, lg), 1 / q)
    results = [summarize("BK-1", x, bk1), summarize("BK-2", x, bk2)]
    return ConditionReport(decide(results, x), results,
                           _params(check="bloom-kerman", kernel=kernel.name, p=p, q=q,
                                   t=t, u=u, v=v, w=w, form=form),
                           {"growth_constant": D})


# --- Corollary for S^2 ------------------------------------------------------

def _log_ratio(x, y):
    return np.log(x / y)


def s2_conditions(W: Weight, sigma: Weight, p: float, q: float,
                  grid: GeometricGrid = DEFAULT_GRID, form: str = "standard"):
    """The four condition functions for ``S^2: L^p(sigma^{1-p}) -> L^q(W)``.

    ``sigma`` is the dual-side weight (``psi_2``) and ``W`` the target weight
    (``phi_1^(q)``).  Returns four :class:`ConditionResult` named C1..C4.
    """
    pp = p / (p - 1)
    x = grid.nodes
    if form == "standard":
        Wq = W.times_power(-q)
        sq = sigma.times_power(-pp)
        c1 = _product(_kernel_from_zero(_log_ratio, pp, sigma, x, grid), 1 / pp,
                      _to_inf(Wq, x, grid), 1 / q)
        c2 = _product(_from_zero(sigma, x, grid), 1 / pp,
                      _kernel_to_inf(_log_ratio, q, Wq, x, grid, 1.0), 1 / q)
        c3 = _product(_kernel_from_zero(_log_ratio, q, W, x, grid), 1 / q,
                      _to_inf(sq, x, grid), 1 / pp)
        c4 = _product(_from_zero(W, x, grid), 1 / q,
                      _kernel_to_inf(_log_ratio, pp, sq, x, grid, 1.0), 1 / pp)
    elif form == "printed":
        Wd = W ** (1 - q)
        c1 = _product(_kernel_from_zero(_log_ratio, 1.0, sigma, x, grid), 1 / pp,
                      _to_inf(Wd, x, grid), 1 / q)
        c2 = _product(_from_zero(sigma, x, grid), 1 / pp,
                      _kernel_to_inf(_log_ratio, 1.0, Wd, x, grid, 1.0), 1 / q)
        c3 = _product(_kernel_from_zero(_log_ratio, 1.0, Wd, x, grid), 1 / q,
                      _to_inf(sigma, x, grid), 1 / pp)
        c4 = _product(_from_zero(Wd, x, grid), 1 / q,
                      _kernel_to_inf(_log_ratio, 1.0, sigma, x, grid, 1.0), 1 / pp)
    else:
        raise ValueError(f"form must be 'standard' or 'printed', got {form!r}")
    return [summarize(n, x, c) for n, c in (("C1", c1), ("C2", c2), ("C3", c3), ("C4", c4))]


def corollary_s2_check(phi1: Weight, phi2: Weight, p: float, q: float,
                       grid: GeometricGrid = DEFAULT_GRID, form: str = "standard") -> ConditionReport:
    """Is ``(int (S^2 g)^q phi1^(q))^{1/q} <~ (int g^p psi2^{1-p})^{1/p}``?"""
    if not 1 < p <= q:
        raise ValueError("need 1 < p <= q")
    try:
        W = associated_weight_q(phi1, q, grid)
    except NonIntegrableTail as exc:
        raise AdmissibilityFailed(f"phi1^(q) undefined: {exc}") from exc
    if not check_admissible(W, q):
        raise AdmissibilityFailed(f"phi1^(q) = {W} violates the admissibility hypotheses for q={q:g}")
    if not check_admissible(phi2, p):
        raise AdmissibilityFailed(f"phi2 = {phi2} violates the admissibility hypotheses for p={p:g}")
    sigma = dual_weight(phi2, p, grid)
    results = s2_conditions(W, sigma, p, q, grid, form)
    x = grid.nodes
    sups = {r.name: r.sup for r in results}
    diag = {}
    if sups["C4"] > 0 and sups["C3"] > 0:
        diag["sup_C1_over_C4"] = sups["C1"] / sups["C4"]
        diag["sup_C2_over_C3"] = sups["C2"] / sups["C3"]
    exponent = None
    if isinstance(phi1, PowerLogWeight) and isinstance(phi2, PowerLogWeight) \
            and phi1.is_pure_power and phi2.is_pure_power:
        exponent = (phi1.a0 + 1) / q - (phi2.a0 + 1) / p
        diag["scaling_exponent"] = exponent
    return ConditionReport(decide(results, x), results,
                           _params(check="s2-corollary", p=p, q=q, phi1=phi1, phi2=phi2,
                                   form=form), diag)
