"""Norms, random test inputs, empirical norm ratios and the proof-chain check."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betainc

from .conditions import _num
from .operators import OperatorSpec, s2_apply, s2_logform, stieltjes
from .quadrature import (DEFAULT_GRID, GeometricGrid, TailSpec, cumulative_from_zero,
                         integrate, integrate_T_to_inf)
from .rearrangement import (SampledKernel, StepFunction, double_star, iterated_rearrangement,
                            rearrange)
from .weights import LGSpaceSpec, Weight, WeightedLpSpec, associated_weight_q

SCALES = (1e-3, 1.0, 1e3)
SATURATION_SPREAD = 0.10
GROWTH_FACTOR = 10.0


# --- norms ------------------------------------------------------------------

def _weight_tail(w: Weight, shift: float = 0.0) -> TailSpec:
    return TailSpec(w.a0, None if w.a_inf is None else w.a_inf + shift)


def lg_norm(f: StepFunction, spec: LGSpaceSpec, grid: GeometricGrid = DEFAULT_GRID) -> float:
    """``rho_{p,phi}(f) = (int f**^p phi)^{1/p}``.

    On ``(0, supp f)`` the integrand is smooth between the knots of ``f*``; past
    the support ``f** = total/t`` and the tail is ``total^p int t^{-p} phi``.
    """
    p, phi = spec.p, spec.weight
    fs = rearrange(f)
    if fs.is_zero:
        return 0.0
    S = fs.support
    head = integrate(lambda t: double_star(fs, t) ** p * phi(t), 0.0, S,
                     TailSpec(phi.a0, None), grid, tuple(fs.knots.tolist()))
    tail = integrate_T_to_inf(lambda t: t ** (-p) * phi(t), S, _weight_tail(phi, -p), grid)
    return float((head + fs.total ** p * tail) ** (1.0 / p))


def lg_norm_from_average(average, spec: LGSpaceSpec, grid: GeometricGrid = DEFAULT_GRID,
                         breaks=()) -> float:
    """``(int average(t)^p phi)^{1/p}`` for a callable ``f**`` decaying like ``log(t)/t``."""
    p, phi = spec.p, spec.weight
    val = integrate(lambda t: average(t) ** p * phi(t), 0.0, math.inf,
                    _weight_tail(phi, -p), grid, breaks)
    return float(val ** (1.0 / p))


def weighted_lp_norm(h, spec: WeightedLpSpec, grid: GeometricGrid = DEFAULT_GRID,
                     tail: TailSpec | None = None, breaks=()) -> float:
    """``(int |h|^p w)^{1/p}``; exact block sums for step functions.

    A callable ``h`` needs ``tail``, the exponents of ``|h|`` itself.
    """
    p, w = spec.p, spec.weight
    if isinstance(h, StepFunction):
        if h.is_zero:
            return 0.0
        masses = np.diff(np.concatenate([[0.0], cumulative_from_zero(w, h.knots, TailSpec(w.a0, None),
                                                                     grid)]))
        return float(np.sum(np.abs(h.values) ** p * masses) ** (1.0 / p))
    if tail is None:
        raise ValueError("callable inputs need a TailSpec")
    a0 = w.a0 + p * tail.exponent_at_zero
    ainf = None
    if tail.exponent_at_infinity is not None and w.a_inf is not None:
        ainf = w.a_inf + p * tail.exponent_at_infinity
    val = integrate(lambda t: np.abs(h(t)) ** p * w(t), 0.0, math.inf, TailSpec(a0, ainf),
                    grid, breaks)
    return float(val ** (1.0 / p))


def stieltjes_average(f: StepFunction, t):
    """``(S f)**(t)`` in closed form for a nonnegative step function ``f``.

    Per block ``[a, b)`` of value ``v`` the primitive of ``log1p((b-a)/(r+a))``
    over ``(0, t)`` is ``b log1p(t/b) - a log1p(t/a) + t log1p((b-a)/(t+a))``.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    e = f.edges
    a, b = e[:-1][None, :], e[1:][None, :]
    tt = t[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        la = np.where(a > 0, a * np.log1p(tt / np.where(a > 0, a, 1.0)), 0.0)
    prim = b * np.log1p(tt / b) - la + tt * np.log1p((b - a) / (tt + a))
    return (prim @ f.values) / t


def _f_double_star_prefix(fs: StepFunction, s):
    """``G(s) = int_0^s f**`` for a nonincreasing step ``fs``."""
    s = np.asarray(s, dtype=float)
    e = fs.edges
    cum = fs.cumulative()
    alpha = cum[:-1] - fs.values * e[:-1]
    # G at each edge: block 0 contributes v0 * e1, later blocks alpha*log(b/a) + v*(b-a)
    with np.errstate(divide="ignore", invalid="ignore"):
        blk = np.where(e[:-1] > 0, alpha * np.log(e[1:] / np.where(e[:-1] > 0, e[:-1], 1.0)), 0.0)
    blk = blk + fs.values * np.diff(e)
    G_edge = np.concatenate([[0.0], np.cumsum(blk)])
    k = np.clip(np.searchsorted(e, s, side="right") - 1, 0, len(fs.values))
    out = np.empty(s.shape)
    beyond = k >= len(fs.values)
    S = e[-1]
    out[beyond] = G_edge[-1] + fs.total * np.log(s[beyond] / S)
    kk = k[~beyond]
    ss = s[~beyond]
    a = e[kk]
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.where(a > 0, alpha[kk] * np.log(ss / np.where(a > 0, a, 1.0)), 0.0)
    out[~beyond] = G_edge[kk] + lg + fs.values[kk] * (ss - a)
    return out


def stieltjes_of_average(f: StepFunction, t):
    """``(S f**)(t)`` in closed form; ``f`` is rearranged first."""
    fs = rearrange(f)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if fs.is_zero:
        return np.zeros(t.shape)
    e = fs.edges
    cum = fs.cumulative()
    alpha = cum[:-1] - fs.values * e[:-1]
    a, b = e[:-1][None, :], e[1:][None, :]
    tt = t[:, None]
    # int_a^b (alpha/s + v) / (t + s) ds
    with np.errstate(divide="ignore", invalid="ignore"):
        safe_a = np.where(a > 0, a, 1.0)
        first = np.where(a > 0, alpha[None, :] / tt * np.log1p(tt * (b - a) / (safe_a * (b + tt))),
                         0.0)
    second = fs.values[None, :] * np.log1p((b - a) / (tt + a))
    S = e[-1]
    tail = fs.total / t * np.log1p(t / S)
    return np.sum(first + second, axis=1) + tail


# --- random inputs -----------------------------------------------------------

def random_test_function(seed: int, scale: float = 1.0, knot_count: int = 8) -> StepFunction:
    """Nonincreasing step function with knots log-uniform in ``[scale*1e-4, scale]``.

    The random draws do not depend on ``scale``, so changing it dilates the
    same function.
    """
    if knot_count < 1:
        raise ValueError("knot_count must be at least 1")
    rng = np.random.default_rng(seed)
    u = np.sort(rng.uniform(-4.0, 0.0, knot_count - 1))
    knots = np.unique(np.concatenate([scale * 10.0 ** u, [scale]]))
    steps = rng.exponential(size=len(knots))
    values = np.cumsum(steps)[::-1]
    return StepFunction(knots, values).canonical()


def random_step_function(seed: int, knot_count: int = 10, scale: float = 1.0) -> StepFunction:
    """Nonnegative step function in no particular order; about a tenth of the blocks vanish."""
    rng = np.random.default_rng(seed)
    knots = np.cumsum(rng.exponential(scale / knot_count, size=knot_count)) + 1e-9 * scale
    values = rng.exponential(size=knot_count)
    values[rng.uniform(size=knot_count) < 0.1] = 0.0
    return StepFunction(knots, values)


def random_sampled_kernel(seed: int, shape=(6, 6), scale: float = 1.0) -> SampledKernel:
    rng = np.random.default_rng(seed)
    n, m = shape
    return SampledKernel(rng.exponential(scale / n, size=n) + 1e-9,
                         rng.exponential(scale / m, size=m) + 1e-9,
                         rng.exponential(size=(n, m)))


# --- norm ratios -------------------------------------------------------------

@dataclass
class NormRatioEstimate:
    inequality_id: str
    samples: int
    max_ratio: float
    ratio_by_scale: list
    verdict: str
    witness: dict | None = None

    def to_dict(self):
        return {"inequality_id": self.inequality_id, "samples": self.samples,
                "max_ratio": _num(self.max_ratio),
                "ratio_by_scale": [[_num(s), _num(r)] for s, r in self.ratio_by_scale],
                "verdict": self.verdict, "witness": self.witness}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _output_tail(op: OperatorSpec) -> TailSpec:
    # S h and S^2 h of a bounded compactly supported h: log growth at 0, 1/t at infinity
    return op.output_tail()


def _average(g, t, breaks, grid):
    """``(1/t) int_0^t g`` for a nonnegative callable ``g`` with ``g(0+)`` at most log-singular."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    order = np.argsort(t)
    pts = t[order]
    cap = max(grid.t_max, 10 * max(breaks, default=0.0))
    inside = pts <= cap
    out = np.empty(pts.shape)
    if np.any(inside):
        out[inside] = cumulative_from_zero(g, pts[inside], TailSpec(0.0, None), grid, breaks)
    if not np.all(inside):
        base = cumulative_from_zero(g, [cap], TailSpec(0.0, None), grid, breaks)[0]
        out[~inside] = [base + integrate(g, cap, x, TailSpec(None, None), grid) for x in pts[~inside]]
    res = np.empty(t.shape)
    res[order] = out / pts
    return res


def _op_norm(op: OperatorSpec, h: StepFunction, spec, grid, weight_override=None) -> float:
    """Target norm of ``op h``; LG norms use ``(op h)**`` (``op h`` is nonincreasing)."""
    if op.output_is_step:
        g = op.apply_step(h)
        if isinstance(spec, LGSpaceSpec):
            s = spec if weight_override is None else _LG(spec.p, weight_override)
            return lg_norm(g, s, grid)
        return weighted_lp_norm(g, spec, grid)
    breaks = tuple(h.knots.tolist())
    if h.is_zero:
        return 0.0
    if isinstance(spec, LGSpaceSpec):
        s = spec if weight_override is None else _LG(spec.p, weight_override)
        if op.kind == "stieltjes":
            avg = lambda t: stieltjes_average(h, t)
        else:
            avg = lambda t: _average(lambda x: op.apply(h, x, grid), t, breaks, grid)
        return lg_norm_from_average(avg, s, grid, breaks)
    return weighted_lp_norm(lambda x: op.apply(h, x, grid), spec, grid, _output_tail(op), breaks)


@dataclass(frozen=True)
class _LG:
    """LG norm data without the admissibility check (for ``phi^(q)`` targets)."""

    p: float
    weight: Weight


def _source_norm(f, spec, grid):
    if isinstance(spec, LGSpaceSpec):
        return lg_norm(f, spec, grid)
    return weighted_lp_norm(f, spec, grid)


def norm_ratio(op: OperatorSpec, f: StepFunction, source, target, inequality_id: str = "I11",
               grid: GeometricGrid = DEFAULT_GRID) -> float:
    """One sample of the ratio ``target-norm / source-norm``.

    ``I11`` and ``I34`` compare ``op f`` with ``f``; ``I12`` applies ``op`` to
    ``f*`` and measures ``(op f*)**`` against ``phi_1^(q)``.
    """
    den = _source_norm(f, source, grid)
    if inequality_id == "I12":
        if not isinstance(target, LGSpaceSpec):
            raise ValueError("I12 needs a Lorentz-Gamma target")
        W = associated_weight_q(target.weight, target.p, grid)
        num = _op_norm(op, rearrange(f), target, grid, weight_override=W)
    elif inequality_id in ("I11", "I34"):
        num = _op_norm(op, f, target, grid)
    else:
        raise ValueError(f"unknown inequality id {inequality_id!r}")
    if den == 0:
        return 0.0 if num == 0 else math.inf
    return num / den


def _classify(by_scale):
    r = np.array([v for _, v in by_scale], dtype=float)
    if not np.all(np.isfinite(r)):
        return "growing"
    if np.all(r == 0):
        return "saturating"
    lo, hi = r.min(), r.max()
    if hi <= (1 + SATURATION_SPREAD) * lo:
        return "saturating"
    d = np.diff(r)
    monotone = np.all(d > 0) or np.all(d < 0)
    if lo > 0 and hi / lo > GROWTH_FACTOR and monotone:
        return "growing"
    return "inconclusive"


def estimate_norm_ratio(op: OperatorSpec, source, target, inequality_id: str = "I11",
                        samples: int = 20, grid: GeometricGrid = DEFAULT_GRID, seed: int = 0,
                        scales=SCALES, max_knots: int = 12, family: str = "random",
                        eps: float = 1e-6) -> NormRatioEstimate:
    """Scale sweep of norm ratios over random nonincreasing test functions.

    Sample ``i`` uses the same draw at every scale, so for dilation-covariant
    operators and power weights the per-scale maxima differ exactly by the
    scaling exponent.  ``family="extremal"`` adds the truncated powers
    ``s^{-1/p} 1_[eps, 1/eps]`` (unweighted ``S`` only; see :func:`hilbert_ratio`).
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    seeds = np.random.SeedSequence(seed).generate_state(samples)
    knot_counts = np.random.default_rng(seed).integers(1, max_knots + 1, size=samples)
    by_scale = []
    witness = None
    best = -math.inf
    for scale in scales:
        top = 0.0
        for s, k in zip(seeds, knot_counts):
            f = random_test_function(int(s), scale, int(k))
            with np.errstate(all="ignore"):
                r = norm_ratio(op, f, source, target, inequality_id, grid)
            if not math.isfinite(r):
                r = math.inf
            if r > top:
                top = r
            if r > best:
                best = r
                witness = {"seed": int(s), "scale": scale, "knot_count": int(k)}
        by_scale.append((scale, top))
    if family == "extremal":
        best = max(best, hilbert_ratio(source.p, eps, grid))
    elif family != "random":
        raise ValueError(f"family must be 'random' or 'extremal', got {family!r}")
    return NormRatioEstimate(inequality_id, samples, float(best), by_scale, _classify(by_scale),
                             witness)


def logform_band(samples: int = 200, seed: int = 0, points=None, max_knots: int = 20):
    """``(min, max)`` of ``s2_logform f / S^2 f`` over random nonincreasing ``f`` and points ``t``."""
    t = np.geomspace(1e-7, 1e7, 141) if points is None else np.asarray(points, dtype=float)
    rng = np.random.default_rng(seed)
    lo, hi = math.inf, 0.0
    for _ in range(samples):
        f = random_test_function(int(rng.integers(2**63)), 1.0, int(rng.integers(1, max_knots + 1)))
        r = s2_logform(f, t) / s2_apply(f, t)
        lo, hi = min(lo, float(r.min())), max(hi, float(r.max()))
    return lo, hi


# --- Hilbert extremals ------------------------------------------------------------

def truncated_power(p: float, eps: float):
    """``s^{-1/p}`` on ``[eps, 1/eps]``, zero elsewhere."""
    def f(s):
        s = np.asarray(s, dtype=float)
        return np.where((s >= eps) & (s <= 1 / eps), s ** (-1.0 / p), 0.0)
    return f


def hilbert_ratio(p: float, eps: float = 1e-6, grid: GeometricGrid = DEFAULT_GRID) -> float:
    """``||S f||_p / ||f||_p`` for the truncated power, by the package quadrature."""
    f = truncated_power(p, eps)
    breaks = (eps, 1 / eps)
    Sf = lambda t: stieltjes(f, t, TailSpec(0.0, None), grid, breaks, support=1 / eps)
    num = integrate(lambda t: Sf(t) ** p, 0.0, math.inf, TailSpec(0.0, -p), grid, breaks)
    return float((num / (2 * math.log(1 / eps))) ** (1.0 / p))


def hilbert_ratio_oracle(p: float, eps: float = 1e-6) -> float:
    """Same ratio from ``S f(t) = t^{-1/p} pi/sin(pi c) [I(w2) - I(w1)]``, ``c = 1 - 1/p``.

    ``I`` is the regularised incomplete beta ``I(w; c, 1-c)`` and
    ``w = a/(1+a)`` at the rescaled endpoints ``a = eps/t`` and ``a = 1/(eps t)``.
    """
    from scipy.integrate import IntegrationWarning, quad

    c = 1 - 1 / p
    K = math.pi / math.sin(math.pi * c)

    def g(u):
        t = math.exp(u)
        w2 = 1 / (1 + eps * t)
        w1 = eps / (t + eps)
        return (K * (betainc(c, 1 - c, w2) - betainc(c, 1 - c, w1))) ** p

    L = math.log(eps)
    pieces = [(-80.0, L - 5), (L - 5, -L + 5), (-L + 5, 80.0)]
    with warnings.catch_warnings():
        # quad is pessimistic about roundoff on the flat middle piece
        warnings.simplefilter("ignore", IntegrationWarning)
        val = sum(quad(g, lo, hi, limit=400, epsabs=0, epsrel=1e-10)[0] for lo, hi in pieces)
    return (val / (2 * -L)) ** (1 / p)


# --- proof chain ---------------------------------------------------------------

@dataclass
class ChainReport:
    kernel: str
    p: float
    q: float
    samples: int
    violations: list = field(default_factory=list)
    ratio_mc: list = field(default_factory=list)
    ratio_cd: list = field(default_factory=list)
    max_a_over_b: float = 0.0
    max_b_over_m: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self):
        def band(r):
            r = np.array(r) if r else np.array([0.0])
            return {"min": _num(float(r.min())), "max": _num(float(r.max()))}
        return {"kernel": self.kernel, "p": self.p, "q": self.q, "samples": self.samples,
                "violations": self.violations, "max_a_over_b": _num(self.max_a_over_b),
                "max_b_over_m": _num(self.max_b_over_m), "m_over_c": band(self.ratio_mc),
                "c_over_d": band(self.ratio_cd)}


def _chain_sides(K, f: StepFunction, phi1, phi2, p, q, W, grid):
    """``(a, b, m, c, d)`` of the chain, each computed by its own route."""
    target = _LG(q, phi1)
    assoc = _LG(q, W)
    fs = rearrange(f)
    if K == "stieltjes":
        brk = tuple(fs.knots.tolist())
        a = lg_norm_from_average(lambda t: stieltjes_average(f, t), target, grid, tuple(f.knots))
        b = lg_norm_from_average(lambda t: stieltjes_average(fs, t), target, grid, brk)
        m = lg_norm_from_average(lambda t: stieltjes_average(fs, t), assoc, grid, brk)
        c = integrate(lambda t: stieltjes_of_average(fs, t) ** q * W(t), 0.0, math.inf,
                      TailSpec(W.a0, W.a_inf - q), grid, brk) ** (1 / q)
    else:
        L = iterated_rearrangement(K)
        a = lg_norm(K.apply(f), target, grid)
        b = lg_norm(L.apply(fs), target, grid)
        m = lg_norm(L.apply(fs), assoc, grid)
        G = _f_double_star_prefix(fs, L.y_edges)
        col = L.values @ np.diff(G)
        xe = L.x_edges
        masses = np.diff(np.concatenate([[0.0], cumulative_from_zero(W, xe[1:], TailSpec(W.a0, None),
                                                                     grid)]))
        c = float(np.sum(col ** q * masses) ** (1 / q))
    d = lg_norm(f, _LG(p, phi2), grid)
    return a, b, m, c, d


def verify_theorem_chain(K, phi1: Weight, phi2: Weight, p: float, q: float, samples: int = 100,
                         grid: GeometricGrid = DEFAULT_GRID, seed: int = 0, rtol: float = 1e-8,
                         functions=None) -> ChainReport:
    """Check ``a <= b <= m`` for random ``f`` and record ``m/c`` and ``c/d``.

    With ``L`` the iterated rearrangement of ``K``:

    - ``a = rho_{q,phi1}(T_K f)``
    - ``b = rho_{q,phi1}(T_L f*)``
    - ``m = (int ((T_L f*)**)^q phi1^(q))^{1/q}``, the left side of the reduced inequality
    - ``c = (int (T_L f**)^q phi1^(q))^{1/q}``
    - ``d = rho_{p,phi2}(f)``

    ``a <= b`` is the rearrangement reduction.  ``b <= m`` holds because for
    nonincreasing ``h``, ``int (h**)^q phi = int h (h**)^{q-1} phi^(q)``.
    Both have constant one and a breach is a violation.  The links into ``c``
    and ``d`` hold only up to constants, which are recorded.  ``K`` is a
    :class:`SampledKernel` or ``"stieltjes"`` (``L = 1/(t+s)``).
    """
    W = associated_weight_q(phi1, q, grid)
    name = "1/(t+s)" if isinstance(K, str) else f"sampled{K.shape}"
    if isinstance(K, str) and K != "stieltjes":
        raise ValueError(f"unknown kernel {K!r}")
    rep = ChainReport(name, p, q, samples)
    rng = np.random.default_rng(seed)
    for i in range(samples):
        if functions is not None:
            f = functions[i]
        else:
            f = random_step_function(int(rng.integers(2**63)), int(rng.integers(1, 31)))
        if f.is_zero:
            a = b = m = c = d = 0.0
        else:
            a, b, m, c, d = _chain_sides(K, f, phi1, phi2, p, q, W, grid)
        if b > 0:
            rep.max_a_over_b = max(rep.max_a_over_b, a / b)
        if m > 0:
            rep.max_b_over_m = max(rep.max_b_over_m, b / m)
        if c > 0:
            rep.ratio_mc.append(m / c)
        if d > 0:
            rep.ratio_cd.append(c / d)
        if a > b * (1 + rtol) or b > m * (1 + rtol):
            rep.violations.append({"sample": i, "a": a, "b": b, "m": m, "c": c, "d": d,
                                   "knots": f.knots.tolist(), "values": f.values.tolist()})
    return rep
