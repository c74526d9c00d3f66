"""Integral operators: T_K, T_L, the Stieltjes transform S, T_L S and S^2.

Step-function inputs get closed forms wherever one exists (``S``, ``S^2`` via
the dilogarithm, the two log averages, ``T_L`` for sampled ``L``); other
inputs go through the quadrature rules of :mod:`lgt.quadrature`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import spence

from .quadrature import (DEFAULT_GRID, GeometricGrid, TailSpec, cumulative_from_zero,
                         cumulative_to_infinity, integrate_log_kernel, quadrature_rule)
from .rearrangement import IteratedKernel, SampledKernel, StepFunction

# |u| below this uses the series of atanh(u)/u
_SERIES_CUTOFF = 1e-3


def apply_TK(K: SampledKernel, f: StepFunction) -> StepFunction:
    """``(T_K f)(x) = int K(x, y) f(y) dy`` by exact block summation."""
    return K.apply(f)


def s2_exact_kernel(t, s):
    """Kernel of ``S^2``: ``int dy / ((t+y)(y+s)) = log(t/s) / (t - s)``.

    Written as ``2 atanh(u) / (u (t+s))`` with ``u = (t-s)/(t+s)`` so the
    diagonal is evaluated without cancellation.
    """
    t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
    u = (t - s) / (t + s)
    au = np.abs(u)
    out = np.empty(t.shape)
    small = au < _SERIES_CUTOFF
    u2 = u[small] ** 2
    out[small] = 2.0 * (1 + u2 / 3 + u2 ** 2 / 5 + u2 ** 3 / 7) / (t[small] + s[small])
    mid = ~small & (au <= 0.5)
    out[mid] = 2.0 * np.arctanh(u[mid]) / (u[mid] * (t[mid] + s[mid]))
    far = au > 0.5
    out[far] = (np.log(t[far]) - np.log(s[far])) / (t[far] - s[far])
    return out if out.ndim else float(out)


def _as_rule_input(h, tail, support):
    if isinstance(h, StepFunction):
        return h, TailSpec(0.0, -2.0), h.support, tuple(h.knots.tolist())
    if tail is None:
        raise ValueError("callable inputs need a TailSpec")
    return h, tail, support, ()


def stieltjes(f, t, tail: TailSpec | None = None, grid: GeometricGrid = DEFAULT_GRID,
              breaks=(), support: float | None = None):
    """``(S f)(t) = int_0^inf f(s) / (t + s) ds``, vectorised over ``t``.

    Step functions use the antiderivative ``log(t + s)`` per block; any other
    callable needs ``tail`` (its own exponents) and goes through quadrature.
    """
    t_arr = np.asarray(t, dtype=float)
    if isinstance(f, StepFunction):
        e = f.edges
        tt = t_arr.reshape(-1, 1)
        blocks = np.log1p(f.widths[None, :] / (tt + e[None, :-1]))
        out = (blocks @ f.values).reshape(t_arr.shape)
        return out if out.ndim else float(out)
    if tail is None:
        raise ValueError("callable inputs need a TailSpec")
    hi = math.inf if support is None else float(support)
    rule_tail = TailSpec(tail.exponent_at_zero,
                         None if tail.exponent_at_infinity is None else tail.exponent_at_infinity - 1)
    rule = quadrature_rule(0.0, hi, rule_tail, grid, breaks)
    fx = f(rule.nodes) * rule.weights
    tt = t_arr.reshape(-1)
    out = np.empty(tt.shape)
    for start in range(0, len(tt), 256):
        chunk = tt[start:start + 256]
        out[start:start + 256] = (1.0 / (chunk[:, None] + rule.nodes[None, :])) @ fx
    out = out.reshape(t_arr.shape)
    return out if out.ndim else float(out)


def stieltjes_kernel() -> IteratedKernel:
    """``L(t, s) = 1/(t + s)``, for which ``T_L S = S^2``."""
    return IteratedKernel(lambda t, s: 1.0 / (t + s), monotone_certified=True,
                          y_tail=TailSpec(0.0, -1.0), m_exact=s2_exact_kernel, name="1/(t+s)")


def constant_kernel(c: float = 1.0, support: float = 1.0) -> IteratedKernel:
    """``L = c`` on ``[0, support)^2``, zero elsewhere."""
    return IteratedKernel.from_sampled(SampledKernel([support], [support], [[c]]), name=f"{c:g}*1")


def _l_tail(L: IteratedKernel) -> TailSpec:
    if L.y_support is not None:
        return TailSpec(L.y_tail.exponent_at_zero, -2.0)
    return L.y_tail


def _l_hi(L: IteratedKernel) -> float:
    return math.inf if L.y_support is None else float(L.y_support)


def m_kernel(L: IteratedKernel, t: float, s, mode: str = "exact",
             grid: GeometricGrid = DEFAULT_GRID):
    """Kernel of ``T_L S``: ``M(t, s) = int L(t, y) / (s + y) dy``.

    ``mode="split"`` returns the two-sided equivalent
    ``(1/s) int_0^s L(t, y) dy + int_s^inf L(t, y) dy / y``, which satisfies
    ``M <= split <= 2 M``.
    """
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    t = float(t)
    lt = _l_tail(L)
    if mode == "exact":
        if L.m_exact is not None:
            out = np.asarray(L.m_exact(np.full(s_arr.shape, t), s_arr), dtype=float)
        else:
            b = None if lt.exponent_at_infinity is None else lt.exponent_at_infinity - 1
            rule = quadrature_rule(0.0, _l_hi(L), TailSpec(lt.exponent_at_zero, b), grid,
                                   L.y_breaks)
            ly = L(t, rule.nodes) * rule.weights
            out = (1.0 / (s_arr[:, None] + rule.nodes[None, :])) @ ly
    elif mode == "split":
        order = np.argsort(s_arr)
        pts = s_arr[order]
        a0 = lt.exponent_at_zero
        b = lt.exponent_at_infinity
        inner = cumulative_from_zero(lambda y: L(t, y), pts, TailSpec(a0, None), grid, L.y_breaks)
        outer = cumulative_to_infinity(lambda y: L(t, y) / y, pts,
                                       TailSpec(None, None if b is None else b - 1), grid,
                                       L.y_breaks)
        out = np.empty(s_arr.shape)
        out[order] = inner / pts + outer
    else:
        raise ValueError(f"mode must be 'exact' or 'split', got {mode!r}")
    return out if np.ndim(s) else float(out[0])


def apply_TL(L: IteratedKernel, h, t, tail: TailSpec | None = None,
             grid: GeometricGrid = DEFAULT_GRID):
    """``(T_L h)(t) = int L(t, s) h(s) ds``."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if isinstance(h, StepFunction) and isinstance(L.evaluator, SampledKernel):
        K = L.evaluator
        mass = np.diff(h.prefix(K.y_edges))
        col = K.values @ mass
        out = StepFunction(np.cumsum(K.x_measures), col)(t_arr)
    else:
        h, htail, hsupp, hbreaks = _as_rule_input(h, tail, None)
        hi = min(_l_hi(L), math.inf if hsupp is None else hsupp)
        lt = _l_tail(L)
        a0 = lt.exponent_at_zero + htail.exponent_at_zero
        b = None
        if hi == math.inf:
            b = lt.exponent_at_infinity + htail.exponent_at_infinity
        rule = quadrature_rule(0.0, hi, TailSpec(a0, b), grid, L.y_breaks + hbreaks)
        hv = h(rule.nodes) * rule.weights
        out = np.array([L(tt, rule.nodes) @ hv for tt in t_arr])
    return out if np.ndim(t) else float(out[0])


def apply_TLS(L: IteratedKernel, h: StepFunction, t, route: str = "kernel",
              grid: GeometricGrid = DEFAULT_GRID):
    """``(T_L S h)(t)`` in either order of integration.

    ``route="kernel"``: ``int h(y) M(t, y) dy``.
    ``route="stieltjes"``: ``int L(t, s) (S h)(s) ds``.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if h.is_zero:
        out = np.zeros(t_arr.shape)
        return out if np.ndim(t) else 0.0
    if route == "kernel":
        rule = quadrature_rule(0.0, h.support, TailSpec(0.0, None), grid,
                               tuple(h.knots.tolist()) + L.y_breaks)
        hv = h(rule.nodes) * rule.weights
        out = np.array([m_kernel(L, tt, rule.nodes, "exact", grid) @ hv for tt in t_arr])
    elif route == "stieltjes":
        lt = _l_tail(L)
        hi = _l_hi(L)
        b = None if hi < math.inf else lt.exponent_at_infinity - 1.0
        rule = quadrature_rule(0.0, hi, TailSpec(lt.exponent_at_zero, b), grid,
                               tuple(h.knots.tolist()) + L.y_breaks)
        sh = stieltjes(h, rule.nodes) * rule.weights
        out = np.array([L(tt, rule.nodes) @ sh for tt in t_arr])
    else:
        raise ValueError(f"route must be 'kernel' or 'stieltjes', got {route!r}")
    return out if np.ndim(t) else float(out[0])


def s2_apply(f: StepFunction, t):
    """``(S^2 f)(t) = int f(s) log(t/s)/(t-s) ds`` exactly, via ``spence``.

    On a block ``[a, b)`` the integral is ``spence(a/t) - spence(b/t)``.
    """
    t_arr = np.asarray(t, dtype=float)
    tt = t_arr.reshape(-1, 1)
    e = f.edges
    F = spence(e[None, :] / tt)
    out = ((F[:, :-1] - F[:, 1:]) @ f.values).reshape(t_arr.shape)
    return out if out.ndim else float(out)


def log_terms(f: StepFunction, t):
    """``(inner, outer)`` log averages of a step function, in closed form.

    inner ``= (1/t) int_0^t f(s) log(t/s) ds``, outer ``= int_t^inf f(s) log(s/t) ds/s``.
    """
    t_arr = np.asarray(t, dtype=float)
    tt = t_arr.reshape(-1, 1)
    a = f.edges[None, :-1]
    b = f.edges[None, 1:]
    v = f.values[None, :]
    # antiderivative of log(t/s)/t is (s/t)(1 + log(t/s))
    lo = np.minimum(a, tt)
    hi = np.minimum(b, tt)
    with np.errstate(divide="ignore", invalid="ignore"):
        g_hi = np.where(hi > 0, (hi / tt) * (1 + np.log(tt / hi)), 0.0)
        g_lo = np.where(lo > 0, (lo / tt) * (1 + np.log(tt / lo)), 0.0)
    inner = np.sum(v * (g_hi - g_lo), axis=1)
    lo = np.maximum(a, tt)
    hi = np.maximum(b, tt)
    outer = np.sum(v * 0.5 * (np.log(hi / tt) ** 2 - np.log(lo / tt) ** 2), axis=1)
    inner = inner.reshape(t_arr.shape)
    outer = outer.reshape(t_arr.shape)
    if not inner.ndim:
        return float(inner), float(outer)
    return inner, outer


def s2_logform(f, t, tail: TailSpec | None = None, grid: GeometricGrid = DEFAULT_GRID):
    """``(1/t) int_0^t f log(t/s) ds + int_t^inf f log(s/t) ds/s``.

    Equivalent to ``S^2 f`` up to two-sided constants for nonincreasing ``f``.
    """
    if isinstance(f, StepFunction):
        inner, outer = log_terms(f, t)
        return inner + outer
    if tail is None:
        raise ValueError("callable inputs need a TailSpec")
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.array([integrate_log_kernel(f, tt, "inner", tail, grid)
                    + integrate_log_kernel(f, tt, "outer", tail, grid) for tt in t_arr])
    return out if np.ndim(t) else float(out[0])


@dataclass(frozen=True)
class OperatorSpec:
    """One of: ``sampled_kernel``, ``iterated``, ``stieltjes``, ``s2_exact``,
    ``s2_logform``, ``composed``.
    """

    kind: str
    kernel: object = None

    KINDS = ("sampled_kernel", "iterated", "stieltjes", "s2_exact", "s2_logform", "composed")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")
        needs = {"sampled_kernel": SampledKernel, "iterated": IteratedKernel,
                 "composed": IteratedKernel}
        if self.kind in needs and not isinstance(self.kernel, needs[self.kind]):
            raise ValueError(f"{self.kind} operator needs a {needs[self.kind].__name__}")

    @classmethod
    def zero(cls):
        return cls("sampled_kernel", SampledKernel([1.0], [1.0], [[0.0]]))

    @property
    def label(self) -> str:
        if self.kind in ("iterated", "composed"):
            return f"{self.kind}({self.kernel.name})"
        return self.kind

    @property
    def output_is_step(self) -> bool:
        return self.kind == "sampled_kernel"

    def output_tail(self) -> TailSpec:
        """Power behaviour of ``(op h)(x)`` for compactly supported ``h``."""
        if self.kind in ("stieltjes", "s2_exact", "s2_logform"):
            return TailSpec(0.0, -1.0)
        if self.kind in ("iterated", "composed"):
            return TailSpec(0.0, -1.0 if self.kernel.y_support is None else None)
        return TailSpec(0.0, None)

    def apply(self, h: StepFunction, x, grid: GeometricGrid = DEFAULT_GRID):
        if self.kind == "sampled_kernel":
            return self.kernel.apply(h)(x)
        if self.kind == "stieltjes":
            return stieltjes(h, x)
        if self.kind == "s2_exact":
            return s2_apply(h, x)
        if self.kind == "s2_logform":
            return s2_logform(h, x)
        if self.kind == "iterated":
            return apply_TL(self.kernel, h, x, grid=grid)
        return apply_TLS(self.kernel, h, x, route="stieltjes", grid=grid)

    def apply_step(self, h: StepFunction) -> StepFunction:
        if self.kind != "sampled_kernel":
            raise TypeError("only sampled kernels map step functions to step functions")
        return self.kernel.apply(h)
