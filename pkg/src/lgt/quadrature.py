"""Log-uniform grids and quadrature on the half line.

Every integral in the toolkit is a finite sum ``sum(w_k * f(x_k))`` over a
:class:`QuadratureRule`.  Finite pieces use Gauss-Legendre cells in log
coordinates; the pieces next to 0 and to infinity use Gauss-Laguerre in the
variable ``u = (a + 1) * log(c / s)`` (resp. ``u = -(b + 1) * log(s / c)``),
which integrates ``C * s**a * poly(log s)`` exactly.  The caller declares the
exponents ``a`` and ``b``; nothing is inferred from samples.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Iterable

import numpy as np
from numpy.polynomial.laguerre import laggauss
from numpy.polynomial.legendre import leggauss

from .errors import NonFinite, NonIntegrableAtInfinity, NonIntegrableAtZero, UnknownTail

LAGUERRE_POINTS = 24

# below this distance from -1 the Laguerre map is too stretched to trust
_EXPONENT_MARGIN = 1e-12


@dataclass(frozen=True)
class GeometricGrid:
    """Log-uniform nodes ``t_min = x_0 < ... < x_N = t_max``."""

    t_min: float = 1e-8
    t_max: float = 1e8
    points_per_decade: int = 32
    order: int = 8

    def __post_init__(self):
        if not (0 < self.t_min < self.t_max and math.isfinite(self.t_max)):
            raise ValueError(f"need 0 < t_min < t_max < inf, got {self.t_min}, {self.t_max}")
        if int(self.points_per_decade) != self.points_per_decade or self.points_per_decade < 1:
            raise ValueError("points_per_decade must be a positive integer")
        if self.order < 1:
            raise ValueError("order must be >= 1")

    @property
    def n_cells(self) -> int:
        decades = math.log10(self.t_max / self.t_min)
        return max(1, int(round(decades * self.points_per_decade)))

    @property
    def log_ratio(self) -> float:
        return math.log(self.t_max / self.t_min) / self.n_cells

    @property
    def ratio(self) -> float:
        return math.exp(self.log_ratio)

    @cached_property
    def nodes(self) -> np.ndarray:
        k = np.arange(self.n_cells + 1)
        x = self.t_min * np.exp(k * self.log_ratio)
        x[0], x[-1] = self.t_min, self.t_max
        x.setflags(write=False)
        return x

    def __len__(self):
        return self.n_cells + 1

    @classmethod
    def from_string(cls, text: str) -> "GeometricGrid":
        """Parse ``"t_min,t_max,points_per_decade"``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"grid spec must be 't_min,t_max,points_per_decade', got {text!r}")
        return cls(float(parts[0]), float(parts[1]), int(parts[2]))

    @classmethod
    def from_env(cls, var: str = "LGT_GRID") -> "GeometricGrid":
        text = os.environ.get(var)
        return cls.from_string(text) if text else cls()


DEFAULT_GRID = GeometricGrid()


@dataclass(frozen=True)
class TailSpec:
    """Declared power behaviour of an integrand: ~ t**a at 0, ~ t**b at infinity."""

    exponent_at_zero: float | None = None
    exponent_at_infinity: float | None = None

    def require_zero(self) -> float:
        a = self.exponent_at_zero
        if a is None:
            raise UnknownTail("exponent at zero not declared")
        if not a > -1 + _EXPONENT_MARGIN:
            raise NonIntegrableAtZero(f"integrand ~ t^{a} is not integrable at 0")
        return float(a)

    def require_infinity(self) -> float:
        b = self.exponent_at_infinity
        if b is None:
            raise UnknownTail("exponent at infinity not declared")
        if not b < -1 - _EXPONENT_MARGIN:
            raise NonIntegrableAtInfinity(f"integrand ~ t^{b} is not integrable at infinity")
        return float(b)


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    # index of the sub-interval (between consecutive ``edges``) each node falls in
    cell_index: np.ndarray = field(repr=False, default=None)

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(self.weights @ _evaluate(f, self.nodes))

    def __len__(self):
        return len(self.nodes)


def _evaluate(f, x):
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        y = np.asarray(f(x), dtype=float)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape)
    bad = ~np.isfinite(y)
    if bad.any():
        raise NonFinite(f"integrand is not finite at t={x[bad][0]:.6g}")
    return y


def _gauss_log_cells(edges: np.ndarray, order: int):
    """Gauss-Legendre nodes/weights on each cell [e_i, e_{i+1}] in log coordinates."""
    xg, wg = leggauss(order)
    lo = np.log(edges[:-1])[:, None]
    hi = np.log(edges[1:])[:, None]
    half = 0.5 * (hi - lo)
    u = lo + half * (xg[None, :] + 1.0)
    s = np.exp(u)
    w = half * wg[None, :] * s
    idx = np.repeat(np.arange(len(edges) - 1), order)
    return s.ravel(), w.ravel(), idx


def _laguerre_zero(c: float, a: float):
    x, w = laggauss(LAGUERRE_POINTS)
    alpha = a + 1.0
    log_s = math.log(c) - x / alpha
    log_w = alpha * math.log(c) - math.log(alpha) + np.log(w) - a * log_s
    s = np.exp(log_s)
    wt = np.exp(log_w)
    keep = (s > 0) & np.isfinite(wt)
    return s[keep], wt[keep]


def _laguerre_infinity(c: float, b: float):
    x, w = laggauss(LAGUERRE_POINTS)
    beta = -(b + 1.0)
    log_s = math.log(c) + x / beta
    log_w = (b + 1.0) * math.log(c) - math.log(beta) + np.log(w) - b * log_s
    keep = log_s < 700.0
    return np.exp(log_s[keep]), np.exp(log_w[keep])


def _edges(lo: float, hi: float, grid: GeometricGrid, breaks: tuple) -> np.ndarray:
    r = grid.log_ratio
    k0 = math.ceil(math.log(lo / grid.t_min) / r + 1e-9)
    k1 = math.floor(math.log(hi / grid.t_min) / r - 1e-9)
    inner = grid.t_min * np.exp(r * np.arange(k0, k1 + 1)) if k1 >= k0 else np.empty(0)
    br = np.array([b for b in breaks if lo < b < hi], dtype=float)
    pts = np.unique(np.concatenate([[lo], inner, br, [hi]]))
    # merge points closer than roundoff so no cell is degenerate
    keep = np.concatenate([[True], np.diff(np.log(pts)) > 1e-12])
    pts = pts[keep]
    pts[-1] = hi
    return pts


@lru_cache(maxsize=4096)
def _build_rule(lo, hi, grid, a0, b_inf, breaks):
    pos_breaks = [b for b in breaks if b > 0 and math.isfinite(b)]
    finite_marks = [b for b in pos_breaks + [lo, hi] if 0 < b < math.inf]
    lo_cut = lo
    hi_cut = hi
    if lo == 0:
        lo_cut = min([grid.t_min] + [0.1 * b for b in finite_marks])
    if hi == math.inf:
        hi_cut = max([grid.t_max] + [10.0 * b for b in finite_marks])
    edges = _edges(lo_cut, hi_cut, grid, breaks)
    nodes, weights, idx = _gauss_log_cells(edges, grid.order)
    parts_n, parts_w, parts_i = [nodes], [weights], [idx]
    if lo == 0:
        s, w = _laguerre_zero(lo_cut, a0)
        parts_n.insert(0, s)
        parts_w.insert(0, w)
        parts_i.insert(0, np.full(len(s), -1))
    if hi == math.inf:
        s, w = _laguerre_infinity(hi_cut, b_inf)
        parts_n.append(s)
        parts_w.append(w)
        parts_i.append(np.full(len(s), len(edges) - 1))
    n = np.concatenate(parts_n)
    w = np.concatenate(parts_w)
    i = np.concatenate(parts_i)
    for arr in (n, w, i):
        arr.setflags(write=False)
    return QuadratureRule(n, w, i), edges


def quadrature_rule(lo: float, hi: float, tail: TailSpec = TailSpec(),
                    grid: GeometricGrid = DEFAULT_GRID,
                    breaks: Iterable[float] = ()) -> QuadratureRule:
    """Rule integrating over ``(lo, hi)`` with ``0 <= lo < hi <= inf``.

    ``breaks`` are points where the integrand may be non-smooth; they become
    cell edges.  The tail exponents of ``tail`` are only consulted for the
    ends that are 0 or infinite.
    """
    lo = float(lo)
    hi = float(hi)
    if not (0 <= lo < hi):
        raise ValueError(f"need 0 <= lo < hi, got ({lo}, {hi})")
    a0 = tail.require_zero() if lo == 0 else None
    b = tail.require_infinity() if hi == math.inf else None
    key = tuple(sorted({float(x) for x in breaks if lo < x < hi}))
    return _build_rule(lo, hi, grid, a0, b, key)[0]


def integrate(f, lo, hi, tail: TailSpec = TailSpec(), grid: GeometricGrid = DEFAULT_GRID,
              breaks: Iterable[float] = ()) -> float:
    """Integral of a vectorised ``f`` over ``(lo, hi)``."""
    if hi <= lo:
        return 0.0
    return quadrature_rule(lo, hi, tail, grid, breaks).integrate(f)


def integrate_0_to_T(f, T: float, tail0: TailSpec, grid: GeometricGrid = DEFAULT_GRID,
                     breaks: Iterable[float] = ()) -> float:
    if not T > 0:
        raise ValueError("T must be positive")
    return integrate(f, 0.0, T, tail0, grid, breaks)


def integrate_T_to_inf(f, T: float, tail_inf: TailSpec, grid: GeometricGrid = DEFAULT_GRID,
                       breaks: Iterable[float] = ()) -> float:
    """Integral over ``(T, inf)``; ``T = 0`` uses ``tail_inf.exponent_at_zero`` (0 if undeclared)."""
    if T < 0:
        raise ValueError("T must be nonnegative")
    if T == 0 and tail_inf.exponent_at_zero is None:
        tail_inf = TailSpec(0.0, tail_inf.exponent_at_infinity)
    return integrate(f, float(T), math.inf, tail_inf, grid, breaks)


def integrate_log_kernel(f, t: float, mode: str, tail: TailSpec = TailSpec(0.0, None),
                         grid: GeometricGrid = DEFAULT_GRID, breaks: Iterable[float] = ()) -> float:
    """The two logarithmic averages of ``f`` at ``t``.

    ``inner``: ``(1/t) * int_0^t f(s) log(t/s) ds``
    ``outer``: ``int_t^inf f(s) log(s/t) ds / s``

    ``tail`` describes ``f`` itself; the log factor only adds a polynomial in
    the Laguerre variable, which the end rules integrate exactly.
    """
    t = float(t)
    if not t > 0:
        raise ValueError("t must be positive")
    if mode == "inner":
        return integrate(lambda s: f(s) * np.log(t / s), 0.0, t,
                         TailSpec(tail.exponent_at_zero, None), grid, breaks) / t
    if mode == "outer":
        b = tail.exponent_at_infinity
        return integrate(lambda s: f(s) * np.log(s / t) / s, t, math.inf,
                         TailSpec(None, None if b is None else b - 1.0), grid, breaks)
    raise ValueError(f"mode must be 'inner' or 'outer', got {mode!r}")


def cumulative_from_zero(f, points, tail: TailSpec, grid: GeometricGrid = DEFAULT_GRID,
                         breaks: Iterable[float] = ()) -> np.ndarray:
    """``int_0^{x_i} f`` for every point of the increasing array ``points``."""
    x = np.asarray(points, dtype=float)
    rule, edges = _cumulative_rule(0.0, float(x[-1]), tail, grid, x, breaks)
    contrib = rule.weights * _evaluate(f, rule.nodes)
    per_cell = np.bincount(rule.cell_index + 1, weights=contrib, minlength=len(edges) + 1)
    cum = np.cumsum(per_cell)
    # cum[k] = integral up to edges[k]
    return cum[_edge_index(edges, x)]


def cumulative_to_infinity(f, points, tail: TailSpec, grid: GeometricGrid = DEFAULT_GRID,
                           breaks: Iterable[float] = ()) -> np.ndarray:
    """``int_{x_i}^inf f`` for every point of the increasing array ``points``."""
    x = np.asarray(points, dtype=float)
    rule, edges = _cumulative_rule(float(x[0]), math.inf, tail, grid, x, breaks)
    contrib = rule.weights * _evaluate(f, rule.nodes)
    per_cell = np.bincount(rule.cell_index, weights=contrib, minlength=len(edges))
    rev = np.cumsum(per_cell[::-1])[::-1]
    # rev[k] = integral from edges[k] to infinity
    return rev[_edge_index(edges, x)]


def _edge_index(edges, x):
    idx = np.searchsorted(edges, x)
    idx = np.minimum(idx, len(edges) - 1)
    prev = np.maximum(idx - 1, 0)
    snap = (idx > 0) & (np.abs(x / edges[prev] - 1.0) < 1e-11)
    return np.where(snap, prev, idx)


def _cumulative_rule(lo, hi, tail, grid, points, breaks):
    a0 = tail.require_zero() if lo == 0 else None
    b = tail.require_infinity() if hi == math.inf else None
    key = tuple(sorted({float(v) for v in np.concatenate([points, list(breaks)]) if lo < v < hi}))
    return _build_rule(lo, hi, grid, a0, b, key)
