"""Step functions, their nonincreasing rearrangement, and iterated kernel rearrangement.

All objects here are piecewise constant with finite support, so rearranging
is a sort and every prefix integral is piecewise linear.  Nothing in this
module does quadrature except the optional monotonicity spot check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .quadrature import DEFAULT_GRID, GeometricGrid, TailSpec

_MERGE_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class StepFunction:
    """``f = values[i]`` on ``[knots[i-1], knots[i])`` with ``knots[-1] = 0``; zero beyond the last knot."""

    knots: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        k = np.array(self.knots, dtype=float).ravel()
        v = np.array(self.values, dtype=float).ravel()
        if k.shape != v.shape:
            raise ValueError(f"{len(k)} knots but {len(v)} values")
        if len(k) and (k[0] <= 0 or np.any(np.diff(k) <= 0) or not np.all(np.isfinite(k))):
            raise ValueError("knots must be positive, finite and strictly increasing")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("values must be finite and nonnegative")
        k.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "knots", k)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_blocks(cls, widths, values) -> "StepFunction":
        w = np.asarray(widths, dtype=float)
        keep = w > 0
        return cls(np.cumsum(w[keep]), np.asarray(values, dtype=float)[keep])

    @classmethod
    def zero(cls) -> "StepFunction":
        return cls(np.empty(0), np.empty(0))

    @property
    def edges(self) -> np.ndarray:
        return np.concatenate([[0.0], self.knots])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def support(self) -> float:
        return float(self.knots[-1]) if len(self.knots) else 0.0

    @property
    def total(self) -> float:
        return float(self.widths @ self.values)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.values > 0)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.knots, t, side="right")
        padded = np.concatenate([self.values, [0.0]])
        return padded[idx]

    def cumulative(self) -> np.ndarray:
        """``int_0^{e} f`` at every edge (length ``len(knots) + 1``)."""
        return np.concatenate([[0.0], np.cumsum(self.widths * self.values)])

    def prefix(self, t):
        """``int_0^t f`` (exact, piecewise linear)."""
        t = np.asarray(t, dtype=float)
        if not len(self.knots):
            return np.zeros_like(t)
        return np.interp(t, self.edges, self.cumulative(), right=self.total)

    def integral(self, a, b):
        return self.prefix(b) - self.prefix(a)

    def scaled(self, c: float) -> "StepFunction":
        return StepFunction(self.knots, c * self.values)

    def dilated(self, lam: float) -> "StepFunction":
        """``x -> f(x / lam)``."""
        return StepFunction(lam * self.knots, self.values)

    def canonical(self) -> "StepFunction":
        """Merge equal neighbours and drop trailing zero blocks."""
        if not len(self.knots):
            return self
        v = self.values
        last = np.flatnonzero(v > 0)
        if not len(last):
            return StepFunction.zero()
        n = last[-1] + 1
        v = v[:n]
        k = self.knots[:n]
        keep = np.concatenate([v[1:] != v[:-1], [True]])
        return StepFunction(k[keep], v[keep])

    def __eq__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        return (np.array_equal(self.knots, other.knots)
                and np.array_equal(self.values, other.values))

    def __repr__(self):
        return f"StepFunction(knots={self.knots.tolist()}, values={self.values.tolist()})"


def rearrange(f: StepFunction) -> StepFunction:
    """Nonincreasing rearrangement ``f*``; a stable sort of the blocks by value."""
    if np.all(np.diff(f.values) <= 0):
        # already nonincreasing: keep the knots bit-for-bit
        return f.canonical()
    w, v = f.widths, f.values
    keep = v > 0
    w, v = w[keep], v[keep]
    order = np.argsort(-v, kind="stable")
    return StepFunction.from_blocks(w[order], v[order]).canonical()


def star_prefix(f: StepFunction, t):
    """``int_0^t f*``."""
    return rearrange(f).prefix(t)


def double_star(f: StepFunction, t):
    """Level average ``f**(t) = t^{-1} int_0^t f*``; exact for ``t > 0``."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("f** is defined for t > 0")
    fs = rearrange(f)
    out = fs.prefix(t) / t
    # inside the first block the average is exactly the first value
    if len(fs.knots):
        out = np.where(t <= fs.knots[0], fs.values[0], out)
    return out


def hlp_dominates(f: StepFunction, g: StepFunction, grid: GeometricGrid = DEFAULT_GRID,
                  rtol: float = 1e-12) -> bool:
    """True iff ``int_0^t f* <= int_0^t g*`` for every ``t > 0``.

    Both sides are piecewise linear with kinks at the knots of ``f*`` and
    ``g*``, so comparing there (and at the grid nodes) is exact.
    """
    fs, gs = rearrange(f), rearrange(g)
    pts = np.unique(np.concatenate([fs.knots, gs.knots, grid.nodes]))
    F, G = fs.prefix(pts), gs.prefix(pts)
    return bool(np.all(F <= G + rtol * np.abs(G)))


@dataclass(frozen=True, eq=False)
class SampledKernel:
    """Piecewise-constant ``K(x, y)`` on a product of cells laid out from 0."""

    x_measures: np.ndarray
    y_measures: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        xm = np.array(self.x_measures, dtype=float).ravel()
        ym = np.array(self.y_measures, dtype=float).ravel()
        v = np.array(self.values, dtype=float).reshape(len(xm), len(ym))
        if np.any(xm <= 0) or np.any(ym <= 0):
            raise ValueError("cell measures must be positive")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("kernel values must be finite and nonnegative")
        for name, arr in (("x_measures", xm), ("y_measures", ym), ("values", v)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def shape(self):
        return self.values.shape

    @property
    def x_edges(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.x_measures)])

    @property
    def y_edges(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.y_measures)])

    def __call__(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        i = np.searchsorted(self.x_edges, x, side="right") - 1
        j = np.searchsorted(self.y_edges, y, side="right") - 1
        inside = (i >= 0) & (i < self.shape[0]) & (j >= 0) & (j < self.shape[1])
        out = np.zeros(x.shape)
        out[inside] = self.values[i[inside], j[inside]]
        return out

    def cell_averages(self, f: StepFunction) -> np.ndarray:
        """Mean of ``f`` over each y-cell."""
        e = self.y_edges
        return np.maximum(np.diff(f.prefix(e)), 0.0) / self.y_measures

    def apply(self, f: StepFunction) -> StepFunction:
        """``(T_K f)(x) = int K(x, y) f(y) dy`` as a step function on the x-cells."""
        mass = np.maximum(np.diff(f.prefix(self.y_edges)), 0.0)
        return StepFunction(np.cumsum(self.x_measures), self.values @ mass)


def _merge_edges(edges: np.ndarray) -> np.ndarray:
    e = np.unique(edges)
    keep = np.concatenate([[True], np.diff(e) > _MERGE_RTOL * np.maximum(e[1:], 1.0)])
    return e[keep]


def _rearrange_rows(values: np.ndarray, measures: np.ndarray):
    """Rearrange each row of ``values`` (cells of size ``measures``) onto a common partition."""
    order = np.argsort(-values, axis=1, kind="stable")
    sorted_vals = np.take_along_axis(values, order, axis=1)
    cum = np.cumsum(measures[order], axis=1)
    edges = _merge_edges(np.concatenate([[0.0], cum.ravel()]))
    edges[-1] = cum[0, -1]
    mid = 0.5 * (edges[:-1] + edges[1:])
    out = np.empty((values.shape[0], len(mid)))
    for i in range(values.shape[0]):
        idx = np.minimum(np.searchsorted(cum[i], mid, side="right"), values.shape[1] - 1)
        out[i] = sorted_vals[i, idx]
    return out, np.diff(edges)


def _compress(values, x_meas, y_meas):
    """Merge adjacent identical rows/columns."""
    keep_r = np.concatenate([[True], np.any(values[1:] != values[:-1], axis=1)])
    grp = np.cumsum(keep_r) - 1
    x_new = np.bincount(grp, weights=x_meas)
    values = values[keep_r]
    keep_c = np.concatenate([[True], np.any(values[:, 1:] != values[:, :-1], axis=0)])
    grp = np.cumsum(keep_c) - 1
    y_new = np.bincount(grp, weights=y_meas)
    return values[:, keep_c], x_new, y_new


def iterated_rearrangement(K: SampledKernel) -> SampledKernel:
    """``L = (K^{*2})^{*1}``: rearrange each row in y, then each column in x.

    Stage one puts every row on the common refinement of the row
    rearrangements so that stage two sees, for each s-cell, a well-defined
    function of x.  The result is nonincreasing along rows and columns.
    """
    rows, s_meas = _rearrange_rows(K.values, K.y_measures)
    cols, t_meas = _rearrange_rows(rows.T, K.x_measures)
    L, t_meas, s_meas = _compress(cols.T, t_meas, s_meas)
    return SampledKernel(t_meas, s_meas, L)


def is_monotone_kernel(K: SampledKernel) -> bool:
    v = K.values
    return bool(np.all(np.diff(v, axis=0) <= 0) and np.all(np.diff(v, axis=1) <= 0))


def verify_reduction(K: SampledKernel, f: StepFunction, grid: GeometricGrid = DEFAULT_GRID,
                     rtol: float = 1e-9) -> bool:
    """Check ``int_0^t (T_K f)* <= int_0^t T_L f*`` at every kink and grid node."""
    lhs_fn = rearrange(K.apply(f))
    L = iterated_rearrangement(K)
    rhs_fn = L.apply(rearrange(f))
    pts = np.unique(np.concatenate([lhs_fn.knots, rhs_fn.knots, grid.nodes]))
    lhs = lhs_fn.prefix(pts)
    rhs = rhs_fn.prefix(pts)
    return bool(np.all(lhs <= rhs * (1 + rtol) + 1e-300))


@dataclass(frozen=True, eq=False)
class IteratedKernel:
    """A kernel ``L(t, s)`` already in iterated-rearranged form.

    ``y_tail`` declares the power behaviour of ``s -> L(t, s)`` (used for
    integrals over the second variable); ``y_support`` truncates it.
    ``m_exact``, when given, is a closed form of ``int L(t, y) / (s + y) dy``.
    """

    evaluator: Callable
    monotone_certified: bool = False
    y_tail: TailSpec = TailSpec(0.0, None)
    y_support: float | None = None
    y_breaks: tuple = ()
    t_breaks: tuple = ()
    m_exact: Callable | None = field(default=None, repr=False)
    name: str = "L"

    def __post_init__(self):
        if self.monotone_certified and not self.spot_check_monotone():
            raise ValueError(f"kernel {self.name} is not nonincreasing in each variable")

    def __call__(self, t, s):
        t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
        return np.asarray(self.evaluator(t, s), dtype=float)

    def spot_check_monotone(self, grid: GeometricGrid = DEFAULT_GRID, stride: int = 16) -> bool:
        x = grid.nodes[::stride]
        if self.y_support is not None:
            x = np.union1d(x, np.asarray(self.y_breaks, dtype=float))
        T, S = np.meshgrid(x, x, indexing="ij")
        V = self(T, S)
        tol = 1e-12 * np.abs(V)
        return bool(np.all(np.diff(V, axis=0) <= tol[1:]) and np.all(np.diff(V, axis=1) <= tol[:, 1:]))

    @classmethod
    def from_sampled(cls, L: SampledKernel, name: str = "L") -> "IteratedKernel":
        xe, ye = L.x_edges, L.y_edges
        vals = L.values

        def m_exact(t, s):
            t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
            i = np.searchsorted(xe, t.ravel(), side="right") - 1
            inside = i < len(L.x_measures)
            rows = np.zeros((t.size, len(L.y_measures)))
            rows[inside] = vals[i[inside]]
            logs = np.log1p(L.y_measures[None, :] / (s.ravel()[:, None] + ye[None, :-1]))
            return np.sum(rows * logs, axis=1).reshape(t.shape)

        return cls(L, monotone_certified=is_monotone_kernel(L), y_tail=TailSpec(0.0, None),
                   y_support=float(ye[-1]), y_breaks=tuple(ye[1:].tolist()),
                   t_breaks=tuple(xe[1:].tolist()), m_exact=m_exact, name=name)
