"""Weights on the half line, admissibility, associated weights and dual weights."""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import AdmissibilityFailed, NonIntegrableTail, UnknownTail, WeightSyntaxError
from .quadrature import (DEFAULT_GRID, GeometricGrid, TailSpec, cumulative_from_zero,
                         cumulative_to_infinity)

_EXP_TOL = 1e-12


class Weight:
    """Positive function on ``(0, inf)`` with declared power tails.

    Subclasses provide ``__call__`` and the attributes ``a0`` (exponent at 0),
    ``a_inf`` (exponent at infinity) and ``log_inf`` (power of ``log t`` at
    infinity).
    """

    a0: float | None
    a_inf: float | None
    log_inf: float = 0.0

    @property
    def tail(self) -> TailSpec:
        return TailSpec(self.a0, self.a_inf)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return self._scaled(float(other))
        if not isinstance(other, Weight):
            return NotImplemented
        return FunctionWeight(lambda t, f=self, g=other: f(t) * g(t),
                              _add(self.a0, other.a0), _add(self.a_inf, other.a_inf),
                              self.log_inf + other.log_inf, label=f"({self})*({other})")

    __rmul__ = __mul__

    def __pow__(self, r: float):
        r = float(r)
        return FunctionWeight(lambda t, f=self: f(t) ** r, _mul(self.a0, r), _mul(self.a_inf, r),
                              self.log_inf * r, label=f"({self})^{r:g}")

    def times_power(self, e: float) -> "Weight":
        """``t -> t**e * w(t)``."""
        return self * PowerLogWeight(1.0, e, e, 0.0)

    def _scaled(self, c: float):
        return FunctionWeight(lambda t, f=self: c * f(t), self.a0, self.a_inf, self.log_inf,
                              label=f"{c:g}*({self})")


def _add(a, b):
    return None if a is None or b is None else a + b


def _mul(a, r):
    return None if a is None else a * r


@dataclass(frozen=True, eq=True)
class PowerLogWeight(Weight):
    """``C * t**a0 * (1 + t)**(a_inf - a0) * log(e + t)**log_power``."""

    C: float = 1.0
    a0: float = 0.0
    a_inf: float = 0.0
    log_power: float = 0.0

    def __post_init__(self):
        if not (self.C > 0 and math.isfinite(self.C)):
            raise ValueError("C must be positive and finite")

    @property
    def log_inf(self) -> float:
        return self.log_power

    @property
    def is_pure_power(self) -> bool:
        return self.a0 == self.a_inf and self.log_power == 0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            lg = (math.log(self.C) + self.a0 * np.log(t) + (self.a_inf - self.a0) * np.log1p(t))
            if self.log_power:
                lg = lg + self.log_power * np.log(np.log(math.e + t))
        return np.exp(lg)

    def __mul__(self, other):
        if isinstance(other, PowerLogWeight):
            return PowerLogWeight(self.C * other.C, self.a0 + other.a0, self.a_inf + other.a_inf,
                                  self.log_power + other.log_power)
        return super().__mul__(other)

    __rmul__ = __mul__

    def __pow__(self, r):
        r = float(r)
        return PowerLogWeight(self.C ** r, self.a0 * r, self.a_inf * r, self.log_power * r)

    def _scaled(self, c):
        return PowerLogWeight(self.C * c, self.a0, self.a_inf, self.log_power)

    def __str__(self):
        return f"pow(a0={self.a0:g},ainf={self.a_inf:g},log={self.log_power:g},C={self.C:g})"


@dataclass(frozen=True, eq=False)
class FunctionWeight(Weight):
    """Any vectorised positive callable together with its tail exponents."""

    func: object
    a0: float | None
    a_inf: float | None
    log_inf: float = 0.0
    label: str = "func"

    def __call__(self, t):
        return np.asarray(self.func(np.asarray(t, dtype=float)), dtype=float)

    def __str__(self):
        return self.label


@dataclass(frozen=True, eq=False)
class TabulatedWeight(Weight):
    """Weight known at nodes; cubic spline in log-log between them, power tails outside."""

    nodes: np.ndarray
    values: np.ndarray
    a0: float | None
    a_inf: float | None
    log_inf: float = 0.0
    label: str = "table"
    _spline: CubicSpline = field(init=False, repr=False)

    def __post_init__(self):
        x = np.asarray(self.nodes, dtype=float)
        y = np.asarray(self.values, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or len(x) < 2:
            raise ValueError("need matching 1-D arrays with at least two nodes")
        if np.any(np.diff(x) <= 0) or x[0] <= 0:
            raise ValueError("nodes must be positive and strictly increasing")
        if np.any(y <= 0) or not np.all(np.isfinite(y)):
            raise ValueError("tabulated weight values must be positive and finite")
        object.__setattr__(self, "nodes", x)
        object.__setattr__(self, "values", y)
        object.__setattr__(self, "_spline", CubicSpline(np.log(x), np.log(y)))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        lt = np.log(t)
        lx0, lx1 = math.log(self.nodes[0]), math.log(self.nodes[-1])
        inside = np.clip(lt, lx0, lx1)
        out = self._spline(inside)
        lo = lt < lx0
        hi = lt > lx1
        if np.any(lo):
            if self.a0 is None:
                raise UnknownTail(f"{self.label}: evaluation below the table needs a0")
            out = np.where(lo, math.log(self.values[0]) + self.a0 * (lt - lx0), out)
        if np.any(hi):
            if self.a_inf is None:
                raise UnknownTail(f"{self.label}: evaluation above the table needs ainf")
            out = np.where(hi, math.log(self.values[-1]) + self.a_inf * (lt - lx1), out)
        return np.exp(out)

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class LGSpaceSpec:
    """Index ``p`` and weight of a Lorentz-Gamma norm."""

    p: float
    weight: Weight

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError("p must exceed 1")
        if not check_admissible(self.weight, self.p):
            raise AdmissibilityFailed(f"weight {self.weight} is not admissible for p={self.p:g}")


@dataclass(frozen=True)
class WeightedLpSpec:
    """``(int |h|^p weight)^(1/p)``."""

    p: float
    weight: Weight

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError("p must exceed 1")


def _tails(w: Weight):
    if w.a0 is None or w.a_inf is None:
        raise UnknownTail(f"weight {w} needs declared exponents a0 and ainf")
    return float(w.a0), float(w.a_inf), float(w.log_inf)


def _finite_at_infinity(e: float, c: float) -> bool:
    """Is ``int^inf t**e log(t)**c`` finite?"""
    return e < -1 - _EXP_TOL or (abs(e + 1) <= _EXP_TOL and c < -1)


def check_admissible(w: Weight, p: float) -> bool:
    """``int w/(1+t^p) < inf`` and ``int w = inf``, decided from the tail exponents."""
    if not p > 1:
        raise ValueError("p must exceed 1")
    a0, ainf, c = _tails(w)
    first = a0 > -1 + _EXP_TOL and _finite_at_infinity(ainf - p, c)
    second = not _finite_at_infinity(ainf, c)
    return bool(first and second)


def admissibility_detail(w: Weight, p: float) -> dict:
    a0, ainf, c = _tails(w)
    return {
        "integrable_at_zero": a0 > -1 + _EXP_TOL,
        "integrable_against_t^-p": _finite_at_infinity(ainf - p, c),
        "total_integral_infinite": not _finite_at_infinity(ainf, c),
    }


def associated_weight_q(w: Weight, q: float, grid: GeometricGrid = DEFAULT_GRID) -> Weight:
    """``w^(q)(t) = q t^{q-1} int_t^inf s^{-q} w(s) ds``."""
    if not q > 1:
        raise ValueError("q must exceed 1")
    a0, ainf, c = _tails(w)
    if not _finite_at_infinity(ainf - q, c):
        raise NonIntegrableTail(f"int_t^inf s^-q w(s) ds diverges for w={w}, q={q:g}")
    if isinstance(w, PowerLogWeight) and w.is_pure_power:
        return PowerLogWeight(w.C * q / (q - 1 - ainf), ainf, ainf, 0.0)
    x = grid.nodes
    tail = cumulative_to_infinity(w.times_power(-q), x, TailSpec(None, ainf - q), grid)
    vals = q * x ** (q - 1) * tail
    return TabulatedWeight(x, vals, min(a0, q - 1), ainf, c, label=f"assoc_q{q:g}({w})")


def _dual_exponents(a0: float, ainf: float, p: float) -> tuple[float, float]:
    """Power calculus for the dual-weight formula at both ends."""
    pp = p / (p - 1)
    # near 0
    eA = a0 + 1
    eB = a0 - p + 1 if a0 < p - 1 else 0.0
    den = min(eA, p + eB)
    e0 = pp + p - 1 + eA + eB - (pp + 1) * den
    # near infinity
    eA = ainf + 1 if ainf > -1 else 0.0
    eB = ainf - p + 1
    den = max(eA, p + eB)
    einf = pp + p - 1 + eA + eB - (pp + 1) * den
    return e0, einf


def dual_weight(w: Weight, p: float, grid: GeometricGrid = DEFAULT_GRID,
                symbolic: bool = True) -> Weight:
    """Weight ``psi`` with the Kothe dual of ``rho_{p,w}`` equivalent to ``rho_{p',psi}``.

    ``psi = t^{p'+p-1} A B / (A + t^p B)^{p'+1}`` where ``A = int_0^t w`` and
    ``B = int_t^inf s^{-p} w``; ``p' = p/(p-1)``.  Pure powers get a closed
    form unless ``symbolic=False``; everything else is tabulated on ``grid``.
    """
    if not check_admissible(w, p):
        raise AdmissibilityFailed(f"weight {w} is not admissible for p={p:g}")
    pp = p / (p - 1)
    a0, ainf, c = _tails(w)
    if symbolic and isinstance(w, PowerLogWeight) and w.is_pure_power:
        a = a0
        D = (a + 1) * (p - 1 - a)
        C = w.C ** (1 - pp) * D ** pp / p ** (pp + 1)
        return PowerLogWeight(C, -a / (p - 1), -a / (p - 1), 0.0)
    x = grid.nodes
    A = cumulative_from_zero(w, x, TailSpec(a0, None), grid)
    B = cumulative_to_infinity(w.times_power(-p), x, TailSpec(None, ainf - p), grid)
    lx = np.log(x)
    log_psi = ((pp + p - 1) * lx + np.log(A) + np.log(B)
               - (pp + 1) * np.log(A + np.exp(p * lx) * B))
    e0, einf = _dual_exponents(a0, ainf, p)
    return TabulatedWeight(x, np.exp(log_psi), e0, einf, 0.0,
                           label=f"dual_p{p:g}({w})")


_LITERAL = re.compile(r"^\s*(\w+)\s*\((.*)\)\s*$")


def parse_weight(text: str, base_dir: str | Path | None = None) -> Weight:
    """Parse ``pow(a0=..,ainf=..,log=..,C=..)`` or ``table(file=..,a0=..,ainf=..)``.

    Table files are CSV with header ``t,w``.
    """
    m = _LITERAL.match(text)
    if not m:
        raise WeightSyntaxError(f"cannot parse weight literal {text!r}")
    kind, body = m.group(1), m.group(2)
    args = {}
    for part in filter(None, (s.strip() for s in body.split(","))):
        if "=" not in part:
            raise WeightSyntaxError(f"expected key=value in {text!r}, got {part!r}")
        k, v = (s.strip() for s in part.split("=", 1))
        args[k] = v
    try:
        if kind == "pow":
            unknown = set(args) - {"a0", "ainf", "log", "C"}
            if unknown:
                raise WeightSyntaxError(f"unknown pow() keys {sorted(unknown)}")
            return PowerLogWeight(float(args.get("C", 1)), float(args.get("a0", 0)),
                                  float(args.get("ainf", 0)), float(args.get("log", 0)))
        if kind == "table":
            if "file" not in args:
                raise WeightSyntaxError("table() needs file=")
            path = Path(args["file"])
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            t, w = read_weight_table(path)
            a0 = float(args["a0"]) if "a0" in args else None
            ainf = float(args["ainf"]) if "ainf" in args else None
            return TabulatedWeight(t, w, a0, ainf, float(args.get("log", 0)), label=text.strip())
    except ValueError as exc:
        if isinstance(exc, WeightSyntaxError):
            raise
        raise WeightSyntaxError(f"bad number in {text!r}: {exc}") from exc
    raise WeightSyntaxError(f"unknown weight kind {kind!r}")


def read_weight_table(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [h.strip() for h in reader.fieldnames] != ["t", "w"]:
            raise WeightSyntaxError(f"{path}: header must be 't,w'")
        rows = [(float(r["t"]), float(r["w"])) for r in reader]
    arr = np.array(rows, dtype=float).reshape(-1, 2)
    return arr[:, 0], arr[:, 1]
