import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lgt.errors import NonIntegrableAtInfinity, NonIntegrableAtZero, UnknownTail
from lgt.quadrature import (DEFAULT_GRID, GeometricGrid, TailSpec, cumulative_from_zero,
                            cumulative_to_infinity, integrate, integrate_0_to_T,
                            integrate_log_kernel, integrate_T_to_inf, quadrature_rule)


def test_default_grid_shape():
    g = DEFAULT_GRID
    assert len(g) == 513
    assert g.nodes[0] == 1e-8 and g.nodes[-1] == 1e8
    assert np.allclose(np.diff(np.log(g.nodes)), g.log_ratio)


def test_grid_rejects_bad_bounds():
    with pytest.raises(ValueError):
        GeometricGrid(1.0, 0.5)
    with pytest.raises(ValueError):
        GeometricGrid(1e-3, 1e3, 0)


def test_grid_from_string_and_env(monkeypatch):
    g = GeometricGrid.from_string("1e-4, 1e4, 8")
    assert (g.t_min, g.t_max, g.points_per_decade) == (1e-4, 1e4, 8)
    monkeypatch.setenv("LGT_GRID", "1e-2,1e2,4")
    assert len(GeometricGrid.from_env()) == 17
    monkeypatch.delenv("LGT_GRID")
    assert GeometricGrid.from_env() == GeometricGrid()
    with pytest.raises(ValueError):
        GeometricGrid.from_string("1,2")


def test_power_from_zero_exact():
    # int_0^1 t^{-1/2} dt = 2
    val = integrate_0_to_T(lambda t: t ** -0.5, 1.0, TailSpec(-0.5, None))
    assert val == pytest.approx(2.0, rel=1e-12)


def test_power_to_infinity_exact():
    val = integrate_T_to_inf(lambda t: t ** -2.0, 1.0, TailSpec(None, -2.0))
    assert val == pytest.approx(1.0, rel=1e-12)


def test_whole_line_rational():
    # int_0^inf dt / (1+t)^2 = 1
    val = integrate(lambda t: 1 / (1 + t) ** 2, 0.0, math.inf, TailSpec(0.0, -2.0))
    assert val == pytest.approx(1.0, rel=1e-12)


def test_log_power_tail():
    # int_1^inf t^-2 log(t)^2 dt = 2
    val = integrate_T_to_inf(lambda t: np.log(t) ** 2 / t ** 2, 1.0, TailSpec(None, -2.0))
    assert val == pytest.approx(2.0, rel=1e-10)


def test_far_tail_beyond_grid():
    val = integrate_T_to_inf(lambda t: t ** -1.5, 1e10, TailSpec(None, -1.5))
    assert val == pytest.approx(2 * 1e10 ** -0.5, rel=1e-12)


def test_divergent_tails_raise():
    with pytest.raises(NonIntegrableAtZero):
        integrate_0_to_T(lambda t: 1 / t, 1.0, TailSpec(-1.0, None))
    with pytest.raises(NonIntegrableAtInfinity):
        integrate_T_to_inf(lambda t: 1 / t, 1.0, TailSpec(None, -1.0))
    with pytest.raises(UnknownTail):
        integrate(lambda t: t, 0.0, 1.0, TailSpec())


def test_log_kernel_examples():
    # inner with f = 1: (1/t) int_0^t log(t/s) ds = 1
    assert integrate_log_kernel(lambda s: np.ones_like(s), 2.0, "inner") == pytest.approx(1.0, rel=1e-12)
    # outer with f = s^-2 at t = 1: int_1^inf s^-3 log s ds = 1/4
    val = integrate_log_kernel(lambda s: s ** -2.0, 1.0, "outer", TailSpec(0.0, -2.0))
    assert val == pytest.approx(0.25, rel=1e-10)


def test_breaks_make_step_integrands_exact():
    f = lambda t: np.where(t < 0.3, 2.0, np.where(t < 7.0, 0.5, 0.0))
    val = integrate(f, 0.0, 10.0, TailSpec(0.0, None), breaks=(0.3, 7.0))
    assert val == pytest.approx(2 * 0.3 + 0.5 * 6.7, rel=1e-13)


def test_cumulative_matches_pointwise():
    pts = np.geomspace(1e-3, 1e3, 13)
    cum = cumulative_from_zero(lambda t: t ** 0.5, pts, TailSpec(0.5, None))
    assert np.allclose(cum, pts ** 1.5 / 1.5, rtol=1e-12)
    rev = cumulative_to_infinity(lambda t: t ** -3.0, pts, TailSpec(None, -3.0))
    assert np.allclose(rev, pts ** -2 / 2, rtol=1e-12)


@given(a=st.floats(-0.9, 3.0), T=st.floats(1e-5, 1e5))
def test_power_integrals_property(a, T):
    val = integrate_0_to_T(lambda t: t ** a, T, TailSpec(a, None))
    assert val == pytest.approx(T ** (a + 1) / (a + 1), rel=1e-10)


@given(b=st.floats(-4.0, -1.1), T=st.floats(1e-5, 1e5))
def test_power_tail_property(b, T):
    val = integrate_T_to_inf(lambda t: t ** b, T, TailSpec(None, b))
    assert val == pytest.approx(-(T ** (b + 1)) / (b + 1), rel=1e-10)


def test_rule_is_linear_functional():
    rule = quadrature_rule(0.0, math.inf, TailSpec(0.0, -2.0))
    f = lambda t: 1 / (1 + t) ** 2
    g = lambda t: 1 / (1 + t) ** 3
    assert rule.integrate(lambda t: 2 * f(t) + 3 * g(t)) == pytest.approx(
        2 * rule.integrate(f) + 3 * rule.integrate(g), rel=1e-14)


def test_convergence_order():
    # at low Gauss order, doubling points per decade must cut the error by at least 4x
    f = lambda t: 1 / (1 + t) ** 2
    errs = []
    for ppd in (1, 2):
        g = GeometricGrid(1e-4, 1e4, ppd, order=2)
        errs.append(abs(integrate(f, 0.0, math.inf, TailSpec(0.0, -2.0), g) - 1.0))
    assert errs[1] * 4 <= errs[0]
