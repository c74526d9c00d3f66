import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import step_functions
from lgt.errors import AdmissibilityFailed, NonIntegrableTail, UnknownTail, WeightSyntaxError
from lgt.quadrature import DEFAULT_GRID, TailSpec, integrate
from lgt.verification import _LG, lg_norm
from lgt.weights import (FunctionWeight, LGSpaceSpec, PowerLogWeight, TabulatedWeight,
                         associated_weight_q, check_admissible, dual_weight, parse_weight)

X = DEFAULT_GRID.nodes


def test_admissibility_examples():
    assert check_admissible(PowerLogWeight(), 2)
    assert not check_admissible(PowerLogWeight(1, 2, 2), 2)
    with pytest.raises(AdmissibilityFailed):
        LGSpaceSpec(2, PowerLogWeight(1, 2, 2))


@given(p=st.floats(1.1, 4.0), frac=st.floats(0.02, 0.98))
def test_lorentz_weights_admissible(p, frac):
    # phi = t^{q/p - 1} is admissible for 1 <= q < p^2
    q = 1 + frac * (p * p - 1)
    a = q / p - 1
    assert check_admissible(PowerLogWeight(1, a, a), p)


def test_unknown_tail():
    w = FunctionWeight(lambda t: np.ones_like(t), None, 0.0)
    with pytest.raises(UnknownTail):
        check_admissible(w, 2)


def test_associated_weight_examples():
    assert associated_weight_q(PowerLogWeight(), 2)(X) == pytest.approx(2.0)
    w = associated_weight_q(PowerLogWeight(1, -0.5, -0.5), 2)
    assert np.allclose(w(X), 4 / 3 * X ** -0.5, rtol=1e-12)
    with pytest.raises(NonIntegrableTail):
        associated_weight_q(PowerLogWeight(1, 1.5, 1.5), 2)


@given(a=st.floats(-0.9, 0.9), q=st.floats(2.0, 4.0))
def test_associated_weight_tabulated_matches_closed_form(a, q):
    phi = FunctionWeight(lambda t: t ** a, a, a)
    tab = associated_weight_q(phi, q)
    assert np.allclose(tab(X), q / (q - 1 - a) * X ** a, rtol=1e-9)


def test_dual_of_lebesgue_is_constant():
    for p in (1.5, 2.0, 3.0):
        pp = p / (p - 1)
        expected = 1 / ((p - 1) * pp ** (pp + 1))
        numeric = dual_weight(PowerLogWeight(), p, symbolic=False)(X)
        assert np.max(np.abs(numeric / expected - 1)) < 1e-8
        assert dual_weight(PowerLogWeight(), p)(X) == pytest.approx(expected, rel=1e-14)


@given(frac=st.floats(0.02, 0.98), p=st.floats(1.5, 3.5))
def test_dual_power_weight_closed_form(frac, p):
    a = -1 + frac * p
    w = PowerLogWeight(1, a, a)
    sym = dual_weight(w, p)
    num = dual_weight(w, p, symbolic=False)
    assert sym.is_pure_power and sym.a0 == pytest.approx(-a / (p - 1))
    assert np.allclose(num(X), sym(X), rtol=1e-8)


def test_dual_weight_positive_for_log_weight():
    w = PowerLogWeight(1, 0.2, 0.5, 1.0)
    psi = dual_weight(w, 2.0)
    assert np.all(psi(X) > 0)


def test_duality_holder_constant():
    rng = np.random.default_rng(3)
    phi = PowerLogWeight(1, 0.3, 0.3)
    p = 2.0
    psi = dual_weight(phi, p)
    worst = 0.0
    from lgt.rearrangement import StepFunction
    for _ in range(40):
        f = StepFunction(np.cumsum(rng.exponential(size=6)), rng.exponential(size=6))
        g = StepFunction(np.cumsum(rng.exponential(size=6)), rng.exponential(size=6))
        brk = tuple(np.union1d(f.knots, g.knots))
        pair = integrate(lambda t: f(t) * g(t), 0.0, brk[-1], TailSpec(0.0, None), breaks=brk)
        ratio = pair / (lg_norm(f, _LG(p, phi)) * lg_norm(g, _LG(p / (p - 1), psi)))
        worst = max(worst, ratio)
    assert worst <= 4.0


def test_products_and_powers_stay_symbolic():
    a = PowerLogWeight(2, 0.5, -0.5, 1.0)
    b = PowerLogWeight(3, -0.2, 0.1)
    prod = a * b
    assert isinstance(prod, PowerLogWeight)
    assert np.allclose(prod(X), a(X) * b(X), rtol=1e-12)
    assert np.allclose((a ** -1.5)(X), a(X) ** -1.5, rtol=1e-12)


def test_parse_weight(tmp_path):
    w = parse_weight("pow(a0=0.5,ainf=-0.5,log=1,C=2)")
    assert w == PowerLogWeight(2, 0.5, -0.5, 1)
    assert parse_weight(str(w)) == w
    t = np.geomspace(1e-3, 1e3, 30)
    (tmp_path / "w.csv").write_text("t,w\n" + "".join(f"{float(x)!r},{float(x) ** 0.5!r}\n" for x in t))
    tw = parse_weight("table(file=w.csv,a0=0.5,ainf=0.5)", base_dir=tmp_path)
    assert isinstance(tw, TabulatedWeight)
    assert np.allclose(tw(np.array([1e-5, 2.0, 1e5])), [1e-5 ** 0.5, 2 ** 0.5, 1e5 ** 0.5], rtol=1e-6)
    with pytest.raises(WeightSyntaxError):
        parse_weight("pow(a0=x)")
    with pytest.raises(WeightSyntaxError):
        parse_weight("gauss(1)")
    with pytest.raises(FileNotFoundError):
        parse_weight("table(file=missing.csv,a0=0,ainf=0)", base_dir=tmp_path)


@given(step_functions(allow_zero=False))
def test_weight_scaling_of_norm(f):
    spec = LGSpaceSpec(2, PowerLogWeight())
    spec3 = LGSpaceSpec(2, PowerLogWeight(3.0))
    assert lg_norm(f, spec3) == pytest.approx(3 ** 0.5 * lg_norm(f, spec), rel=1e-12)
