import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import sampled_kernels, step_functions
from lgt.rearrangement import (IteratedKernel, SampledKernel, StepFunction, double_star,
                               hlp_dominates, is_monotone_kernel, iterated_rearrangement,
                               rearrange, verify_reduction)


def blocks(widths, values):
    return StepFunction.from_blocks(widths, values)


def test_two_block_swap():
    assert rearrange(blocks([1, 1], [2, 5])) == blocks([1, 1], [5, 2])


def test_monotone_input_is_fixed():
    f = blocks([1, 2, 0.5], [4, 3, 1])
    assert rearrange(f) == f


def test_equal_levels_merge():
    assert rearrange(blocks([1, 1, 1], [1, 3, 1])) == blocks([1, 2], [3, 1])


def test_double_star_examples():
    assert double_star(blocks([1], [1]), 2.0) == pytest.approx(0.5)
    assert double_star(blocks([1, 1], [2, 5]), 2.0) == pytest.approx(3.5)
    assert double_star(blocks([1, 1], [2, 5]), 1e-12) == 5.0


def test_double_star_rejects_nonpositive():
    with pytest.raises(ValueError):
        double_star(blocks([1], [1]), 0.0)


def test_hlp_examples():
    f = blocks([2], [1])
    g = blocks([1], [2])
    assert hlp_dominates(f, f)
    assert hlp_dominates(f, g)
    assert not hlp_dominates(g, f)


def test_step_function_validation():
    with pytest.raises(ValueError):
        StepFunction([1.0, 1.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        StepFunction([1.0], [np.nan])
    assert StepFunction.zero().is_zero


@given(step_functions())
def test_equimeasurable(f):
    fs = rearrange(f)
    for lam in np.unique(np.concatenate([[0.0], f.values])):
        assert np.sum(f.widths[f.values > lam]) == pytest.approx(
            np.sum(fs.widths[fs.values > lam]), rel=1e-12, abs=1e-12)


@given(step_functions())
def test_idempotent_and_mass(f):
    fs = rearrange(f)
    assert rearrange(fs) == fs
    assert fs.total == pytest.approx(f.total, rel=1e-12)
    assert np.all(np.diff(fs.values) < 0)


@given(step_functions(), st.lists(st.floats(1e-4, 1e3), min_size=1, max_size=20))
def test_double_star_dominates_star(f, ts):
    t = np.sort(np.array(ts))
    fs = rearrange(f)
    dd = double_star(f, t)
    assert np.all(dd >= fs(t) * (1 - 1e-12))
    assert np.all(np.diff(dd) <= 1e-12 * dd[:-1])


def test_iterated_rearrangement_hand_example():
    K = SampledKernel([1, 1], [1, 1], [[1, 4], [3, 2]])
    L = iterated_rearrangement(K)
    assert np.allclose(L(np.array([0.5, 0.5, 1.5, 1.5]), np.array([0.5, 1.5, 0.5, 1.5])),
                       [4, 2, 3, 1])


def test_iterated_product_kernel_factors():
    g = np.array([1.0, 3.0, 2.0])
    h = np.array([0.5, 2.0])
    K = SampledKernel([1, 1, 1], [1, 1], np.outer(g, h))
    L = iterated_rearrangement(K)
    x = np.array([0.5, 1.5, 2.5])
    y = np.array([0.5, 1.5])
    X, Y = np.meshgrid(x, y, indexing="ij")
    assert np.allclose(L(X, Y), np.outer(np.sort(g)[::-1], np.sort(h)[::-1]))


def test_constant_kernel():
    L = iterated_rearrangement(SampledKernel([1], [1], [[2.5]]))
    assert L.values.shape == (1, 1) and L.values[0, 0] == 2.5


@given(sampled_kernels())
def test_iterated_is_monotone(K):
    assert is_monotone_kernel(iterated_rearrangement(K))


@given(sampled_kernels(), step_functions())
def test_reduction_property(K, f):
    assert verify_reduction(K, f)


def test_apply_examples():
    K = SampledKernel([1, 1], [1, 1], [[1, 4], [3, 2]])
    out = K.apply(blocks([1, 1], [1, 1]))
    assert np.allclose(out.values, [5, 5])
    assert np.allclose(SampledKernel([1], [1], [[1]]).apply(blocks([1], [1])).values, [1])


def test_iterated_kernel_from_sampled_is_certified():
    L = IteratedKernel.from_sampled(iterated_rearrangement(SampledKernel([1, 2], [1, 1],
                                                                         [[1, 4], [3, 2]])))
    assert L.monotone_certified
