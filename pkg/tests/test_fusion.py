import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import gram_erank
from rankfuse import (
    BlendSpec,
    DimensionMismatchError,
    GeneratorConfig,
    InvalidAlphaError,
    LowChannelSet,
    OptimizerConfig,
    blend,
    effective_rank,
    erank_gain_pair,
    gen_complementary_pair,
    harmonic_mean_gain,
    low_channels_by_ratio,
    optimize_blend,
    symmetric_fuse,
)
from strategies import feature_matrices


def _low(*idx):
    return LowChannelSet(tuple(idx), "bottom_count", count=len(idx))


def test_alpha_one_is_identity(rng):
    X, Y = rng.standard_normal((6, 4)), rng.standard_normal((6, 4))
    res = blend(X, Y, BlendSpec.uniform(_low(0, 2), 1.0))
    assert np.array_equal(res.fused, X)
    assert res.erank_gain == 0.0
    assert not res.delta.any()


def test_alpha_zero_swaps_low_channels(rng):
    X, Y = rng.standard_normal((6, 4)), rng.standard_normal((6, 4))
    fused = blend(X, Y, BlendSpec.uniform(_low(1, 3), 0.0)).fused
    assert np.array_equal(fused[:, [1, 3]], Y[:, [1, 3]])
    assert np.array_equal(fused[:, [0, 2]], X[:, [0, 2]])


def test_blend_arithmetic():
    X = np.array([[1.0, 5.0], [1.0, 2.0]])
    Y = np.array([[3.0, 0.0], [-1.0, 0.0]])
    fused = blend(X, Y, BlendSpec.uniform(_low(0), 0.5)).fused
    np.testing.assert_array_equal(fused[:, 0], [2.0, 0.0])
    np.testing.assert_array_equal(fused[:, 1], X[:, 1])


def test_other_convention_flips_weights(rng):
    X, Y = rng.standard_normal((5, 3)), rng.standard_normal((5, 3))
    spec = BlendSpec.uniform(_low(1), 0.25)
    own = blend(X, Y, spec, "own").fused
    other = blend(X, Y, spec, "other").fused
    np.testing.assert_allclose(own[:, 1], 0.25 * X[:, 1] + 0.75 * Y[:, 1])
    np.testing.assert_allclose(other[:, 1], 0.75 * X[:, 1] + 0.25 * Y[:, 1])


@pytest.mark.parametrize("alphas", [{0: 1.5}, {0: -0.1}, {0: 0.5, 1: 0.5}, {}])
def test_blend_spec_validation(alphas):
    with pytest.raises(InvalidAlphaError):
        BlendSpec(_low(0), alphas)


def test_blend_shape_mismatch():
    with pytest.raises(DimensionMismatchError):
        blend(np.ones((3, 2)), np.ones((4, 2)), BlendSpec.uniform(_low(0), 0.5))


@given(feature_matrices(), st.floats(0.0, 1.0))
def test_delta_supported_on_low_channels(X, alpha):
    Y = np.random.default_rng(0).standard_normal(X.shape)
    res = blend(X, Y, BlendSpec.uniform(_low(0), alpha))
    assert not res.delta[:, 1:].any()
    np.testing.assert_allclose(res.fused, X + res.delta)


def test_symmetric_identity(rng):
    A, B = rng.standard_normal((6, 4)), rng.standard_normal((6, 4))
    ra, rb = symmetric_fuse(A, B, BlendSpec.uniform(_low(0), 1.0), BlendSpec.uniform(_low(3), 1.0))
    assert np.array_equal(ra.fused, A)
    assert np.array_equal(rb.fused, B)


@given(feature_matrices(), st.floats(0.0, 1.0))
def test_self_fusion_has_zero_gain(A, alpha):
    spec = BlendSpec.uniform(_low(0), alpha)
    ra, rb = symmetric_fuse(A, A, spec, spec)
    assert ra.erank_gain == 0.0
    assert rb.erank_gain == 0.0


def test_complementary_pair_gains_positive():
    X, Y = gen_complementary_pair(GeneratorConfig(rows=64, cols=16, gamma_target=0.1, seed=3))
    la, lb = low_channels_by_ratio(X), low_channels_by_ratio(Y)
    ra, rb = symmetric_fuse(X, Y, BlendSpec.uniform(la, 0.5), BlendSpec.uniform(lb, 0.5))
    assert ra.erank_gain > 0
    assert rb.erank_gain > 0


def test_optimizer_constant_objective(rng):
    X = rng.standard_normal((8, 4))
    opt = optimize_blend(X, X, _low(1, 2), OptimizerConfig(seed=4))
    np.testing.assert_array_equal(opt.spec.alpha_array(), opt.initial_spec.alpha_array())
    assert blend(X, X, opt.spec).erank_gain == 0.0


def test_optimizer_matches_grid_oracle():
    # interior optimum: the blended column's norm should reach the other singular value
    X = np.array([[2.0, 0.0], [0.0, 0.5], [0.0, 0.0]])
    Y = np.array([[0.0, 0.0], [0.0, 3.0], [0.0, 0.0]])
    low = low_channels_by_ratio(X)
    assert low.indices == (1,)
    grid = np.linspace(0.0, 1.0, 1001)
    values = [blend(X, Y, BlendSpec.uniform(low, a)).erank_after for a in grid]
    best = grid[int(np.argmax(values))]
    for seed in range(3):
        opt = optimize_blend(X, Y, low, OptimizerConfig(seed=seed))
        assert abs(opt.spec.alphas[1] - best) <= 1e-3


@given(st.integers(0, 2**32 - 1))
def test_optimizer_never_worse_than_start(seed):
    rng = np.random.default_rng(seed)
    X, Y = rng.standard_normal((10, 5)), rng.standard_normal((10, 5))
    opt = optimize_blend(X, Y, _low(0, 3), OptimizerConfig(seed=seed, iterations=20))
    assert opt.erank >= opt.initial_erank
    assert np.all((opt.spec.alpha_array() >= 0) & (opt.spec.alpha_array() <= 1))


def test_optimizer_gain_nonnegative():
    X, Y = gen_complementary_pair(GeneratorConfig(rows=64, cols=16, gamma_target=0.05, seed=0))
    low = low_channels_by_ratio(X)
    opt = optimize_blend(X, Y, low, OptimizerConfig(seed=0))
    assert blend(X, Y, opt.spec).erank_gain >= blend(X, Y, BlendSpec.uniform(low, 1.0)).erank_gain == 0.0


def test_optimizer_is_deterministic(rng):
    X, Y = rng.standard_normal((10, 5)), rng.standard_normal((10, 5))
    a = optimize_blend(X, Y, _low(1, 2), OptimizerConfig(seed=9, iterations=15))
    b = optimize_blend(X, Y, _low(1, 2), OptimizerConfig(seed=9, iterations=15))
    assert a == b


def test_gain_pair_identity(rng):
    A = rng.standard_normal((6, 3))
    assert erank_gain_pair(A, A, A, A) == (0.0, 0.0)


def test_gain_pair_rank_one_plus_direction():
    A = np.outer([1.0, 2.0, 0.0], [1.0, 1.0])
    fused = A.copy()
    fused[:, 1] += [0.0, 0.0, 1.0]
    d_a, _ = erank_gain_pair(A, A, fused, A)
    assert d_a > 0


def test_gain_pair_against_oracle():
    X, Y = gen_complementary_pair(GeneratorConfig(rows=64, cols=16, seed=11))
    la, lb = low_channels_by_ratio(X), low_channels_by_ratio(Y)
    ra, rb = symmetric_fuse(X, Y, BlendSpec.uniform(la, 0.3), BlendSpec.uniform(lb, 0.3))
    d_a, d_b = erank_gain_pair(X, Y, ra.fused, rb.fused)
    assert d_a == pytest.approx(gram_erank(ra.fused) - gram_erank(X), abs=1e-6)
    assert d_b == pytest.approx(gram_erank(rb.fused) - gram_erank(Y), abs=1e-6)
    assert d_a == pytest.approx(effective_rank(ra.fused).effective_rank - effective_rank(X).effective_rank)


@pytest.mark.parametrize("a, b, expected", [(5, 5, 5), (0, 7, 0), (3, 6, 4), (-1, 4, 0)])
def test_harmonic_mean(a, b, expected):
    assert harmonic_mean_gain(a, b) == pytest.approx(expected)


@given(st.floats(0, 1e6), st.floats(0, 1e6))
def test_harmonic_mean_between_min_and_max(a, b):
    hm = harmonic_mean_gain(a, b)
    assert hm == harmonic_mean_gain(b, a)
    if a > 0 and b > 0:
        assert min(a, b) * (1 - 1e-12) <= hm <= max(a, b) * (1 + 1e-12)
