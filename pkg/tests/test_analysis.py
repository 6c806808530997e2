import numpy as np
import pytest

from rankfuse import (
    DimensionMismatchError,
    FusionSettings,
    GeneratorConfig,
    InvalidArgumentError,
    fuse_pair,
    gen_complementary_pair,
    noise_sweep,
    pair_score,
)
from rankfuse.analysis import calibrated_sigmas

FIXED = FusionSettings(alpha_mode="fixed", alpha=0.5)


@pytest.fixture(scope="module")
def pair():
    return gen_complementary_pair(GeneratorConfig(rows=48, cols=12, seed=1))


def test_fuse_pair_fixed(pair):
    X, Y = pair
    res = fuse_pair(X, Y, FIXED)
    assert res.delta_a > 0 and res.delta_b > 0
    assert 0 < res.harmonic_mean <= max(res.delta_a, res.delta_b)
    assert set(res.spec_a.alphas.values()) == {0.5}


def test_fuse_pair_optimize_positive(pair):
    X, Y = pair
    opt = fuse_pair(X, Y, FusionSettings(seed=2))
    assert opt.delta_a > 0 and opt.delta_b > 0


def test_fuse_pair_deterministic(pair):
    X, Y = pair
    a = fuse_pair(X, Y, FusionSettings(seed=4))
    b = fuse_pair(X, Y, FusionSettings(seed=4))
    assert a.spec_a == b.spec_a and a.spec_b == b.spec_b
    assert np.array_equal(a.fused_a, b.fused_a)


def test_fuse_pair_shape_mismatch(rng):
    with pytest.raises(DimensionMismatchError):
        fuse_pair(rng.standard_normal((5, 3)), rng.standard_normal((5, 4)))


@pytest.mark.parametrize("kwargs", [dict(alpha_mode="learned"), dict(alpha=1.5)])
def test_settings_validation(kwargs):
    with pytest.raises(InvalidArgumentError):
        FusionSettings(**kwargs)


def test_pair_score_base_itself_last(pair):
    X, Y = pair
    rows, skipped = pair_score(X, [X, Y], names=["self", "other"], settings=FIXED)
    assert [r["candidate"] for r in rows] == ["other", "self"]
    assert rows[1]["harmonic_mean"] == 0.0
    assert rows[0]["harmonic_mean"] > 0
    assert skipped == []


def test_pair_score_single_and_skipped(pair, rng):
    X, Y = pair
    rows, skipped = pair_score(X, [Y, rng.standard_normal((4, 4))], names=["y", "small"], settings=FIXED)
    assert len(rows) == 1 and rows[0]["candidate"] == "y"
    assert skipped == ["small"]


def test_noise_sweep_zero_matches_fuse(pair):
    X, Y = pair
    (row,) = noise_sweep(X, Y, [0.0], target="a", settings=FIXED)
    res = fuse_pair(X, Y, FIXED)
    assert row["delta_noisy"] == res.delta_a
    assert row["delta_clean"] == res.delta_b
    assert row["harmonic_mean"] == res.harmonic_mean


def test_noise_sweep_targets_are_mirror_images(pair):
    X, Y = pair
    sig = calibrated_sigmas(X, [0.2], seed=0)
    a = noise_sweep(X, Y, sig, target="a", settings=FIXED)
    b = noise_sweep(Y, X, sig, target="b", settings=FIXED)
    assert a[0]["delta_noisy"] == pytest.approx(b[0]["delta_noisy"])
    assert a[0]["delta_clean"] == pytest.approx(b[0]["delta_clean"])


def test_noise_sweep_rejects(pair):
    X, Y = pair
    with pytest.raises(InvalidArgumentError):
        noise_sweep(X, Y, [0.1], target="c")
    with pytest.raises(InvalidArgumentError):
        noise_sweep(X, Y, [-0.1])
