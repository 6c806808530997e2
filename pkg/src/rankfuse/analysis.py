"""Two-modality fusion runs, modality ranking and noise sweeps."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvalidArgumentError
from .fusion import (
    BlendSpec,
    OptimizerConfig,
    blend,
    harmonic_mean_gain,
    optimize_blend,
)
from .informativeness import DEFAULT_RATIO, LowChannelSet, low_channels_by_ratio
from .spectral import as_feature_matrix
from .synth import calibrate_sigma, perturb_noise

log = logging.getLogger(__name__)

ALPHA_MODES = ("fixed", "optimize")


@dataclass(frozen=True)
class FusionSettings:
    ratio: float = DEFAULT_RATIO
    alpha_mode: str = "optimize"
    alpha: float = 0.5
    convention: str = "own"
    seed: int = 0
    top_k: int | None = None

    def __post_init__(self):
        if self.alpha_mode not in ALPHA_MODES:
            raise InvalidArgumentError(f"alpha_mode must be one of {ALPHA_MODES}")
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidArgumentError(f"alpha {self.alpha} outside [0, 1]")


@dataclass(frozen=True)
class PairFusion:
    low_a: LowChannelSet
    low_b: LowChannelSet
    spec_a: BlendSpec
    spec_b: BlendSpec
    fused_a: np.ndarray
    fused_b: np.ndarray
    erank_a: tuple[float, float]
    erank_b: tuple[float, float]
    warnings: tuple[str, ...] = ()

    @property
    def delta_a(self) -> float:
        return self.erank_a[1] - self.erank_a[0]

    @property
    def delta_b(self) -> float:
        return self.erank_b[1] - self.erank_b[0]

    @property
    def harmonic_mean(self) -> float:
        return harmonic_mean_gain(self.delta_a, self.delta_b)


def _direction_seed(seed: int, direction: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, direction])


def _spec_for(X, Y, low: LowChannelSet, settings: FusionSettings, direction: int):
    if settings.alpha_mode == "fixed":
        return BlendSpec.uniform(low, settings.alpha), None
    opt = optimize_blend(
        X,
        Y,
        low,
        OptimizerConfig(seed=_direction_seed(settings.seed, direction)),
        convention=settings.convention,
    )
    return opt.spec, opt.warning


def fuse_pair(A, B, settings: FusionSettings | None = None) -> PairFusion:
    """Select low channels in both modalities and fuse each from the other.

    Both directions read the original, unfused matrices.
    """
    settings = settings or FusionSettings()
    A = as_feature_matrix(A, "A")
    B = as_feature_matrix(B, "B")
    if A.shape != B.shape:
        raise DimensionMismatchError(f"modalities differ in shape: {A.shape} vs {B.shape}")
    low_a = low_channels_by_ratio(A, settings.ratio, settings.top_k)
    low_b = low_channels_by_ratio(B, settings.ratio, settings.top_k)
    spec_a, warn_a = _spec_for(A, B, low_a, settings, 0)
    spec_b, warn_b = _spec_for(B, A, low_b, settings, 1)
    res_a = blend(A, B, spec_a, settings.convention)
    res_b = blend(B, A, spec_b, settings.convention)
    return PairFusion(
        low_a=low_a,
        low_b=low_b,
        spec_a=spec_a,
        spec_b=spec_b,
        fused_a=res_a.fused,
        fused_b=res_b.fused,
        erank_a=(res_a.erank_before, res_a.erank_after),
        erank_b=(res_b.erank_before, res_b.erank_after),
        warnings=tuple(w for w in (warn_a, warn_b) if w),
    )


def pair_score(base, candidates, names=None, settings: FusionSettings | None = None):
    """Rank candidate modalities by the harmonic mean of mutual effective-rank gains.

    Candidates whose shape differs from ``base`` are skipped with a warning.
    Returns ``(rows, skipped)``; rows are sorted by harmonic mean, descending,
    with input order breaking ties.
    """
    base = as_feature_matrix(base, "base")
    names = list(names) if names is not None else [f"candidate_{i}" for i in range(len(candidates))]
    rows, skipped = [], []
    for order, (name, cand) in enumerate(zip(names, candidates)):
        cand = as_feature_matrix(cand, name)
        if cand.shape != base.shape:
            log.warning("skipping %s: shape %s does not match base %s", name, cand.shape, base.shape)
            skipped.append(name)
            continue
        res = fuse_pair(base, cand, settings)
        rows.append(
            {
                "candidate": name,
                "order": order,
                "delta_base": res.delta_a,
                "delta_candidate": res.delta_b,
                "harmonic_mean": res.harmonic_mean,
            }
        )
    rows.sort(key=lambda row: (-row["harmonic_mean"], row["order"]))
    return rows, skipped


def noise_sweep(A, B, sigmas, target: str = "a", settings: FusionSettings | None = None, noise_seed: int | None = None):
    """Perturb one modality at each noise level and re-run the mutual fusion.

    Gains are measured against each modality as fed to the fuser, so the
    noisy modality's baseline is its noisy self. Returns one row per sigma
    with the clean and noisy modality's gains and their harmonic mean.
    """
    if target not in ("a", "b"):
        raise InvalidArgumentError("target must be 'a' or 'b'")
    settings = settings or FusionSettings()
    A = as_feature_matrix(A, "A")
    B = as_feature_matrix(B, "B")
    if A.shape != B.shape:
        raise DimensionMismatchError(f"modalities differ in shape: {A.shape} vs {B.shape}")
    noise_seed = settings.seed if noise_seed is None else noise_seed
    rows = []
    for sigma in sigmas:
        if sigma < 0:
            raise InvalidArgumentError(f"sigma must be >= 0, got {sigma}")
        if target == "a":
            res = fuse_pair(perturb_noise(A, sigma, noise_seed), B, settings)
            noisy, clean = res.delta_a, res.delta_b
        else:
            res = fuse_pair(A, perturb_noise(B, sigma, noise_seed), settings)
            noisy, clean = res.delta_b, res.delta_a
        rows.append(
            {
                "sigma": float(sigma),
                "delta_clean": clean,
                "delta_noisy": noisy,
                "harmonic_mean": harmonic_mean_gain(clean, noisy),
            }
        )
    return rows


def calibrated_sigmas(X, relative_changes, seed: int | None = None) -> list[float]:
    """Noise levels giving each requested relative Frobenius change of ``X``."""
    return [calibrate_sigma(X, rc, seed) for rc in relative_changes]
