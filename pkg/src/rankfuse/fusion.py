"""Rank-enhancing token fusion: blend weak channels of one modality with another.

The canonical convention weights the *own* channel::

    x'_c = alpha_c * x_c + (1 - alpha_c) * y_c     for c in C_low
    x'_c = x_c                                     otherwise

``convention="other"`` flips the roles of ``alpha_c`` and ``1 - alpha_c``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, InvalidAlphaError, InvalidArgumentError
from .informativeness import LowChannelSet
from .spectral import as_feature_matrix, effective_rank, erank_value

CONVENTIONS = ("own", "other")


@dataclass(frozen=True)
class BlendSpec:
    low_set: LowChannelSet
    alphas: dict[int, float]

    def __post_init__(self):
        if set(self.alphas) != set(self.low_set.indices):
            raise InvalidAlphaError("alphas must be defined exactly on the low channel set")
        for c, a in self.alphas.items():
            if not (0.0 <= a <= 1.0):
                raise InvalidAlphaError(f"alpha for channel {c} is {a}, outside [0, 1]")

    @classmethod
    def uniform(cls, low_set: LowChannelSet, alpha: float) -> "BlendSpec":
        return cls(low_set, {c: float(alpha) for c in low_set.indices})

    @classmethod
    def from_array(cls, low_set: LowChannelSet, alphas) -> "BlendSpec":
        return cls(low_set, {c: float(a) for c, a in zip(low_set.indices, alphas)})

    def alpha_array(self) -> np.ndarray:
        return np.array([self.alphas[c] for c in self.low_set.indices], dtype=np.float64)


@dataclass(frozen=True)
class FusionResult:
    fused: np.ndarray
    delta: np.ndarray
    erank_before: float
    erank_after: float

    @property
    def erank_gain(self) -> float:
        return self.erank_after - self.erank_before


def _check_pair(X, Y) -> tuple[np.ndarray, np.ndarray]:
    X = as_feature_matrix(X, "X")
    Y = as_feature_matrix(Y, "Y")
    if X.shape != Y.shape:
        raise DimensionMismatchError(f"modalities differ in shape: {X.shape} vs {Y.shape}")
    return X, Y


def _own_weights(alphas: np.ndarray, convention: str) -> np.ndarray:
    if convention == "own":
        return alphas
    if convention == "other":
        return 1.0 - alphas
    raise InvalidArgumentError(f"unknown alpha convention {convention!r}")


def _blend_columns(X: np.ndarray, Y: np.ndarray, idx: np.ndarray, own: np.ndarray) -> np.ndarray:
    out = X.copy()
    for c, w in zip(idx, own):
        # exact endpoints and self-blends stay bit-for-bit
        if w == 1.0 or np.array_equal(X[:, c], Y[:, c]):
            continue
        if w == 0.0:
            out[:, c] = Y[:, c]
        else:
            out[:, c] = w * X[:, c] + (1.0 - w) * Y[:, c]
    return out


def blend(X, Y, spec: BlendSpec, convention: str = "own") -> FusionResult:
    """Blend the low channels of ``X`` with the matching channels of ``Y``."""
    X, Y = _check_pair(X, Y)
    idx = spec.low_set.as_array()
    if idx.size and idx.max() >= X.shape[1]:
        raise DimensionMismatchError(f"low channel {idx.max()} out of range for D={X.shape[1]}")
    fused = _blend_columns(X, Y, idx, _own_weights(spec.alpha_array(), convention))
    return FusionResult(
        fused=fused,
        delta=fused - X,
        erank_before=effective_rank(X).effective_rank,
        erank_after=effective_rank(fused).effective_rank,
    )


def symmetric_fuse(A, B, spec_a: BlendSpec, spec_b: BlendSpec, convention: str = "own"):
    """Fuse both directions, each reading the other modality's original matrix."""
    A, B = _check_pair(A, B)
    return blend(A, B, spec_a, convention), blend(B, A, spec_b, convention)


@dataclass(frozen=True)
class OptimizerConfig:
    learning_rate: float = 0.05
    iterations: int = 200
    fd_step: float = 1e-4
    tolerance: float = 1e-8
    max_backtracks: int = 30
    seed: int | None = None
    init: tuple[float, ...] | None = None


@dataclass(frozen=True)
class BlendOptimization:
    spec: BlendSpec
    initial_spec: BlendSpec
    erank: float
    initial_erank: float
    iterations: int
    converged: bool
    warning: str | None = field(default=None)


def optimize_blend(
    X,
    Y,
    low_set: LowChannelSet,
    config: OptimizerConfig | None = None,
    convention: str = "own",
) -> BlendOptimization:
    """Maximize ``ERank(blend(X, Y, alpha))`` over ``alpha`` in the unit box.

    Projected gradient ascent with central finite-difference gradients.
    Every step is checked and halved until it does not lower the objective,
    so the returned point is never worse than the uniform-random start.
    """
    config = config or OptimizerConfig()
    X, Y = _check_pair(X, Y)
    if len(low_set) == 0:
        raise InvalidArgumentError("low channel set is empty")
    idx = low_set.as_array()
    rng = np.random.default_rng(config.seed)
    if config.init is not None:
        alpha = np.clip(np.asarray(config.init, dtype=np.float64), 0.0, 1.0)
    else:
        alpha = rng.uniform(0.0, 1.0, size=idx.size)
    initial = alpha.copy()

    work = X.copy()

    def objective(a: np.ndarray) -> float:
        own = _own_weights(a, convention)
        work[:, idx] = own * X[:, idx] + (1.0 - own) * Y[:, idx]
        return erank_value(work)

    h = config.fd_step
    value = initial_value = objective(alpha)
    converged = False
    it = 0
    for it in range(1, config.iterations + 1):
        grad = np.empty_like(alpha)
        for j in range(alpha.size):
            e = np.zeros_like(alpha)
            e[j] = h
            grad[j] = (objective(alpha + e) - objective(alpha - e)) / (2.0 * h)
        step = config.learning_rate
        moved = False
        for _ in range(config.max_backtracks):
            candidate = np.clip(alpha + step * grad, 0.0, 1.0)
            if np.max(np.abs(candidate - alpha)) < config.tolerance:
                break
            cand_value = objective(candidate)
            if cand_value >= value:
                alpha, value, moved = candidate, cand_value, True
                break
            step *= 0.5
        if not moved:
            converged = True
            break

    warning = None
    if not converged:
        warning = f"no stationary point within {config.iterations} iterations"
    return BlendOptimization(
        spec=BlendSpec.from_array(low_set, alpha),
        initial_spec=BlendSpec.from_array(low_set, initial),
        erank=value,
        initial_erank=initial_value,
        iterations=it,
        converged=converged,
        warning=warning,
    )


def erank_gain_pair(A, B, fused_a, fused_b) -> tuple[float, float]:
    """Effective-rank change of each modality after fusion."""
    return (
        effective_rank(fused_a).effective_rank - effective_rank(A).effective_rank,
        effective_rank(fused_b).effective_rank - effective_rank(B).effective_rank,
    )


def harmonic_mean_gain(delta_a: float, delta_b: float) -> float:
    """``2 a b / (a + b)`` on gains clamped at zero; zero if either gain is."""
    a = max(float(delta_a), 0.0)
    b = max(float(delta_b), 0.0)
    if a == 0.0 or b == 0.0:
        return 0.0
    # ordered operands keep the result symmetric; the ratio form avoids underflow
    lo, hi = sorted((a, b))
    return 2.0 * lo * (hi / (lo + hi))
