"""Per-channel informativeness scores and low-informativeness channel selection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import IndexOutOfRangeError, InvalidArgumentError
from .spectral import SpectralDecomposition, decompose

DEFAULT_RATIO = 0.10


@dataclass(frozen=True)
class ChannelImportanceProfile:
    scores: np.ndarray
    top_k: int
    source_dims: tuple[int, int]


@dataclass(frozen=True)
class LowChannelSet:
    """Channels picked for blending.

    ``mode`` is ``"bottom_count"`` (with ``count``) or ``"threshold"``
    (with ``threshold``).
    """

    indices: tuple[int, ...]
    mode: str
    count: int | None = None
    threshold: float | None = None

    def __len__(self) -> int:
        return len(self.indices)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp)


def channel_importance(X, top_k: int | None = None) -> ChannelImportanceProfile:
    """Score each channel by its energy on the leading right singular vectors.

    ``I_c = sum_{i <= top_k} sigma_i^2 v_{i,c}^2``. With ``top_k`` left as
    ``None`` the sum runs over the full numerical rank, in which case the
    score equals the squared column norm.
    """
    dec = X if isinstance(X, SpectralDecomposition) else decompose(X)
    r = dec.numerical_rank
    k = r if top_k is None else int(top_k)
    if not 1 <= k <= r:
        raise IndexOutOfRangeError(f"top_k={k} outside [1, {r}]")
    s = dec.singular_values[:k]
    V = dec.right_vectors[:, :k]
    scores = (V * V) @ (s * s)
    return ChannelImportanceProfile(scores=scores, top_k=k, source_dims=dec.shape)


def default_low_count(n_channels: int, ratio: float = DEFAULT_RATIO) -> int:
    """``round(ratio * D)`` with half-up rounding, never below one channel."""
    if not 0.0 < ratio <= 1.0:
        raise InvalidArgumentError(f"ratio must lie in (0, 1], got {ratio}")
    return max(1, min(n_channels, math.floor(ratio * n_channels + 0.5)))


def select_low_channels(
    profile: ChannelImportanceProfile | np.ndarray,
    *,
    count: int | None = None,
    threshold: float | None = None,
) -> LowChannelSet:
    """Pick the bottom-``count`` channels, or every channel with ``I_c <= threshold``.

    Ties in the bottom-count ranking go to the lower channel index.
    """
    scores = np.asarray(getattr(profile, "scores", profile), dtype=np.float64)
    if (count is None) == (threshold is None):
        raise InvalidArgumentError("give exactly one of count or threshold")
    if count is not None:
        if not 1 <= count <= scores.size:
            raise IndexOutOfRangeError(f"count={count} outside [1, {scores.size}]")
        # stable sort keeps index order among equal scores
        picked = np.argsort(scores, kind="stable")[:count]
        return LowChannelSet(tuple(sorted(int(c) for c in picked)), "bottom_count", count=count)
    if threshold < 0:
        raise InvalidArgumentError(f"threshold must be >= 0, got {threshold}")
    picked = np.flatnonzero(scores <= threshold)
    return LowChannelSet(tuple(int(c) for c in picked), "threshold", threshold=float(threshold))


def low_channels_by_ratio(X, ratio: float = DEFAULT_RATIO, top_k: int | None = None) -> LowChannelSet:
    profile = channel_importance(X, top_k)
    return select_low_channels(profile, count=default_low_count(profile.scores.size, ratio))


def eta_feasibility_bound(delta_k: float, c_low_size: int, epsilon: float, beta: float) -> float:
    """Largest threshold ``eta`` allowed by the dominant-subspace preservation condition.

    ``eta_max = min(delta_k / (3 sqrt|C|), epsilon / (4 |C| beta))^2``.
    """
    if delta_k <= 0 or c_low_size < 1 or epsilon <= 0 or beta <= 0:
        raise InvalidArgumentError(
            "eta bound needs delta_k > 0, |C_low| >= 1, epsilon > 0, beta > 0; got "
            f"{delta_k}, {c_low_size}, {epsilon}, {beta}"
        )
    root = min(delta_k / (3.0 * math.sqrt(c_low_size)), epsilon / (4.0 * c_low_size * beta))
    return root * root
