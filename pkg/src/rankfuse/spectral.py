"""Dense spectral primitives: SVD, effective rank, gaps and subspace distances."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    IndexOutOfRangeError,
    NonFiniteError,
    ZeroMatrixError,
)

__all__ = [
    "SpectralDecomposition",
    "Spectrum",
    "as_feature_matrix",
    "decompose",
    "dominant_subspace",
    "effective_rank",
    "numerical_rank",
    "principal_angles",
    "rank_cutoff",
    "sin_theta_distance",
    "spectral_gap",
    "spectrum_from_singular_values",
]


def as_feature_matrix(X, name: str = "X") -> np.ndarray:
    """Validate and return ``X`` as a 2-D float64 array.

    Raises
    ------
    DimensionMismatchError
        If ``X`` is not 2-D or has an empty axis.
    NonFiniteError
        If any entry is NaN or infinite.
    """
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionMismatchError(f"{name} has an empty axis: {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} contains NaN or Inf")
    return arr


def _require_nonzero(arr: np.ndarray, name: str = "X") -> None:
    if not np.any(arr):
        raise ZeroMatrixError(f"{name} is the zero matrix")


def rank_cutoff(singular_values: np.ndarray, shape: tuple[int, int]) -> float:
    """Threshold below which a singular value counts as zero."""
    if len(singular_values) == 0:
        return 0.0
    return max(shape) * np.finfo(np.float64).eps * float(singular_values[0])


def numerical_rank(singular_values: np.ndarray, shape: tuple[int, int]) -> int:
    s = np.asarray(singular_values, dtype=np.float64)
    return int(np.count_nonzero(s > rank_cutoff(s, shape)))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Thin SVD ``X = U diag(s) V^T`` with ``m = min(T, D)`` components."""

    singular_values: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray
    numerical_rank: int

    @property
    def shape(self) -> tuple[int, int]:
        return (self.left_vectors.shape[0], self.right_vectors.shape[0])

    def reconstruct(self) -> np.ndarray:
        return (self.left_vectors * self.singular_values) @ self.right_vectors.T


@dataclass(frozen=True)
class Spectrum:
    """Normalized singular value spectrum and its entropy."""

    probabilities: np.ndarray
    entropy: float
    effective_rank: float


def decompose(X) -> SpectralDecomposition:
    """Thin singular value decomposition of a feature matrix.

    Singular values come back nonincreasing; ``numerical_rank`` counts the
    values above ``max(T, D) * eps * sigma_1``.
    """
    arr = as_feature_matrix(X)
    _require_nonzero(arr)
    U, s, Vt = np.linalg.svd(arr, full_matrices=False)
    return SpectralDecomposition(
        singular_values=s,
        left_vectors=U,
        right_vectors=Vt.T,
        numerical_rank=numerical_rank(s, arr.shape),
    )


def spectrum_from_singular_values(singular_values, shape: tuple[int, int]) -> Spectrum:
    """Nuclear-norm normalized spectrum over the values above the rank cutoff."""
    s = np.sort(np.asarray(singular_values, dtype=np.float64))[::-1]
    if s.size == 0 or s[0] <= 0.0:
        raise ZeroMatrixError("spectrum has no positive singular value")
    kept = s[: numerical_rank(s, shape)]
    p = kept / kept.sum()
    entropy = float(-np.sum(p * np.log(p)))
    # float noise can push a one-point entropy a hair below zero
    entropy = max(entropy, 0.0)
    return Spectrum(probabilities=p, entropy=entropy, effective_rank=float(np.exp(entropy)))


def effective_rank(X) -> Spectrum:
    """Entropy-based effective rank of ``X``.

    ``p_j = sigma_j / sum(sigma)`` over the numerically nonzero singular
    values, ``H = -sum p_j ln p_j`` and ``ERank = exp(H)``.

    Examples
    --------
    >>> round(effective_rank(np.diag([3.0, 1.0])).effective_rank, 5)
    1.75477
    """
    if isinstance(X, SpectralDecomposition):
        return spectrum_from_singular_values(X.singular_values, X.shape)
    arr = as_feature_matrix(X)
    _require_nonzero(arr)
    s = np.linalg.svd(arr, compute_uv=False)
    return spectrum_from_singular_values(s, arr.shape)


def erank_value(X: np.ndarray) -> float:
    """Effective rank as a bare float, skipping input validation.

    Hot path for the blend optimizer; callers must pass a finite 2-D array.
    """
    s = np.linalg.svd(X, compute_uv=False)
    if s[0] <= 0.0:
        return 0.0
    kept = s[s > rank_cutoff(s, X.shape)]
    p = kept / kept.sum()
    return float(np.exp(-np.sum(p * np.log(p))))


def _check_k(dec: SpectralDecomposition, k: int, *, allow_rank: bool) -> None:
    upper = dec.numerical_rank if allow_rank else dec.numerical_rank - 1
    if not 1 <= k <= upper:
        raise IndexOutOfRangeError(
            f"k={k} outside [1, {upper}] for numerical rank {dec.numerical_rank}"
        )


def spectral_gap(dec: SpectralDecomposition, k: int) -> float:
    """``sigma_k - sigma_{k+1}`` with 1-based ``k < numerical_rank``."""
    _check_k(dec, k, allow_rank=False)
    s = dec.singular_values
    return float(s[k - 1] - s[k])


def dominant_subspace(dec: SpectralDecomposition, k: int) -> np.ndarray:
    """First ``k`` left singular vectors as a ``T x k`` orthonormal block."""
    _check_k(dec, k, allow_rank=True)
    return dec.left_vectors[:, :k]


def _basis_overlap(A, B) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim == 1:
        A = A[:, None]
    if B.ndim == 1:
        B = B[:, None]
    if A.shape[0] != B.shape[0]:
        raise DimensionMismatchError(
            f"bases live in different spaces: {A.shape[0]} vs {B.shape[0]} rows"
        )
    cosines = np.linalg.svd(A.T @ B, compute_uv=False)
    return np.clip(cosines, 0.0, 1.0)


def sin_theta_distance(A, B) -> float:
    """Largest principal-angle sine between two equal-dimension subspaces.

    Parameters
    ----------
    A, B : array_like, (n, k)
        Orthonormal bases.
    """
    A = np.atleast_2d(np.asarray(A, dtype=np.float64).T).T
    B = np.atleast_2d(np.asarray(B, dtype=np.float64).T).T
    if A.shape != B.shape:
        raise DimensionMismatchError(f"basis shapes differ: {A.shape} vs {B.shape}")
    # ||(I - A A^T) B||_2 keeps precision for small angles, unlike sqrt(1 - cos^2)
    residual = B - A @ (A.T @ B)
    return float(np.clip(np.linalg.norm(residual, 2), 0.0, 1.0))


def principal_angles(A, B) -> np.ndarray:
    """Principal angles in degrees, nondecreasing, between span(A) and span(B)."""
    cosines = _basis_overlap(A, B)
    return np.degrees(np.arccos(cosines))
