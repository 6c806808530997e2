"""Synthetic feature matrices and modality pairs with controlled structure."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InfeasibleConstructionError, InvalidArgumentError, InvalidSpectrumError
from .informativeness import default_low_count
from .spectral import as_feature_matrix, decompose

MAX_ATTEMPTS = 100
GAMMA_SLACK = 1e-6


@dataclass(frozen=True)
class GeneratorConfig:
    """Parameters for synthetic matrices.

    ``low_channels`` defaults to the shipped 10% exchange ratio. ``novelty``
    is the share of each injected column's non-dominant energy that lies
    outside the base matrix's column space.
    """

    rows: int
    cols: int
    singular_values: tuple[float, ...] | None = None
    gamma_target: float = 0.2
    beta: float = 1.0
    k: int = 3
    seed: int = 0
    low_channels: int | None = None
    low_scale: float = 1e-3
    novelty: float = 0.5

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise InvalidArgumentError(f"need rows, cols >= 1, got {self.rows}x{self.cols}")
        if not 0.0 <= self.gamma_target < 1.0:
            raise InvalidArgumentError(f"gamma_target must lie in [0, 1), got {self.gamma_target}")
        if self.beta <= 0:
            raise InvalidArgumentError(f"beta must be positive, got {self.beta}")
        if self.seed < 0:
            raise InvalidArgumentError("seed must be a nonnegative integer")
        if not 0.0 <= self.novelty < 1.0:
            raise InvalidArgumentError(f"novelty must lie in [0, 1), got {self.novelty}")
        if self.singular_values is not None:
            s = np.asarray(self.singular_values, dtype=np.float64)
            if s.ndim != 1 or s.size == 0 or s.size > min(self.rows, self.cols):
                raise InvalidSpectrumError(
                    f"need 1..{min(self.rows, self.cols)} singular values, got {s.size}"
                )
            if np.any(~np.isfinite(s)) or np.any(s < 0) or np.any(np.diff(s) > 0):
                raise InvalidSpectrumError("singular values must be finite, nonnegative, nonincreasing")

    @property
    def n_low(self) -> int:
        if self.low_channels is not None:
            return self.low_channels
        return default_low_count(self.cols)


def random_orthonormal(rows: int, cols: int, rng: np.random.Generator, *, centered: bool = False) -> np.ndarray:
    """Random ``rows x cols`` orthonormal frame, sign-canonicalized.

    With ``centered`` the columns are also orthogonal to the all-ones vector,
    so every vector in their span is zero-mean.
    """
    limit = rows - 1 if centered else rows
    if cols > limit:
        raise InvalidArgumentError(f"cannot fit {cols} orthonormal columns in dimension {limit}")
    if cols == 0:
        return np.zeros((rows, 0))
    G = rng.standard_normal((rows, cols))
    if centered:
        G -= G.mean(axis=0, keepdims=True)
    Q, _ = np.linalg.qr(G)
    return _canonical_signs(Q)


def _canonical_signs(Q: np.ndarray) -> np.ndarray:
    for j in range(Q.shape[1]):
        nz = np.flatnonzero(np.abs(Q[:, j]) > 1e-12)
        if nz.size and Q[nz[0], j] < 0:
            Q[:, j] = -Q[:, j]
    return Q


def _complement(basis: np.ndarray, rows: int, rng: np.random.Generator, count: int, *, centered: bool) -> np.ndarray:
    """Orthonormal frame orthogonal to ``basis`` (and to ones when ``centered``)."""
    G = rng.standard_normal((rows, count))
    if centered:
        G -= G.mean(axis=0, keepdims=True)
    for _ in range(2):
        G -= basis @ (basis.T @ G)
    Q, _ = np.linalg.qr(G)
    return _canonical_signs(Q)


def gen_spectrum_matrix(config: GeneratorConfig) -> np.ndarray:
    """Matrix with exactly the prescribed singular values and random frames."""
    if config.singular_values is None:
        raise InvalidSpectrumError("gen_spectrum_matrix needs singular_values")
    s = np.asarray(config.singular_values, dtype=np.float64)
    rng = np.random.default_rng(config.seed)
    U = random_orthonormal(config.rows, s.size, rng)
    V = random_orthonormal(config.cols, s.size, rng)
    return (U * s) @ V.T


def default_spectrum(config: GeneratorConfig) -> np.ndarray:
    """Three-band spectrum: dominant block, gap, residual block, tiny tail.

    The tail holds one value per low-informativeness channel.
    """
    n_low = config.n_low
    m = min(config.rows - 1, config.cols)
    n_strong = m - n_low
    if n_strong <= config.k:
        raise InvalidArgumentError(
            f"k={config.k} leaves no residual block with {n_strong} strong components"
        )
    dominant = np.linspace(3.0, 2.5, config.k)
    residual = np.linspace(1.0, 0.5, n_strong - config.k)
    tail = config.low_scale * np.linspace(1.0, 0.5, n_low)
    return np.concatenate([dominant, residual, tail])


def _base_matrix(config: GeneratorConfig, rng: np.random.Generator):
    """Base modality whose low channels carry only the spectral tail.

    Returns the matrix and the sorted low-channel indices.
    """
    s = (
        np.asarray(config.singular_values, dtype=np.float64)
        if config.singular_values is not None
        else default_spectrum(config)
    )
    n_low = config.n_low
    if s.size < n_low or s.size - n_low > config.cols - n_low:
        raise InvalidSpectrumError(f"spectrum of length {s.size} cannot host {n_low} low channels")
    T, D = config.rows, config.cols
    U = random_orthonormal(T, s.size, rng, centered=True)
    low = np.sort(rng.choice(D, size=n_low, replace=False))
    strong = np.setdiff1d(np.arange(D), low)
    n_head = s.size - n_low
    V = np.zeros((D, s.size))
    V[np.ix_(strong, np.arange(n_head))] = random_orthonormal(strong.size, n_head, rng)
    V[np.ix_(low, np.arange(n_head, s.size))] = random_orthonormal(n_low, n_low, rng)
    return (U * s) @ V.T, low


def _injected_columns(X: np.ndarray, config: GeneratorConfig, rng: np.random.Generator, count: int) -> np.ndarray:
    """Zero-mean columns with dominant-to-residual energy ratio ``gamma_target``.

    The non-dominant part is drawn from a low-rank latent model on a frame that
    mixes the base's residual column space with directions outside it, so the
    columns carry a spectral structure of their own.
    """
    T = X.shape[0]
    k = config.k
    dec = decompose(X)
    r = dec.numerical_rank
    U_dom = dec.left_vectors[:, :k]
    U_res = dec.left_vectors[:, k:r]
    n_perp = T - 1 - r
    p = min(U_res.shape[1], n_perp, count) if config.novelty > 0 else min(U_res.shape[1], count)
    if p < 1:
        raise InfeasibleConstructionError("base matrix leaves no residual subspace to inject into")

    R1 = random_orthonormal(U_res.shape[1], p, rng)
    frame = np.sqrt(1.0 - config.novelty) * (U_res @ R1)
    if config.novelty > 0:
        Q_perp = _complement(dec.left_vectors[:, :r], T, rng, n_perp, centered=True)
        R2 = random_orthonormal(n_perp, p, rng)
        frame = frame + np.sqrt(config.novelty) * (Q_perp @ R2)

    weights = np.where(np.arange(p) < k, 2.0, 1.0)
    Z = frame @ (weights[:, None] * rng.standard_normal((p, count)))
    res_energy = np.sum((U_res.T @ Z) ** 2, axis=0)
    H = rng.standard_normal((k, count))
    H /= np.linalg.norm(H, axis=0, keepdims=True)
    Y = Z + U_dom @ (H * np.sqrt(config.gamma_target * res_energy))
    target_norms = config.beta * rng.uniform(0.5, 1.0, size=count)
    Y *= target_norms / np.linalg.norm(Y, axis=0)
    return Y


def _measure_gamma(X: np.ndarray, Y: np.ndarray, k: int) -> float:
    dec = decompose(X)
    coeffs = dec.left_vectors[:, : dec.numerical_rank].T @ Y
    dom = np.sum(coeffs[:k] ** 2, axis=0)
    res = np.sum(coeffs[k:] ** 2, axis=0)
    if np.any(res <= 0):
        return np.inf
    return float(np.max(dom / res))


def gen_complementary_pair(config: GeneratorConfig) -> tuple[np.ndarray, np.ndarray]:
    """Base modality ``X`` and a complementary modality ``Y``.

    ``X`` has a dominant/residual/tail spectrum whose tail lives on
    ``n_low`` low-informativeness channels. ``Y`` has its own set of
    ``n_low`` near-silent channels, disjoint from those of ``X``; every other
    column is zero-mean, bounded in norm by ``beta`` and has dominant-to-
    residual energy ratio ``gamma_target`` against the top-``k`` left
    singular subspace of ``X``.
    """
    T, D = config.rows, config.cols
    n_low = config.n_low
    if not 1 <= config.k < min(T, D):
        raise InvalidArgumentError(f"k={config.k} must satisfy 1 <= k < min(T, D)")
    if 2 * n_low > D:
        raise InvalidArgumentError(f"{n_low} low channels per modality do not fit in D={D}")
    rng = np.random.default_rng(config.seed)
    X, low_x = _base_matrix(config, rng)
    others = np.setdiff1d(np.arange(D), low_x)
    for _ in range(MAX_ATTEMPTS):
        low_y = np.sort(rng.choice(others, size=n_low, replace=False))
        strong_y = np.setdiff1d(np.arange(D), low_y)
        Y = np.empty_like(X)
        Y[:, strong_y] = _injected_columns(X, config, rng, strong_y.size)
        quiet = random_orthonormal(T, n_low, rng, centered=True)
        Y[:, low_y] = quiet * (config.low_scale * np.linspace(1.0, 0.5, n_low))
        Y -= Y.mean(axis=0, keepdims=True)
        norms = np.linalg.norm(Y, axis=0)
        over = norms > config.beta
        Y[:, over] *= config.beta / norms[over]
        if _measure_gamma(X, Y[:, low_x], config.k) <= config.gamma_target + GAMMA_SLACK:
            return X, Y
    raise InfeasibleConstructionError(
        f"could not hit gamma <= {config.gamma_target} after {MAX_ATTEMPTS} attempts"
    )


def perturb_noise(X, sigma: float, seed: int | None = None) -> np.ndarray:
    """Add i.i.d. zero-mean Gaussian noise with standard deviation ``sigma``."""
    if sigma < 0:
        raise InvalidArgumentError(f"sigma must be >= 0, got {sigma}")
    X = as_feature_matrix(X)
    if sigma == 0:
        return X.copy()
    rng = np.random.default_rng(seed)
    return X + sigma * rng.standard_normal(X.shape)


def calibrate_sigma(X, relative_change: float, seed: int | None = None) -> float:
    """Noise level whose perturbation has ``||G||_F / ||X||_F == relative_change``.

    With a fixed seed the noise draw is ``sigma * Z`` for a fixed ``Z``, so the
    ratio is linear in ``sigma`` and the level is solved directly.
    """
    if relative_change < 0:
        raise InvalidArgumentError("relative_change must be >= 0")
    X = as_feature_matrix(X)
    if relative_change == 0:
        return 0.0
    Z = np.random.default_rng(seed).standard_normal(X.shape)
    return float(relative_change * np.linalg.norm(X) / np.linalg.norm(Z))


def negate(X) -> np.ndarray:
    return -as_feature_matrix(X)


def with_gamma(config: GeneratorConfig, gamma: float) -> GeneratorConfig:
    return replace(config, gamma_target=gamma)
