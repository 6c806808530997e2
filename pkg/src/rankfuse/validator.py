"""Numerical audit of the channel-fusion effective-rank theorem.

Given a concrete instance ``(X, Y, C_low, alpha, k)`` this module measures the
constants the theorem is stated in terms of (beta, epsilon, eta, gamma,
delta_k), checks each of the four assumptions, and evaluates every
intermediate bound of the proof so that a violation can be pinned to a step.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DimensionMismatchError, IndexOutOfRangeError, InvalidArgumentError
from .fusion import BlendSpec, blend
from .informativeness import LowChannelSet, channel_importance
from .spectral import (
    as_feature_matrix,
    decompose,
    dominant_subspace,
    effective_rank,
    sin_theta_distance,
    spectral_gap,
)

ZERO_MEAN_RTOL = 1e-8
# residual energy below (RESIDUAL_RTOL * ||y_c||)^2 is rounding noise
RESIDUAL_RTOL = 1e-12


@dataclass
class AssumptionReport:
    beta_measured: float
    zero_mean_maxdev: float
    epsilon_measured: float
    eta_measured: float
    eta_max_allowed: float
    delta_k: float
    gamma_measured: float
    k: int
    c_low_size: int
    passes: dict[int, bool]
    warnings: list[str] = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return all(self.passes.values())


@dataclass
class TheoremReport:
    assumptions: AssumptionReport
    delta_frobenius: float
    delta_spectral: float
    step1_bound_ok: bool
    step1_frobenius_bound: float
    sin_theta_measured: float
    sin_theta_bound: float
    step3_inner_product: float
    step3_bound: float
    frobenius_gain: float
    step4_margin: float
    step4_ok: bool
    weyl_max_shift: float
    dominant_change: float
    tail_change: float
    erank_before: float
    erank_after: float
    conclusion_ok: bool

    @property
    def erank_gain(self) -> float:
        return self.erank_after - self.erank_before

    def to_dict(self) -> dict:
        out = asdict(self)
        out["assumptions"]["passes"] = {str(i): v for i, v in self.assumptions.passes.items()}
        out["assumptions"]["all_pass"] = self.assumptions.all_pass
        out["erank_gain"] = self.erank_gain
        return out


def default_k(X, capture: float = 0.90) -> int:
    """Smallest ``k`` whose leading squared singular values hold ``capture`` of the energy.

    Clamped to ``numerical_rank - 1`` so a spectral gap exists.
    """
    dec = decompose(X)
    if dec.numerical_rank < 2:
        raise IndexOutOfRangeError("need numerical rank >= 2 to pick a dominant subspace")
    energy = np.cumsum(dec.singular_values**2)
    k = int(np.searchsorted(energy, capture * energy[-1]) + 1)
    return min(k, dec.numerical_rank - 1)


def _prepare(X, Y, low_set: LowChannelSet, k: int):
    X = as_feature_matrix(X, "X")
    Y = as_feature_matrix(Y, "Y")
    if X.shape != Y.shape:
        raise DimensionMismatchError(f"modalities differ in shape: {X.shape} vs {Y.shape}")
    dec = decompose(X)
    if not 1 <= k < dec.numerical_rank:
        raise IndexOutOfRangeError(f"k={k} outside [1, {dec.numerical_rank - 1}]")
    return X, Y, dec, low_set.as_array()


def center_columns(Y) -> np.ndarray:
    Y = as_feature_matrix(Y, "Y")
    return Y - Y.mean(axis=0, keepdims=True)


def check_assumptions(
    X,
    Y,
    low_set: LowChannelSet,
    spec: BlendSpec,
    k: int,
    *,
    beta: float | None = None,
    center: bool = False,
    convention: str = "own",
) -> AssumptionReport:
    """Measure the theorem's constants and test its four assumptions.

    Parameters
    ----------
    beta : float, optional
        Column-norm cap to test against. When omitted the measured maximum
        is used, which is the tightest constant for which the bound holds.
    center : bool
        Column-center ``Y`` before auditing. Off by default so raw data is
        audited as given.

    Notes
    -----
    ``eta`` uses the full-rank importance score, ``I_c = ||x_c||^2``,
    because the proof's perturbation and inner-product bounds rely on that
    identity. ``gamma`` is the worst ratio over ``C_low``; a channel with no
    residual-subspace energy reports ``inf`` and fails the alignment check
    (``passes[4]``).
    """
    if center:
        Y = center_columns(Y)
    X, Y, dec, idx = _prepare(X, Y, low_set, k)
    r = dec.numerical_rank
    warnings: list[str] = []
    n_low = idx.size

    fused = blend(X, Y, spec, convention).fused
    scores = channel_importance(dec).scores

    if n_low == 0:
        beta_m = zero_dev = eps = eta = gamma = 0.0
        zero_ok = True
        warnings.append("low channel set is empty")
    else:
        y_low = Y[:, idx]
        norms = np.linalg.norm(y_low, axis=0)
        beta_m = float(norms.max())
        means = np.abs(y_low.mean(axis=0))
        zero_dev = float(means.max())
        zero_ok = bool(np.all(means <= ZERO_MEAN_RTOL * norms))
        eps = float(np.sum((fused[:, idx] - X[:, idx]) ** 2))
        eta = float(scores[idx].max())

        coeffs = dec.left_vectors[:, :r].T @ y_low
        dom = np.sum(coeffs[:k] ** 2, axis=0)
        res = np.sum(coeffs[k:r] ** 2, axis=0)
        ratios = np.full(n_low, math.inf)
        nz = res > (RESIDUAL_RTOL * norms) ** 2
        ratios[nz] = dom[nz] / res[nz]
        if not np.all(nz):
            bad = [int(c) for c in idx[~nz]]
            warnings.append(f"DegenerateGamma: no residual-subspace energy in channels {bad}")
        gamma = float(ratios.max())

    delta_k = spectral_gap(dec, k)

    beta_ok = beta is None or beta_m <= beta
    beta_used = beta_m if beta is None else float(beta)
    if n_low == 0:
        root_bound = math.inf
    else:
        first = delta_k / (3.0 * math.sqrt(n_low))
        second = eps / (4.0 * n_low * beta_used) if beta_used > 0 else math.inf
        root_bound = min(first, second)
    eta_max = root_bound * root_bound if root_bound > 0 else 0.0

    passes = {
        1: bool(zero_ok and beta_ok),
        2: bool(eps > 0.0),
        3: bool(delta_k > 0.0 and math.sqrt(eta) <= root_bound),
        4: bool(gamma < 1.0),
    }
    return AssumptionReport(
        beta_measured=beta_m,
        zero_mean_maxdev=zero_dev,
        epsilon_measured=eps,
        eta_measured=eta,
        eta_max_allowed=eta_max,
        delta_k=delta_k,
        gamma_measured=gamma,
        k=int(k),
        c_low_size=int(n_low),
        passes=passes,
        warnings=warnings,
    )


def flattening_profile(X, X_fused, k: int) -> tuple[float, float]:
    """Change in dominant and tail squared spectral mass after fusion.

    Returns ``(sum_{j<=k} (s'_j^2 - s_j^2), sum_{j>k} (s'_j^2 - s_j^2))``.
    """
    X = as_feature_matrix(X, "X")
    X_fused = as_feature_matrix(X_fused, "X_fused")
    if X.shape != X_fused.shape:
        raise DimensionMismatchError(f"shapes differ: {X.shape} vs {X_fused.shape}")
    if not 0 <= k <= min(X.shape):
        raise IndexOutOfRangeError(f"k={k} outside [0, {min(X.shape)}]")
    diff = np.linalg.svd(X_fused, compute_uv=False) ** 2 - np.linalg.svd(X, compute_uv=False) ** 2
    return float(diff[:k].sum()), float(diff[k:].sum())


def validate_theorem(
    X,
    Y,
    low_set: LowChannelSet,
    spec: BlendSpec,
    k: int,
    *,
    beta: float | None = None,
    center: bool = False,
    convention: str = "own",
) -> TheoremReport:
    """Evaluate every assumption and proof-step quantity on one instance."""
    if center:
        Y = center_columns(Y)
    assumptions = check_assumptions(X, Y, low_set, spec, k, beta=beta, convention=convention)
    X, Y, dec, idx = _prepare(X, Y, low_set, k)
    result = blend(X, Y, spec, convention)
    delta = result.delta
    fused = result.fused

    beta_c = assumptions.beta_measured if beta is None else float(beta)
    eta = assumptions.eta_measured
    gamma = assumptions.gamma_measured
    n_low = assumptions.c_low_size
    delta_k = assumptions.delta_k

    d_fro = float(np.linalg.norm(delta))
    d_two = float(np.linalg.norm(delta, 2)) if delta.any() else 0.0

    if delta.any():
        dec_fused = decompose(fused)
        sin_meas = sin_theta_distance(
            dominant_subspace(dec, k), dec_fused.left_vectors[:, :k]
        )
        s_after = dec_fused.singular_values
    else:
        sin_meas = 0.0
        s_after = dec.singular_values
    sin_bound = d_two / (delta_k - d_two) if d_two < delta_k else math.inf

    inner = float(np.sum(X * delta))
    step3_bound = n_low * (beta_c * (math.sqrt(gamma) + 1.0) * math.sqrt(eta) + eta)
    frob_gain = float(np.sum(fused * fused) - np.sum(X * X))
    margin = frob_gain - assumptions.epsilon_measured / 2.0

    dominant_change = float(np.sum(s_after[:k] ** 2 - dec.singular_values[:k] ** 2))
    tail_change = float(np.sum(s_after[k:] ** 2 - dec.singular_values[k:] ** 2))

    before = effective_rank(dec).effective_rank
    after = effective_rank(fused).effective_rank if delta.any() else before
    return TheoremReport(
        assumptions=assumptions,
        delta_frobenius=d_fro,
        delta_spectral=d_two,
        step1_bound_ok=bool(d_two < delta_k / 2.0),
        step1_frobenius_bound=math.sqrt(n_low) * (beta_c + math.sqrt(eta)),
        sin_theta_measured=sin_meas,
        sin_theta_bound=sin_bound,
        step3_inner_product=abs(inner),
        step3_bound=step3_bound,
        frobenius_gain=frob_gain,
        step4_margin=margin,
        step4_ok=bool(margin > 0.0),
        weyl_max_shift=float(np.max(np.abs(s_after - dec.singular_values))),
        dominant_change=dominant_change,
        tail_change=tail_change,
        erank_before=before,
        erank_after=after,
        conclusion_ok=bool(after > before),
    )


def check_instance(
    X, Y, low_set: LowChannelSet, alpha: float, k: int | None = None, **kwargs
) -> TheoremReport:
    """Convenience wrapper: uniform alpha and default ``k``."""
    if not 0.0 <= alpha <= 1.0:
        raise InvalidArgumentError(f"alpha {alpha} outside [0, 1]")
    k = default_k(X) if k is None else k
    return validate_theorem(X, Y, low_set, BlendSpec.uniform(low_set, alpha), k, **kwargs)
