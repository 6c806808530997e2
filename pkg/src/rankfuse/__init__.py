"""Effective-rank diagnostics and rank-targeted channel fusion for multimodal features."""

from .analysis import FusionSettings, PairFusion, calibrated_sigmas, fuse_pair, noise_sweep, pair_score
from .errors import (
    DimensionMismatchError,
    IndexOutOfRangeError,
    InfeasibleConstructionError,
    InvalidAlphaError,
    InvalidArgumentError,
    InvalidSpectrumError,
    MatrixParseError,
    NonFiniteError,
    RankFuseError,
    ZeroMatrixError,
)
from .fusion import (
    BlendOptimization,
    BlendSpec,
    FusionResult,
    OptimizerConfig,
    blend,
    erank_gain_pair,
    harmonic_mean_gain,
    optimize_blend,
    symmetric_fuse,
)
from .informativeness import (
    ChannelImportanceProfile,
    LowChannelSet,
    channel_importance,
    default_low_count,
    eta_feasibility_bound,
    low_channels_by_ratio,
    select_low_channels,
)
from .spectral import (
    SpectralDecomposition,
    Spectrum,
    decompose,
    dominant_subspace,
    effective_rank,
    principal_angles,
    sin_theta_distance,
    spectral_gap,
)
from .synth import (
    GeneratorConfig,
    calibrate_sigma,
    gen_complementary_pair,
    gen_spectrum_matrix,
    negate,
    perturb_noise,
)
from .validator import (
    AssumptionReport,
    TheoremReport,
    check_assumptions,
    check_instance,
    default_k,
    flattening_profile,
    validate_theorem,
)

__version__ = "0.1.0"
