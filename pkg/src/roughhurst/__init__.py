"""Hurst-parameter estimation for rough volatility from integrated variance."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    ConfigError,
    ConsistencyError,
    DegeneratePathError,
    DomainError,
    EmbeddingError,
    FormatError,
    InsufficientLevelsError,
    InsufficientResolutionError,
    NumericalError,
    RateFitError,
    RoughHurstError,
)
from .estimator import (  # noqa: F401
    EstimateReport,
    SeqEstimatorConfig,
    beta_coeffs,
    eta_seq,
    faber_schauder_coeffs,
    r_hat,
    r_seq,
    vartheta_coeffs,
)
from .paths import DyadicPath  # noqa: F401
from .processes import (  # noqa: F401
    FouSpec,
    IntegratedPath,
    Transform,
    build_drifted_fbm,
    build_fou,
    check_regularity,
    integrate_transform,
)
from .sim import FbmPath, SimBackend, fgn_autocov, simulate_fbm, simulate_fgn  # noqa: F401
