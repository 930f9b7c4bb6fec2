"""Roughness estimation from dyadic observations of an antiderivative y.

For a path y observed on the grid of level n + 2 the approximated
Faber-Schauder coefficients are

    vartheta[n, k] = 2^(3n/2 + 3) * (y(4k h) - 2 y((4k+1) h) + 2 y((4k+3) h) - y((4k+4) h)),

with h = 2^-(n+2), and the raw estimate is
``r_hat_n = 1 - log2(||vartheta[n, .]||_2) / n``.

The raw estimate shifts by ``-log2(eta) / n`` when y is multiplied by eta.
The sequential scale estimate picks ``lambda = log2(eta)`` minimising

    sum_{k=n-m}^{n} alpha[n-k] * (r_hat_k(eta y) - r_hat_{k-1}(eta y))^2,

which is a quadratic in lambda with a closed-form minimiser, and returns
``r_hat_n(eta y) = r_hat_n(y) - lambda / n``.  The same number is a fixed
linear combination of ``r_hat_{n-m-1}, ..., r_hat_n``; both routes are
evaluated and must agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigError,
    ConsistencyError,
    DegeneratePathError,
    InsufficientLevelsError,
    InsufficientResolutionError,
)
from .paths import DyadicPath

__all__ = [
    "SeqEstimatorConfig",
    "EstimateReport",
    "vartheta_coeffs",
    "faber_schauder_coeffs",
    "r_hat",
    "r_hat_levels",
    "beta_coeffs",
    "eta_seq",
    "r_seq",
    "seq_objective",
    "DUAL_TOL",
]

DUAL_TOL = 1e-10
# bracket magnitudes below this multiple of eps * (sum of |terms|) are rounding noise
_CANCEL_FACTOR = 64.0


@dataclass(frozen=True)
class SeqEstimatorConfig:
    """Window length m and weights alpha_0..alpha_m (alpha_0 > 0, rest >= 0)."""

    m: int = 3
    alphas: tuple[float, ...] = (1.0, 1.0, 1.0, 1.0)

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alphas)
        object.__setattr__(self, "alphas", alphas)
        if int(self.m) != self.m or self.m < 1:
            raise ConfigError(f"m must be a positive integer, got {self.m}")
        if len(alphas) != self.m + 1:
            raise ConfigError(f"need m + 1 = {self.m + 1} weights, got {len(alphas)}")
        if not all(math.isfinite(a) and a >= 0 for a in alphas):
            raise ConfigError(f"weights must be finite and nonnegative, got {alphas}")
        if not alphas[0] > 0:
            raise ConfigError("alpha_0 must be strictly positive")

    @classmethod
    def uniform(cls, m: int) -> "SeqEstimatorConfig":
        return cls(m, (1.0,) * (m + 1))

    def window(self, n: int) -> range:
        """Levels n-m-1..n whose raw estimates enter the sequential estimate."""
        return range(n - self.m - 1, n + 1)

    def to_dict(self) -> dict:
        return {"m": self.m, "alphas": list(self.alphas)}


@dataclass(frozen=True)
class EstimateReport:
    n: int
    r_hat_levels: dict[int, float]
    lambda_star: float
    eta_seq: float
    r_seq: float
    beta: tuple[float, ...]
    config: SeqEstimatorConfig
    regularity: dict | None = None
    r_seq_beta: float = field(default=float("nan"), repr=False)

    @property
    def r_hat(self) -> float:
        return self.r_hat_levels[self.n]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "r_hat": self.r_hat,
            "r_hat_levels": {str(k): v for k, v in sorted(self.r_hat_levels.items())},
            "lambda_star": self.lambda_star,
            "eta_seq": self.eta_seq,
            "r_seq": self.r_seq,
            "r_seq_beta": self.r_seq_beta,
            "beta": {str(k): b for k, b in zip(self.config.window(self.n), self.beta)},
            "config": self.config.to_dict(),
            "regularity": self.regularity,
        }


def _require_level(y: DyadicPath, needed: int, what: str) -> None:
    if y.level < needed:
        raise InsufficientResolutionError(
            f"{what} needs observations on level {needed}, path has level {y.level}",
            required_level=needed,
        )


def _stencil(y: DyadicPath, n: int) -> tuple[np.ndarray, np.ndarray]:
    v = y.restrict_values(n + 2)
    a, b, c, d = v[0:-1:4], v[1::4], v[3::4], v[4::4]
    bracket = (a - 2.0 * b) + (2.0 * c - d)
    scale = np.abs(a) + 2.0 * np.abs(b) + 2.0 * np.abs(c) + np.abs(d)
    return bracket, scale


def vartheta_coeffs(y: DyadicPath, n: int) -> np.ndarray:
    """The 2**n coefficients vartheta[n, 0..2**n - 1] of y at level n.

    Raises:
        InsufficientResolutionError: ``y.level < n + 2``.
    """
    if n < 0:
        raise ConfigError(f"n must be >= 0, got {n}")
    _require_level(y, n + 2, f"vartheta at n={n}")
    bracket, _ = _stencil(y, n)
    return 2.0 ** (1.5 * n + 3) * bracket


def faber_schauder_coeffs(f: DyadicPath, n: int) -> np.ndarray:
    """theta[n, k] = 2^(n/2) (2 f((2k+1)/2^(n+1)) - f(k/2^n) - f((k+1)/2^n))."""
    if n < 0:
        raise ConfigError(f"n must be >= 0, got {n}")
    _require_level(f, n + 1, f"Faber-Schauder coefficients at n={n}")
    v = f.restrict_values(n + 1)
    return 2.0 ** (n / 2) * (2.0 * v[1::2] - v[0:-1:2] - v[2::2])


def _log2_norm(y: DyadicPath, n: int) -> float:
    _require_level(y, n + 2, f"r_hat at n={n}")
    bracket, scale = _stencil(y, n)
    bnorm = float(np.linalg.norm(bracket))
    if bnorm == 0.0 or bnorm <= _CANCEL_FACTOR * np.finfo(float).eps * float(np.linalg.norm(scale)):
        raise DegeneratePathError(
            f"estimator undefined: zero coefficient norm at level {n} "
            "(y is a quadratic polynomial on this grid up to rounding)",
            level=n,
        )
    return (1.5 * n + 3) + math.log2(bnorm)


def r_hat(y: DyadicPath, n: int) -> float:
    """Raw estimate 1 - log2(||vartheta_n||) / n.

    Raises:
        DegeneratePathError: every coefficient vanishes (up to rounding).
    """
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    return 1.0 - _log2_norm(y, n) / n


def r_hat_levels(y: DyadicPath, levels) -> dict[int, float]:
    return {k: r_hat(y, k) for k in levels}


def _check_levels(n: int, config: SeqEstimatorConfig) -> None:
    if n <= config.m + 1:
        raise InsufficientLevelsError(
            f"sequential estimate needs n > m + 1 (n={n}, m={config.m})"
        )


def _c_s(n: int, config: SeqEstimatorConfig) -> float:
    return sum(config.alphas[n - k] / (k**2 * (k - 1) ** 2) for k in range(n - config.m, n + 1))


def beta_coeffs(n: int, config: SeqEstimatorConfig) -> np.ndarray:
    """Weights beta[n, k] for k = n-m-1..n (in that order).

    They satisfy sum(beta) = 1 and sum(beta / k) = 0.
    """
    _check_levels(n, config)
    m, al = config.m, config.alphas
    c = _c_s(n, config)
    out = np.empty(m + 2)
    out[0] = -al[m] / (c * n * (n - m) * (n - m - 1))
    for k in range(n - m, n):
        out[k - (n - m - 1)] = (al[n - k] / (k - 1) - al[n - k - 1] / (k + 1)) / (c * n * k)
    out[-1] = 1.0 + al[0] / (c * n**2 * (n - 1))
    return out


def _lambda_star(r: dict[int, float], n: int, config: SeqEstimatorConfig) -> float:
    num = 0.0
    den = 0.0
    for k in range(n - config.m, n + 1):
        w = 1.0 / (k * (k - 1))
        a = config.alphas[n - k]
        num += a * (r[k] - r[k - 1]) * w
        den += a * w * w
    return -num / den


def seq_objective(y: DyadicPath, n: int, config: SeqEstimatorConfig, eta: float) -> float:
    """The weighted sum of squared successive differences of r_hat(eta * y).

    Evaluated directly on the rescaled path; used to cross-check the
    closed-form minimiser.
    """
    ys = y.scaled(eta)
    r = r_hat_levels(ys, config.window(n))
    return sum(
        config.alphas[n - k] * (r[k] - r[k - 1]) ** 2 for k in range(n - config.m, n + 1)
    )


def eta_seq(y: DyadicPath, n: int, config: SeqEstimatorConfig | None = None) -> tuple[float, float]:
    """Sequential scaling factor; returns ``(eta, log2(eta))``."""
    config = config or SeqEstimatorConfig()
    _check_levels(n, config)
    _require_level(y, n + 2, "sequential estimate")
    lam = _lambda_star(r_hat_levels(y, config.window(n)), n, config)
    return 2.0**lam, lam


def r_seq(
    y: DyadicPath,
    n: int,
    config: SeqEstimatorConfig | None = None,
    regularity: dict | None = None,
) -> EstimateReport:
    """Scale-invariant sequential estimate with its intermediate quantities.

    Raises:
        DegeneratePathError: a window level has zero coefficient norm.
        ConsistencyError: the closed-form and weighted-sum evaluations differ
            by more than ``DUAL_TOL``.
    """
    config = config or SeqEstimatorConfig()
    _check_levels(n, config)
    _require_level(y, n + 2, "sequential estimate")
    r = r_hat_levels(y, config.window(n))
    lam = _lambda_star(r, n, config)
    direct = r[n] - lam / n
    beta = beta_coeffs(n, config)
    combo = float(sum(b * r[k] for b, k in zip(beta, config.window(n))))
    if not abs(direct - combo) <= DUAL_TOL:
        raise ConsistencyError(
            f"sequential estimate disagrees between routes: {direct!r} vs {combo!r}"
        )
    return EstimateReport(
        n=n,
        r_hat_levels=r,
        lambda_star=lam,
        eta_seq=2.0**lam,
        r_seq=direct,
        beta=tuple(float(b) for b in beta),
        config=config,
        regularity=regularity,
        r_seq_beta=combo,
    )
