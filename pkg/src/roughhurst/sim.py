"""Exact simulation of fractional Gaussian noise and fractional Brownian motion.

Two samplers are provided: circulant embedding (Davies-Harte / Wood-Chan),
which is O(N log N) and used for all production runs, and a dense Cholesky
factorisation, which is O(N^3) and kept as an independent exactness check.

Random numbers
--------------
Every draw is reproducible from the integer seed alone:

* the bit stream is numpy's ``PCG64`` seeded through ``SeedSequence(seed)``;
  numpy guarantees this raw 64-bit stream across versions and platforms;
* each 64-bit word is reduced to its top 53 bits ``k`` and mapped to the open
  unit interval as ``u = (k + 1/2) / 2**53``;
* standard normals are obtained by inverse CDF, ``z = ndtri(u)``.

Because ``ndtri`` comes from scipy's cephes port, bitwise equality across
platforms additionally depends on the platform libm; on one platform the
output is bitwise stable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
from scipy.special import ndtri

from .errors import DomainError, EmbeddingError, NumericalError
from .paths import DyadicPath

__all__ = [
    "Method",
    "SimBackend",
    "FbmPath",
    "fgn_autocov",
    "standard_normals",
    "embedding_sqrt_eigs",
    "simulate_fgn",
    "simulate_fbm",
    "CHOLESKY_MAX_LEVEL",
]

CHOLESKY_MAX_LEVEL = 14
_CHOLESKY_MAX_STEPS = 2**CHOLESKY_MAX_LEVEL + 1


class Method(str, enum.Enum):
    CHOLESKY = "cholesky"
    CIRCULANT = "circulant"


@dataclass(frozen=True)
class SimBackend:
    """Sampler choice.

    ``eigen_clamp_tol`` is relative to the largest circulant eigenvalue:
    eigenvalues in ``[-tol * max, 0)`` are clamped to zero, anything more
    negative raises :class:`EmbeddingError`.
    """

    method: Method = Method.CIRCULANT
    eigen_clamp_tol: float = 1e-10

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not self.eigen_clamp_tol >= 0:
            raise DomainError(f"eigen_clamp_tol must be >= 0, got {self.eigen_clamp_tol}")

    @classmethod
    def coerce(cls, backend: "SimBackend | str | Method | None") -> "SimBackend":
        if backend is None:
            return cls()
        if isinstance(backend, SimBackend):
            return backend
        return cls(Method(backend))


@dataclass(frozen=True, kw_only=True)
class FbmPath(DyadicPath):
    """fBm sampled at ``k * 2**-level``; ``values[0] == 0``."""

    hurst: float
    seed: int
    backend: str = Method.CIRCULANT.value


def _check_hurst(H: float) -> None:
    if not (0.0 < H < 1.0):
        raise DomainError(f"Hurst parameter must lie in (0, 1), got {H!r}")


def fgn_autocov(k, H: float):
    """Autocovariance of unit-spacing, unit-variance fractional Gaussian noise.

    ``gamma(k) = (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2``; ``k`` may be an
    integer or an integer array.
    """
    _check_hurst(H)
    k = np.abs(np.asarray(k, dtype=float))
    two_h = 2.0 * H
    out = 0.5 * ((k + 1.0) ** two_h - 2.0 * k**two_h + np.abs(k - 1.0) ** two_h)
    return float(out) if out.ndim == 0 else out


def standard_normals(seed: int, size: int) -> np.ndarray:
    """``size`` i.i.d. N(0, 1) draws determined by ``seed`` (see module docs)."""
    seed = int(seed)
    if seed < 0 or seed >= 2**64:
        raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
    bitgen = np.random.PCG64(np.random.SeedSequence(seed))
    raw = bitgen.random_raw(size)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(u)


def embedding_sqrt_eigs(gamma: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Square roots of the eigenvalues of the circulant built from ``gamma``.

    ``gamma`` holds the autocovariances at lags 0..m; the circulant of size
    2m has first row ``[g(0), ..., g(m), g(m-1), ..., g(1)]``.
    """
    gamma = np.asarray(gamma, dtype=float)
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    eig = np.fft.rfft(row).real
    lam_min = eig.min()
    if lam_min < -tol * eig.max():
        raise EmbeddingError(
            f"circulant embedding is not nonnegative definite (size {row.size}): "
            f"most negative eigenvalue {lam_min:.3e}",
            min_eigenvalue=float(lam_min),
        )
    return np.sqrt(np.clip(eig, 0.0, None))


@lru_cache(maxsize=16)
def _fgn_sqrt_eigs(m: int, H: float, tol: float) -> np.ndarray:
    out = embedding_sqrt_eigs(fgn_autocov(np.arange(m + 1), H), tol)
    out.flags.writeable = False
    return out


@lru_cache(maxsize=2)
def _cholesky_factor(n: int, H: float) -> np.ndarray:
    cov = scipy.linalg.toeplitz(fgn_autocov(np.arange(n), H))
    try:
        fac = scipy.linalg.cholesky(cov, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Cholesky factorisation failed for n={n}, H={H}: {exc}") from exc
    fac.flags.writeable = False
    return fac


def _fgn_circulant(n_steps: int, H: float, seed: int, tol: float) -> np.ndarray:
    m = 1 << max(n_steps - 1, 1).bit_length()
    sqrt_eig = _fgn_sqrt_eigs(m, H, tol)
    z = standard_normals(seed, 2 * m)
    spec = np.empty(m + 1, dtype=np.complex128)
    spec[0] = z[0]
    spec[m] = z[1]
    spec[1:m].real = z[2 : m + 1]
    spec[1:m].imag = z[m + 1 :]
    spec[1:m] *= np.sqrt(0.5)
    spec *= sqrt_eig * np.sqrt(2 * m)
    return np.fft.irfft(spec, n=2 * m)[:n_steps]


def _fgn_cholesky(n_steps: int, H: float, seed: int) -> np.ndarray:
    if n_steps > _CHOLESKY_MAX_STEPS:
        raise DomainError(
            f"Cholesky backend limited to {_CHOLESKY_MAX_STEPS} steps (level "
            f"{CHOLESKY_MAX_LEVEL}); got {n_steps}"
        )
    return _cholesky_factor(n_steps, H) @ standard_normals(seed, n_steps)


def simulate_fgn(
    n_steps: int, H: float, seed: int, backend: SimBackend | str | None = None
) -> np.ndarray:
    """Draw ``n_steps`` values of unit-spacing fractional Gaussian noise.

    Identical ``(n_steps, H, seed, backend)`` give identical output. The two
    backends have the same law but different sample paths.

    Raises:
        DomainError: ``H`` outside (0, 1), ``n_steps < 1`` or Cholesky asked
            for more than 2**14 + 1 steps.
        EmbeddingError: circulant eigenvalue below ``-tol * max``.
        NumericalError: Cholesky factorisation failed.
    """
    _check_hurst(H)
    n_steps = int(n_steps)
    if n_steps < 1:
        raise DomainError(f"n_steps must be >= 1, got {n_steps}")
    be = SimBackend.coerce(backend)
    if be.method is Method.CHOLESKY:
        return _fgn_cholesky(n_steps, H, seed)
    return _fgn_circulant(n_steps, H, seed, be.eigen_clamp_tol)


def simulate_fbm(
    level: int, H: float, seed: int, backend: SimBackend | str | None = None
) -> FbmPath:
    """fBm on the dyadic grid of ``level`` via cumulated fGn.

    Self-similarity gives ``W(k 2^-L) = 2^{-LH} * sum_{j<k} fgn_j``.
    """
    level = int(level)
    if level < 1:
        raise DomainError(f"level must be >= 1, got {level}")
    be = SimBackend.coerce(backend)
    noise = simulate_fgn(2**level, H, seed, be)
    values = np.empty(2**level + 1)
    values[0] = 0.0
    np.cumsum(noise, out=values[1:])
    values *= 2.0 ** (-level * H)
    return FbmPath(
        level=level,
        values=values,
        origin=f"fbm(H={H}, seed={seed}, backend={be.method.value})",
        hurst=H,
        seed=int(seed),
        backend=be.method.value,
    )
