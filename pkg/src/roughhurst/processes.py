"""Observable processes: X (fOU or drifted fBm), g(X) and Y = int_0^t g(X_s) ds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numba
import numpy as np

from .errors import ConfigError, DomainError, NumericalError
from .paths import DyadicPath
from .sim import FbmPath

__all__ = [
    "FouSpec",
    "Transform",
    "TRANSFORMS",
    "IntegratedPath",
    "Regularity",
    "build_fou",
    "build_drifted_fbm",
    "integrate_transform",
    "check_regularity",
]

Drift = Union[None, float, Callable[[float, float], float]]


@dataclass(frozen=True)
class FouSpec:
    """Parameters of X_t = x0 + rho * int_0^t (mu - X_s) ds + W^H_t."""

    x0: float
    rho: float
    mu: float
    hurst: float

    def __post_init__(self):
        if not (0.0 < self.hurst < 1.0):
            raise DomainError(f"hurst must lie in (0, 1), got {self.hurst}")
        if not self.rho >= 0:
            raise DomainError(f"rho must be >= 0, got {self.rho}")

    @property
    def in_rough_regime(self) -> bool:
        # the log-volatility model is stated for H < 1/2 only
        return self.hurst < 0.5


@dataclass(frozen=True)
class Transform:
    """A C^2 function g together with its derivative, both vectorised."""

    name: str
    g: Callable[[np.ndarray], np.ndarray]
    dg: Callable[[np.ndarray], np.ndarray]

    def __repr__(self) -> str:
        return f"Transform({self.name!r})"

    @classmethod
    def identity(cls) -> "Transform":
        return cls("identity", lambda x: np.asarray(x, dtype=float), np.ones_like)

    @classmethod
    def exp_two_t(cls) -> "Transform":
        return cls("exp2t", lambda x: np.exp(2.0 * x), lambda x: 2.0 * np.exp(2.0 * x))

    @classmethod
    def square(cls) -> "Transform":
        return cls("square", lambda x: np.square(x), lambda x: 2.0 * np.asarray(x))

    @classmethod
    def non_monotone(cls) -> "Transform":
        """g(t) = (t - 2)^2 + sin(2 pi t)."""
        return cls(
            "nonmono",
            lambda x: (x - 2.0) ** 2 + np.sin(2.0 * np.pi * x),
            lambda x: 2.0 * (x - 2.0) + 2.0 * np.pi * np.cos(2.0 * np.pi * x),
        )

    @classmethod
    def polynomial(cls, coeffs: Sequence[float]) -> "Transform":
        """g(t) = sum_i coeffs[i] * t**i."""
        p = np.polynomial.Polynomial(np.asarray(coeffs, dtype=float))
        dp = p.deriv()
        return cls(
            "polynomial",
            lambda x: p(np.asarray(x, dtype=float)),
            lambda x: dp(np.asarray(x, dtype=float)) + np.zeros_like(x, dtype=float),
        )

    @classmethod
    def custom(cls, g, dg, name: str = "custom") -> "Transform":
        return cls(name, g, dg)

    @classmethod
    def by_name(cls, name: str) -> "Transform":
        try:
            return TRANSFORMS[name]()
        except KeyError:
            raise ConfigError(
                f"unknown transform {name!r}; choose from {sorted(TRANSFORMS)}"
            ) from None


TRANSFORMS: dict[str, Callable[[], Transform]] = {
    "identity": Transform.identity,
    "exp2t": Transform.exp_two_t,
    "square": Transform.square,
    "nonmono": Transform.non_monotone,
}


@numba.njit(cache=True)
def _euler_fou(x0, rho, mu, dt, dw):  # pragma: no cover - compiled
    x = np.empty(dw.size + 1)
    x[0] = x0
    for k in range(dw.size):
        x[k + 1] = x[k] + rho * (mu - x[k]) * dt + dw[k]
    return x


def build_fou(spec: FouSpec, fbm: FbmPath) -> DyadicPath:
    """Explicit Euler scheme on the fBm grid.

    ``X[k+1] = X[k] + rho * (mu - X[k]) * dt + (W[k+1] - W[k])``, ``X[0] = x0``.
    """
    if not math.isclose(fbm.hurst, spec.hurst):
        raise ConfigError(f"fBm has H={fbm.hurst} but the fOU spec asks for H={spec.hurst}")
    dt = 2.0**-fbm.level
    x = _euler_fou(float(spec.x0), float(spec.rho), float(spec.mu), dt, np.diff(fbm.values))
    return DyadicPath(fbm.level, x, f"fou(x0={spec.x0}, rho={spec.rho}, mu={spec.mu}) <- {fbm.origin}")


def build_drifted_fbm(x0: float, drift: Drift, fbm: DyadicPath) -> DyadicPath:
    """X_t = x0 + W_t + int_0^t xi_s ds with a left-endpoint Riemann sum.

    ``drift`` is ``None``, a constant, or a callable ``xi(t, x)`` evaluated at
    ``(t_k, X_k)``; callables must be bounded and return finite values (this
    is not verifiable here). For ``H > 1/2`` the drift should in addition be
    Hölder continuous in t with exponent above ``2H - 1``.
    """
    w = fbm.values
    origin = f"dfbm(x0={x0}) <- {fbm.origin}"
    if drift is None:
        return DyadicPath(fbm.level, x0 + w, origin)
    dt = 2.0**-fbm.level
    if not callable(drift):
        c = float(drift)
        if not math.isfinite(c):
            raise NumericalError(f"non-finite constant drift {c}")
        return DyadicPath(fbm.level, x0 + w + c * fbm.t, origin)
    dw = np.diff(w).tolist()
    x = [float(x0)]
    xk = float(x0)
    for k, inc in enumerate(dw):
        xi = float(drift(k * dt, xk))
        if not math.isfinite(xi):
            raise NumericalError(f"drift returned {xi} at grid index {k} (t={k * dt})")
        xk = xk + xi * dt + inc
        x.append(xk)
    return DyadicPath(fbm.level, np.array(x), origin)


@dataclass(frozen=True)
class IntegratedPath:
    """Y on the observation grid plus the fine X it was integrated from."""

    y: DyadicPath
    x_fine: DyadicPath
    gprime_sq_integral: float
    transform: str = ""


def integrate_transform(
    x: DyadicPath, g: Transform, target_level: int, oversample_q: int
) -> IntegratedPath:
    """Composite trapezoid integral of g(X) read off every 2**q-th fine node.

    Y at a coarser level is always a restriction of the same fine cumulative
    sum, so outputs for different targets are exactly coherent.
    """
    if oversample_q < 0:
        raise ConfigError(f"oversample_q must be >= 0, got {oversample_q}")
    if x.level != target_level + oversample_q:
        raise ConfigError(
            f"X has level {x.level} but target_level + oversample_q = "
            f"{target_level} + {oversample_q} = {target_level + oversample_q}"
        )
    h = 2.0**-x.level
    u = np.asarray(g.g(x.values), dtype=float)
    cum = np.empty_like(u)
    cum[0] = 0.0
    np.cumsum(0.5 * h * (u[:-1] + u[1:]), out=cum[1:])
    du2 = np.square(np.asarray(g.dg(x.values), dtype=float))
    gp2 = float(0.5 * h * (du2[:-1] + du2[1:]).sum())
    y = DyadicPath(
        target_level,
        cum[:: 2**oversample_q],
        f"int {g.name}(X) (q={oversample_q}) <- {x.origin}",
    )
    return IntegratedPath(y=y, x_fine=x, gprime_sq_integral=gp2, transform=g.name)


@dataclass(frozen=True)
class Regularity:
    ok: bool
    value: float
    tol: float
    message: str

    def to_dict(self) -> dict:
        return {"ok": self.ok, "value": self.value, "tol": self.tol, "message": self.message}


def check_regularity(ip: IntegratedPath, tol: float = 1e-12) -> Regularity:
    """Check that int_0^1 g'(X_s)^2 ds is numerically positive. Never raises."""
    v = ip.gprime_sq_integral
    if v > tol:
        return Regularity(True, v, tol, "ok")
    return Regularity(
        False,
        v,
        tol,
        f"integral of g'(X)^2 is {v:.3e} <= {tol:.1e}: g is (numerically) flat along X, "
        "convergence of the estimator is not guaranteed",
    )
