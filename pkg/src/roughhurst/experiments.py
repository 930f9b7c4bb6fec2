"""Monte Carlo harness: simulate many paths, estimate at several levels, summarise.

Each path is simulated once at the finest level required and every
estimation level reads a restriction of the same integrated path, so
estimates across n are paired.  Path ``p`` uses seed ``seed0 + p``.
"""

from __future__ import annotations

import csv
import dataclasses
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import stats as sps

from .errors import ConfigError, DegeneratePathError, NumericalError, RateFitError
from .estimator import SeqEstimatorConfig, r_seq
from .processes import (
    FouSpec,
    IntegratedPath,
    Transform,
    build_drifted_fbm,
    build_fou,
    check_regularity,
    integrate_transform,
)
from .sim import SimBackend, simulate_fbm

log = logging.getLogger(__name__)

__all__ = [
    "McConfig",
    "McRow",
    "McResult",
    "BoxStats",
    "RateFit",
    "simulate_observation",
    "estimate_path",
    "run_mc",
    "box_stats",
    "rate_fit",
    "rate_fit_from_rmse",
    "write_estimates_csv",
    "read_estimates_csv",
    "THREADS_ENV",
]

THREADS_ENV = "ROUGHHURST_THREADS"
MODELS = ("fou", "dfbm")


@dataclass(frozen=True)
class McConfig:
    """One Monte Carlo study; all keys are accepted by :meth:`from_dict`."""

    model: str = "fou"
    x0: float = 2.0
    rho: float = 0.2
    mu: float = 2.0
    drift: float = 0.0
    transform: str = "exp2t"
    hurst_list: tuple[float, ...] = (0.1,)
    n_levels: tuple[int, ...] = (10, 11, 12, 13, 14)
    paths: int = 200
    seed0: int = 0
    m: int = 3
    alphas: tuple[float, ...] = (1.0, 1.0, 1.0, 1.0)
    oversample_q: int = 4
    backend: str = "circulant"
    max_sim_level: int = 22
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("hurst_list", tuple(float(h) for h in self.hurst_list))
        set_("n_levels", tuple(sorted(int(n) for n in self.n_levels)))
        set_("alphas", tuple(float(a) for a in self.alphas))
        set_("notes", tuple(str(s) for s in self.notes))
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}, got {self.model!r}")
        Transform.by_name(self.transform)
        SimBackend.coerce(self.backend)
        if not self.hurst_list or not all(0 < h < 1 for h in self.hurst_list):
            raise ConfigError(f"hurst_list must be nonempty with values in (0, 1): {self.hurst_list}")
        if int(self.paths) != self.paths or self.paths < 1:
            raise ConfigError(f"paths must be >= 1, got {self.paths}")
        if self.oversample_q < 0:
            raise ConfigError(f"oversample_q must be >= 0, got {self.oversample_q}")
        if int(self.seed0) != self.seed0 or self.seed0 < 0 or self.seed0 + self.paths > 2**64:
            raise ConfigError(f"seed0 must be a nonnegative 64-bit integer, got {self.seed0}")
        if not self.n_levels:
            raise ConfigError("n_levels must not be empty")
        est = self.estimator  # validates m / alphas
        if self.n_levels[0] <= est.m + 1:
            raise ConfigError(
                f"every level must exceed m + 1 = {est.m + 1}; got {self.n_levels[0]}"
            )
        if self.sim_level > self.max_sim_level:
            raise ConfigError(
                f"simulation level {self.sim_level} = max(n_levels) + 2 + oversample_q "
                f"exceeds max_sim_level {self.max_sim_level}"
            )

    @property
    def estimator(self) -> SeqEstimatorConfig:
        return SeqEstimatorConfig(self.m, self.alphas)

    @property
    def obs_level(self) -> int:
        return max(self.n_levels) + 2

    @property
    def sim_level(self) -> int:
        return self.obs_level + self.oversample_q

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "McConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}; allowed: {sorted(known)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def replace(self, **changes) -> "McConfig":
        return dataclasses.replace(self, **changes)

    def model_warnings(self) -> list[str]:
        out = []
        if self.model == "fou":
            for h in self.hurst_list:
                if h >= 0.5:
                    out.append(
                        f"H={h}: the fOU log-volatility model is stated for H < 1/2; "
                        "run is outside that model"
                    )
        return out


@dataclass(frozen=True)
class McRow:
    hurst: float
    n: int
    path: int
    seed: int
    status: str
    r_hat: float = math.nan
    r_seq: float = math.nan
    lambda_star: float = math.nan

    FIELDS = ("hurst", "n", "path", "seed", "status", "r_hat", "r_seq", "lambda_star")


@dataclass
class McResult:
    config: McConfig
    rows: list[McRow]
    counts: dict[str, int]
    notes: list[str] = field(default_factory=list)

    def values(self, hurst: float, n: int, column: str = "r_seq") -> np.ndarray:
        return np.array(
            [getattr(r, column) for r in self.rows if r.hurst == hurst and r.n == n and r.status == "ok"]
        )


def simulate_observation(cfg: McConfig, hurst: float, seed: int) -> IntegratedPath:
    """X at the simulation level, integrated through g to the observation level."""
    fbm = simulate_fbm(cfg.sim_level, hurst, seed, cfg.backend)
    if cfg.model == "fou":
        x = build_fou(FouSpec(cfg.x0, cfg.rho, cfg.mu, hurst), fbm)
    else:
        x = build_drifted_fbm(cfg.x0, cfg.drift or None, fbm)
    return integrate_transform(x, Transform.by_name(cfg.transform), cfg.obs_level, cfg.oversample_q)


def estimate_path(
    ip: IntegratedPath, levels: Iterable[int], est: SeqEstimatorConfig, *, hurst: float, path: int, seed: int
) -> list[McRow]:
    rows = []
    for n in levels:
        try:
            rep = r_seq(ip.y, n, est)
        except DegeneratePathError:
            rows.append(McRow(hurst, n, path, seed, "degenerate"))
            continue
        rows.append(McRow(hurst, n, path, seed, "ok", rep.r_hat, rep.r_seq, rep.lambda_star))
    return rows


def _one_path(args) -> tuple[list[McRow], bool]:
    cfg, hurst, p = args
    seed = cfg.seed0 + p
    try:
        ip = simulate_observation(cfg, hurst, seed)
    except NumericalError as exc:
        log.warning("simulation failed for H=%s path %d: %s", hurst, p, exc)
        return [McRow(hurst, n, p, seed, "sim_failed") for n in cfg.n_levels], True
    regular = check_regularity(ip).ok
    return estimate_path(ip, cfg.n_levels, cfg.estimator, hurst=hurst, path=p, seed=seed), regular


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer") from None


def run_mc(cfg: McConfig, threads: int | None = None) -> McResult:
    """Run the study; rows are ordered by (H, path, n) whatever the thread count."""
    threads = default_threads() if threads is None else max(1, int(threads))
    jobs = [(cfg, h, p) for h in cfg.hurst_list for p in range(cfg.paths)]
    if threads == 1:
        results = list(map(_one_path, jobs))
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_one_path, jobs, chunksize=max(1, len(jobs) // (8 * threads))))
    rows = [r for chunk, _ in results for r in chunk]
    counts = {s: 0 for s in ("ok", "degenerate", "sim_failed")}
    for r in rows:
        counts[r.status] += 1
    counts["simulated"] = len(rows)
    notes = list(cfg.notes) + cfg.model_warnings()
    irregular = sum(1 for _, ok in results if not ok)
    if irregular:
        notes.append(f"{irregular} path(s) failed the g'(X)^2 positivity diagnostic")
    return McResult(cfg, rows, counts, notes)


def write_estimates_csv(rows: Sequence[McRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(McRow.FIELDS)
        for r in rows:
            w.writerow(
                [
                    repr(r.hurst),
                    r.n,
                    r.path,
                    r.seed,
                    r.status,
                    f"{r.r_hat:.17g}",
                    f"{r.r_seq:.17g}",
                    f"{r.lambda_star:.17g}",
                ]
            )


def read_estimates_csv(path) -> list[McRow]:
    with open(path, newline="") as fh:
        return [
            McRow(
                float(d["hurst"]),
                int(d["n"]),
                int(d["path"]),
                int(d["seed"]),
                d["status"],
                float(d["r_hat"]),
                float(d["r_seq"]),
                float(d["lambda_star"]),
            )
            for d in csv.DictReader(fh)
        ]


@dataclass(frozen=True)
class BoxStats:
    """Tukey box summary; quartiles use linear interpolation (numpy's default)."""

    hurst: float
    n: int
    count: int
    median: float
    q1: float
    q3: float
    whisker_lo: float
    whisker_hi: float
    outliers: tuple[float, ...]
    mean: float
    rmse_vs_H: float

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["outliers"] = list(self.outliers)
        return d

    @classmethod
    def from_values(cls, values, hurst: float, n: int) -> "BoxStats":
        v = np.sort(np.asarray(values, dtype=float))
        if v.size == 0:
            raise ValueError("empty group")
        q1, med, q3 = np.percentile(v, [25, 50, 75])
        lo_fence = q1 - 1.5 * (q3 - q1)
        hi_fence = q3 + 1.5 * (q3 - q1)
        inside = v[(v >= lo_fence) & (v <= hi_fence)]
        return cls(
            hurst=float(hurst),
            n=int(n),
            count=int(v.size),
            median=float(med),
            q1=float(q1),
            q3=float(q3),
            whisker_lo=float(inside.min()),
            whisker_hi=float(inside.max()),
            outliers=tuple(float(x) for x in v[(v < lo_fence) | (v > hi_fence)]),
            mean=float(v.mean()),
            rmse_vs_H=float(np.sqrt(np.mean((v - hurst) ** 2))),
        )


def box_stats(rows: Iterable[McRow], column: str = "r_seq") -> list[BoxStats]:
    """Per-(H, n) box statistics over rows with status ``ok``.

    Groups without usable values are skipped and logged.
    """
    groups: dict[tuple[float, int], list[float]] = {}
    for r in rows:
        vals = groups.setdefault((r.hurst, r.n), [])
        if r.status == "ok":
            vals.append(getattr(r, column))
    out = []
    for (h, n), vals in sorted(groups.items()):
        if not vals:
            log.warning("no usable estimates for H=%s, n=%d; group skipped", h, n)
            continue
        out.append(BoxStats.from_values(vals, h, n))
    return out


@dataclass(frozen=True)
class RateFit:
    """OLS fit log2(rmse) = intercept + slope * n."""

    levels: tuple[int, ...]
    log2_rmse: tuple[float, ...]
    slope: float
    intercept: float
    r_squared: float

    def to_dict(self) -> dict:
        return {
            "levels": list(self.levels),
            "log2_rmse": list(self.log2_rmse),
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
        }


def rate_fit_from_rmse(levels: Sequence[int], rmse: Sequence[float]) -> RateFit:
    levels = [int(n) for n in levels]
    rmse = np.asarray(rmse, dtype=float)
    if len(levels) < 3 or len(levels) != rmse.size:
        raise RateFitError(f"need >= 3 (level, rmse) pairs, got {len(levels)} levels and {rmse.size} values")
    if len(set(levels)) != len(levels):
        raise RateFitError(f"levels must be distinct: {levels}")
    if not np.all(np.isfinite(rmse)) or np.any(rmse <= 0):
        raise RateFitError(f"rmse values must be finite and positive: {rmse.tolist()}")
    y = np.log2(rmse)
    if np.ptp(y) == 0:
        raise RateFitError("rmse is constant across levels; slope fit is degenerate")
    fit = sps.linregress(levels, y)
    return RateFit(tuple(levels), tuple(y.tolist()), float(fit.slope), float(fit.intercept), float(fit.rvalue**2))


def rate_fit(stats: Sequence[BoxStats]) -> RateFit:
    """Decay exponent of the RMSE across levels (one H at a time)."""
    hs = {s.hurst for s in stats}
    if len(hs) > 1:
        raise RateFitError(f"rate fit expects a single H, got {sorted(hs)}")
    stats = sorted(stats, key=lambda s: s.n)
    return rate_fit_from_rmse([s.n for s in stats], [s.rmse_vs_H for s in stats])
