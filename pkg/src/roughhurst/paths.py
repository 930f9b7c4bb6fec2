"""Functions sampled on dyadic grids of [0, 1]."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InsufficientResolutionError


@dataclass(frozen=True)
class DyadicPath:
    """Values of a function at ``t_k = k * 2**-level``, ``k = 0..2**level``.

    ``values`` is stored as a read-only float64 array.
    """

    level: int
    values: np.ndarray
    origin: str = ""

    def __post_init__(self):
        level = int(self.level)
        if level < 0:
            raise DomainError(f"level must be >= 0, got {level}")
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size != 2**level + 1:
            raise DomainError(
                f"a level-{level} path needs {2**level + 1} values, got shape {values.shape}"
            )
        values.flags.writeable = False
        object.__setattr__(self, "level", level)
        object.__setattr__(self, "values", values)

    @property
    def t(self) -> np.ndarray:
        return np.arange(2**self.level + 1) * 2.0**-self.level

    def __len__(self) -> int:
        return self.values.size

    def restrict_values(self, level: int) -> np.ndarray:
        """Values on the coarser grid of ``level`` (a strided view)."""
        if level > self.level:
            raise InsufficientResolutionError(
                f"cannot restrict a level-{self.level} path to finer level {level}",
                required_level=level,
            )
        if level < 0:
            raise DomainError(f"level must be >= 0, got {level}")
        return self.values[:: 2 ** (self.level - level)]

    def restrict(self, level: int) -> "DyadicPath":
        return DyadicPath(level, self.restrict_values(level), self.origin)

    def scaled(self, factor: float) -> "DyadicPath":
        return DyadicPath(self.level, factor * self.values, self.origin)

    @classmethod
    def from_function(cls, f, level: int, origin: str = "") -> "DyadicPath":
        t = np.arange(2**level + 1) * 2.0**-level
        return cls(level, np.asarray(f(t), dtype=float), origin)
