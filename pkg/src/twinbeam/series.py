"""Shot records in electron units and their dark-run companions."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class DarkStats:
    """Electronic-noise moments measured with no light on the detectors."""

    var_s: float
    var_i: float
    mean_s: float = 0.0
    mean_i: float = 0.0
    cov: float = 0.0
    count: int | None = None

    @classmethod
    def from_series(cls, dark: "ShotSeries", with_covariance: bool = False) -> "DarkStats":
        if len(dark) < 2:
            raise DataError("dark run needs at least two shots")
        ds = dark.m_s - dark.m_s.mean()
        di = dark.m_i - dark.m_i.mean()
        return cls(
            var_s=float(np.mean(ds * ds)),
            var_i=float(np.mean(di * di)),
            mean_s=float(dark.m_s.mean()),
            mean_i=float(dark.m_i.mean()),
            cov=float(np.mean(ds * di)) if with_covariance else 0.0,
            count=len(dark),
        )


@dataclass(frozen=True)
class ShotSeries:
    """Ordered per-pulse detected values ``(m_s, m_i)`` in electrons."""

    m_s: np.ndarray
    m_i: np.ndarray
    dark: DarkStats | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        m_s = np.asarray(self.m_s, dtype=float)
        m_i = np.asarray(self.m_i, dtype=float)
        if m_s.shape != m_i.shape or m_s.ndim != 1:
            raise DataError("m_s and m_i must be 1-D arrays of equal length")
        object.__setattr__(self, "m_s", m_s)
        object.__setattr__(self, "m_i", m_i)

    def __len__(self) -> int:
        return len(self.m_s)

    @property
    def difference(self) -> np.ndarray:
        return self.m_s - self.m_i

    def with_dark(self, dark: "ShotSeries | DarkStats", with_covariance: bool = False) -> "ShotSeries":
        if isinstance(dark, ShotSeries):
            dark = DarkStats.from_series(dark, with_covariance)
        return ShotSeries(self.m_s, self.m_i, dark, dict(self.meta))

    def subset(self, mask: np.ndarray) -> "ShotSeries":
        return ShotSeries(self.m_s[mask], self.m_i[mask], self.dark, dict(self.meta))
