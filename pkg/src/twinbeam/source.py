"""Photon-number laws for the twin beam and classical reference sources.

A twin beam from spontaneous downconversion made of ``mu`` equally populated
temporal modes carries a multithermal (negative-binomial) photon number,
emitted pairwise so that signal and idler hold the same count on every
pulse.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import _rng
from .errors import EmptySeriesError, ParameterError


class SourceKind(str, enum.Enum):
    TWIN_SPONTANEOUS = "twin"
    COHERENT_PAIR = "coherent"
    INDEPENDENT_THERMAL = "thermal"


@dataclass(frozen=True)
class SourceModel:
    """Photon-number law of one twin coherence area.

    Parameters
    ----------
    mu : int
        Number of temporal modes.
    nbar : float
        Mean photon number per mode and pulse.
    kind : SourceKind
        Pairwise-correlated twin beam, or one of the classical references
        (independent Poisson arms, independent multithermal arms).
    """

    mu: int = 20
    nbar: float = 50.9
    kind: SourceKind = SourceKind.TWIN_SPONTANEOUS

    def __post_init__(self):
        if isinstance(self.mu, bool) or int(self.mu) != self.mu or self.mu < 1:
            raise ParameterError(f"mu must be a positive integer, got {self.mu!r}")
        if not np.isfinite(self.nbar) or self.nbar < 0:
            raise ParameterError(f"nbar must be a nonnegative number, got {self.nbar!r}")
        object.__setattr__(self, "mu", int(self.mu))
        object.__setattr__(self, "nbar", float(self.nbar))
        object.__setattr__(self, "kind", SourceKind(self.kind))

    @property
    def mean(self) -> float:
        return self.mu * self.nbar

    @property
    def variance(self) -> float:
        if self.kind is SourceKind.COHERENT_PAIR:
            return self.mean
        return self.mean * (1.0 + self.nbar)

    @property
    def twin(self) -> bool:
        return self.kind is SourceKind.TWIN_SPONTANEOUS

    def scaled(self, areas: int) -> "SourceModel":
        """Law of ``areas`` independent copies of this area, summed."""
        return SourceModel(self.mu * areas, self.nbar, self.kind)


@dataclass(frozen=True)
class PhotonShots:
    """Per-pulse photon numbers at the crystal output (before detection)."""

    n_s: np.ndarray
    n_i: np.ndarray

    def __len__(self) -> int:
        return len(self.n_s)


def draw_counts(model: SourceModel, size: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``size`` photon-number pairs from an explicit generator."""
    if model.kind is SourceKind.COHERENT_PAIR:
        return rng.poisson(model.mean, size), rng.poisson(model.mean, size)
    # sum of mu geometric variates of mean nbar == NB(mu, 1/(1+nbar))
    p = 1.0 / (1.0 + model.nbar)
    n_s = rng.negative_binomial(model.mu, p, size)
    if model.twin:
        return n_s, n_s.copy()
    return n_s, rng.negative_binomial(model.mu, p, size)


def sample_shots(model: SourceModel, count: int, seed: int, workers: int = 1) -> PhotonShots:
    """Sample ``count`` pulses; shot ``i`` depends only on ``(seed, i)``."""
    if count < 1:
        raise EmptySeriesError("count must be at least 1")
    n_s, n_i = _rng.run_blocks(
        count, seed, _rng.STAGE_SOURCE, lambda rng, size: draw_counts(model, size, rng), workers
    )
    return PhotonShots(n_s, n_i)


def nb_pmf(mu: float, nbar: float, n_max: int) -> np.ndarray:
    """Multithermal pmf for real ``mu > 0``, truncated at ``n_max``."""
    if mu <= 0 or nbar < 0:
        raise ParameterError("need mu > 0 and nbar >= 0")
    if n_max < 0:
        raise ParameterError("n_max must be nonnegative")
    n = np.arange(n_max + 1)
    return stats.nbinom.pmf(n, mu, 1.0 / (1.0 + nbar))


def photon_pmf(model: SourceModel, n_max: int) -> np.ndarray:
    """Single-arm photon-number pmf over ``0..n_max``."""
    if n_max < 0:
        raise ParameterError("n_max must be nonnegative")
    if model.kind is SourceKind.COHERENT_PAIR:
        return stats.poisson.pmf(np.arange(n_max + 1), model.mean)
    return nb_pmf(model.mu, model.nbar, n_max)
