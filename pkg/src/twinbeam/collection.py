"""Phenomenological pinhole / coherence-area matching.

The pinholes select a fixed transverse region while the coherence areas of
the downconverted light grow with the pump intensity. Writing ``rho`` for
the pinhole-to-area ratio:

* ``rho >= 1``: ``floor(rho)`` twin areas are collected whole; the leftover
  fraction enters as uncorrelated (Poissonian) background light.
* ``rho < 1``: a single area is only partially transmitted. Each arm thins
  the shared photon number independently, which destroys part of the pair
  correlation; a positioning error that differs between the two colours
  makes the idler transmission fall faster than the signal one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ParameterError
from .source import PhotonShots, SourceModel, draw_counts


@dataclass(frozen=True)
class CollectionModel:
    """What the two pinholes let through on every pulse.

    Parameters
    ----------
    whole_modes : int
        Twin coherence areas lying entirely inside both pinholes.
    t_s, t_i : float
        Transmission of the partially collected edge area in each arm.
    bg_s, bg_i : float
        Mean uncorrelated background photons per pulse (before detection).
    edge : bool, optional
        Whether an edge area is collected. Defaults to ``whole_modes == 0``.
    """

    whole_modes: int = 1
    t_s: float = 1.0
    t_i: float = 1.0
    bg_s: float = 0.0
    bg_i: float = 0.0
    edge: bool | None = None

    def __post_init__(self):
        if int(self.whole_modes) != self.whole_modes or self.whole_modes < 0:
            raise ParameterError("whole_modes must be a nonnegative integer")
        for name in ("t_s", "t_i"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ParameterError(f"{name} must lie in [0, 1]")
        for name in ("bg_s", "bg_i"):
            if not getattr(self, name) >= 0.0:
                raise ParameterError(f"{name} must be nonnegative")
        object.__setattr__(self, "whole_modes", int(self.whole_modes))
        if self.edge is None:
            object.__setattr__(self, "edge", self.whole_modes == 0)


MATCHED = CollectionModel()


def apply_collection(
    whole: PhotonShots | None,
    edge: PhotonShots | None,
    model: CollectionModel,
    rng: np.random.Generator,
) -> PhotonShots:
    """Combine whole-area counts, thinned edge-area counts and background.

    ``whole`` holds the summed photon numbers of the fully collected areas
    and ``edge`` those of the partially collected one (for a twin source the
    two arms of ``edge`` are equal, but each is thinned on its own).
    """
    ref = whole if whole is not None else edge
    if ref is None:
        raise ParameterError("need whole-area or edge-area counts")
    size = len(ref)
    n_s = np.zeros(size, dtype=np.int64)
    n_i = np.zeros(size, dtype=np.int64)
    if whole is not None:
        n_s += whole.n_s
        n_i += whole.n_i
    if edge is not None:
        n_s += rng.binomial(edge.n_s, model.t_s)
        n_i += rng.binomial(edge.n_i, model.t_i)
    if model.bg_s > 0:
        n_s += rng.poisson(model.bg_s, size)
    if model.bg_i > 0:
        n_i += rng.poisson(model.bg_i, size)
    return PhotonShots(n_s, n_i)


def draw_collected(
    source: SourceModel, model: CollectionModel, size: int, rng: np.random.Generator
) -> PhotonShots:
    """Photon numbers behind the pinholes for ``size`` pulses."""
    whole = edge = None
    if model.whole_modes > 0:
        whole = PhotonShots(*draw_counts(source.scaled(model.whole_modes), size, rng))
    if model.edge:
        edge = PhotonShots(*draw_counts(source, size, rng))
    if whole is None and edge is None:
        whole = PhotonShots(np.zeros(size, dtype=np.int64), np.zeros(size, dtype=np.int64))
    return apply_collection(whole, edge, model, rng)


def collection_for_ratio(rho: float, area_photons: float, idler_skew: float = 1.0) -> CollectionModel:
    """Collection geometry for a pinhole-to-coherence-area ratio ``rho``.

    ``area_photons`` is the mean photon number of one whole area, used to
    size the uncorrelated admixture when ``rho`` is not an integer.
    """
    if not rho > 0:
        raise ParameterError("rho must be positive")
    if rho >= 1.0:
        whole = int(math.floor(rho))
        frac = rho - whole
        bg = frac * area_photons
        return CollectionModel(whole_modes=whole, bg_s=bg, bg_i=bg, edge=False)
    return CollectionModel(whole_modes=0, t_s=rho, t_i=rho ** (1.0 + idler_skew), edge=True)


@dataclass(frozen=True)
class PumpMapping:
    """How coherence-area size and per-mode gain follow the pump intensity.

    By default the area grows as ``I**area_exponent`` and equals the pinhole
    at ``i_match``; ``table`` replaces that law by ``(intensity, rho)``
    pairs, linearly interpolated. The per-mode photon number scales as
    ``nbar_match * (I / i_match)**gain_exponent``.
    """

    i_match: float = 1.0
    area_exponent: float = 1.0
    gain_exponent: float = 1.0
    idler_skew: float = 1.0
    nbar_match: float | None = None
    table: Sequence[tuple[float, float]] | None = field(default=None)

    def __post_init__(self):
        if not self.i_match > 0:
            raise ParameterError("i_match must be positive")
        if not self.area_exponent > 0:
            raise ParameterError("area_exponent must be positive")
        if self.idler_skew < 0:
            raise ParameterError("idler_skew must be nonnegative")
        if self.table is not None:
            xs = [float(x) for x, _ in self.table]
            if len(xs) < 2 or any(b <= a for a, b in zip(xs, xs[1:])):
                raise ParameterError("table intensities must be strictly increasing (>= 2 rows)")

    def rho(self, intensity: float) -> float:
        if self.table is not None:
            xs, ys = zip(*self.table)
            return float(np.interp(intensity, xs, ys))
        return (self.i_match / intensity) ** self.area_exponent

    def nbar(self, intensity: float, base: SourceModel) -> float:
        n0 = base.nbar if self.nbar_match is None else self.nbar_match
        return n0 * (intensity / self.i_match) ** self.gain_exponent


@dataclass(frozen=True)
class PumpSweepPoint:
    pump_intensity: float
    rho: float
    source: SourceModel
    collection: CollectionModel


def sweep_pump(
    points: Sequence[float], mapping: PumpMapping | None = None, base: SourceModel | None = None
) -> list[PumpSweepPoint]:
    """Simulation-ready configurations for a list of pump intensities."""
    if len(points) == 0:
        raise ParameterError("pump sweep needs at least one intensity")
    mapping = mapping or PumpMapping()
    base = base or SourceModel()
    out = []
    for intensity in points:
        if not intensity > 0:
            raise ParameterError("pump intensities must be positive")
        rho = mapping.rho(intensity)
        src = SourceModel(base.mu, mapping.nbar(intensity, base), base.kind)
        col = collection_for_ratio(rho, src.mean, mapping.idler_skew)
        out.append(PumpSweepPoint(float(intensity), rho, src, col))
    return out
