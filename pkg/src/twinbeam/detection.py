"""Detection chain: Bernoulli thinning, electronic noise and calibration.

Each photon reaching an arm is converted into a photoelectron with
probability ``eta``, so a pulse carrying ``n`` photons yields a binomial
number of electrons. Additive Gaussian noise from the charge amplifier is
then superimposed, which makes the calibrated records real valued.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import _rng
from .errors import EmptySeriesError, ParameterError
from .series import ShotSeries
from .source import PhotonShots


@dataclass(frozen=True)
class DetectorArm:
    """One detection arm.

    ``dark_sigma`` and ``dark_mean`` are in electrons; the gain converts
    electrons to integrator output voltage.
    """

    eta: float = 0.55
    dark_sigma: float = 0.0
    dark_mean: float = 0.0
    gain_uV_per_electron: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ParameterError(f"eta must lie in [0, 1], got {self.eta!r}")
        if not self.dark_sigma >= 0.0:
            raise ParameterError(f"dark_sigma must be nonnegative, got {self.dark_sigma!r}")
        if not np.isfinite(self.dark_mean):
            raise ParameterError("dark_mean must be finite")
        if not self.gain_uV_per_electron > 0.0:
            raise ParameterError("gain must be positive")


# calibrations of the signal and idler integrator chains
SIGNAL_GAIN_UV = 33.087
IDLER_GAIN_UV = 24.803


def to_microvolts(electrons, arm: DetectorArm):
    return np.asarray(electrons, dtype=float) * arm.gain_uV_per_electron


def to_electrons(microvolts, arm: DetectorArm):
    return np.asarray(microvolts, dtype=float) / arm.gain_uV_per_electron


def thin(n, eta: float, rng: np.random.Generator):
    """Binomial thinning: each of ``n`` photons survives with probability ``eta``."""
    if not 0.0 <= eta <= 1.0:
        raise ParameterError(f"eta must lie in [0, 1], got {eta!r}")
    return rng.binomial(n, eta)


def _noise(arm: DetectorArm, size: int, rng: np.random.Generator) -> np.ndarray:
    return rng.normal(arm.dark_mean, arm.dark_sigma, size)


def detect_arrays(n_s, n_i, arms: tuple[DetectorArm, DetectorArm], rng: np.random.Generator):
    arm_s, arm_i = arms
    n_s = np.asarray(n_s)
    n_i = np.asarray(n_i)
    k_s = thin(n_s, arm_s.eta, rng)
    k_i = thin(n_i, arm_i.eta, rng)
    m_s = k_s + _noise(arm_s, n_s.size, rng).reshape(n_s.shape)
    m_i = k_i + _noise(arm_i, n_i.size, rng).reshape(n_i.shape)
    return m_s, m_i


def detect_shot(shots: PhotonShots, arms: tuple[DetectorArm, DetectorArm], rng: np.random.Generator) -> ShotSeries:
    """Thin each arm independently and add its electronic noise."""
    m_s, m_i = detect_arrays(shots.n_s, shots.n_i, arms, rng)
    return ShotSeries(m_s, m_i, meta={"eta": (arms[0].eta, arms[1].eta)})


def dark_run(arms: tuple[DetectorArm, DetectorArm], count: int, seed: int, workers: int = 1) -> ShotSeries:
    """Noise-only companion run (no light on either arm)."""
    if count < 1:
        raise EmptySeriesError("dark run needs at least one shot")
    arm_s, arm_i = arms

    def block(rng, size):
        return _noise(arm_s, size, rng), _noise(arm_i, size, rng)

    m_s, m_i = _rng.run_blocks(count, seed, _rng.STAGE_DARK, block, workers)
    return ShotSeries(m_s, m_i, meta={"dark": True})


def _binomial_kernel(n: np.ndarray, m: np.ndarray, eta: float) -> np.ndarray:
    """``C(n, m) eta^m (1-eta)^(n-m)`` on the grid ``n[:, None] x m[None, :]``."""
    nn = n[:, None].astype(float)
    mm = m[None, :].astype(float)
    valid = mm <= nn
    if eta == 0.0:
        return ((mm == 0) & valid) * 1.0
    if eta == 1.0:
        return (mm == nn) * 1.0
    k = np.where(valid, nn - mm, 0.0)
    logk = gammaln(nn + 1) - gammaln(mm + 1) - gammaln(k + 1) + mm * np.log(eta) + k * np.log1p(-eta)
    return np.where(valid, np.exp(np.where(valid, logk, 0.0)), 0.0)


def detect_pmf(photon_pmf, eta: float, chunk: int = 1024) -> np.ndarray:
    """Detected-electron pmf from a photon-number pmf by Bernoulli convolution."""
    p = np.asarray(photon_pmf, dtype=float)
    if p.ndim != 1 or np.any(p < 0):
        raise ParameterError("photon pmf must be a nonnegative vector")
    if p.sum() > 1.0 + 1e-12:
        raise ParameterError("photon pmf sums to more than one")
    if not 0.0 <= eta <= 1.0:
        raise ParameterError(f"eta must lie in [0, 1], got {eta!r}")
    m = np.arange(p.size)
    out = np.zeros(p.size)
    for start in range(0, p.size, chunk):
        n = np.arange(start, min(start + chunk, p.size))
        out += p[n] @ _binomial_kernel(n, m, eta)
    return out
