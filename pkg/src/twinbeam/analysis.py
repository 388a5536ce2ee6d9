"""Estimators over detected shot series.

All second moments use the ``1/K`` (population) normalization. When dark
statistics are attached to a series, the dark-corrected estimators subtract
the electronic-noise means, variances and (optionally) covariance; a
correction that leaves a non-positive variance raises
:class:`~twinbeam.errors.OverSubtractionError` instead of being clamped.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .errors import DataError, EmptySelectionError, NumericalError, OverSubtractionError
from .oracle import thinning_floor
from .series import DarkStats, ShotSeries

CLASSICAL = "classical"
NONCLASSICAL = "nonclassical"
UNPHYSICAL = "unphysical/over-subtracted"


def decibels(x: float) -> float:
    if not x > 0:
        raise NumericalError(f"cannot express {x!r} in dB")
    return 10.0 * math.log10(x)


def _use_dark(series: ShotSeries, corrected: bool | None) -> DarkStats | None:
    if corrected is None:
        return series.dark
    if corrected and series.dark is None:
        raise DataError("dark correction requested but the series has no dark statistics")
    return series.dark if corrected else None


def _require_len(series: ShotSeries, k: int = 2):
    if len(series) < k:
        raise DataError(f"need at least {k} shots, got {len(series)}")


@dataclass(frozen=True)
class _Moments:
    mean_s: float
    mean_i: float
    var_s: float
    var_i: float
    cov: float


def arm_moments(series: ShotSeries, corrected: bool | None = None) -> _Moments:
    """Means, variances and covariance, dark-corrected when requested."""
    _require_len(series)
    dark = _use_dark(series, corrected)
    ds = series.m_s - series.m_s.mean()
    di = series.m_i - series.m_i.mean()
    mom = _Moments(
        float(series.m_s.mean()),
        float(series.m_i.mean()),
        float(np.mean(ds * ds)),
        float(np.mean(di * di)),
        float(np.mean(ds * di)),
    )
    if dark is None:
        return mom
    out = _Moments(
        mom.mean_s - dark.mean_s,
        mom.mean_i - dark.mean_i,
        mom.var_s - dark.var_s,
        mom.var_i - dark.var_i,
        mom.cov - dark.cov,
    )
    if out.var_s <= 0 or out.var_i <= 0:
        raise OverSubtractionError(
            f"dark subtraction leaves non-positive variance (signal {out.var_s:.6g}, idler {out.var_i:.6g})"
        )
    return out


def gamma_profile(series: ShotSeries, j_max: int = 0, corrected: bool = False) -> np.ndarray:
    """Lagged signal/idler correlation coefficient for lags ``0..j_max``.

    The lag-``j`` covariance pairs ``m_s(k)`` with ``m_i(k + j)`` and is
    normalized by the ``K - j`` available pairs.
    """
    k = len(series)
    if not 0 <= j_max < k:
        raise DataError(f"j_max must lie in [0, {k - 1}]")
    mom = arm_moments(series, corrected)
    dark_cov = series.dark.cov if corrected else 0.0
    ds = series.m_s - series.m_s.mean()
    di = series.m_i - series.m_i.mean()
    norm = math.sqrt(mom.var_s * mom.var_i)
    out = np.empty(j_max + 1)
    for j in range(j_max + 1):
        c = np.dot(ds[: k - j], di[j:]) / (k - j)
        # electronic noise of different shots is uncorrelated
        out[j] = (c - (dark_cov if j == 0 else 0.0)) / norm
    return out


@dataclass(frozen=True)
class Histogram:
    """Counts on bins of width ``bin_width`` centred on multiples of it."""

    centers: np.ndarray
    counts: np.ndarray
    bin_width: float

    @property
    def probabilities(self) -> np.ndarray:
        return self.counts / self.counts.sum()

    @property
    def mean(self) -> float:
        return float(self.centers @ self.probabilities)


def histogram(values: np.ndarray, bin_width: float = 1.0) -> Histogram:
    if not bin_width > 0:
        raise DataError("bin width must be positive")
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise DataError("cannot histogram an empty selection")
    idx = np.floor(values / bin_width + 0.5).astype(np.int64)
    lo = idx.min()
    counts = np.bincount(idx - lo)
    centers = (np.arange(counts.size) + lo) * bin_width
    return Histogram(centers, counts, float(bin_width))


def difference_histogram(series: ShotSeries, bin_width: float = 1.0) -> Histogram:
    """Distribution of the photon-count difference ``d = m_s - m_i``."""
    _require_len(series, 1)
    return histogram(series.difference, bin_width)


def batch_stderr(series: ShotSeries, statistic: Callable[[ShotSeries], float], n_batches: int = 20) -> float:
    """Standard error of ``statistic`` from contiguous batch means."""
    k = len(series)
    n_batches = min(n_batches, k // 2)
    if n_batches < 2:
        return math.nan
    edges = np.linspace(0, k, n_batches + 1).astype(int)
    vals = [
        statistic(ShotSeries(series.m_s[a:b], series.m_i[a:b], series.dark))
        for a, b in zip(edges[:-1], edges[1:])
    ]
    return float(np.std(vals, ddof=1) / math.sqrt(n_batches))


def classify(R: float, eta: float | None, stderr: float = 0.0, z: float = 3.0) -> str:
    """Classify a noise reduction against the shot-noise and efficiency bounds."""
    tol = z * (stderr if np.isfinite(stderr) else 0.0)
    if R >= 1.0 - tol:
        return CLASSICAL
    if eta is not None and R < thinning_floor(eta) - tol:
        return UNPHYSICAL
    if R <= 0:
        return UNPHYSICAL
    return NONCLASSICAL


def _eta_of(series: ShotSeries, eta: float | None) -> float | None:
    if eta is not None:
        return float(eta)
    meta = series.meta.get("eta")
    if meta is None:
        return None
    return float(np.mean(meta))


@dataclass(frozen=True)
class AnalysisReport:
    K: int
    corrected: bool
    means: tuple[float, float]
    snl: float
    sigma2_d: float
    sigma2_d_dark: float
    R_linear: float
    R_dB: float
    R_stderr: float
    fano_s: float
    fano_i: float
    gamma: tuple[float, ...]
    eta: float | None
    classification: str

    def to_dict(self) -> dict:
        d = asdict(self)
        d["means"] = list(self.means)
        d["gamma"] = list(self.gamma)
        return d


def _difference_stats(series: ShotSeries, dark: DarkStats | None) -> tuple[float, float, float]:
    d = series.difference
    var_d = float(np.var(d))
    var_dark = 0.0
    snl = float(series.m_s.mean() + series.m_i.mean())
    if dark is not None:
        var_dark = dark.var_s + dark.var_i - 2.0 * dark.cov
        snl -= dark.mean_s + dark.mean_i
    return var_d, var_dark, snl


def _R(series: ShotSeries, dark: DarkStats | None) -> float:
    var_d, var_dark, snl = _difference_stats(series, dark)
    if snl == 0:
        raise NumericalError("zero mean signal: shot-noise level undefined")
    return (var_d - var_dark) / snl


def noise_reduction(
    series: ShotSeries,
    corrected: bool | None = None,
    eta: float | None = None,
    j_max: int = 0,
    n_batches: int = 20,
) -> AnalysisReport:
    """Difference-variance noise reduction relative to the shot-noise level.

    ``R`` is the (dark-corrected) variance of ``m_s - m_i`` divided by
    ``<m_s> + <m_i>``. A non-positive ``R`` is reported with ``R_dB = nan``
    and the ``unphysical/over-subtracted`` classification.
    """
    _require_len(series)
    dark = _use_dark(series, corrected)
    use = dark is not None
    var_d, var_dark, snl = _difference_stats(series, dark)
    if snl == 0:
        raise NumericalError("zero mean signal: shot-noise level undefined")
    R = (var_d - var_dark) / snl
    se = batch_stderr(series, lambda s: _R(s, dark), n_batches)
    if use and dark.count:
        se = math.hypot(se, var_dark * math.sqrt(2.0 / dark.count) / snl)
    mom = arm_moments(series, use)
    eta = _eta_of(series, eta)
    return AnalysisReport(
        K=len(series),
        corrected=use,
        means=(mom.mean_s, mom.mean_i),
        snl=snl,
        sigma2_d=var_d,
        sigma2_d_dark=var_dark,
        R_linear=R,
        R_dB=decibels(R) if R > 0 else math.nan,
        R_stderr=se,
        fano_s=mom.var_s / mom.mean_s,
        fano_i=mom.var_i / mom.mean_i,
        gamma=tuple(float(g) for g in gamma_profile(series, j_max, use)),
        eta=eta,
        classification=classify(R, eta, se),
    )


def marginal_fano(series: ShotSeries, arm: str = "i", corrected: bool | None = None) -> float:
    """Fano factor ``var(m) / <m>`` of one arm (``"s"`` or ``"i"``)."""
    mom = arm_moments(series, corrected)
    if arm == "s":
        mean, var = mom.mean_s, mom.var_s
    elif arm == "i":
        mean, var = mom.mean_i, mom.var_i
    else:
        raise DataError(f"arm must be 's' or 'i', got {arm!r}")
    if mean == 0:
        raise NumericalError("zero mean: Fano factor undefined")
    return var / mean


def fano_floor_check(fano: float, eta: float, stderr: float = 0.0, z: float = 3.0) -> bool:
    """True when ``fano`` is compatible with the Bernoulli-detection floor ``1 - eta``."""
    return fano >= thinning_floor(eta) - z * stderr


@dataclass(frozen=True)
class ConditionalResult:
    window: tuple[float, float]
    histogram: Histogram
    retained: int
    success_probability: float
    mean: float
    fano_conditional: float
    fano_stderr: float
    fano_marginal: float
    floor: float | None
    corrected: bool

    @property
    def sub_poissonian(self) -> bool:
        return self.fano_conditional < 1.0

    @property
    def consistent_with_floor(self) -> bool | None:
        """``False`` flags a Fano factor below what Bernoulli detection allows."""
        if self.floor is None:
            return None
        return self.fano_conditional >= self.floor - 3.0 * self.fano_stderr

    def to_dict(self) -> dict:
        return {
            "window": list(self.window),
            "retained": self.retained,
            "success_probability": self.success_probability,
            "mean": self.mean,
            "fano_conditional": self.fano_conditional,
            "fano_stderr": self.fano_stderr,
            "fano_marginal": self.fano_marginal,
            "fano_floor": self.floor,
            "sub_poissonian": self.sub_poissonian,
            "consistent_with_floor": self.consistent_with_floor,
            "corrected": self.corrected,
        }


def conditional_distribution(
    series: ShotSeries,
    window: tuple[float, float],
    corrected: bool | None = None,
    bin_width: float = 1.0,
    eta: float | None = None,
) -> ConditionalResult:
    """Idler distribution over the shots whose signal falls in ``window``.

    ``window`` is a closed interval on ``m_s``; infinite bounds are allowed.
    The conditional Fano factor subtracts the idler dark variance when
    correcting.
    """
    lo, hi = float(window[0]), float(window[1])
    if not lo <= hi:
        raise DataError("empty window: lower bound exceeds upper bound")
    _require_len(series)
    dark = _use_dark(series, corrected)
    keep = (series.m_s >= lo) & (series.m_s <= hi)
    n = int(keep.sum())
    if n == 0:
        raise EmptySelectionError(f"no shot has m_s in [{lo}, {hi}]")
    m_i = series.m_i[keep]
    mean = float(m_i.mean())
    dev = m_i - mean
    var = float(np.mean(dev * dev))
    var_se = math.sqrt(max(float(np.mean(dev**4)) - var * var, 0.0) / n)
    if dark is not None:
        mean -= dark.mean_i
        var -= dark.var_i
        if dark.count:
            var_se = math.hypot(var_se, dark.var_i * math.sqrt(2.0 / dark.count))
        if var <= 0:
            raise OverSubtractionError("dark subtraction leaves a non-positive conditional variance")
    if mean == 0:
        raise NumericalError("zero conditional mean: Fano factor undefined")
    eta = _eta_of(series, eta)
    return ConditionalResult(
        window=(lo, hi),
        histogram=histogram(m_i, bin_width),
        retained=n,
        success_probability=n / len(series),
        mean=mean,
        fano_conditional=var / mean,
        fano_stderr=var_se / abs(mean),
        fano_marginal=marginal_fano(series, "i", dark is not None),
        floor=None if eta is None else thinning_floor(eta),
        corrected=dark is not None,
    )


def tail_window(series: ShotSeries, success: float, width: float, side: str = "upper") -> tuple[float, float]:
    """Window of ``width`` on ``m_s`` as far into one tail as possible.

    The window keeps at least a fraction ``success`` of the shots.
    """
    if not 0 < success <= 1:
        raise DataError("success probability must lie in (0, 1]")
    if not width >= 0:
        raise DataError("width must be nonnegative")
    x = np.sort(series.m_s)
    need = max(1, int(round(success * x.size)))
    if side == "upper":
        inside = np.searchsorted(x, x + width, side="right") - np.arange(x.size)
        ok = np.flatnonzero(inside >= need)
        if ok.size == 0:
            raise EmptySelectionError("window too narrow for the requested success probability")
        a = x[ok[-1]]
        return float(a), float(a + width)
    if side == "lower":
        inside = np.arange(x.size) + 1 - np.searchsorted(x, x - width, side="left")
        ok = np.flatnonzero(inside >= need)
        if ok.size == 0:
            raise EmptySelectionError("window too narrow for the requested success probability")
        b = x[ok[0]]
        return float(b - width), float(b)
    raise DataError("side must be 'upper' or 'lower'")
