"""Closed-form expectations and exact small-instance references.

Everything here is deterministic and independent of the samplers, so it can
be used to check them. Sources may be given either as a
:class:`~twinbeam.source.SourceModel` or, for the fractional mode numbers
produced by fitting, as a ``(mu, nbar)`` pair describing a twin area.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import optimize, signal, stats

from .collection import MATCHED, CollectionModel
from .detection import DetectorArm
from .errors import NumericalError, ParameterError, TruncationError
from .source import SourceKind, SourceModel, nb_pmf

TRUNCATION_BUDGET = 1e-9
BRUTEFORCE_N_MAX = 200


class _AreaLaw(NamedTuple):
    mu: float
    nbar: float
    kind: SourceKind

    @property
    def mean(self):
        return self.mu * self.nbar

    @property
    def var(self):
        if self.kind is SourceKind.COHERENT_PAIR:
            return self.mean
        return self.mean * (1.0 + self.nbar)

    @property
    def cov(self):
        return self.var if self.kind is SourceKind.TWIN_SPONTANEOUS else 0.0


def _law(source) -> _AreaLaw:
    if isinstance(source, SourceModel):
        return _AreaLaw(float(source.mu), source.nbar, source.kind)
    mu, nbar = source
    if not mu > 0 or not nbar >= 0:
        raise ParameterError("need mu > 0 and nbar >= 0")
    return _AreaLaw(float(mu), float(nbar), SourceKind.TWIN_SPONTANEOUS)


@dataclass(frozen=True)
class MomentSet:
    """First and second moments of the photon and detected-electron records."""

    mean_n_s: float
    mean_n_i: float
    var_n_s: float
    var_n_i: float
    mean_m_s: float
    mean_m_i: float
    var_m_s: float
    var_m_i: float
    cov_m: float
    sigma2_d: float
    snl: float
    R: float
    fano_s: float
    fano_i: float

    @property
    def gamma0(self) -> float:
        return self.cov_m / math.sqrt(self.var_m_s * self.var_m_i)

    @property
    def R_dB(self) -> float:
        return 10.0 * math.log10(self.R)


def _ratio(a: float, b: float) -> float:
    return a / b if b > 0 else math.nan


def twin_moments(
    source,
    arms: tuple[DetectorArm, DetectorArm],
    collection: CollectionModel = MATCHED,
    corrected: bool = True,
) -> MomentSet:
    """Exact moments of the detected records.

    With ``corrected`` the electronic noise is left out (as after an ideal
    dark subtraction); otherwise its mean and variance are included.
    """
    law = _law(source)
    arm_s, arm_i = arms
    w = collection.whole_modes
    e = 1.0 if collection.edge else 0.0
    t_s, t_i = collection.t_s, collection.t_i

    # photon moments behind each pinhole
    n_s = w * law.mean + e * t_s * law.mean + collection.bg_s
    n_i = w * law.mean + e * t_i * law.mean + collection.bg_i
    v_s = w * law.var + e * (t_s**2 * law.var + t_s * (1 - t_s) * law.mean) + collection.bg_s
    v_i = w * law.var + e * (t_i**2 * law.var + t_i * (1 - t_i) * law.mean) + collection.bg_i
    c_n = w * law.cov + e * t_s * t_i * law.cov

    # binomial thinning: <m> = eta <n>, var(m) = eta^2 var(n) + eta (1 - eta) <n>
    es, ei = arm_s.eta, arm_i.eta
    mean_s, mean_i = es * n_s, ei * n_i
    var_s = es**2 * v_s + es * (1 - es) * n_s
    var_i = ei**2 * v_i + ei * (1 - ei) * n_i
    cov = es * ei * c_n
    if not corrected:
        mean_s += arm_s.dark_mean
        mean_i += arm_i.dark_mean
        var_s += arm_s.dark_sigma**2
        var_i += arm_i.dark_sigma**2
    sigma2_d = var_s + var_i - 2.0 * cov
    snl = mean_s + mean_i
    return MomentSet(
        mean_n_s=n_s,
        mean_n_i=n_i,
        var_n_s=v_s,
        var_n_i=v_i,
        mean_m_s=mean_s,
        mean_m_i=mean_i,
        var_m_s=var_s,
        var_m_i=var_i,
        cov_m=cov,
        sigma2_d=sigma2_d,
        snl=snl,
        R=_ratio(sigma2_d, snl),
        fano_s=_ratio(var_s, mean_s),
        fano_i=_ratio(var_i, mean_i),
    )


def gamma0_expected(
    source,
    arms: tuple[DetectorArm, DetectorArm],
    corrected: bool = True,
    collection: CollectionModel = MATCHED,
) -> float:
    """Zero-lag signal/idler correlation coefficient."""
    return twin_moments(source, arms, collection, corrected).gamma0


class SeededR(NamedTuple):
    exact: float
    asymptote: float


def seeded_R(eta: float, alpha: complex | float, nu2: float) -> SeededR:
    """Noise reduction of an amplifier seeded by a coherent field.

    ``alpha`` is the seed amplitude (only its modulus matters) and ``nu2``
    the amplifier gain ``|nu|^2``. The asymptote is the large-seed limit.
    """
    if not 0.0 <= eta <= 1.0:
        raise ParameterError("eta must lie in [0, 1]")
    if not nu2 > 0:
        raise ParameterError("gain nu2 must be positive")
    a2 = abs(alpha) ** 2
    if math.isinf(a2):
        frac = 1.0
    else:
        frac = a2 / (1.0 + a2)
    exact = 1.0 - eta / (1.0 + frac / (2.0 * nu2))
    return SeededR(exact, 1.0 - eta + eta / (2.0 * nu2))


def fit_mode_number(
    gamma0_corrected: float,
    mean_m: float | Sequence[float],
    eta: float,
    lo: float = 1e-3,
    hi: float = 1e6,
    rtol: float = 1e-12,
) -> float:
    """Mode number reproducing a measured dark-corrected zero-lag correlation.

    ``mean_m`` is the mean detected signal in one balanced arm, or a pair
    ``(mean_s, mean_i)``. For a pair the twin light is set by the smaller
    mean and the excess of the other arm is treated as uncorrelated
    background. Bisection runs on ``log(mu)`` over ``[lo, hi]``.
    """
    if not 0.0 < gamma0_corrected < 1.0:
        raise ParameterError("gamma0 must lie strictly between 0 and 1")
    if not 0.0 < eta <= 1.0:
        raise ParameterError("eta must lie in (0, 1]")
    means = np.atleast_1d(np.asarray(mean_m, dtype=float))
    if means.size == 1:
        means = np.repeat(means, 2)
    if means.size != 2 or np.any(means <= 0):
        raise ParameterError("mean_m must be positive (scalar or pair)")
    n_twin = means.min() / eta
    bg = (means - means.min()) / eta
    collection = CollectionModel(bg_s=bg[0], bg_i=bg[1])
    arms = (DetectorArm(eta), DetectorArm(eta))

    def gamma(mu):
        return gamma0_expected((mu, n_twin / mu), arms, collection=collection)

    # gamma decreases monotonically with mu
    if not gamma(hi) < gamma0_corrected < gamma(lo):
        raise NumericalError(
            f"gamma0={gamma0_corrected} unattainable for mu in [{lo}, {hi}] "
            f"(range {gamma(hi):.6g}..{gamma(lo):.6g})"
        )
    a, b = math.log(lo), math.log(hi)
    while b - a > rtol:
        mid = 0.5 * (a + b)
        if gamma(math.exp(mid)) > gamma0_corrected:
            a = mid
        else:
            b = mid
    return math.exp(0.5 * (a + b))


def solve_idler_transmission(
    target_R: float, source, arms: tuple[DetectorArm, DetectorArm], t_s: float = 1.0
) -> float:
    """Edge-area idler transmission giving noise reduction ``target_R``.

    The single collected area has signal transmission ``t_s``; ``R`` grows
    as the idler transmission is lowered, so the root is unique.
    """

    def r_of(t_i):
        col = CollectionModel(whole_modes=0, t_s=t_s, t_i=t_i, edge=True)
        return twin_moments(source, arms, col).R - target_R

    lo = 1e-9
    if r_of(1.0) > 0:
        raise NumericalError("target below the matched-collection noise reduction")
    if r_of(lo) < 0:
        raise NumericalError("target above the reachable noise reduction")
    return optimize.brentq(r_of, lo, 1.0, xtol=1e-14)


def thinning_floor(eta: float) -> float:
    """Lowest Fano factor reachable by conditioning on detected photons."""
    return 1.0 - eta


# exact tables ---------------------------------------------------------------


def _area_pmf(law: _AreaLaw, areas: int, n_max: int) -> np.ndarray:
    n = np.arange(n_max + 1)
    if law.kind is SourceKind.COHERENT_PAIR:
        return stats.poisson.pmf(n, areas * law.mean)
    return nb_pmf(areas * law.mu, law.nbar, n_max)


def _kernel(n_max: int, eta: float) -> np.ndarray:
    n = np.arange(n_max + 1)
    return stats.binom.pmf(n[None, :], n[:, None], eta)


def _detected_joint(law: _AreaLaw, areas: int, eta_s: float, eta_i: float, n_max: int) -> np.ndarray:
    p = _area_pmf(law, areas, n_max)
    if 1.0 - p.sum() > TRUNCATION_BUDGET:
        raise TruncationError(f"photon pmf loses {1 - p.sum():.3g} beyond n_max={n_max}")
    k_s, k_i = _kernel(n_max, eta_s), _kernel(n_max, eta_i)
    if law.kind is SourceKind.TWIN_SPONTANEOUS:
        return (k_s.T * p) @ k_i
    return np.outer(p @ k_s, p @ k_i)


def joint_pmf_bruteforce(
    source,
    arms: tuple[DetectorArm, DetectorArm],
    collection: CollectionModel = MATCHED,
    n_max: int = 100,
) -> np.ndarray:
    """Exact joint pmf of detected counts, indexed ``table[m_s, m_i]``.

    Electronic noise is ignored. Whole areas, the edge area and the
    background are independent, so their detected joint tables are
    convolved.
    """
    if not 0 <= n_max <= BRUTEFORCE_N_MAX:
        raise ParameterError(f"n_max must lie in [0, {BRUTEFORCE_N_MAX}]")
    law = _law(source)
    es, ei = arms[0].eta, arms[1].eta
    size = n_max + 1
    table = np.zeros((size, size))
    table[0, 0] = 1.0
    if collection.whole_modes > 0:
        table = _detected_joint(law, collection.whole_modes, es, ei, n_max)
    if collection.edge:
        part = _detected_joint(law, 1, es * collection.t_s, ei * collection.t_i, n_max)
        if collection.whole_modes > 0:
            table = signal.fftconvolve(table, part)[:size, :size].clip(min=0.0)
        else:
            table = part
    m = np.arange(size)
    if collection.bg_s > 0:
        bg = stats.poisson.pmf(m, es * collection.bg_s)
        table = signal.convolve(table, bg[:, None], method="direct")[:size, :]
    if collection.bg_i > 0:
        bg = stats.poisson.pmf(m, ei * collection.bg_i)
        table = signal.convolve(table, bg[None, :], method="direct")[:, :size]
    lost = 1.0 - table.sum()
    if lost > TRUNCATION_BUDGET:
        raise TruncationError(f"joint table loses {lost:.3g} beyond n_max={n_max}; increase n_max")
    return table


def table_moments(table: np.ndarray) -> dict[str, float]:
    """Means, variances and covariance of a ``table[m_s, m_i]`` pmf."""
    m = np.arange(table.shape[0])
    p_s, p_i = table.sum(axis=1), table.sum(axis=0)
    mean_s, mean_i = m @ p_s, m @ p_i
    var_s = (m - mean_s) ** 2 @ p_s
    var_i = (m - mean_i) ** 2 @ p_i
    cov = (m - mean_s) @ table @ (m - mean_i)
    return dict(mean_s=mean_s, mean_i=mean_i, var_s=var_s, var_i=var_i, cov=cov)


def conditional_fano_table(table: np.ndarray, window: tuple[float, float]) -> tuple[float, float]:
    """Idler Fano factor and success probability for ``m_s`` in ``window``."""
    m = np.arange(table.shape[0])
    keep = (m >= window[0]) & (m <= window[1])
    sub = table[keep].sum(axis=0)
    success = sub.sum()
    if success <= 0:
        raise NumericalError("window has zero probability")
    p = sub / success
    mean = m @ p
    var = (m - mean) ** 2 @ p
    return var / mean, success
