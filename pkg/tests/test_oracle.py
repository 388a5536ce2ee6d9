import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twinbeam.collection import CollectionModel
from twinbeam.detection import DetectorArm, detect_pmf
from twinbeam.errors import NumericalError, ParameterError, TruncationError
from twinbeam.oracle import (
    conditional_fano_table,
    fit_mode_number,
    gamma0_expected,
    joint_pmf_bruteforce,
    seeded_R,
    solve_idler_transmission,
    table_moments,
    twin_moments,
)
from twinbeam.source import SourceKind, SourceModel, photon_pmf


def arms(es, ei=None, ds=0.0, di=0.0):
    return DetectorArm(es, ds), DetectorArm(es if ei is None else ei, di)


def test_matched_twin_R_is_one_minus_eta():
    assert twin_moments(SourceModel(20, 50.9), arms(0.55)).R == pytest.approx(0.45, abs=1e-12)


@pytest.mark.parametrize("mu,nbar", [(1, 0.1), (20, 50.9), (500, 3.0)])
def test_R_independent_of_gain(mu, nbar):
    assert twin_moments(SourceModel(mu, nbar), arms(0.55)).R == pytest.approx(0.45, abs=1e-12)


def test_perfect_detection_R_zero():
    assert twin_moments(SourceModel(20, 50.9), arms(1.0)).R == pytest.approx(0.0, abs=1e-12)


def test_mismatched_R_above_shot_noise():
    col = CollectionModel(whole_modes=0, t_i=0.8)
    # ((0.55 - 0.44)^2 var(n) + (0.55*0.45 + 0.44*0.56) <n>) / (0.99 <n>)
    n, var = 1018.0, 1018.0 * (1 + 1018.0 / 20)
    expected = (0.11**2 * var + (0.55 * 0.45 + 0.44 * 0.56) * n) / (0.99 * n)
    assert expected == pytest.approx(1.1332, abs=1e-4)
    assert twin_moments(SourceModel(20, 50.9), arms(0.55), col).R == pytest.approx(expected, rel=1e-12)


def test_uncorrected_moments_include_noise():
    a = (DetectorArm(0.55, 159.0, 3.0), DetectorArm(0.55, 214.0, -2.0))
    c = twin_moments(SourceModel(20, 50.9), a, corrected=True)
    u = twin_moments(SourceModel(20, 50.9), a, corrected=False)
    assert u.var_m_s - c.var_m_s == pytest.approx(159.0**2)
    assert u.var_m_i - c.var_m_i == pytest.approx(214.0**2)
    assert u.mean_m_s - c.mean_m_s == pytest.approx(3.0)
    assert u.cov_m == c.cov_m


@pytest.mark.parametrize("kind", list(SourceKind))
def test_moment_set_invariants(kind):
    m = twin_moments(SourceModel(3, 4.0, kind), arms(0.7, 0.4), CollectionModel(whole_modes=2, t_s=0.6, edge=True, bg_i=3.0))
    assert m.var_m_s >= 0 and m.var_m_i >= 0
    assert m.cov_m**2 <= m.var_m_s * m.var_m_i


# -- seeded amplifier ---------------------------------------------------------


def test_seeded_unseeded_limit():
    assert seeded_R(0.55, 0.0, 10.0).exact == pytest.approx(0.45, abs=1e-15)
    assert seeded_R(0.55, 0.0, 10.0).exact == pytest.approx(twin_moments(SourceModel(), arms(0.55)).R, abs=1e-12)


def test_seeded_large_seed():
    r = seeded_R(0.55, 1e3, 10.0)
    assert 1 - 0.55 / 1.05 == pytest.approx(0.476190, abs=1e-6)
    assert r.exact == pytest.approx(0.476190, abs=1e-6)
    assert r.asymptote == pytest.approx(0.4775, abs=1e-12)
    assert seeded_R(0.55, math.inf, 10.0).exact == pytest.approx(1 - 0.55 / 1.05, abs=1e-15)


@pytest.mark.parametrize("alpha,nu2", [(0.0, 1.0), (3.0, 0.2), (1e4, 50.0)])
def test_seeded_no_detection(alpha, nu2):
    assert seeded_R(0.0, alpha, nu2).exact == 1.0


def test_seeded_complex_amplitude():
    assert seeded_R(0.5, 3j, 2.0) == seeded_R(0.5, 3.0, 2.0)


def test_seeded_zero_gain():
    with pytest.raises(ParameterError):
        seeded_R(0.5, 1.0, 0.0)


@settings(max_examples=80, deadline=None)
@given(eta=st.floats(0.01, 1), a=st.floats(0, 100), b=st.floats(0, 100), g1=st.floats(0.01, 100), g2=st.floats(0.01, 100))
def test_seeded_monotonicity(eta, a, b, g1, g2):
    a, b = sorted((a, b))
    g1, g2 = sorted((g1, g2))
    # a larger seed adds noise; a larger gain removes it
    assert seeded_R(eta, a, g1).exact <= seeded_R(eta, b, g1).exact + 1e-15
    assert seeded_R(eta, b, g2).exact <= seeded_R(eta, b, g1).exact + 1e-15
    assert 1 - eta - 1e-15 <= seeded_R(eta, b, g1).exact <= 1.0


# -- correlation coefficient and mode fitting ---------------------------------


def test_gamma0_perfect():
    assert gamma0_expected(SourceModel(20, 50.9), arms(1.0)) == pytest.approx(1.0, abs=1e-15)


def test_gamma0_fitted_point():
    assert gamma0_expected((20.645, 1018.18 / 20.645), arms(0.55)) == pytest.approx(0.984, abs=1e-4)


def test_gamma0_noise_dominated():
    g = gamma0_expected(SourceModel(20, 50.9), arms(0.55, ds=1e7, di=1e7), corrected=False)
    assert 0 < g < 1e-6


def test_fit_mode_number_reported_point():
    # gamma = eta^2 V / (eta^2 V + eta (1-eta) <n>), V = <n>(1 + <n>/mu), <n> = 560/0.55
    n = 560 / 0.55
    v = 0.55 * 0.45 * n * 0.984 / (0.016 * 0.55**2)
    mu_closed = n / (v / n - 1)
    mu = fit_mode_number(0.984, 560, 0.55)
    assert mu == pytest.approx(mu_closed, rel=1e-9)
    assert mu == pytest.approx(20.6, abs=0.05)


def test_fit_mode_number_round_trip():
    n = 300.0
    g = gamma0_expected((1.0, n), arms(0.4))
    assert fit_mode_number(g, 0.4 * n, 0.4) == pytest.approx(1.0, abs=1e-9)


def test_fit_mode_number_near_unity():
    assert fit_mode_number(0.99999, 560, 0.55) < 1.0
    assert fit_mode_number(0.9999, 560, 0.55) < fit_mode_number(0.999, 560, 0.55)


def test_fit_mode_number_pair_means():
    mu = fit_mode_number(0.984, (528, 593), 0.55)
    col = CollectionModel(bg_i=65 / 0.55)
    assert gamma0_expected((mu, 960 / mu), arms(0.55), collection=col) == pytest.approx(0.984, abs=1e-9)


def test_fit_mode_number_unattainable():
    with pytest.raises(NumericalError):
        fit_mode_number(1 - 1e-12, 560, 0.55)
    with pytest.raises(NumericalError):
        fit_mode_number(0.3, 560, 0.55)  # below the Poisson limit gamma -> eta
    with pytest.raises(ParameterError):
        fit_mode_number(1.2, 560, 0.55)


def test_solve_idler_transmission():
    src = SourceModel(20, 50.9)
    target = 10 ** (-0.325)
    t = solve_idler_transmission(target, src, arms(0.55))
    col = CollectionModel(whole_modes=0, t_i=t)
    assert 0 < t < 1
    assert twin_moments(src, arms(0.55), col).R == pytest.approx(target, rel=1e-10)


# -- exact tables --------------------------------------------------------------


def test_joint_vacuum():
    t = joint_pmf_bruteforce(SourceModel(1, 0.0), arms(0.5), n_max=5)
    assert t[0, 0] == 1.0 and t.sum() == 1.0


def test_joint_marginals_match_detect_pmf():
    src = SourceModel(1, 2.0)
    t = joint_pmf_bruteforce(src, arms(0.5), n_max=200)
    q = detect_pmf(photon_pmf(src, 200), 0.5)
    assert np.max(np.abs(t.sum(axis=1) - q)) < 1e-12
    assert np.max(np.abs(t.sum(axis=0) - q)) < 1e-12


@pytest.mark.parametrize(
    "source,eta_s,eta_i,col",
    [
        (SourceModel(1, 2.0), 0.5, 0.5, CollectionModel()),
        (SourceModel(20, 2.5), 0.55, 0.55, CollectionModel()),
        (SourceModel(5, 2.0), 0.3, 0.8, CollectionModel(whole_modes=0, t_s=0.7, t_i=0.4)),
        (SourceModel(2, 3.0), 0.6, 0.6, CollectionModel(whole_modes=2, t_s=0.5, t_i=0.9, edge=True, bg_s=2.0, bg_i=4.0)),
        (SourceModel(4, 5.0, SourceKind.COHERENT_PAIR), 0.7, 0.7, CollectionModel(bg_i=1.0)),
        (SourceModel(2, 4.0, SourceKind.INDEPENDENT_THERMAL), 0.9, 0.25, CollectionModel()),
    ],
)
def test_closed_form_matches_table(source, eta_s, eta_i, col):
    a = arms(eta_s, eta_i)
    m = twin_moments(source, a, col)
    t = table_moments(joint_pmf_bruteforce(source, a, col, n_max=200))
    assert t["mean_s"] == pytest.approx(m.mean_m_s, rel=1e-9, abs=1e-12)
    assert t["mean_i"] == pytest.approx(m.mean_m_i, rel=1e-9, abs=1e-12)
    assert t["var_s"] == pytest.approx(m.var_m_s, rel=1e-9, abs=1e-12)
    assert t["var_i"] == pytest.approx(m.var_m_i, rel=1e-9, abs=1e-12)
    assert t["cov"] == pytest.approx(m.cov_m, rel=1e-9, abs=1e-12)


def test_joint_truncation_error():
    with pytest.raises(TruncationError):
        joint_pmf_bruteforce(SourceModel(1, 50.0), arms(0.5), n_max=200)


def test_joint_cost_guard():
    with pytest.raises(ParameterError):
        joint_pmf_bruteforce(SourceModel(1, 1.0), arms(0.5), n_max=201)


def test_delta_window_fano_above_floor():
    eta = 0.55
    t = joint_pmf_bruteforce(SourceModel(5, 4.0), arms(eta), n_max=200)
    p_s = t.sum(axis=1)
    mode = int(np.argmax(p_s))
    fano, success = conditional_fano_table(t, (mode, mode))
    assert fano >= 1 - eta
    assert success == pytest.approx(p_s[mode])


@settings(max_examples=40, deadline=None)
@given(
    lo=st.integers(0, 60),
    width=st.integers(0, 30),
    law=st.sampled_from([(1, 8.0), (3, 20 / 3), (10, 4.0), (20, 2.5)]),
    eta=st.sampled_from([0.25, 0.55, 0.9]),
)
def test_conditioning_tightens(lo, width, law, eta):
    # noiseless twin beam, <n> <= 50: any window narrows the idler below its marginal Fano factor
    src = SourceModel(*law)
    t = joint_pmf_bruteforce(src, arms(eta), n_max=200)
    if t[lo : lo + width + 1].sum() < 1e-12:
        return
    fano_c, _ = conditional_fano_table(t, (lo, lo + width))
    marginal = twin_moments(src, arms(eta)).fano_i
    assert fano_c <= marginal + 1e-9
    assert fano_c >= 1 - eta - 1e-9
