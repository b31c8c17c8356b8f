"""Propagator quadrature, model integral, decay fits and predictions."""

import cmath
import math
import warnings

import numpy as np
import pytest

from conespec import cone_kernels as ck
from conespec import propagators as pr
from conespec.cone_kernels import ConePoint
from conespec.errors import ConfigError, DomainError, FitQualityWarning


# -- cutoff ------------------------------------------------------------------


def test_cutoff_plateau_support():
    assert pr.cutoff_chi(0.1, 1.0) == 1.0
    assert pr.cutoff_chi(0.5, 1.0) == 1.0
    assert pr.cutoff_chi(1.0, 1.0) == 0.0
    assert pr.cutoff_chi(1.7, 1.0) == 0.0
    assert 0.0 < pr.cutoff_chi(0.75, 1.0) < 1.0


def test_cutoff_monotone_transition():
    ls = np.linspace(0.5, 1.0, 200)
    vals = [pr.cutoff_chi(float(l), 1.0) for l in ls]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_cutoff_smooth_at_edges():
    # C-infinity gluing: high-order differences at both edges stay tiny
    h = 1e-3
    for edge in (0.5, 1.0):
        vals = [pr.cutoff_chi(edge + k * h, 1.0) for k in range(-4, 5)]
        d4 = (vals[0] - 4 * vals[1] + 6 * vals[2] - 4 * vals[3] + vals[4])
        assert abs(d4) < 1e-4  # a C^1-only kink would give O(h^2) ~ 1e-3 here


def test_cutoff_jet_matches_finite_differences():
    cut = pr.Cutoff(1.0)
    lam, h = 0.8, 1e-2
    jet = cut.chi_jet(lam, 2)
    xs = [lam + k * h for k in range(-3, 4)]
    ys = [pr.cutoff_chi(x, 1.0) for x in xs]
    d1 = (-ys[5] + 8 * ys[4] - 8 * ys[2] + ys[1]) / (12 * h)
    d2 = (-ys[5] + 16 * ys[4] - 30 * ys[3] + 16 * ys[2] - ys[1]) / (12 * h * h)
    assert abs(jet[1] - d1) < 1e-3 * (1 + abs(d1))
    assert abs(jet[2] - d2) < 1e-2 * (1 + abs(d2))


# -- model integral ------------------------------------------------------------


@pytest.mark.parametrize("s", [1, 2, 3])
@pytest.mark.parametrize("t", [100.0, 1000.0, 10000.0])
def test_model_integral_acceptance_grid(s, t):
    q, cf = pr.model_integral(s, t, pr.Cutoff(10.0))
    assert abs(q - cf) / abs(cf) < 1e-6


def test_model_integral_closed_forms():
    _, cf = pr.model_integral(2, 100.0, pr.Cutoff(10.0))
    assert abs(cf - (-2e-6j)) < 1e-18
    _, cf1 = pr.model_integral(1, 1000.0, pr.Cutoff(10.0))
    assert abs(cf1 - (-1e-6)) < 1e-18
    q3, cf3 = pr.model_integral(3, 200.0, pr.Cutoff(10.0))
    assert abs(cf3 - 6.0 / 200.0 ** 4) < 1e-22
    assert abs(q3 - cf3) / abs(cf3) < 1e-6


def test_model_integral_lambda1_regime():
    # with the narrow cutoff the asymptotic closed form holds from t ~ 1e3
    for s in (1, 2, 3):
        q, cf = pr.model_integral(s, 1000.0, pr.Cutoff(1.0))
        assert abs(q - cf) / abs(cf) < 1e-6


def test_model_integral_preconditions():
    with pytest.raises(DomainError):
        pr.model_integral(2, 5.0, pr.Cutoff(1.0))
    with pytest.raises(DomainError):
        pr.model_integral(0.0, 100.0, pr.Cutoff(1.0))


def test_mu_substitution_schrodinger_constant(free3):
    # int chi(lam^2) e^{i t lam^2} lam^{2nu0+1} dlam
    #   = (1/2) Gamma(nu0+1) e^{i pi (nu0+1)/2} t^{-(nu0+1)} + O(t^-inf):
    # direct quadrature against the mu-substituted model integral at t=1e3
    t = 1000.0
    nu0 = 0.5
    cut = pr.Cutoff(1.0)
    n = 400000
    lam = (np.arange(n) + 0.5) / n  # midpoint rule on [0, 1]
    chi = np.array([cut.chi_sq(float(l)) for l in lam])
    direct = np.sum(chi * np.exp(1j * t * lam ** 2) * lam ** (2 * nu0 + 1)) / n
    half_model, _ = pr.model_integral(nu0, t, cut)
    assert abs(direct - 0.5 * half_model) / abs(direct) < 1e-4
    want = (0.5 * math.gamma(nu0 + 1.0)
            * cmath.exp(1j * math.pi * (nu0 + 1.0) / 2.0) * t ** -(nu0 + 1.0))
    assert abs(direct - want) / abs(want) < 1e-3


# -- stone quadrature ------------------------------------------------------------


def test_stone_small_t_linearity(free3):
    z = ConePoint(1.0)
    cut = pr.Cutoff(1.0)
    v1 = pr.stone_quadrature(free3, "wave_sin", cut, 1e-3, z, z)
    v2 = pr.stone_quadrature(free3, "wave_sin", cut, 2e-3, z, z)
    assert abs(v2 / v1 - 2.0) < 1e-3


def test_stone_self_convergence_flag(free3):
    z = ConePoint(1.0)
    val = pr.stone_quadrature(free3, "schrodinger", pr.Cutoff(1.0), 50.0,
                              z, z, convergence_check=True)
    assert abs(val) > 0.0


def test_stone_undersampling_rejected(free3):
    z = ConePoint(1.0)
    with pytest.raises(ConfigError):
        pr.stone_quadrature(free3, "wave_sin", pr.Cutoff(1.0), 500.0, z, z,
                            n_lambda=64)


def test_wave_kernels_real(free3):
    z = ConePoint(1.0)
    for kind in ("wave_sin", "wave_cos"):
        v = pr.stone_quadrature(free3, kind, pr.Cutoff(1.0), 37.0, z, z)
        assert v.imag == 0.0


def test_stone_series_matches_pointwise(free4):
    z = ConePoint(1.0)
    cut = pr.Cutoff(2.0)
    ts = [50.0, 100.0, 200.0]
    series = pr.stone_series(free4, "wave_sin", cut, ts, z, z)
    # shared-table series sized by t_max agrees with per-t quadrature
    for t, v in zip(ts, series):
        direct = pr.stone_quadrature(free4, "wave_sin", cut, max(ts), z, z)
        if t == max(ts):
            assert abs(v - direct) < 1e-12 * max(abs(direct), 1e-300)


# -- decay fits ---------------------------------------------------------------


def test_fit_decay_exact_power_law():
    ts = [10.0 * 2 ** k for k in range(12)]
    vals = [5.0 * t ** -3.0 for t in ts]
    fit = pr.fit_decay(ts, vals)
    assert abs(fit.exponent - 3.0) < 1e-6
    assert abs(fit.coefficient - 5.0) < 1e-6


def test_fit_decay_contaminated_power_law():
    ts = np.geomspace(100.0, 10000.0, 14)
    vals = [5.0 * t ** -3.0 + t ** -4.0 for t in ts]
    fit = pr.fit_decay(ts, vals)
    assert abs(fit.exponent - 3.0) < 0.02


def test_fit_decay_oscillatory_warning():
    ts = np.geomspace(10.0, 1000.0, 16)
    vals = [t ** -2.0 * (1.0 + 0.5 * math.sin(7.0 * math.log(t))) for t in ts]
    with pytest.warns(FitQualityWarning):
        fit = pr.fit_decay(ts, vals)
    assert fit.oscillatory
    assert fit.ci_exponent > 0.0


# -- predictions --------------------------------------------------------------


def test_predicted_constants_n3_free(free3):
    z = ConePoint(1.0)
    ww = free3.zero_mode().w_eval(1.0) ** 2
    e, c = pr.predicted_constants(free3, "wave_sin", z, z)
    assert c == 0.0  # cos(3 pi/2) cancellation
    assert e == pytest.approx(min(2 * 0.5 + 2.0, 2 * 1.5 + 1.0))  # = 3
    e2, c2 = pr.predicted_constants(free3, "schrodinger", z, z)
    assert e2 == pytest.approx(1.5)
    want = 0.5 * math.gamma(1.5) * cmath.exp(3j * math.pi / 4.0) * ww
    assert abs(c2 - want) < 1e-14


def test_predicted_constants_n4_free(free4):
    z = ConePoint(1.0)
    ww = free4.zero_mode().w_eval(1.0) ** 2
    e, c = pr.predicted_constants(free4, "wave_sin", z, z)
    assert e == pytest.approx(3.0)
    assert abs(c - (-2.0 * ww)) < 1e-14
    assert abs(c - (-1.0 / (4 * math.pi ** 2))) < 1e-14
    e3, c3 = pr.predicted_constants(free4, "wave_cos", z, z)
    assert e3 == pytest.approx(4.0)
    assert abs(c3 - 6.0 * ww) < 1e-14


def test_predicted_constants_wave_cos_cancellation(free3):
    z = ConePoint(1.0)
    e, c = pr.predicted_constants(free3, "wave_cos", z, z)
    assert c == 0.0
    assert e == pytest.approx(min(2 * 0.5 + 3.0, 2 * 1.5 + 2.0))  # = 4


def test_dyadic_times():
    ts = pr.dyadic_times(200.0, 6)
    assert len(ts) == 13
    assert ts[0] == 200.0 and abs(ts[-1] - 12800.0) < 1e-9


def test_bound_state_scan(sphere3, free3):
    from conespec import radial_scattering as rs
    deep = rs.RadialModel(sphere3, rs.BumpPerturbation(1.5, 0.5, -8.0))
    with pytest.warns(UserWarning):
        assert pr.warn_if_bound_state(deep)
    assert not pr.warn_if_bound_state(free3)
    mild = rs.RadialModel(sphere3, rs.BumpPerturbation(1.5, 0.5, 0.4))
    assert not pr.warn_if_bound_state(mild)
