"""Perturbed-cone engine tests: reductions to the exact cone, refinement
oracles, zero modes and low-energy fits."""

import math

import numpy as np
import pytest

from conespec import cone_kernels as ck
from conespec import cross_section as cs
from conespec import radial_scattering as rs
from conespec._backend import core
from conespec.cone_kernels import ConePoint
from conespec.errors import (ConfigError, ModelError, SolverError,
                             ZeroResonanceError)


# -- Liouville reduction ----------------------------------------------------


def test_liouville_reduce_examples(free3, free4, bump3):
    q = rs.liouville_reduce(free3, 0.5)
    assert q(1.7) == 0.0  # free half-line
    q4 = rs.liouville_reduce(free4, 1.0)
    assert q4(2.0) == pytest.approx(0.75 / 4.0)
    qb = rs.liouville_reduce(bump3, 1.5)
    assert qb(1.5) == pytest.approx(2.0 / 1.5 ** 2 + 0.4, rel=1e-12)


def test_liouville_reduce_symbolic_by_sampling(bump3):
    # applying the mode-nu radial operator to r^{-(n-1)/2} u reproduces
    # r^{-(n-1)/2} (-u'' + Q u) for a smooth test u
    nu, n = 1.5, 3
    q = rs.liouville_reduce(bump3, nu)
    ell = nu - 0.5  # angular eigenvalue l(l+n-2) = nu^2 - (n-2)^2/4

    def u(r):
        return math.sin(1.3 * r) * math.exp(-0.1 * r)

    def f(r):
        return r ** (-(n - 1) / 2.0) * u(r)

    def radial_op(g, r, h=1e-4):
        gpp = (g(r + h) - 2 * g(r) + g(r - h)) / h ** 2
        gp = (g(r + h) - g(r - h)) / (2 * h)
        ang = ell * (ell + n - 2.0) / r ** 2
        return -gpp - (n - 1) / r * gp + ang * g(r) + bump3.w_value(r) * g(r)

    def reduced(r, h=1e-4):
        upp = (u(r + h) - 2 * u(r) + u(r - h)) / h ** 2
        return r ** (-(n - 1) / 2.0) * (-upp + q(r) * u(r))

    for r in (0.7, 1.3, 2.1):
        a, b = radial_op(f, r), reduced(r)
        assert abs(a - b) <= 1e-8 * max(abs(a), 1.0)


# -- regular / outgoing solutions -------------------------------------------


def test_regular_free_scaling(free3):
    # u = sqrt(r) J_nu(lam r) 2^nu Gamma(nu+1)/lam^nu
    for nu, lam, r in [(0.5, 1.0, 1.0), (1.5, 0.7, 2.0), (2.5, 2.0, 1.3)]:
        (u, up), = rs.regular_solution(free3, nu, lam, [r])
        j, jp, _, _ = core.bessel_jy(nu, lam * r)
        scale = 2.0 ** nu * core.gammafn(nu + 1.0) / lam ** nu
        want = math.sqrt(r) * j * scale
        assert abs(u.real - want) / abs(want) < 1e-7
        wantp = (0.5 / math.sqrt(r) * j + math.sqrt(r) * lam * jp) * scale
        assert abs(up.real - wantp) / abs(wantp) < 1e-7


def test_regular_zero_energy_euler(free3):
    for nu in (0.5, 1.0, 2.5):
        (u, _), = rs.regular_solution(free3, nu, 0.0, [2.0])
        assert abs(u.real - 2.0 ** (nu + 0.5)) / 2.0 ** (nu + 0.5) < 1e-9


def test_regular_step_refinement_oracle(sphere3):
    bump = rs.BumpPerturbation(1.5, 0.5, 0.4)
    coarse = rs.RadialModel(sphere3, bump, tol=1e-8)
    fine = rs.RadialModel(sphere3, bump, tol=1e-12)
    (uc, _), = rs.regular_solution(coarse, 0.5, 1.0, [2.0])
    (uf, _), = rs.regular_solution(fine, 0.5, 1.0, [2.0])
    assert abs(uc - uf) / abs(uf) < 1e-7


def test_outgoing_free_matches_hankel(free3):
    (u, up), = rs.outgoing_solution(free3, 0.5, 1.0, [2.0])
    j, jp, y, yp = core.bessel_jy(0.5, 2.0)
    want = math.sqrt(2.0) * complex(j, y)
    assert abs(u - want) / abs(want) < 1e-7
    # and inward of the matching radius it still solves the free equation
    (u05, _), = rs.outgoing_solution(free3, 0.5, 1.0, [0.5])
    j2, _, y2, _ = core.bessel_jy(0.5, 0.5)
    want2 = math.sqrt(0.5) * complex(j2, y2)
    assert abs(u05 - want2) / abs(want2) < 1e-7


def test_outgoing_phase_constancy(bump3):
    lam = 1.0
    radii = [2.0, 3.0, 5.0, 9.0, 16.0]
    sols = rs.outgoing_solution(bump3, 0.5, lam, radii)
    phases = [math.atan2((u * complex(math.cos(-lam * r),
                                      math.sin(-lam * r))).imag,
                         (u * complex(math.cos(-lam * r),
                                      math.sin(-lam * r))).real)
              for (u, _), r in zip(sols, radii)]
    spread = max(phases) - min(phases)
    assert spread < 1e-4


def test_matching_radius_config_error(sphere3):
    table = rs.TablePerturbation(
        tuple(np.linspace(0.5, 8.0, 32)),
        tuple(0.3 / np.linspace(0.5, 8.0, 32) ** 3))
    model = rs.RadialModel(sphere3, table, r_match=1.0)
    with pytest.raises(ConfigError):
        model.mode_solution(0.5, 1.0)


def test_w_decay_model_error(sphere3):
    radii = tuple(np.linspace(0.5, 40.0, 64))
    with pytest.raises(ModelError):
        rs.RadialModel(sphere3, rs.TablePerturbation(
            radii, tuple(np.full(64, 5.0))))  # no decay at all


# -- Green functions ---------------------------------------------------------


def test_green_reduces_to_exact(free3):
    for nu, lam, r, rp in [(0.5, 1.0, 1.0, 2.0), (1.5, 0.5, 0.7, 1.1),
                           (2.5, 2.0, 1.0, 3.0)]:
        g = rs.mode_green_perturbed(free3, nu, lam, r, rp)
        want = ck.mode_green_exact(nu, lam, r, rp)
        assert abs(g - want) / abs(want) < 1e-7


def test_green_symmetry_and_conjugacy(bump3):
    g = rs.mode_green_perturbed(bump3, 0.5, 1.0, 1.0, 2.0, +1)
    assert rs.mode_green_perturbed(bump3, 0.5, 1.0, 2.0, 1.0, +1) == g
    assert rs.mode_green_perturbed(bump3, 0.5, 1.0, 1.0, 2.0, -1) == \
        g.conjugate()


def test_green_amplitude_continuity(sphere3):
    tiny = rs.RadialModel(sphere3, rs.BumpPerturbation(1.5, 0.5, 1e-6))
    g = rs.mode_green_perturbed(tiny, 0.5, 1.0, 1.0, 2.0)
    want = ck.mode_green_exact(0.5, 1.0, 1.0, 2.0)
    assert abs(g - want) < 1e-5


def test_wronskian_constancy(bump3):
    sol = bump3.mode_solution(0.5, 1.0)
    radii = np.linspace(0.3, 1.9, 9)
    regs = sol.regular_at(radii)
    outs = sol.outgoing_at(radii)
    for (ur, urp), (uo, uop) in zip(regs, outs):
        w = urp * uo - ur * uop
        assert abs(w - sol.wronskian) / abs(sol.wronskian) < 1e-8


def test_per_mode_density_positive(bump3):
    for lam in (0.3, 1.0, 2.0):
        sol = bump3.mode_solution(0.5, lam)
        for r in (0.5, 1.0, 2.5):
            assert sol.density_factor(r, r) >= -1e-12


# -- zero modes ---------------------------------------------------------------


def test_zero_mode_free_values(free3, free4):
    zm3 = free3.zero_mode()
    assert abs(zm3.w_eval(1.0) - 1.0 / (math.pi * math.sqrt(2.0))) < 1e-12
    assert abs(zm3.w_eval(1.0) ** 2 - 1.0 / (2 * math.pi ** 2)) < 1e-12
    assert abs(zm3.w_eval(1.0) - 0.22508) < 1e-5
    zm4 = free4.zero_mode()
    assert abs(zm4.w_eval(1.0) ** 2 - 1.0 / (8 * math.pi ** 2)) < 1e-12
    # w constant for the free cone with nu0 = (n-2)/2
    assert abs(zm4.w_eval(3.0) - zm4.w_eval(0.5)) < 1e-12


def test_zero_mode_exact_cone_with_potential(sphere3_v075):
    model = rs.RadialModel(sphere3_v075)
    zm = model.zero_mode()
    assert zm.a_coeff == 1.0 and zm.b_coeff == 0.0
    # w(r) = r^{nu0 - 1/2} / (2^{nu0} Gamma(nu0+1) sqrt(vol))
    want = 2.0 ** 0.5 / (2.0 * core.gammafn(2.0) * math.sqrt(4 * math.pi))
    assert abs(zm.w_eval(2.0) - want) / want < 1e-12


def test_zero_modes_rank_equals_multiplicity():
    # merged nu_0 multiplicity (disconnected-boundary surrogate): one zero
    # mode per eigenvector, identical radial parts for a radial model
    spec = cs.custom_spectrum([(0.5, 1), (0.5, 1), (1.5, 2)], n=3, vol=4.0)
    model = rs.RadialModel(spec)
    zms = model.zero_modes()
    assert len(zms) == 2
    assert zms[0].w_eval(1.3) == zms[1].w_eval(1.3)


def test_zero_mode_bump_asymptotics(bump3):
    zm = bump3.zero_mode()
    assert zm.a_coeff != 0.0
    # u0 matches its (a, b) power form beyond the matching radius
    r = bump3.r_match * 1.5
    want = zm.a_coeff * r ** (zm.nu0 + 0.5) + zm.b_coeff * r ** (0.5 - zm.nu0)
    assert abs(zm.u0(r) - want) / abs(want) < 1e-10


def test_zero_resonance_detector(sphere3):
    # bisect a deep attractive bump to the resonance and check the error
    def a_of(amp):
        model = rs.RadialModel(sphere3, rs.BumpPerturbation(1.5, 0.5, amp))
        return model.zero_mode().a_coeff

    lo, hi = -20.0, -1.0
    alo, ahi = a_of(lo), a_of(hi)
    assert alo * ahi < 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        try:
            amid = a_of(mid)
        except ZeroResonanceError:
            return  # detector fired inside the bracket
        if amid * ahi <= 0.0:
            lo = mid
            alo = amid
        else:
            hi = mid
            ahi = amid
    with pytest.raises(ZeroResonanceError):
        a_of(0.5 * (lo + hi))


# -- densities and fits --------------------------------------------------------


def test_perturbed_density_amplitude_continuity(sphere3):
    tiny = rs.RadialModel(sphere3, rs.BumpPerturbation(1.5, 0.5, 1e-6))
    p = ConePoint(1.0)
    d1 = rs.perturbed_density(tiny, 1.0, p, p, tol=1e-13)
    d0 = ck.spectral_measure_density(sphere3, 1.0, p, p, tol=1e-13)
    assert abs(d1 - d0) / d0 < 1e-5


def test_low_energy_fit_free_n3(free3):
    lams = np.geomspace(1e-3, 1e-2, 10)
    slope, coeff, pslope, pcoeff = rs.low_energy_fit(
        free3, ConePoint(1.0), ConePoint(1.0), lams)
    assert abs(slope - 2.0) < 0.02
    assert abs(coeff - pcoeff) / pcoeff < 0.01
    assert pcoeff == pytest.approx(1.0 / (2 * math.pi ** 2), rel=1e-12)


def test_low_energy_fit_free_n4(free4):
    lams = np.geomspace(1e-3, 1e-2, 10)
    slope, coeff, pslope, pcoeff = rs.low_energy_fit(
        free4, ConePoint(1.0), ConePoint(1.3), lams)
    assert abs(slope - 3.0) < 0.03
    assert pslope == 3.0
    assert abs(coeff - pcoeff) / pcoeff < 0.01


def test_low_energy_fit_bump_self_consistent(bump3):
    lams = np.geomspace(1e-3, 1e-2, 10)
    slope, coeff, pslope, pcoeff = rs.low_energy_fit(
        bump3, ConePoint(1.0), ConePoint(1.0), lams)
    assert abs(slope - 2.0) < 0.02
    assert abs(coeff - pcoeff) / pcoeff < 0.02


def test_remainder_order_invariant(bump3, free3):
    # residual after removing the leading power scales at least like
    # min(2 nu0 + 2, 2 nu1 + 1) (up to the 0.1 grace)
    floor = min(2 * 0.5 + 2.0, 2 * 1.5 + 1.0) - 0.1
    lams = np.geomspace(2e-3, 2e-2, 12)
    for model, L, R in ((bump3, ConePoint(1.0), ConePoint(1.0)),
                        (free3, ConePoint(1.0), ConePoint(1.6))):
        zm = model.zero_mode()
        ww = zm.w_eval(L.r) * zm.w_eval(R.r)
        dens = np.array([model.density(lam, L, R, tol=1e-18) for lam in lams])
        resid = np.abs(dens - lams ** 2 * ww)
        assert np.all(resid > 0.0)
        slope = np.polyfit(np.log(lams), np.log(resid), 1)[0]
        assert slope >= floor


def test_wronskian_free_scale(sphere3):
    # the free-cone Wronskian equals (2/pi) 2^nu Gamma(nu+1) lam^-nu in
    # magnitude (the scale the near-resonance guard compares against)
    model = rs.RadialModel(sphere3)
    for nu, lam in [(0.5, 1.0), (1.5, 0.3), (2.5, 2.0)]:
        sol = model.mode_solution(nu, lam)
        want = (2.0 / math.pi) * 2.0 ** nu * core.gammafn(nu + 1.0) / lam ** nu
        assert abs(abs(sol.wronskian) - want) / want < 1e-7
