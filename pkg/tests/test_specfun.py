"""Special-function tests against an independent high-precision oracle
(mpmath) and the closed forms / identities they must satisfy."""

import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest

from conespec import specfun as sf
from conespec.errors import DomainError, LogLeadingOrderError, RangeError

mp.mp.dps = 30


def relerr(a, b):
    b = float(b)
    if b == 0.0:
        return abs(a)
    return abs(a - b) / abs(b)


# -- gamma ----------------------------------------------------------------


@pytest.mark.parametrize("x, want", [
    (0.5, math.sqrt(math.pi)),
    (3.0, 2.0),
    (1.5, math.sqrt(math.pi) / 2.0),
])
def test_gamma_closed_forms(x, want):
    assert relerr(sf.gamma(x), want) < 1e-12


@pytest.mark.parametrize("x", [1e-3, 0.1, 0.7, 2.3, 10.25, 55.0, 101.3, 171.0])
def test_gamma_oracle(x):
    assert relerr(sf.gamma(x), mp.gamma(x)) < 1e-12


def test_gamma_domain_and_range():
    with pytest.raises(DomainError):
        sf.gamma(0.0)
    with pytest.raises(DomainError):
        sf.gamma(-1.5)
    with pytest.raises(DomainError):
        sf.gamma(float("nan"))
    with pytest.raises(RangeError):
        sf.gamma(200.0)


# -- Bessel J -------------------------------------------------------------


def _series_oracle_j(nu, z, terms=60):
    """Independent ascending-series oracle evaluated in mpmath."""
    with mp.workdps(40):
        s = mp.mpf(0)
        for k in range(terms):
            s += ((-1) ** k * (mp.mpf(z) / 2) ** (nu + 2 * k)
                  / (mp.factorial(k) * mp.gamma(nu + k + 1)))
        return s


def test_bessel_j_half_integer_closed_forms():
    assert relerr(sf.bessel_j(0.5, 1.0),
                  math.sqrt(2 / math.pi) * math.sin(1.0)) < 1e-12
    assert abs(sf.bessel_j(0.5, math.pi)) < 1e-12


def test_bessel_j_1_1_series_oracle():
    want = _series_oracle_j(1, 1.0)
    assert relerr(sf.bessel_j(1.0, 1.0), want) < 1e-12
    assert abs(float(want) - 0.4400505857449335) < 1e-15


@pytest.mark.parametrize("nu", [0.0, 0.3, 0.5, 1.0, 2.5, 7.3, 20.0, 55.5,
                                120.3, 200.0])
@pytest.mark.parametrize("z", [1e-3, 0.3, 1.9, 2.1, 9.7, 40.0, 350.0,
                               1000.0, 9000.0])
def test_bessel_jy_oracle(nu, z):
    try:
        j, jp, y, yp = sf.bessel_jy_with_derivatives(nu, z)
    except RangeError:
        assert abs(mp.bessely(nu, z)) > 1e280
        return
    mj, my = mp.besselj(nu, z), mp.bessely(nu, z)
    env = max(abs(float(mj)), abs(float(my)), 1e-300)
    assert min(relerr(j, mj), abs(j - float(mj)) / env) < 1e-10
    assert min(relerr(y, my), abs(y - float(my)) / env) < 1e-10


def test_bessel_jy_random_sweep(rng):
    for _ in range(150):
        nu = rng.uniform(0.0, 60.0)
        z = math.exp(rng.uniform(math.log(1e-3), math.log(3000.0)))
        j, jp, y, yp = sf.bessel_jy_with_derivatives(nu, z)
        mj, my = mp.besselj(nu, z), mp.bessely(nu, z)
        env = max(abs(float(mj)), abs(float(my)), 1e-300)
        assert abs(j - float(mj)) / env < 1e-10
        assert abs(y - float(my)) / env < 1e-10


def test_bessel_j_domain():
    with pytest.raises(DomainError):
        sf.bessel_j(0.5, 0.0)
    with pytest.raises(DomainError):
        sf.bessel_j(0.5, -1.0)
    with pytest.raises(DomainError):
        sf.bessel_j(-0.5, 1.0)


def test_bessel_y_overflow_range_error():
    with pytest.raises(RangeError):
        sf.bessel_y(200.0, 0.5)


# -- Hankel ---------------------------------------------------------------


def test_hankel_half_integer_closed_form():
    # H1_{1/2}(z) = -i sqrt(2/(pi z)) e^{iz}
    z = 2.0
    want = -1j * math.sqrt(2 / (math.pi * z)) * complex(math.cos(z), math.sin(z))
    got = sf.hankel1(0.5, z)
    assert abs(got - want) / abs(want) < 1e-12
    assert abs(got - complex(0.51301614, 0.23478571)) < 1e-7


def test_hankel_conjugation_bitwise():
    for nu, z in [(0.5, 1.0), (1.0, 1.0), (3.3, 7.7), (20.0, 2.5)]:
        h1 = sf.hankel1(nu, z)
        h2 = sf.hankel2(nu, z)
        assert h2 == h1.conjugate()


def test_hankel_1_1_oracle():
    got = sf.hankel1(1.0, 1.0)
    want = complex(mp.besselj(1, 1)) + 1j * complex(mp.bessely(1, 1))
    assert abs(got - want) / abs(want) < 1e-9
    assert abs(got - complex(0.4400505857, -0.7812128213)) < 1e-9


def test_hankel_outgoing_asymptotics():
    # z >> nu: H1_nu ~ sqrt(2/(pi z)) e^{i(z - nu pi/2 - pi/4)}
    nu, z = 1.5, 300.0
    want = (math.sqrt(2.0 / (math.pi * z))
            * complex(math.cos(z - nu * math.pi / 2 - math.pi / 4),
                      math.sin(z - nu * math.pi / 2 - math.pi / 4)))
    assert abs(sf.hankel1(nu, z) - want) / abs(want) < 1e-2


# -- modified Bessel -------------------------------------------------------


def test_bessel_ik_half_integer_closed_forms():
    assert relerr(sf.bessel_k(0.5, 1.0),
                  math.sqrt(math.pi / 2) * math.exp(-1.0)) < 1e-12
    assert relerr(sf.bessel_i(0.5, 1.0),
                  math.sqrt(2 / math.pi) * math.sinh(1.0)) < 1e-12


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.0, 2.5, 7.3, 20.0, 101.0])
@pytest.mark.parametrize("z", [1e-3, 0.9, 2.1, 9.7, 123.0, 700.0])
def test_bessel_ik_oracle(nu, z):
    try:
        i, ip, k, kp = sf.bessel_ik_with_derivatives(nu, z)
    except RangeError:
        assert abs(mp.besseli(nu, z)) > 1e280 or abs(mp.besselk(nu, z)) > 1e280
        return
    assert relerr(i, mp.besseli(nu, z)) < 1e-10
    assert relerr(k, mp.besselk(nu, z)) < 1e-10


def test_bessel_i_monotone_k_antimonotone():
    zs = [0.5, 1.0, 2.0, 4.0]
    ivals = [sf.bessel_i(1.3, z) for z in zs]
    kvals = [sf.bessel_k(1.3, z) for z in zs]
    assert all(a < b for a, b in zip(ivals, ivals[1:]))
    assert all(a > b for a, b in zip(kvals, kvals[1:]))


def test_ik_wronskian():
    # I_nu(z) K'_nu(z) - I'_nu(z) K_nu(z) = -1/z
    for nu, z in [(1.0, 2.0), (0.3, 0.7), (5.5, 11.0)]:
        i, ip, k, kp = sf.bessel_ik_with_derivatives(nu, z)
        assert relerr(i * kp - ip * k, -1.0 / z) < 1e-10


# -- small-argument leading terms ------------------------------------------


def test_small_arg_leading_examples():
    j_lead, h_lead = sf.small_arg_leading(1.0, 0.01)
    assert relerr(j_lead, 0.005) < 1e-12
    j_lead2, _ = sf.small_arg_leading(0.5, 0.01)
    assert relerr(j_lead2, (0.005) ** 0.5 / sf.gamma(1.5)) < 1e-12
    assert abs(j_lead2 - 0.0797885) < 1e-6


def test_small_arg_leading_hankel():
    nu, z = 1.5, 0.02
    _, h_lead = sf.small_arg_leading(nu, z)
    want = sf.gamma(nu) * (z / 2.0) ** (-nu) / (1j * math.pi)
    assert abs(h_lead - want) / abs(want) < 1e-12


def test_small_arg_leading_log_case():
    with pytest.raises(LogLeadingOrderError):
        sf.small_arg_leading(0.0, 0.01)


@pytest.mark.parametrize("nu", [0.5, 1.0, 2.5])
def test_small_arg_ratio(nu):
    z = 1e-6
    j_lead, _ = sf.small_arg_leading(nu, z)
    assert abs(sf.bessel_j(nu, z) / j_lead - 1.0) < 1e-4


# -- identities -------------------------------------------------------------


def _cdiff5(f, z, h):
    return (-f(z + 2 * h) + 8 * f(z + h) - 8 * f(z - h) + f(z - 2 * h)) / (12 * h)


def test_wronskian_central_differences(rng):
    # J Y' - J' Y = 2/(pi z), derivatives by central differences at 1e-5 z
    for _ in range(40):
        nu = rng.uniform(0.0, 10.0)
        z = math.exp(rng.uniform(math.log(0.1), math.log(100.0)))
        h = 1e-5 * z
        jp = _cdiff5(lambda t: sf.bessel_j(nu, t), z, h)
        yp = _cdiff5(lambda t: sf.bessel_y(nu, t), z, h)
        w = sf.bessel_j(nu, z) * yp - jp * sf.bessel_y(nu, z)
        assert relerr(w, 2.0 / (math.pi * z)) < 1e-8


def test_recurrence(rng):
    for _ in range(40):
        nu = rng.uniform(1.0, 30.0)
        z = math.exp(rng.uniform(math.log(0.5), math.log(200.0)))
        lhs = sf.bessel_j(nu - 1.0, z) + sf.bessel_j(nu + 1.0, z)
        rhs = 2.0 * nu / z * sf.bessel_j(nu, z)
        env = abs(sf.bessel_j(nu - 1.0, z)) + abs(sf.bessel_j(nu + 1.0, z)) + 1e-300
        assert abs(lhs - rhs) / max(abs(rhs), env) < 1e-8
