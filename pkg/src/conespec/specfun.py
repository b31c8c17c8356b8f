"""Special functions underlying the cone kernels.

Bessel J, Y, Hankel H1/H2, modified I, K for real order nu >= 0 and
positive real argument, plus the Gamma function. Thin validation layer
over the numeric backend; all functions are pure.

Accuracy: relative error <= ~1e-10 over nu <= 200, z <= 1e4, measured
against the modulus sqrt(J^2 + Y^2) in the oscillatory regime (pointwise
relative error is not meaningful within ~1e-12 of a zero crossing).
"""

from __future__ import annotations

import math

from conespec._backend import core
from conespec.errors import DomainError, LogLeadingOrderError, RangeError

_GAMMA_OVERFLOW = 171.62437695630272


def _check_order_arg(nu, z):
    if not (isinstance(nu, (int, float)) and math.isfinite(nu)) or nu < 0.0:
        raise DomainError(f"order must be a finite real >= 0, got {nu!r}")
    if not (isinstance(z, (int, float)) and math.isfinite(z)) or z <= 0.0:
        raise DomainError(f"argument must be a finite real > 0, got {z!r}")


def gamma(x):
    """Gamma(x) for x > 0, relative error <= 1e-12."""
    if not (isinstance(x, (int, float)) and math.isfinite(x)) or x <= 0.0:
        raise DomainError(f"gamma requires a finite x > 0, got {x!r}")
    if x > _GAMMA_OVERFLOW:
        raise RangeError(f"gamma({x}) overflows double precision")
    return core.gammafn(float(x))


def lgamma(x):
    """log Gamma(x) for x > 0."""
    if not (isinstance(x, (int, float)) and math.isfinite(x)) or x <= 0.0:
        raise DomainError(f"lgamma requires a finite x > 0, got {x!r}")
    return core.lgammafn(float(x))


def bessel_j(nu, z):
    """Bessel function of the first kind J_nu(z).

    Underflows quietly to 0 for large order at small argument.
    """
    _check_order_arg(nu, z)
    return core.bessel_j(float(nu), float(z))


def bessel_jy_with_derivatives(nu, z):
    """(J, J', Y, Y') in one evaluation; raises RangeError on Y overflow."""
    _check_order_arg(nu, z)
    try:
        return core.bessel_jy(float(nu), float(z))
    except OverflowError as exc:
        raise RangeError(f"Y_{nu}({z}) overflows double precision") from exc


def bessel_y(nu, z):
    """Bessel function of the second kind Y_nu(z)."""
    return bessel_jy_with_derivatives(nu, z)[2]


def hankel1(nu, z):
    """Hankel function H^(1)_nu(z) = J + iY."""
    j, _, y, _ = bessel_jy_with_derivatives(nu, z)
    return complex(j, y)


def hankel2(nu, z):
    """Hankel function H^(2)_nu(z); exactly the conjugate of hankel1."""
    return hankel1(nu, z).conjugate()


def bessel_i(nu, z):
    """Modified Bessel function I_nu(z)."""
    _check_order_arg(nu, z)
    try:
        return core.bessel_ik(float(nu), float(z))[0]
    except OverflowError as exc:
        raise RangeError(f"I_{nu}({z}) overflows double precision") from exc


def bessel_k(nu, z):
    """Modified Bessel function K_nu(z)."""
    _check_order_arg(nu, z)
    try:
        return core.bessel_ik(float(nu), float(z))[2]
    except OverflowError as exc:
        raise RangeError(f"K_{nu}({z}) overflows double precision") from exc


def bessel_ik_with_derivatives(nu, z):
    """(I, I', K, K') in one evaluation."""
    _check_order_arg(nu, z)
    try:
        return core.bessel_ik(float(nu), float(z))
    except OverflowError as exc:
        raise RangeError(f"I/K_{nu}({z}) overflows double precision") from exc


def small_arg_leading(nu, z):
    """Leading small-argument behaviour (j_lead, h_lead).

    j_lead = (z/2)^nu / Gamma(nu+1) and h_lead = Gamma(nu) (z/2)^-nu / (i pi);
    the Hankel leading term requires nu > 0 (at nu = 0 it is logarithmic).
    """
    _check_order_arg(nu, z)
    j_lead = math.exp(nu * math.log(0.5 * z) - core.lgammafn(nu + 1.0))
    if nu == 0.0:
        raise LogLeadingOrderError(
            "Hankel small-argument leading term is logarithmic at nu = 0")
    h_mag = math.exp(core.lgammafn(nu) - nu * math.log(0.5 * z))
    return j_lead, complex(0.0, -h_mag / math.pi)
