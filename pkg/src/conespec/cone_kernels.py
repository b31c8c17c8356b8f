"""Closed-form kernels on the exact metric cone.

Scalar kernels against the Riemannian density r^{n-1} dr dh: the full
resolvent kernel is

    R(lam +- i0)(z, z') =
        sum_j Pi_j(theta) (r r')^{-(n-2)/2} (+-i pi/2)
              J_{nu_j}(lam r_<) H^{(+-)}_{nu_j}(lam r_>)

and the spectral-measure density of P_+^{1/2} is (2 lam/pi) Im R(+), i.e.

    lam (r r')^{-(n-2)/2} sum_j Pi_j(theta) J_{nu_j}(lam r) J_{nu_j}(lam r').

Points are (r, theta) with theta a coordinate along a fixed geodesic of the
cross-section; the angular separation of a pair is the (wrapped) coordinate
difference.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from conespec._backend import core
from conespec.errors import ConvergenceError, DiagonalError, DomainError
from conespec import specfun

MODE_CAP = 5000


@dataclass(frozen=True)
class ConePoint:
    """Point on the cone: radius r > 0 and angular coordinate theta."""

    r: float
    theta: float = 0.0

    def __post_init__(self):
        if not (self.r > 0.0 and math.isfinite(self.r)):
            raise DomainError(f"radius must be positive, got {self.r!r}")


@dataclass(frozen=True)
class KernelSample:
    lam: float
    left: ConePoint
    right: ConePoint
    value: complex
    modes_used: int
    tail_bound: float


def separation(spectrum, left, right):
    """Angular separation of the pair on the cross-section geodesic."""
    d = abs(left.theta - right.theta)
    if spectrum.kind == "sphere":
        d = d % (2.0 * math.pi)
        return min(d, 2.0 * math.pi - d)
    if spectrum.kind == "circle":
        d = d % spectrum.vol
        return min(d, spectrum.vol - d)
    return d


def mode_green_exact(nu, lam, r, r_prime, sign=+1):
    """Reduced outgoing(+)/incoming(-) Green function of the exact-cone
    mode: (sign i pi/2) sqrt(r r') J_nu(lam r_<) H^(sign)_nu(lam r_>)."""
    if lam <= 0.0 or r <= 0.0 or r_prime <= 0.0:
        raise DomainError("mode_green_exact requires positive arguments")
    a = lam * min(r, r_prime)
    b = lam * max(r, r_prime)
    jma, _, ea, _, _, _ = core.bessel_jy_scaled(float(nu), a)
    jmb, _, eb, ymb, _, eyb = core.bessel_jy_scaled(float(nu), b)
    pref = 0.5 * math.pi * math.sqrt(r * r_prime)
    jj = jma * jmb * _safe_exp(ea + eb)
    jy = jma * ymb * _safe_exp(ea + eyb)
    val = complex(-pref * jy, pref * jj)
    return val if sign > 0 else val.conjugate()


def _safe_exp(e):
    if e < -745.0:
        return 0.0
    if e > 709.0:
        raise ConvergenceError("kernel factor overflow", achieved=math.inf)
    return math.exp(e)


def mode_green_imag(nu, k, r, r_prime):
    """Imaginary-energy mode kernel sqrt(r r') I_nu(k r_<) K_nu(k r_>)."""
    if k <= 0.0 or r <= 0.0 or r_prime <= 0.0:
        raise DomainError("mode_green_imag requires positive arguments")
    a = k * min(r, r_prime)
    b = k * max(r, r_prime)
    im, _, ie, _, _, _ = core.bessel_ik_scaled(float(nu), a)
    _, _, _, km, _, ke = core.bessel_ik_scaled(float(nu), b)
    return math.sqrt(r * r_prime) * im * km * _safe_exp(ie + ke)


def zero_energy_inverse(nu, r, r_prime):
    """Zero-energy mode kernel sqrt(r r') (1/2 nu) (r_< / r_>)^nu."""
    if nu <= 0.0:
        raise DomainError("zero-energy inverse requires nu > 0")
    if r <= 0.0 or r_prime <= 0.0:
        raise DomainError("radii must be positive")
    ratio = min(r, r_prime) / max(r, r_prime)
    return math.sqrt(r * r_prime) / (2.0 * nu) * ratio ** nu


def _density_mode_count(spectrum, lam, r, r_prime, tol):
    """Number of modes so the tail bound
    sum_tail Pi_j(0) (lam^2 r r'/4)^{nu_j} / Gamma(nu_j+1)^2 < tol."""
    larg = math.log(lam * lam * r * r_prime / 4.0)
    nus = spectrum.nus()
    terms = spectrum.diagonals() * np.exp(
        np.minimum(nus * larg, 700.0) - 2.0 * spectrum.lgammas())
    # tails[j] = bound on dropping modes j, j+1, ...
    tails = np.cumsum(terms[::-1])[::-1]
    if tails[-1] >= tol:
        raise ConvergenceError(
            f"mode sum tail {tails[-1]:.3g} above tolerance {tol:.3g} "
            f"at the spectrum cap {nus.size}", achieved=float(tails[-1]))
    count = int(np.argmax(tails < tol))
    return max(count, 1), float(tails[min(count, nus.size - 1)])


def spectral_measure_density(spectrum, lam, left, right, tol=1e-12):
    """Scalar spectral-measure density of dE_{P_+^{1/2}}(lam)/dlam.

    Smooth across the diagonal; returns a float (nonnegative at coincident
    points by construction).
    """
    if lam <= 0.0:
        raise DomainError("lam must be positive")
    theta = separation(spectrum, left, right)
    r, rp = left.r, right.r
    count, tail = _density_mode_count(spectrum, lam, r, rp, tol)
    nus = spectrum.nus()[:count]
    pis = spectrum.projector_values(theta, count)
    s = core.density_pair_sum(np.ascontiguousarray(nus),
                              np.ascontiguousarray(pis),
                              lam * r, lam * rp)
    n = spectrum.n
    return lam * (r * rp) ** (-(n - 2) / 2.0) * s


def resolvent_kernel(spectrum, lam, left, right, sign=+1, tol=1e-10):
    """Mode-sum outgoing/incoming resolvent kernel at spectral parameter
    lam; rejects exactly coincident points (diagonal singularity).

    The sum converges geometrically in (r_< / r_>)^nu; pairs with equal
    radii and nonzero separation are only conditionally convergent and
    raise ConvergenceError (use separated radii).
    """
    if lam <= 0.0:
        raise DomainError("lam must be positive")
    theta = separation(spectrum, left, right)
    r, rp = left.r, right.r
    if theta == 0.0 and r == rp:
        raise DiagonalError("resolvent kernel is singular at coincident points")
    a = lam * min(r, rp)
    b = lam * max(r, rp)
    n = spectrum.n
    pref_geom = (r * rp) ** (-(n - 2) / 2.0)

    # truncation: asymptotic per-mode bound ~ Pi_j(0) sqrt(rr') (a/b)^nu/(2nu),
    # geometric tail estimate with measured ratio
    count = None
    lr = math.log(a / b)  # <= 0
    prev = None
    bound_tail = math.inf
    nmodes = len(spectrum.modes)
    diag = spectrum.diagonals()
    allnus = spectrum.nus()
    for j in range(nmodes):
        nu = allnus[j]
        bj = diag[j] * pref_geom * math.exp(nu * lr) / (2.0 * nu) * 2.0
        if prev is not None and bj > 0.0 and nu > b:
            ratio = bj / prev if prev > 0.0 else 1.0
            if ratio < 0.999:
                est = bj * ratio / (1.0 - ratio)
                if bj + est < tol:
                    count = j + 1
                    bound_tail = bj + est
                    break
        prev = bj
    if count is None:
        raise ConvergenceError(
            f"resolvent mode sum did not reach tolerance {tol:.3g} within "
            f"{nmodes} modes (needs better-separated points or more modes)",
            achieved=bound_tail)
    nus = spectrum.nus()[:count]
    pis = spectrum.projector_values(theta, count)
    sjj, sjy = core.resolvent_pair_sum(np.ascontiguousarray(nus),
                                       np.ascontiguousarray(pis), a, b)
    # the geometric factor (r r')^{-(n-2)/2} already contains the
    # sqrt(r r') of the reduced mode kernel
    pref = 0.5 * math.pi * pref_geom
    val = complex(-pref * sjy, pref * sjj)
    if sign < 0:
        val = val.conjugate()
    return KernelSample(lam, left, right, val, count, bound_tail)


def euclid_free_resolvent(n, lam, d):
    """Free outgoing resolvent of R^n at distance d:
    (i/4) (lam/(2 pi d))^{(n-2)/2} H^(1)_{(n-2)/2}(lam d)."""
    if n < 2:
        raise DomainError("dimension must be >= 2")
    if lam <= 0.0 or d <= 0.0:
        raise DomainError("lam and d must be positive")
    p = (n - 2) / 2.0
    h = specfun.hankel1(p, lam * d)
    return 0.25j * (lam / (2.0 * math.pi * d)) ** p * h


def free_diagonal_density(n, lam):
    """Free-space plane-wave diagonal density
    lam^{n-1} vol(S^{n-1}) / (2 pi)^n."""
    from conespec.cross_section import sphere_volume
    return lam ** (n - 1) * sphere_volume(n) / (2.0 * math.pi) ** n


def write_kernel_csv(path, samples, kind="resolvent"):
    """CSV schema: lambda, r, theta, r_prime, re, im | density,
    modes_used, tail_bound."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if kind == "resolvent":
            writer.writerow(["lambda", "r", "theta", "r_prime", "re", "im",
                             "modes_used", "tail_bound"])
            for s in samples:
                writer.writerow([repr(float(s.lam)), repr(float(s.left.r)),
                                 repr(separation_free(s)),
                                 repr(float(s.right.r)),
                                 repr(s.value.real), repr(s.value.imag),
                                 s.modes_used, repr(float(s.tail_bound))])
        else:
            writer.writerow(["lambda", "r", "theta", "r_prime", "density",
                             "modes_used", "tail_bound"])
            for s in samples:
                writer.writerow([repr(float(s.lam)), repr(float(s.left.r)),
                                 repr(separation_free(s)),
                                 repr(float(s.right.r)),
                                 repr(s.value.real), s.modes_used,
                                 repr(float(s.tail_bound))])


def separation_free(sample):
    return abs(sample.left.theta - sample.right.theta)
