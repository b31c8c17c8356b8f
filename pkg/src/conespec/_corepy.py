"""Pure-Python numeric core.

Twin of the compiled extension ``conespec._core``; the backends expose the
same functions and are selected at import time by ``conespec._backend``.

Contents: Lanczos gamma, Bessel J/Y/I/K of real nonnegative order
(ascending series + stabilized reflection series for small argument,
Steed-type continued fractions beyond), exponent-scaled variants that never
over/underflow, compensated mode sums, an implicit-shift QL tridiagonal
eigensolver, and an adaptive Dormand-Prince integrator for the reduced
radial equation  -u'' + (Q(r) - lam^2) u = 0.

Scaled values are returned as (mantissa, e) pairs meaning mantissa*exp(e);
renormalization uses exact powers of two so e is always a multiple of
512*ln 2 plus any analytic offset.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"

_EPS = 2.220446049250313e-16
_FPMIN = 1.0e-290
_MAXIT = 200000
_XMIN_JY = 2.0  # series/continued-fraction crossover
_LN2_512 = 512.0 * math.log(2.0)
_RENORM_HI = 2.0 ** 512
_RENORM_LO = 2.0 ** -512

_EULER_GAMMA = 0.5772156649015328606
_ZETA2 = 1.6449340668482264365
_ZETA3 = 1.2020569031595942854
_ZETA4 = 1.0823232337111381916
_ZETA5 = 1.0369277551433699263

_LANCZOS_G = 7.0
_LANCZOS_C = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_SQRT_2PI = 2.5066282746310002


def gammafn(x):
    """Gamma function for real x (poles return inf)."""
    if x != x:
        return x
    if x <= 0.0 and x == math.floor(x):
        return math.inf
    if x < 0.5:
        # reflection
        return math.pi / (math.sin(math.pi * x) * gammafn(1.0 - x))
    x -= 1.0
    a = _LANCZOS_C[0]
    t = x + _LANCZOS_G + 0.5
    for i in range(1, 9):
        a += _LANCZOS_C[i] / (x + i)
    # split the power to defer overflow to the true ~171.6 threshold
    if (x + 0.5) * math.log(t) - t + math.log(_SQRT_2PI * a) > 709.08:
        return math.inf
    half = t ** (0.5 * (x + 0.5))
    return _SQRT_2PI * half * math.exp(-t) * half * a


def lgammafn(x):
    """log Gamma for x > 0."""
    if x < 0.5:
        return math.log(math.pi / abs(math.sin(math.pi * x))) - lgammafn(1.0 - x)
    x -= 1.0
    a = _LANCZOS_C[0]
    t = x + _LANCZOS_G + 0.5
    for i in range(1, 9):
        a += _LANCZOS_C[i] / (x + i)
    return 0.5 * math.log(2.0 * math.pi) + (x + 0.5) * math.log(t) - t + math.log(a)


def _shc(z):
    # sinh(z)/z
    if abs(z) < 1e-5:
        z2 = z * z
        return 1.0 + z2 / 6.0 * (1.0 + z2 / 20.0)
    return math.sinh(z) / z


def _snc(z):
    # sin(z)/z
    if abs(z) < 1e-5:
        z2 = z * z
        return 1.0 - z2 / 6.0 * (1.0 - z2 / 20.0)
    return math.sin(z) / z


def _psi_tables(kmax):
    # psi^(m)(k+1) for m = 0..4, k = 0..kmax
    p0 = [0.0] * (kmax + 1)
    p1 = [0.0] * (kmax + 1)
    p2 = [0.0] * (kmax + 1)
    p3 = [0.0] * (kmax + 1)
    p4 = [0.0] * (kmax + 1)
    p0[0] = -_EULER_GAMMA
    p1[0] = _ZETA2
    p2[0] = -2.0 * _ZETA3
    p3[0] = 6.0 * _ZETA4
    p4[0] = -24.0 * _ZETA5
    for k in range(1, kmax + 1):
        rk = 1.0 / k
        p0[k] = p0[k - 1] + rk
        p1[k] = p1[k - 1] - rk * rk
        p2[k] = p2[k - 1] + 2.0 * rk ** 3
        p3[k] = p3[k - 1] - 6.0 * rk ** 4
        p4[k] = p4[k - 1] + 24.0 * rk ** 5
    return p0, p1, p2, p3, p4


_PSI_KMAX = 64
_PSI0, _PSI1, _PSI2, _PSI3, _PSI4 = _psi_tables(_PSI_KMAX)


def _g1(k, mu, inv_gam_m, inv_gam_p):
    """[1/Gamma(k+1-mu) - 1/Gamma(k+1+mu)] / (2 mu), stable near mu = 0."""
    if abs(mu) > 0.02:
        return (inv_gam_m - inv_gam_p) / (2.0 * mu)
    psi0 = _PSI0[k]
    psi1 = _PSI1[k]
    psi2 = _PSI2[k]
    psi3 = _PSI3[k]
    psi4 = _PSI4[k]
    mu2 = mu * mu
    g_o = -mu * (psi0 + mu2 * (psi2 / 6.0 + mu2 * psi4 / 120.0))
    g_e = -mu2 * (psi1 / 2.0 + mu2 * psi3 / 24.0)
    lead = psi0 + mu2 * (psi2 / 6.0 + mu2 * psi4 / 120.0)
    return math.exp(g_e - lgammafn(k + 1.0)) * _shc(g_o) * lead


def _y_series(mu, x):
    """(Y_mu, x*Y'_mu) for |mu| <= 0.5 and 0 < x <= ~2.

    Reflection formula with the integer-order cancellations removed
    analytically, so the result stays accurate uniformly in mu.
    """
    L = math.log(0.5 * x)
    t = mu * math.pi
    S = _snc(t)
    piS = math.pi * S
    emuL = math.exp(mu * L)
    shcmuL = _shc(mu * L)
    snc_half = _snc(0.5 * t)
    c3 = 0.5 * mu * math.pi * snc_half * snc_half
    cosmupi = math.cos(t)
    x24 = -0.25 * x * x
    tk = 1.0
    y = 0.0
    yp = 0.0
    for k in range(0, _PSI_KMAX):
        inv_gp = 1.0 / gammafn(k + 1.0 + mu)
        inv_gm = 1.0 / gammafn(k + 1.0 - mu)
        a_k = emuL * inv_gp
        b_k = inv_gm / emuL
        g1 = _g1(k, mu, inv_gm, inv_gp)
        bst = (-2.0 * g1 * emuL + 2.0 * L * shcmuL * inv_gm) / piS \
            - c3 * emuL * inv_gp / S
        y += tk * bst
        yp += tk * (2.0 * k * bst + (cosmupi * a_k + b_k) / piS)
        tk *= x24 / (k + 1.0)
        if abs(tk) * (abs(bst) + abs(a_k) + abs(b_k) + 1.0) < 1e-18 * (abs(y) + 1e-30):
            break
    return y, yp


def _k_series(mu, x):
    """(K_mu, x*K'_mu) for |mu| <= 0.5 and 0 < x <= ~2."""
    L = math.log(0.5 * x)
    t = mu * math.pi
    S = _snc(t)
    emuL = math.exp(mu * L)
    shcmuL = _shc(mu * L)
    x24 = 0.25 * x * x
    tk = 1.0
    kv = 0.0
    kp = 0.0
    for k in range(0, _PSI_KMAX):
        inv_gp = 1.0 / gammafn(k + 1.0 + mu)
        inv_gm = 1.0 / gammafn(k + 1.0 - mu)
        a_k = emuL * inv_gp
        b_k = inv_gm / emuL
        g1 = _g1(k, mu, inv_gm, inv_gp)
        bst = (g1 * emuL - L * shcmuL * inv_gm) / S
        kv += tk * bst
        kp += tk * (2.0 * k * bst - 0.5 * (a_k + b_k) / S)
        tk *= x24 / (k + 1.0)
        if abs(tk) * (abs(bst) + abs(a_k) + abs(b_k) + 1.0) < 1e-18 * (abs(kv) + 1e-30):
            break
    return kv, kp


def _j_series(nu, x):
    """Ascending series for J_nu, monotone-safe for x <= ~2 + derivative."""
    L = nu * math.log(0.5 * x) - lgammafn(nu + 1.0)
    if L < -700.0:
        return 0.0, 0.0
    pref = math.exp(L)
    x24 = -0.25 * x * x
    tk = 1.0
    s = 0.0
    sp = 0.0  # accumulates sum of tk*(nu+2k)
    for k in range(0, 200):
        s += tk
        sp += tk * (nu + 2.0 * k)
        tk *= x24 / ((k + 1.0) * (nu + k + 1.0))
        if abs(tk) < 1e-18 * abs(s):
            break
    return pref * s, pref * sp / x


def _cf1_j(nu, x):
    """CF1: f = J'_nu/J_nu and the sign of J_nu, by modified Lentz."""
    xi = 1.0 / x
    xi2 = 2.0 * xi
    isign = 1
    h = nu * xi
    if abs(h) < _FPMIN:
        h = _FPMIN
    b = xi2 * nu
    d = 0.0
    c = h
    for _ in range(_MAXIT):
        b += xi2
        d = b - d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b - 1.0 / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = c * d
        h = delta * h
        if d < 0.0:
            isign = -isign
        if abs(delta - 1.0) < _EPS:
            return h, isign
    raise _NoConvergence("bessel CF1")


class _NoConvergence(Exception):
    pass


def _jy_asymptotic(mu, x):
    """(J_mu, Y_mu) by the large-argument Hankel expansion; requires the
    modulus series to converge, roughly 4 mu^2 < 3.5 x and x >= 18."""
    p = 1.0
    q = 0.0
    t = 1.0
    fourmu2 = 4.0 * mu * mu
    for k in range(1, 60):
        t *= (fourmu2 - (2.0 * k - 1.0) ** 2) / (8.0 * x * k)
        if k % 2 == 1:
            q += t if (k % 4 == 1) else -t
        else:
            p += t if (k % 4 == 0) else -t
        if abs(t) < 1e-18:
            break
    omega = x - (0.5 * mu + 0.25) * math.pi
    co = math.cos(omega)
    si = math.sin(omega)
    pref = math.sqrt(2.0 / (math.pi * x))
    return pref * (p * co - q * si), pref * (p * si + q * co)


def _jy_oscillatory(nu, x):
    """(J, J', Y, Y') for 18 <= ~x and nu < x: asymptotics at the
    fractional order, then stable upward recurrence (both J and Y are
    oscillatory and comparable here, so the recurrence does not grow)."""
    nl = int(nu)
    mu = nu - nl
    j0, y0 = _jy_asymptotic(mu, x)
    j1, y1 = _jy_asymptotic(mu + 1.0, x)
    xi = 1.0 / x
    order = mu + 1.0
    for _ in range(nl):
        j0, j1 = j1, 2.0 * order * xi * j1 - j0
        y0, y1 = y1, 2.0 * order * xi * y1 - y0
        order += 1.0
    # after the loop (j0, j1) = (J_nu, J_{nu+1}) and likewise for Y
    jp = nu * xi * j0 - j1
    yp = nu * xi * y0 - y1
    return j0, jp, y0, yp


def _cf2_jy(mu, x):
    """CF2: p + i q = (J' + iY')/(J + iY) at order mu, x >= ~2."""
    xi = 1.0 / x
    a = 0.25 - mu * mu
    p = -0.5 * xi
    q = 1.0
    br = 2.0 * x
    bi = 2.0
    fact = a * xi / (p * p + q * q)
    cr = br + q * fact
    ci = bi + p * fact
    den = br * br + bi * bi
    dr = br / den
    di = -bi / den
    dlr = cr * dr - ci * di
    dli = cr * di + ci * dr
    temp = p * dlr - q * dli
    q = p * dli + q * dlr
    p = temp
    for i in range(2, _MAXIT):
        a += 2 * (i - 1)
        bi += 2.0
        dr = a * dr + br
        di = a * di + bi
        if abs(dr) + abs(di) < _FPMIN:
            dr = _FPMIN
        fact = a / (cr * cr + ci * ci)
        cr = br + cr * fact
        ci = bi - ci * fact
        if abs(cr) + abs(ci) < _FPMIN:
            cr = _FPMIN
        den = dr * dr + di * di
        dr = dr / den
        di = -di / den
        dlr = cr * dr - ci * di
        dli = cr * di + ci * dr
        temp = p * dlr - q * dli
        q = p * dli + q * dlr
        p = temp
        if abs(dlr - 1.0) + abs(dli) < _EPS:
            return p, q
    raise _NoConvergence("bessel CF2")


def bessel_jy_scaled(nu, x):
    """Scaled (J, J', Y, Y') at real order nu >= 0, x > 0.

    Returns (jm, jpm, je, ym, ypm, ye): J = jm*exp(je), J' = jpm*exp(je),
    Y = ym*exp(ye), Y' = ypm*exp(ye).
    """
    if x <= 0.0 or nu < 0.0 or not math.isfinite(x) or not math.isfinite(nu):
        raise ValueError("bessel_jy requires nu >= 0 and x > 0")
    if x >= 18.0 and nu < x and 4.0 * (math.modf(nu)[0] + 1.0) ** 2 < 3.5 * x:
        j, jp, y, yp = _jy_oscillatory(nu, x)
        return j, jp, 0.0, y, yp, 0.0
    xi = 1.0 / x
    if x < _XMIN_JY:
        nl = int(nu + 0.5)
    else:
        nl = max(0, int(nu - x + 1.5))
    mu = nu - nl

    f, isign = _cf1_j(nu, x)

    # downward recurrence of a solution proportional to J from nu to mu
    rjl = float(isign)
    rjpl = f * rjl
    rjl1 = rjl
    rjp1 = rjpl
    e_down = 0.0
    fact = nu * xi
    for _ in range(nl):
        rjtemp = fact * rjl + rjpl
        fact -= xi
        rjpl = fact * rjtemp - rjl
        rjl = rjtemp
        if abs(rjl) > _RENORM_HI:
            rjl *= _RENORM_LO
            rjpl *= _RENORM_LO
            e_down += _LN2_512
    if rjl == 0.0:
        rjl = _EPS * rjpl if rjpl != 0.0 else _EPS
    fmu = rjpl / rjl

    w = 2.0 / (math.pi * x)
    if x < _XMIN_JY:
        ymu, xypmu = _y_series(mu, x)
        ypmu = xypmu * xi
        jmu = w / (ypmu - fmu * ymu)
    else:
        p, q = _cf2_jy(mu, x)
        gam = (p - fmu) / q
        jmu = math.sqrt(w / ((p - fmu) * gam + q))
        if rjl < 0.0:
            jmu = -jmu
        ymu = jmu * gam
        ypmu = ymu * (p + q / gam)

    # J_nu = J_mu * (value at nu)/(descaled value at mu)
    # jm*exp(je) with je = log-scale bookkeeping only
    ratio = rjl1 / rjl  # times exp(-e_down)
    jm = jmu * ratio
    jpm = fmu_to_jp = None
    je = -e_down
    # normalize mantissa
    if jm != 0.0 and (abs(jm) > _RENORM_HI or abs(jm) < _RENORM_LO):
        m, ex = math.frexp(jm)
        jm = m
        je += ex * math.log(2.0)
    jpm = f * jm

    # upward recurrence for Y from (Y_mu, Y_{mu+1}) to nu
    y_prev = ymu
    y_next = mu * xi * ymu - ypmu  # Y_{mu+1}
    e_up = 0.0
    xmu = mu
    for _ in range(nl):
        ytemp = 2.0 * (xmu + 1.0) * xi * y_next - y_prev
        y_prev = y_next
        y_next = ytemp
        xmu += 1.0
        if abs(y_next) > _RENORM_HI:
            y_next *= _RENORM_LO
            y_prev *= _RENORM_LO
            e_up += _LN2_512
    if nl == 0:
        ym = ymu
        ypm = ypmu
    else:
        ym = y_prev
        ypm = nu * xi * y_prev - y_next  # Y'_nu = (nu/x) Y_nu - Y_{nu+1}
    ye = e_up
    return jm, jpm, je, ym, ypm, ye


def bessel_jy(nu, x):
    """(J, J', Y, Y'); raises OverflowError when Y is not representable."""
    jm, jpm, je, ym, ypm, ye = bessel_jy_scaled(nu, x)
    if ye > 700.0:
        raise OverflowError("Y_nu overflow")
    ey = math.exp(ye)
    if je < -745.0:
        j = 0.0
        jp = 0.0
    else:
        ej = math.exp(je)
        j = jm * ej
        jp = jpm * ej
    return j, jp, ym * ey, ypm * ey


def bessel_j(nu, x):
    """J_nu(x) alone (underflows to 0 silently)."""
    jm, jpm, je, _, _, _ = bessel_jy_scaled(nu, x)
    if je < -745.0:
        return 0.0
    return jm * math.exp(je)


def _cf1_i(nu, x):
    xi = 1.0 / x
    xi2 = 2.0 * xi
    h = nu * xi
    if h < _FPMIN:
        h = _FPMIN
    b = xi2 * nu
    d = 0.0
    c = h
    for _ in range(_MAXIT):
        b += xi2
        d = 1.0 / (b + d)
        c = b + 1.0 / c
        delta = c * d
        h = delta * h
        if abs(delta - 1.0) < _EPS:
            return h
    raise _NoConvergence("bessel CF1(I)")


def _cf2_k(mu, x):
    """(K_mu, K_{mu+1}) scaled by exp(+x), for x >= ~2."""
    a = 0.25 - mu * mu
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1 = 0.0
    q2 = 1.0
    a1 = a
    q = c = a1
    aa = -a1
    s = 1.0 + q * delh
    for i in range(2, _MAXIT):
        aa -= 2 * (i - 1)
        c = -aa * c / i
        qnew = (q1 - b * q2) / aa
        q1 = q2
        q2 = qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + aa * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _EPS:
            kmu_e = math.sqrt(math.pi / (2.0 * x)) / s  # e^x * K_mu
            kmu1_e = kmu_e * (mu + x + 0.5 - a1 * h) / x
            return kmu_e, kmu1_e
    raise _NoConvergence("bessel CF2(K)")


def bessel_ik_scaled(nu, x):
    """Scaled (I, I', K, K') at order nu >= 0, x > 0.

    Returns (im, ipm, ie, km, kpm, ke) with I = im*exp(ie) etc.
    """
    if x <= 0.0 or nu < 0.0 or not math.isfinite(x) or not math.isfinite(nu):
        raise ValueError("bessel_ik requires nu >= 0 and x > 0")
    xi = 1.0 / x
    nl = int(nu + 0.5)
    mu = nu - nl

    f = _cf1_i(nu, x)
    ril = 1.0
    ripl = f * ril
    ril1 = ril
    rip1 = ripl
    e_down = 0.0
    fact = nu * xi
    for _ in range(nl):
        ritemp = fact * ril + ripl
        fact -= xi
        ripl = fact * ritemp + ril
        ril = ritemp
        if abs(ril) > _RENORM_HI:
            ril *= _RENORM_LO
            ripl *= _RENORM_LO
            e_down += _LN2_512
    fmu = ripl / ril

    if x < _XMIN_JY:
        kmu, xkpmu = _k_series(mu, x)
        kpmu = xkpmu * xi
        kmu1 = mu * xi * kmu - kpmu
        ke_base = 0.0
    else:
        kmu, kmu1 = _cf2_k(mu, x)  # scaled by e^x
        kpmu = mu * xi * kmu - kmu1
        ke_base = -x

    # Wronskian I_mu K'_mu - I'_mu K_mu = -1/x  (in the scaled K variables
    # the same relation holds with an extra exp(ke_base) on the K side)
    imu = xi / (fmu * kmu - kpmu)  # times exp(-ke_base)
    ie_base = -ke_base
    ratio = ril1 / ril
    im = imu * ratio
    ie = ie_base - e_down
    if im != 0.0 and (abs(im) > _RENORM_HI or abs(im) < _RENORM_LO):
        m, ex = math.frexp(im)
        im = m
        ie += ex * math.log(2.0)
    ipm = f * im

    # upward K recurrence, stable
    k_prev = kmu
    k_next = kmu1
    e_up = ke_base
    xmu = mu
    for _ in range(nl):
        ktemp = 2.0 * (xmu + 1.0) * xi * k_next + k_prev
        k_prev = k_next
        k_next = ktemp
        xmu += 1.0
        if abs(k_next) > _RENORM_HI:
            k_next *= _RENORM_LO
            k_prev *= _RENORM_LO
            e_up += _LN2_512
    if nl == 0:
        km = kmu
        kpm = kpmu
    else:
        km = k_prev
        kpm = nu * xi * k_prev - k_next
    ke = e_up
    return im, ipm, ie, km, kpm, ke


def bessel_ik(nu, x):
    """(I, I', K, K'); raises OverflowError when not representable."""
    im, ipm, ie, km, kpm, ke = bessel_ik_scaled(nu, x)
    if ie > 700.0 or ke > 700.0:
        raise OverflowError("I_nu/K_nu overflow")
    ei = math.exp(ie) if ie > -745.0 else 0.0
    ek = math.exp(ke) if ke > -745.0 else 0.0
    return im * ei, ipm * ei, km * ek, kpm * ek


# ----------------------------------------------------------------------
# mode sums


def density_pair_sum(nus, pis, a, b):
    """Kahan sum of pis[j] * J_{nus[j]}(a) * J_{nus[j]}(b), ascending j."""
    s = 0.0
    comp = 0.0
    for j in range(len(nus)):
        jm1, _, e1, _, _, _ = bessel_jy_scaled(nus[j], a)
        jm2, _, e2, _, _, _ = bessel_jy_scaled(nus[j], b)
        e = e1 + e2
        term = pis[j] * jm1 * jm2 * (math.exp(e) if e > -745.0 else 0.0)
        t = s + term
        if abs(s) >= abs(term):
            comp += (s - t) + term
        else:
            comp += (term - t) + s
        s = t
    return s + comp


def resolvent_pair_sum(nus, pis, a, b):
    """Kahan sum of pis[j] * J_{nus[j]}(a) * H1_{nus[j]}(b) for a <= b.

    Returns (re, im).
    """
    sr = 0.0
    si = 0.0
    cr = 0.0
    ci = 0.0
    for j in range(len(nus)):
        jma, _, ea, _, _, _ = bessel_jy_scaled(nus[j], a)
        jmb, _, eb, ymb, _, eyb = bessel_jy_scaled(nus[j], b)
        ejj = ea + eb
        ejy = ea + eyb
        tr = pis[j] * jma * jmb * (math.exp(ejj) if ejj > -745.0 else 0.0)
        ti = pis[j] * jma * ymb * (math.exp(ejy) if ejy > -745.0 else 0.0)
        t = sr + tr
        if abs(sr) >= abs(tr):
            cr += (sr - t) + tr
        else:
            cr += (tr - t) + sr
        sr = t
        t = si + ti
        if abs(si) >= abs(ti):
            ci += (si - t) + ti
        else:
            ci += (ti - t) + si
        si = t
    return sr + cr, si + ci


# ----------------------------------------------------------------------
# symmetric tridiagonal eigensolver (implicit-shift QL)


def ql_eigen(diag, offdiag, want_vectors=True):
    """Eigendecomposition of a symmetric tridiagonal matrix.

    diag: length n, offdiag: length n-1. Returns (w, V) with eigenvalues w
    ascending; V[k] is the unit eigenvector for w[k] (V is None when
    want_vectors is false). Raises RuntimeError if a QL sweep fails to
    converge.
    """
    d = np.array(diag, dtype=float, copy=True)
    n = d.size
    e = np.zeros(n)
    e[: n - 1] = np.asarray(offdiag, dtype=float)
    v = np.eye(n) if want_vectors else None
    for l in range(n):
        niter = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= _EPS * dd:
                    break
                m += 1
            if m == l:
                break
            niter += 1
            if niter > 60:
                raise RuntimeError("QL iteration did not converge")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if v is not None:
                    row_i = v[i].copy()
                    v[i] = c * row_i - s * v[i + 1]
                    v[i + 1] = s * row_i + c * v[i + 1]
            else:
                d[l] -= p
                e[l] = g
                e[m] = 0.0
    order = np.argsort(d, kind="stable")
    w = d[order]
    if v is not None:
        v = v[order]
    return w, v


# ----------------------------------------------------------------------
# radial potential evaluation and Dormand-Prince integration

POT_NONE = 0
POT_BUMP = 1
POT_TABLE = 2


def eval_w(kind, params, table_x, table_c, r):
    """Radial perturbation W(r)."""
    if kind == POT_NONE:
        return 0.0
    if kind == POT_BUMP:
        center, width, amp = params[0], params[1], params[2]
        u = (r - center) / width
        if abs(u) >= 1.0:
            return 0.0
        return amp * math.exp(1.0 - 1.0 / (1.0 - u * u))
    # cubic spline table, zero outside the knot range
    nx = len(table_x)
    if r <= table_x[0] or r >= table_x[nx - 1]:
        return 0.0
    lo, hi = 0, nx - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if table_x[mid] <= r:
            lo = mid
        else:
            hi = mid
    t = r - table_x[lo]
    c0 = table_c[4 * lo]
    c1 = table_c[4 * lo + 1]
    c2 = table_c[4 * lo + 2]
    c3 = table_c[4 * lo + 3]
    return c0 + t * (c1 + t * (c2 + t * c3))


_DP_C = (0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0)
_DP_B = (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0)
_DP_E = (
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)
_DP_A = (
    (),
    (0.2,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0),
)


def integrate_radial(cnu, lam_sq, pot_kind, pot_params, table_x, table_c,
                     r0, y0, targets, rtol, atol):
    """Integrate u'' = (Q(r) - lam_sq) u from r0 through each target radius.

    cnu = nu^2 - 1/4 so Q(r) = cnu/r^2 + W(r). y0 is the 4-vector
    (Re u, Re u', Im u, Im u') at r0. targets must be strictly monotone,
    moving away from r0 (either direction). Returns an array of shape
    (len(targets), 4). Raises RuntimeError on step-size collapse.
    """

    def rhs(r, y, out):
        q = cnu / (r * r) + eval_w(pot_kind, pot_params, table_x, table_c, r) - lam_sq
        out[0] = y[1]
        out[1] = q * y[0]
        out[2] = y[3]
        out[3] = q * y[2]

    y = [float(y0[0]), float(y0[1]), float(y0[2]), float(y0[3])]
    r = float(r0)
    out = np.empty((len(targets), 4))
    direction = 1.0 if (len(targets) == 0 or targets[0] >= r0) else -1.0
    h = direction * max(1e-8, 0.01 * abs(r0))
    k = [[0.0] * 4 for _ in range(7)]
    ytmp = [0.0] * 4
    ynew = [0.0] * 4
    for it, rt in enumerate(targets):
        rt = float(rt)
        if (rt - r) * direction < 0.0:
            raise ValueError("targets must move away from the start point")
        while (rt - r) * direction > 1e-14 * max(1.0, abs(rt)):
            if abs(h) > abs(rt - r):
                h = rt - r
            rhs(r, y, k[0])
            step_ok = False
            while True:
                for stage in range(1, 6):
                    a = _DP_A[stage]
                    for c in range(4):
                        acc = 0.0
                        for j in range(stage):
                            acc += a[j] * k[j][c]
                        ytmp[c] = y[c] + h * acc
                    rhs(r + _DP_C[stage] * h, ytmp, k[stage])
                for c in range(4):
                    acc = 0.0
                    for j in range(6):
                        acc += _DP_B[j] * k[j][c]
                    ynew[c] = y[c] + h * acc
                rhs(r + h, ynew, k[6])
                errnorm = 0.0
                for c in range(4):
                    acc = 0.0
                    for j in range(7):
                        acc += _DP_E[j] * k[j][c]
                    sc = atol + rtol * max(abs(y[c]), abs(ynew[c]))
                    q = h * acc / sc
                    errnorm += q * q
                errnorm = math.sqrt(errnorm / 4.0)
                if errnorm <= 1.0:
                    step_ok = True
                    break
                fac = max(0.2, 0.9 * errnorm ** -0.2)
                h *= fac
                if abs(h) < 1e-14 * max(1.0, abs(r)):
                    raise RuntimeError("step-size collapse in radial integration")
            if step_ok:
                r += h
                y[0], y[1], y[2], y[3] = ynew
                fac = 0.9 * (errnorm ** -0.2 if errnorm > 1e-12 else 10.0)
                h *= min(5.0, max(0.2, fac))
        out[it, 0] = y[0]
        out[it, 1] = y[1]
        out[it, 2] = y[2]
        out[it, 3] = y[3]
    return out
