# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled numeric core; twin of conespec._corepy (same algorithms)."""

from libc.math cimport (cos, exp, fabs, floor, fmax, fmin, frexp, hypot,
                        isfinite, log, sin, sinh, sqrt, copysign, M_PI)

import numpy as np

BACKEND_NAME = "compiled"

cdef double _EPS = 2.220446049250313e-16
cdef double _FPMIN = 1.0e-290
cdef int _MAXIT = 200000
cdef double _XMIN_JY = 2.0
cdef double _LN2_512 = 512.0 * 0.6931471805599453
cdef double _RENORM_HI = 1.3407807929942597e154   # 2^512
cdef double _RENORM_LO = 7.458340731200207e-155   # 2^-512

cdef double _EULER_GAMMA = 0.5772156649015328606
cdef double _ZETA2 = 1.6449340668482264365
cdef double _ZETA3 = 1.2020569031595942854
cdef double _ZETA4 = 1.0823232337111381916
cdef double _ZETA5 = 1.0369277551433699263

cdef double _LANCZOS_G = 7.0
cdef double[9] _LANCZOS_C
_LANCZOS_C[0] = 0.99999999999980993
_LANCZOS_C[1] = 676.5203681218851
_LANCZOS_C[2] = -1259.1392167224028
_LANCZOS_C[3] = 771.32342877765313
_LANCZOS_C[4] = -176.61502916214059
_LANCZOS_C[5] = 12.507343278686905
_LANCZOS_C[6] = -0.13857109526572012
_LANCZOS_C[7] = 9.9843695780195716e-6
_LANCZOS_C[8] = 1.5056327351493116e-7

cdef double _SQRT_2PI = 2.5066282746310002

DEF PSI_KMAX = 64
cdef double[PSI_KMAX + 1] _PSI0
cdef double[PSI_KMAX + 1] _PSI1
cdef double[PSI_KMAX + 1] _PSI2
cdef double[PSI_KMAX + 1] _PSI3
cdef double[PSI_KMAX + 1] _PSI4


cdef void _init_psi() noexcept:
    cdef int k
    cdef double rk
    _PSI0[0] = -_EULER_GAMMA
    _PSI1[0] = _ZETA2
    _PSI2[0] = -2.0 * _ZETA3
    _PSI3[0] = 6.0 * _ZETA4
    _PSI4[0] = -24.0 * _ZETA5
    for k in range(1, PSI_KMAX + 1):
        rk = 1.0 / k
        _PSI0[k] = _PSI0[k - 1] + rk
        _PSI1[k] = _PSI1[k - 1] - rk * rk
        _PSI2[k] = _PSI2[k - 1] + 2.0 * rk * rk * rk
        _PSI3[k] = _PSI3[k - 1] - 6.0 * rk * rk * rk * rk
        _PSI4[k] = _PSI4[k - 1] + 24.0 * rk * rk * rk * rk * rk

_init_psi()


cdef double _gammafn(double x) noexcept nogil:
    cdef double a, t, half
    cdef int i
    if x != x:
        return x
    if x <= 0.0 and x == floor(x):
        return 1.0 / 0.0
    if x < 0.5:
        return M_PI / (sin(M_PI * x) * _gammafn(1.0 - x))
    x -= 1.0
    a = _LANCZOS_C[0]
    t = x + _LANCZOS_G + 0.5
    for i in range(1, 9):
        a += _LANCZOS_C[i] / (x + i)
    if (x + 0.5) * log(t) - t + log(_SQRT_2PI * a) > 709.08:
        return 1.0 / 0.0
    half = t ** (0.5 * (x + 0.5))
    return _SQRT_2PI * half * exp(-t) * half * a


cdef double _lgammafn(double x) noexcept nogil:
    cdef double a, t
    cdef int i
    if x < 0.5:
        return log(M_PI / fabs(sin(M_PI * x))) - _lgammafn(1.0 - x)
    x -= 1.0
    a = _LANCZOS_C[0]
    t = x + _LANCZOS_G + 0.5
    for i in range(1, 9):
        a += _LANCZOS_C[i] / (x + i)
    return 0.9189385332046727 + (x + 0.5) * log(t) - t + log(a)


def gammafn(double x):
    return _gammafn(x)


def lgammafn(double x):
    return _lgammafn(x)


cdef inline double _shc(double z) noexcept nogil:
    cdef double z2
    if fabs(z) < 1e-5:
        z2 = z * z
        return 1.0 + z2 / 6.0 * (1.0 + z2 / 20.0)
    return sinh(z) / z


cdef inline double _snc(double z) noexcept nogil:
    cdef double z2
    if fabs(z) < 1e-5:
        z2 = z * z
        return 1.0 - z2 / 6.0 * (1.0 - z2 / 20.0)
    return sin(z) / z


cdef double _g1(int k, double mu, double inv_gam_m, double inv_gam_p) noexcept nogil:
    cdef double psi0, psi1, psi2, psi3, psi4, mu2, g_o, g_e, lead
    if fabs(mu) > 0.02:
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
    return exp(g_e - _lgammafn(k + 1.0)) * _shc(g_o) * lead


cdef int _y_series(double mu, double x, double* yv, double* xyp) noexcept nogil:
    cdef double L, t, S, piS, emuL, shcmuL, snc_half, c3, cosmupi, x24, tk
    cdef double y, yp, inv_gp, inv_gm, a_k, b_k, g1, bst
    cdef int k
    L = log(0.5 * x)
    t = mu * M_PI
    S = _snc(t)
    piS = M_PI * S
    emuL = exp(mu * L)
    shcmuL = _shc(mu * L)
    snc_half = _snc(0.5 * t)
    c3 = 0.5 * mu * M_PI * snc_half * snc_half
    cosmupi = cos(t)
    x24 = -0.25 * x * x
    tk = 1.0
    y = 0.0
    yp = 0.0
    for k in range(PSI_KMAX):
        inv_gp = 1.0 / _gammafn(k + 1.0 + mu)
        inv_gm = 1.0 / _gammafn(k + 1.0 - mu)
        a_k = emuL * inv_gp
        b_k = inv_gm / emuL
        g1 = _g1(k, mu, inv_gm, inv_gp)
        bst = (-2.0 * g1 * emuL + 2.0 * L * shcmuL * inv_gm) / piS \
            - c3 * emuL * inv_gp / S
        y += tk * bst
        yp += tk * (2.0 * k * bst + (cosmupi * a_k + b_k) / piS)
        tk *= x24 / (k + 1.0)
        if fabs(tk) * (fabs(bst) + fabs(a_k) + fabs(b_k) + 1.0) < 1e-18 * (fabs(y) + 1e-30):
            break
    yv[0] = y
    xyp[0] = yp
    return 0


cdef int _k_series(double mu, double x, double* kv_out, double* xkp_out) noexcept nogil:
    cdef double L, t, S, emuL, shcmuL, x24, tk, kv, kp
    cdef double inv_gp, inv_gm, a_k, b_k, g1, bst
    cdef int k
    L = log(0.5 * x)
    t = mu * M_PI
    S = _snc(t)
    emuL = exp(mu * L)
    shcmuL = _shc(mu * L)
    x24 = 0.25 * x * x
    tk = 1.0
    kv = 0.0
    kp = 0.0
    for k in range(PSI_KMAX):
        inv_gp = 1.0 / _gammafn(k + 1.0 + mu)
        inv_gm = 1.0 / _gammafn(k + 1.0 - mu)
        a_k = emuL * inv_gp
        b_k = inv_gm / emuL
        g1 = _g1(k, mu, inv_gm, inv_gp)
        bst = (g1 * emuL - L * shcmuL * inv_gm) / S
        kv += tk * bst
        kp += tk * (2.0 * k * bst - 0.5 * (a_k + b_k) / S)
        tk *= x24 / (k + 1.0)
        if fabs(tk) * (fabs(bst) + fabs(a_k) + fabs(b_k) + 1.0) < 1e-18 * (fabs(kv) + 1e-30):
            break
    kv_out[0] = kv
    xkp_out[0] = kp
    return 0


cdef int _cf1_j(double nu, double x, double* f_out, int* isign_out) noexcept nogil:
    cdef double xi, xi2, h, b, d, c, delta
    cdef int isign, i
    xi = 1.0 / x
    xi2 = 2.0 * xi
    isign = 1
    h = nu * xi
    if fabs(h) < _FPMIN:
        h = _FPMIN
    b = xi2 * nu
    d = 0.0
    c = h
    for i in range(_MAXIT):
        b += xi2
        d = b - d
        if fabs(d) < _FPMIN:
            d = _FPMIN
        c = b - 1.0 / c
        if fabs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = c * d
        h = delta * h
        if d < 0.0:
            isign = -isign
        if fabs(delta - 1.0) < _EPS:
            f_out[0] = h
            isign_out[0] = isign
            return 0
    return -1


cdef int _cf2_jy(double mu, double x, double* p_out, double* q_out) noexcept nogil:
    cdef double xi, a, p, q, br, bi, fact, cr, ci, den, dr, di, dlr, dli, temp
    cdef int i
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
        if fabs(dr) + fabs(di) < _FPMIN:
            dr = _FPMIN
        fact = a / (cr * cr + ci * ci)
        cr = br + cr * fact
        ci = bi - ci * fact
        if fabs(cr) + fabs(ci) < _FPMIN:
            cr = _FPMIN
        den = dr * dr + di * di
        dr = dr / den
        di = -di / den
        dlr = cr * dr - ci * di
        dli = cr * di + ci * dr
        temp = p * dlr - q * dli
        q = p * dli + q * dlr
        p = temp
        if fabs(dlr - 1.0) + fabs(dli) < _EPS:
            p_out[0] = p
            q_out[0] = q
            return 0
    return -1


cdef int _jy_asymptotic(double mu, double x, double* j_out, double* y_out) noexcept nogil:
    cdef double p, q, t, fourmu2, omega, co, si, pref
    cdef int k
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
        if fabs(t) < 1e-18:
            break
    omega = x - (0.5 * mu + 0.25) * M_PI
    co = cos(omega)
    si = sin(omega)
    pref = sqrt(2.0 / (M_PI * x))
    j_out[0] = pref * (p * co - q * si)
    y_out[0] = pref * (p * si + q * co)
    return 0


cdef int _jy_scaled(double nu, double x, double* jm, double* jpm, double* je,
                    double* ym, double* ypm, double* ye) noexcept nogil:
    cdef int nl, isign, l, ex
    cdef double mu, f, xi, rjl, rjpl, rjl1, rjp1, e_down, fact, rjtemp, fmu
    cdef double w, ymu, xypmu, ypmu, jmu, p, q, gam, ratio, m
    cdef double y_prev, y_next, e_up, xmu, ytemp, frac, j0, jp0, y0, yp0
    cdef double aj0, aj1, ay0, ay1, order
    if x >= 18.0 and nu < x:
        frac = nu - floor(nu)
        if 4.0 * (frac + 1.0) * (frac + 1.0) < 3.5 * x:
            # oscillatory regime: asymptotics at fractional order + upward
            nl = <int>floor(nu)
            mu = nu - nl
            _jy_asymptotic(mu, x, &aj0, &ay0)
            _jy_asymptotic(mu + 1.0, x, &aj1, &ay1)
            xi = 1.0 / x
            order = mu + 1.0
            for l in range(nl):
                fact = 2.0 * order * xi
                rjtemp = fact * aj1 - aj0
                aj0 = aj1
                aj1 = rjtemp
                ytemp = fact * ay1 - ay0
                ay0 = ay1
                ay1 = ytemp
                order += 1.0
            jm[0] = aj0
            jpm[0] = nu * xi * aj0 - aj1
            je[0] = 0.0
            ym[0] = ay0
            ypm[0] = nu * xi * ay0 - ay1
            ye[0] = 0.0
            return 0
    xi = 1.0 / x
    if x < _XMIN_JY:
        nl = <int>(nu + 0.5)
    else:
        nl = <int>fmax(0.0, floor(nu - x + 1.5))
    mu = nu - nl

    if _cf1_j(nu, x, &f, &isign) != 0:
        return -1
    rjl = <double>isign
    rjpl = f * rjl
    rjl1 = rjl
    rjp1 = rjpl
    e_down = 0.0
    fact = nu * xi
    for l in range(nl):
        rjtemp = fact * rjl + rjpl
        fact -= xi
        rjpl = fact * rjtemp - rjl
        rjl = rjtemp
        if fabs(rjl) > _RENORM_HI:
            rjl *= _RENORM_LO
            rjpl *= _RENORM_LO
            e_down += _LN2_512
    if rjl == 0.0:
        rjl = _EPS * rjpl if rjpl != 0.0 else _EPS
    fmu = rjpl / rjl

    w = 2.0 / (M_PI * x)
    if x < _XMIN_JY:
        _y_series(mu, x, &ymu, &xypmu)
        ypmu = xypmu * xi
        jmu = w / (ypmu - fmu * ymu)
    else:
        if _cf2_jy(mu, x, &p, &q) != 0:
            return -1
        gam = (p - fmu) / q
        jmu = sqrt(w / ((p - fmu) * gam + q))
        if rjl < 0.0:
            jmu = -jmu
        ymu = jmu * gam
        ypmu = ymu * (p + q / gam)

    ratio = rjl1 / rjl
    m = jmu * ratio
    je[0] = -e_down
    if m != 0.0 and (fabs(m) > _RENORM_HI or fabs(m) < _RENORM_LO):
        m = frexp(m, &ex)
        je[0] += ex * 0.6931471805599453
    jm[0] = m
    jpm[0] = f * m

    y_prev = ymu
    y_next = mu * xi * ymu - ypmu
    e_up = 0.0
    xmu = mu
    for l in range(nl):
        ytemp = 2.0 * (xmu + 1.0) * xi * y_next - y_prev
        y_prev = y_next
        y_next = ytemp
        xmu += 1.0
        if fabs(y_next) > _RENORM_HI:
            y_next *= _RENORM_LO
            y_prev *= _RENORM_LO
            e_up += _LN2_512
    if nl == 0:
        ym[0] = ymu
        ypm[0] = ypmu
    else:
        ym[0] = y_prev
        ypm[0] = nu * xi * y_prev - y_next
    ye[0] = e_up
    return 0


def bessel_jy_scaled(double nu, double x):
    cdef double jm, jpm, je, ym, ypm, ye
    if x <= 0.0 or nu < 0.0 or not isfinite(x) or not isfinite(nu):
        raise ValueError("bessel_jy requires nu >= 0 and x > 0")
    if _jy_scaled(nu, x, &jm, &jpm, &je, &ym, &ypm, &ye) != 0:
        raise ValueError("bessel CF did not converge")
    return jm, jpm, je, ym, ypm, ye


def bessel_jy(double nu, double x):
    cdef double jm, jpm, je, ym, ypm, ye, ej, ey, j, jp
    jm, jpm, je, ym, ypm, ye = bessel_jy_scaled(nu, x)
    if ye > 700.0:
        raise OverflowError("Y_nu overflow")
    ey = exp(ye)
    if je < -745.0:
        j = 0.0
        jp = 0.0
    else:
        ej = exp(je)
        j = jm * ej
        jp = jpm * ej
    return j, jp, ym * ey, ypm * ey


def bessel_j(double nu, double x):
    cdef double jm, jpm, je, ym, ypm, ye
    jm, jpm, je, ym, ypm, ye = bessel_jy_scaled(nu, x)
    if je < -745.0:
        return 0.0
    return jm * exp(je)


cdef int _cf1_i(double nu, double x, double* f_out) noexcept nogil:
    cdef double xi, xi2, h, b, d, c, delta
    cdef int i
    xi = 1.0 / x
    xi2 = 2.0 * xi
    h = nu * xi
    if h < _FPMIN:
        h = _FPMIN
    b = xi2 * nu
    d = 0.0
    c = h
    for i in range(_MAXIT):
        b += xi2
        d = 1.0 / (b + d)
        c = b + 1.0 / c
        delta = c * d
        h = delta * h
        if fabs(delta - 1.0) < _EPS:
            f_out[0] = h
            return 0
    return -1


cdef int _cf2_k(double mu, double x, double* kmu_e, double* kmu1_e) noexcept nogil:
    cdef double a, b, d, h, delh, q1, q2, a1, q, c, aa, s, qnew, dels
    cdef int i
    a = 0.25 - mu * mu
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d
    delh = d
    q1 = 0.0
    q2 = 1.0
    a1 = a
    q = a1
    c = a1
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
        if fabs(dels / s) < _EPS:
            kmu_e[0] = sqrt(M_PI / (2.0 * x)) / s
            kmu1_e[0] = kmu_e[0] * (mu + x + 0.5 - a1 * h) / x
            return 0
    return -1


cdef int _ik_scaled(double nu, double x, double* im_o, double* ipm_o, double* ie_o,
                    double* km_o, double* kpm_o, double* ke_o) noexcept nogil:
    cdef int nl, l, ex
    cdef double mu, xi, f, ril, ripl, ril1, rip1, e_down, fact, ritemp, fmu
    cdef double kmu, xkpmu, kpmu, kmu1, ke_base, imu, ie_base, ratio, m
    cdef double k_prev, k_next, e_up, xmu, ktemp
    xi = 1.0 / x
    nl = <int>(nu + 0.5)
    mu = nu - nl
    if _cf1_i(nu, x, &f) != 0:
        return -1
    ril = 1.0
    ripl = f * ril
    ril1 = ril
    rip1 = ripl
    e_down = 0.0
    fact = nu * xi
    for l in range(nl):
        ritemp = fact * ril + ripl
        fact -= xi
        ripl = fact * ritemp + ril
        ril = ritemp
        if fabs(ril) > _RENORM_HI:
            ril *= _RENORM_LO
            ripl *= _RENORM_LO
            e_down += _LN2_512
    fmu = ripl / ril

    if x < _XMIN_JY:
        _k_series(mu, x, &kmu, &xkpmu)
        kpmu = xkpmu * xi
        kmu1 = mu * xi * kmu - kpmu
        ke_base = 0.0
    else:
        if _cf2_k(mu, x, &kmu, &kmu1) != 0:
            return -1
        kpmu = mu * xi * kmu - kmu1
        ke_base = -x

    imu = xi / (fmu * kmu - kpmu)
    ie_base = -ke_base
    ratio = ril1 / ril
    m = imu * ratio
    ie_o[0] = ie_base - e_down
    if m != 0.0 and (fabs(m) > _RENORM_HI or fabs(m) < _RENORM_LO):
        m = frexp(m, &ex)
        ie_o[0] += ex * 0.6931471805599453
    im_o[0] = m
    ipm_o[0] = f * m

    k_prev = kmu
    k_next = kmu1
    e_up = ke_base
    xmu = mu
    for l in range(nl):
        ktemp = 2.0 * (xmu + 1.0) * xi * k_next + k_prev
        k_prev = k_next
        k_next = ktemp
        xmu += 1.0
        if fabs(k_next) > _RENORM_HI:
            k_next *= _RENORM_LO
            k_prev *= _RENORM_LO
            e_up += _LN2_512
    if nl == 0:
        km_o[0] = kmu
        kpm_o[0] = kpmu
    else:
        km_o[0] = k_prev
        kpm_o[0] = nu * xi * k_prev - k_next
    ke_o[0] = e_up
    return 0


def bessel_ik_scaled(double nu, double x):
    cdef double im, ipm, ie, km, kpm, ke
    if x <= 0.0 or nu < 0.0 or not isfinite(x) or not isfinite(nu):
        raise ValueError("bessel_ik requires nu >= 0 and x > 0")
    if _ik_scaled(nu, x, &im, &ipm, &ie, &km, &kpm, &ke) != 0:
        raise ValueError("bessel CF did not converge")
    return im, ipm, ie, km, kpm, ke


def bessel_ik(double nu, double x):
    cdef double im, ipm, ie, km, kpm, ke, ei, ek
    im, ipm, ie, km, kpm, ke = bessel_ik_scaled(nu, x)
    if ie > 700.0 or ke > 700.0:
        raise OverflowError("I_nu/K_nu overflow")
    ei = exp(ie) if ie > -745.0 else 0.0
    ek = exp(ke) if ke > -745.0 else 0.0
    return im * ei, ipm * ei, km * ek, kpm * ek


def density_pair_sum(double[:] nus, double[:] pis, double a, double b):
    cdef double s = 0.0, comp = 0.0, term, t, e
    cdef double jm1, jp1, e1, y1, yp1, ey1, jm2, jp2, e2, y2, yp2, ey2
    cdef Py_ssize_t j, n = nus.shape[0]
    cdef bint fail = False
    with nogil:
        for j in range(n):
            if _jy_scaled(nus[j], a, &jm1, &jp1, &e1, &y1, &yp1, &ey1) != 0 or \
               _jy_scaled(nus[j], b, &jm2, &jp2, &e2, &y2, &yp2, &ey2) != 0:
                fail = True
                break
            e = e1 + e2
            term = pis[j] * jm1 * jm2 * (exp(e) if e > -745.0 else 0.0)
            t = s + term
            if fabs(s) >= fabs(term):
                comp += (s - t) + term
            else:
                comp += (term - t) + s
            s = t
    if fail:
        raise ValueError("bessel CF did not converge")
    return s + comp


def resolvent_pair_sum(double[:] nus, double[:] pis, double a, double b):
    cdef double sr = 0.0, si = 0.0, cr = 0.0, ci = 0.0, tr, ti, t, ejj, ejy
    cdef double jma, jpa, ea, ya, ypa, eya, jmb, jpb, eb, ymb, ypb, eyb
    cdef Py_ssize_t j, n = nus.shape[0]
    cdef bint fail = False
    with nogil:
        for j in range(n):
            if _jy_scaled(nus[j], a, &jma, &jpa, &ea, &ya, &ypa, &eya) != 0 or \
               _jy_scaled(nus[j], b, &jmb, &jpb, &eb, &ymb, &ypb, &eyb) != 0:
                fail = True
                break
            ejj = ea + eb
            ejy = ea + eyb
            tr = pis[j] * jma * jmb * (exp(ejj) if ejj > -745.0 else 0.0)
            ti = pis[j] * jma * ymb * (exp(ejy) if ejy > -745.0 else 0.0)
            t = sr + tr
            if fabs(sr) >= fabs(tr):
                cr += (sr - t) + tr
            else:
                cr += (tr - t) + sr
            sr = t
            t = si + ti
            if fabs(si) >= fabs(ti):
                ci += (si - t) + ti
            else:
                ci += (ti - t) + si
            si = t
    if fail:
        raise ValueError("bessel CF did not converge")
    return sr + cr, si + ci


def ql_eigen(diag, offdiag, bint want_vectors=True):
    """Implicit-shift QL for a symmetric tridiagonal matrix; see twin."""
    d_arr = np.array(diag, dtype=float, copy=True)
    cdef Py_ssize_t n = d_arr.size
    e_arr = np.zeros(n)
    e_arr[: n - 1] = np.asarray(offdiag, dtype=float)
    v_arr = np.eye(n) if want_vectors else None
    cdef double[:] d = d_arr
    cdef double[:] e = e_arr
    cdef double[:, :] v = v_arr if want_vectors else None
    cdef Py_ssize_t l, m, i, k
    cdef int niter
    cdef double dd, g, r, s, c, p, f, b, row_i
    cdef bint fail = False
    with nogil:
        for l in range(n):
            niter = 0
            while True:
                m = l
                while m < n - 1:
                    dd = fabs(d[m]) + fabs(d[m + 1])
                    if fabs(e[m]) <= _EPS * dd:
                        break
                    m += 1
                if m == l:
                    break
                niter += 1
                if niter > 60:
                    fail = True
                    break
                g = (d[l + 1] - d[l]) / (2.0 * e[l])
                r = hypot(g, 1.0)
                g = d[m] - d[l] + e[l] / (g + copysign(r, g))
                s = 1.0
                c = 1.0
                p = 0.0
                i = m - 1
                while i >= l:
                    f = s * e[i]
                    b = c * e[i]
                    r = hypot(f, g)
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
                    if want_vectors:
                        for k in range(n):
                            row_i = v[i, k]
                            v[i, k] = c * row_i - s * v[i + 1, k]
                            v[i + 1, k] = s * row_i + c * v[i + 1, k]
                    i -= 1
                else:
                    d[l] -= p
                    e[l] = g
                    e[m] = 0.0
            if fail:
                break
    if fail:
        raise RuntimeError("QL iteration did not converge")
    order = np.argsort(d_arr, kind="stable")
    w = d_arr[order]
    if want_vectors:
        return w, v_arr[order]
    return w, None


POT_NONE = 0
POT_BUMP = 1
POT_TABLE = 2


cdef double _eval_w(int kind, double* params, double[:] table_x,
                    double[:] table_c, double r) noexcept nogil:
    cdef double u, t, c0, c1, c2, c3
    cdef Py_ssize_t nx, lo, hi, mid
    if kind == 0:
        return 0.0
    if kind == 1:
        u = (r - params[0]) / params[1]
        if fabs(u) >= 1.0:
            return 0.0
        return params[2] * exp(1.0 - 1.0 / (1.0 - u * u))
    nx = table_x.shape[0]
    if r <= table_x[0] or r >= table_x[nx - 1]:
        return 0.0
    lo = 0
    hi = nx - 1
    while hi - lo > 1:
        mid = (lo + hi) >> 1
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


def eval_w(int kind, params, table_x, table_c, double r):
    cdef double[3] p
    cdef double[:] tx, tc
    cdef int i
    p[0] = p[1] = p[2] = 0.0
    for i in range(min(3, len(params))):
        p[i] = params[i]
    tx = np.ascontiguousarray(table_x, dtype=float) if len(table_x) else np.zeros(1)
    tc = np.ascontiguousarray(table_c, dtype=float) if len(table_c) else np.zeros(4)
    return _eval_w(kind, p, tx, tc, r)


cdef double[6] _DP_C_ = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0]
cdef double[6] _DP_B_ = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0,
                         -2187.0 / 6784.0, 11.0 / 84.0]
cdef double[7] _DP_E_ = [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0,
                         -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0]
cdef double[5][5] _DP_A_
_DP_A_[0][0] = 0.2
_DP_A_[1][0] = 3.0 / 40.0
_DP_A_[1][1] = 9.0 / 40.0
_DP_A_[2][0] = 44.0 / 45.0
_DP_A_[2][1] = -56.0 / 15.0
_DP_A_[2][2] = 32.0 / 9.0
_DP_A_[3][0] = 19372.0 / 6561.0
_DP_A_[3][1] = -25360.0 / 2187.0
_DP_A_[3][2] = 64448.0 / 6561.0
_DP_A_[3][3] = -212.0 / 729.0
_DP_A_[4][0] = 9017.0 / 3168.0
_DP_A_[4][1] = -355.0 / 33.0
_DP_A_[4][2] = 46732.0 / 5247.0
_DP_A_[4][3] = 49.0 / 176.0
_DP_A_[4][4] = -5103.0 / 18656.0


cdef inline void _rhs(double cnu, double lam_sq, int kind, double* params,
                      double[:] tx, double[:] tc, double r, double* y,
                      double* out) noexcept nogil:
    cdef double q = cnu / (r * r) + _eval_w(kind, params, tx, tc, r) - lam_sq
    out[0] = y[1]
    out[1] = q * y[0]
    out[2] = y[3]
    out[3] = q * y[2]


def integrate_radial(double cnu, double lam_sq, int pot_kind, pot_params,
                     table_x, table_c, double r0, y0, targets,
                     double rtol, double atol):
    cdef double[3] pp
    cdef int i
    pp[0] = pp[1] = pp[2] = 0.0
    for i in range(min(3, len(pot_params))):
        pp[i] = pot_params[i]
    tx_arr = np.ascontiguousarray(table_x, dtype=float) if len(table_x) else np.zeros(1)
    tc_arr = np.ascontiguousarray(table_c, dtype=float) if len(table_c) else np.zeros(4)
    tg_arr = np.ascontiguousarray(targets, dtype=float)
    cdef double[:] tx = tx_arr
    cdef double[:] tc = tc_arr
    cdef double[:] tg = tg_arr
    cdef Py_ssize_t nt = tg.shape[0]
    out_arr = np.empty((nt, 4))
    cdef double[:, :] out = out_arr
    cdef double[4] y
    cdef double[7][4] k
    cdef double[4] ytmp
    cdef double[4] ynew
    cdef double r = r0, h, direction, rt, acc, errnorm, sc, qq, fac
    cdef Py_ssize_t it, stage, cpt, j
    cdef bint collapse = False
    y[0] = y0[0]
    y[1] = y0[1]
    y[2] = y0[2]
    y[3] = y0[3]
    direction = 1.0 if (nt == 0 or tg[0] >= r0) else -1.0
    h = direction * fmax(1e-8, 0.01 * fabs(r0))
    with nogil:
        for it in range(nt):
            rt = tg[it]
            if (rt - r) * direction < 0.0:
                collapse = True
                break
            while (rt - r) * direction > 1e-14 * fmax(1.0, fabs(rt)):
                if fabs(h) > fabs(rt - r):
                    h = rt - r
                _rhs(cnu, lam_sq, pot_kind, pp, tx, tc, r, y, k[0])
                while True:
                    for stage in range(1, 6):
                        for cpt in range(4):
                            acc = 0.0
                            for j in range(stage):
                                acc += _DP_A_[stage - 1][j] * k[j][cpt]
                            ytmp[cpt] = y[cpt] + h * acc
                        _rhs(cnu, lam_sq, pot_kind, pp, tx, tc,
                             r + _DP_C_[stage] * h, ytmp, k[stage])
                    for cpt in range(4):
                        acc = 0.0
                        for j in range(6):
                            acc += _DP_B_[j] * k[j][cpt]
                        ynew[cpt] = y[cpt] + h * acc
                    _rhs(cnu, lam_sq, pot_kind, pp, tx, tc, r + h, ynew, k[6])
                    errnorm = 0.0
                    for cpt in range(4):
                        acc = 0.0
                        for j in range(7):
                            acc += _DP_E_[j] * k[j][cpt]
                        sc = atol + rtol * fmax(fabs(y[cpt]), fabs(ynew[cpt]))
                        qq = h * acc / sc
                        errnorm += qq * qq
                    errnorm = sqrt(errnorm / 4.0)
                    if errnorm <= 1.0:
                        break
                    fac = fmax(0.2, 0.9 * errnorm ** -0.2)
                    h *= fac
                    if fabs(h) < 1e-14 * fmax(1.0, fabs(r)):
                        collapse = True
                        break
                if collapse:
                    break
                r += h
                y[0] = ynew[0]
                y[1] = ynew[1]
                y[2] = ynew[2]
                y[3] = ynew[3]
                fac = 0.9 * (errnorm ** -0.2 if errnorm > 1e-12 else 10.0)
                h *= fmin(5.0, fmax(0.2, fac))
            if collapse:
                break
            out[it, 0] = y[0]
            out[it, 1] = y[1]
            out[it, 2] = y[2]
            out[it, 3] = y[3]
    if collapse:
        raise RuntimeError("step-size collapse in radial integration")
    return out_arr
