"""Radially perturbed cone engine.

Per-mode reduced problem on the half-line:

    -u'' + Q(r) u = lam^2 u,   Q(r) = (nu^2 - 1/4)/r^2 + W(r)

with the recessive (Friedrichs) condition u ~ r^{nu+1/2} at the tip and
outgoing Hankel behaviour at infinity. Provides regular/outgoing
solutions, Wronskian Green functions, the zero-energy mode that controls
the low-energy leading coefficient, perturbed spectral densities, and
low-energy power-law fits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from conespec._backend import core
from conespec.errors import (ConfigError, ConvergenceError, DomainError,
                             ModelError, RangeError, SolverError,
                             ZeroResonanceError)
from conespec import cone_kernels as ck
from conespec.cone_kernels import ConePoint


@dataclass(frozen=True)
class BumpPerturbation:
    """Compactly supported radial bump
    W(r) = amplitude * exp(1 - 1/(1 - u^2)), u = (r - center)/width."""

    center: float
    width: float
    amplitude: float

    def __post_init__(self):
        if self.width <= 0.0 or self.center - self.width < 0.0:
            raise ConfigError("bump support must lie in r > 0")

    def __call__(self, r):
        u = (r - self.center) / self.width
        if abs(u) >= 1.0:
            return 0.0
        return self.amplitude * math.exp(1.0 - 1.0 / (1.0 - u * u))

    @property
    def support_end(self):
        return self.center + self.width

    def backend_args(self):
        return (core.POT_BUMP, [self.center, self.width, self.amplitude],
                np.zeros(1), np.zeros(4))


@dataclass(frozen=True)
class TablePerturbation:
    """Radial perturbation sampled at increasing radii, cubic-spline
    interpolated, zero outside the sampled range."""

    radii: tuple
    values: tuple
    _spline: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if r.ndim != 1 or r.size < 4 or np.any(np.diff(r) <= 0.0) or r[0] <= 0.0:
            raise ConfigError("table needs >= 4 strictly increasing radii > 0")
        object.__setattr__(self, "radii", tuple(r))
        object.__setattr__(self, "values", tuple(v))
        object.__setattr__(self, "_spline", _natural_cubic(r, v))

    def __call__(self, r):
        kind, params, tx, tc = self.backend_args()
        return core.eval_w(kind, params, tx, tc, r)

    @property
    def support_end(self):
        return self.radii[-1]

    def backend_args(self):
        return (core.POT_TABLE, [], self._spline[0], self._spline[1])


def _natural_cubic(x, y):
    """Natural cubic spline coefficients as flat (x, coeffs) arrays for the
    backend evaluator: on [x_i, x_{i+1}], W = c0 + c1 t + c2 t^2 + c3 t^3."""
    n = x.size
    h = np.diff(x)
    rhs = np.zeros(n)
    rhs[1:-1] = 6.0 * ((y[2:] - y[1:-1]) / h[1:] - (y[1:-1] - y[:-2]) / h[:-1])
    diag = np.ones(n)
    diag[1:-1] = 2.0 * (h[:-1] + h[1:])
    lower = np.zeros(n - 1)
    upper = np.zeros(n - 1)
    lower[:-1] = h[:-1]
    upper[1:] = h[1:]
    # Thomas solve
    m = np.zeros(n)
    cp = np.zeros(n - 1)
    cp[0] = upper[0] / diag[0]
    dp = np.zeros(n)
    dp[0] = rhs[0] / diag[0]
    for i in range(1, n):
        denom = diag[i] - (lower[i - 1] * cp[i - 1] if i - 1 < n - 1 else 0.0)
        if i < n - 1:
            cp[i] = upper[i] / denom
        dp[i] = (rhs[i] - lower[i - 1] * dp[i - 1]) / denom
    m[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        m[i] = dp[i] - (cp[i] * m[i + 1] if i < n - 1 else 0.0)
    coeffs = np.zeros(4 * (n - 1))
    for i in range(n - 1):
        hi = h[i]
        coeffs[4 * i] = y[i]
        coeffs[4 * i + 1] = (y[i + 1] - y[i]) / hi - hi * (2 * m[i] + m[i + 1]) / 6.0
        coeffs[4 * i + 2] = m[i] / 2.0
        coeffs[4 * i + 3] = (m[i + 1] - m[i]) / (6.0 * hi)
    return np.ascontiguousarray(x), np.ascontiguousarray(coeffs)


_NO_PERT = (core.POT_NONE, [], np.zeros(1), np.zeros(4))


@dataclass
class RadialModel:
    """Problem description: dimension and cross-section spectrum, radial
    perturbation, solver tolerances and matching radii."""

    spectrum: object
    w_pert: Optional[object] = None
    tol: float = 1e-10
    r_match: Optional[float] = None
    r_min_factor: float = 1e-3

    def __post_init__(self):
        if self.w_pert is not None:
            self._check_decay()
        if self.r_match is None:
            self.r_match = self._auto_r_match()
        self._mode_cache = {}
        self._zero_modes = None

    @property
    def n(self):
        return self.spectrum.n

    def w_value(self, r):
        return self.w_pert(r) if self.w_pert is not None else 0.0

    def backend_pot(self):
        if self.w_pert is None:
            return _NO_PERT
        return self.w_pert.backend_args()

    def _check_decay(self):
        """|W| <= C r^-3 beyond r_match/2 and bounded near zero, sampled."""
        end = self.w_pert.support_end
        rs = np.linspace(1e-6, end * 1.5, 200)
        vals = np.array([self.w_pert(r) for r in rs])
        if not np.all(np.isfinite(vals)):
            raise ModelError("perturbation is not finite on (0, r_max)")
        if isinstance(self.w_pert, TablePerturbation):
            tail = [v * r ** 3 for r, v in zip(rs, vals) if r > end * 0.75]
            if tail and max(map(abs, tail)) > 1e3:
                raise ModelError("perturbation decays slower than r^-3")

    def _auto_r_match(self):
        """Smallest dyadic R with |W(R)| R^2 below tol (and beyond the
        support for compact perturbations)."""
        if self.w_pert is None:
            return 2.0
        r = 1.0
        for _ in range(60):
            if (r >= self.w_pert.support_end
                    and abs(self.w_value(r)) * r * r < self.tol):
                return r
            r *= 2.0
        raise ConfigError("could not find a matching radius; perturbation "
                          "decays too slowly")

    # -- per-mode machinery ----------------------------------------------
    def mode_solution(self, nu, lam):
        key = (float(nu), float(lam))
        sol = self._mode_cache.get(key)
        if sol is None:
            sol = ModeSolution(self, float(nu), float(lam))
            if len(self._mode_cache) > 4096:
                self._mode_cache.clear()
            self._mode_cache[key] = sol
        return sol

    def zero_modes(self):
        if self._zero_modes is None:
            self._zero_modes = _build_zero_modes(self)
        return self._zero_modes

    def zero_mode(self):
        return self.zero_modes()[0]

    def density(self, lam, left, right, tol=1e-12):
        return perturbed_density(self, lam, left, right, tol=tol)


def liouville_reduce(model, nu):
    """Effective half-line potential of the mode: Q(r) = (nu^2-1/4)/r^2 + W."""
    cnu = nu * nu - 0.25

    def q(r):
        return cnu / (r * r) + model.w_value(r)

    q.cnu = cnu
    q.w = model.w_value
    return q


def _r_min(model, nu, lam):
    return model.r_min_factor * min(1.0, 1.0 / max(lam, 1e-30))


def _frobenius_start(model, nu, lam, r0):
    """Two-term Frobenius launch u = r^s (1 + c2 r^2), s = nu + 1/2."""
    s = nu + 0.5
    w0 = model.w_value(0.5 * r0)
    c2 = (w0 - lam * lam) / (4.0 * nu + 4.0)
    u = r0 ** s * (1.0 + c2 * r0 * r0)
    up = s * r0 ** (s - 1.0) + (s + 2.0) * c2 * r0 ** (s + 1.0)
    return u, up


class ModeSolution:
    """Regular and outgoing solutions of one mode at one energy, with the
    (constant) Wronskian  W = u_reg' u_out - u_reg u_out'."""

    def __init__(self, model, nu, lam):
        if lam <= 0.0:
            raise DomainError("mode solutions need lam > 0")
        self.nu = nu
        self.lam = lam
        self.model = model
        self.r_match = model.r_match
        if abs(model.w_value(self.r_match)) > max(model.tol * lam * lam, 1e-300):
            raise ConfigError(
                f"perturbation is not negligible at r_match = {self.r_match}; "
                "increase r_match")
        self._kind, self._params, self._tx, self._tc = model.backend_pot()
        self._cnu = nu * nu - 0.25
        self._reg = {}
        self._out = {}
        self._seed_outgoing()
        self._seed_regular()
        self.wronskian = self._wronskian()

    def _integrate(self, r0, y0, targets):
        return core.integrate_radial(
            self._cnu, self.lam * self.lam, self._kind, self._params,
            self._tx, self._tc, r0, y0,
            np.ascontiguousarray(targets, dtype=float),
            self.model.tol, 1e-14)

    def _seed_outgoing(self):
        lam, nu, rm = self.lam, self.nu, self.r_match
        x = lam * rm
        j, jp, y, yp = core.bessel_jy(nu, x)
        u = math.sqrt(rm) * complex(j, y)
        up = 0.5 / math.sqrt(rm) * complex(j, y) + math.sqrt(rm) * lam * complex(jp, yp)
        self._out[rm] = (u, up)

    def _seed_regular(self):
        r0 = _r_min(self.model, self.nu, self.lam)
        u, up = _frobenius_start(self.model, self.nu, self.lam, r0)
        self._reg[r0] = (complex(u), complex(up))
        self._reg_start = r0

    def regular_at(self, radii):
        """Regular solution (u, u') at the given radii (any order)."""
        return self._fill(self._reg, radii, forward=True)

    def outgoing_at(self, radii):
        """Outgoing solution (u, u') at the given radii (any order)."""
        return self._fill(self._out, radii, forward=False)

    def _fill(self, cache, radii, forward):
        radii = [float(r) for r in np.atleast_1d(radii)]
        missing = sorted(set(r for r in radii if r not in cache))
        if missing and not forward:
            # outgoing: beyond r_match the perturbation vanishes, continue
            # with the exact-cone solution; below, integrate inward
            beyond = [r for r in missing if r >= self.r_match]
            for r in beyond:
                cache[r] = self._exact_beyond(r)
            missing = [r for r in missing if r < self.r_match]
        if missing:
            if forward:
                anchors = [r for r in cache if r <= missing[0]]
                if not anchors:
                    raise DomainError(
                        "regular solution requested below its launch radius")
                anchor = max(anchors)
                run = missing
            else:
                anchor = min(r for r in cache if r >= missing[-1])
                run = sorted(missing, reverse=True)
            u0, up0 = cache[anchor]
            y0 = [u0.real, up0.real, u0.imag, up0.imag]
            rows = self._integrate(anchor, y0, run)
            for r, row in zip(run, rows):
                cache[r] = (complex(row[0], row[2]), complex(row[1], row[3]))
        return [cache[r] for r in radii]

    def _exact_beyond(self, r):
        lam, nu = self.lam, self.nu
        j, jp, y, yp = core.bessel_jy(nu, lam * r)
        u = math.sqrt(r) * complex(j, y)
        up = 0.5 / math.sqrt(r) * complex(j, y) + math.sqrt(r) * lam * complex(jp, yp)
        return (u, up)

    def _wronskian(self):
        rm = self.r_match
        (ur, urp), = self.regular_at([rm])
        uo, uop = self._out[rm]
        w = urp * uo - ur * uop
        # the natural scale is the free-cone Wronskian
        # |W_free| = (2/pi) 2^nu Gamma(nu+1) lam^-nu  (log space: can be huge)
        log_scale = (math.log(2.0 / math.pi) + self.nu * math.log(2.0)
                     + core.lgammafn(self.nu + 1.0)
                     - self.nu * math.log(self.lam))
        if abs(w) == 0.0 or math.log(abs(w)) < log_scale - 27.63:
            raise SolverError(
                f"near-resonant mode nu={self.nu}, lam={self.lam}: "
                f"|W| = {abs(w):.3g} below 1e-12 of the free scale")
        return w

    def green(self, r, r_prime, sign=+1):
        """Wronskian Green function u_reg(r_<) u_out(r_>)/W; reduces to the
        exact-cone formula when the perturbation vanishes."""
        a, b = (r, r_prime) if r <= r_prime else (r_prime, r)
        (ura, _), = self.regular_at([a])
        (uob, _), = (self.outgoing_at([b]) if b <= self.r_match
                     else [self._exact_beyond(b)])
        val = ura * uob / self.wronskian
        return val if sign > 0 else val.conjugate()

    def density_factor(self, r, r_prime):
        """(2 lam / pi) Im green(+) -- the reduced per-mode density."""
        return 2.0 * self.lam / math.pi * self.green(r, r_prime, +1).imag


def mode_green_perturbed(model, nu, lam, r, r_prime, sign=+1):
    """Green function of the perturbed mode (module-level convenience)."""
    return model.mode_solution(nu, lam).green(r, r_prime, sign)


def regular_solution(model, nu, lam, radii):
    """Regular-at-the-tip solution sampled at the given radii; at lam = 0
    integrates the zero-energy equation."""
    if lam == 0.0:
        return _zero_energy_solution(model, nu, radii)
    sol = model.mode_solution(nu, lam)
    return sol.regular_at(radii)


def outgoing_solution(model, nu, lam, radii):
    """Outgoing solution sampled at the given radii."""
    sol = model.mode_solution(nu, lam)
    return sol.outgoing_at(radii)


def _zero_energy_solution(model, nu, radii):
    kind, params, tx, tc = model.backend_pot()
    r0 = model.r_min_factor
    s = nu + 0.5
    w0 = model.w_value(0.5 * r0)
    c2 = w0 / (4.0 * nu + 4.0)
    u = r0 ** s * (1.0 + c2 * r0 * r0)
    up = s * r0 ** (s - 1.0) + (s + 2.0) * c2 * r0 ** (s + 1.0)
    radii = [float(r) for r in np.atleast_1d(radii)]
    order = np.argsort(radii)
    rows = core.integrate_radial(nu * nu - 0.25, 0.0, kind, params, tx, tc,
                                 r0, [u, up, 0.0, 0.0],
                                 np.ascontiguousarray(np.sort(radii)),
                                 model.tol, 1e-300)
    out = [None] * len(radii)
    for pos, idx in enumerate(order):
        out[idx] = (complex(rows[pos][0]), complex(rows[pos][1]))
    return out


@dataclass
class ZeroMode:
    """Zero-energy mode data: u0 ~ a r^{nu0+1/2} + b r^{1/2-nu0} at
    infinity; w(r) = W_y [u0(r)/a] r^{-(n-1)/2} / (2^{nu0} Gamma(nu0+1))."""

    nu0: float
    a_coeff: float
    b_coeff: float
    w_angular: float
    model: object
    _grid: np.ndarray = None
    _vals: np.ndarray = None
    _ders: np.ndarray = None

    def u0(self, r):
        rm = self.model.r_match
        if r >= rm:
            return (self.a_coeff * r ** (self.nu0 + 0.5)
                    + self.b_coeff * r ** (0.5 - self.nu0))
        i = np.searchsorted(self._grid, r)
        if i == 0:
            return float(r ** (self.nu0 + 0.5) * self._vals[0]
                         / self._grid[0] ** (self.nu0 + 0.5))
        # cubic Hermite between stored samples
        r0, r1 = self._grid[i - 1], self._grid[i]
        h = r1 - r0
        t = (r - r0) / h
        y0, y1 = self._vals[i - 1], self._vals[i]
        d0, d1 = self._ders[i - 1] * h, self._ders[i] * h
        h00 = (1 + 2 * t) * (1 - t) ** 2
        h10 = t * (1 - t) ** 2
        h01 = t * t * (3 - 2 * t)
        h11 = t * t * (t - 1)
        return float(h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1)

    def w_eval(self, r):
        n = self.model.n
        norm = 2.0 ** self.nu0 * core.gammafn(self.nu0 + 1.0)
        return (self.w_angular * self.u0(r) / self.a_coeff
                * r ** (-(n - 1) / 2.0) / norm)

    def w_point(self, point):
        return self.w_eval(point.r)


def _build_zero_modes(model):
    """One ZeroMode per nu_0 eigenvector (rank = multiplicity after
    merging; identical radial parts for a radial perturbation)."""
    spec = model.spectrum
    nu0 = spec.nu0
    mult = spec.modes[0].multiplicity
    w_ang = spec.w_angular()
    if model.w_pert is None:
        zm = ZeroMode(nu0, 1.0, 0.0, w_ang, model,
                      np.array([model.r_match]),
                      np.array([model.r_match ** (nu0 + 0.5)]),
                      np.array([(nu0 + 0.5) * model.r_match ** (nu0 - 0.5)]))
        return [zm] * mult

    rm = model.r_match
    r0 = model.r_min_factor
    grid = np.geomspace(r0, rm, 400)
    sols = _zero_energy_solution(model, nu0, grid)
    vals = np.array([s[0].real for s in sols])
    ders = np.array([s[1].real for s in sols])
    u, up = vals[-1], ders[-1]
    s_plus = nu0 + 0.5
    s_minus = 0.5 - nu0
    f1, f1p = rm ** s_plus, s_plus * rm ** (s_plus - 1.0)
    f2, f2p = rm ** s_minus, s_minus * rm ** (s_minus - 1.0)
    det = f1 * f2p - f1p * f2  # = -2 nu0 * rm^0
    a = (u * f2p - up * f2) / det
    b = (up * f1 - u * f1p) / det
    if abs(a) < 1e-10 * max(abs(b), 1e-300):
        raise ZeroResonanceError(
            f"zero-energy resonance detected (a = {a:.3g}, b = {b:.3g}); "
            "the no-resonance hypothesis fails", nu0_sq=nu0 * nu0)
    zm = ZeroMode(nu0, a, b, w_ang, model, grid, vals, ders)
    return [zm] * mult


# ----------------------------------------------------------------------
# perturbed spectral density and low-energy fits


def perturbed_density(model, lam, left, right, tol=1e-12):
    """Spectral-measure density of the perturbed model: the exact-cone sum
    plus per-mode Wronskian-Green corrections for the low modes that feel
    the perturbation."""
    spec = model.spectrum
    base = ck.spectral_measure_density(spec, lam, left, right, tol=tol)
    if model.w_pert is None:
        return base
    theta = ck.separation(spec, left, right)
    r, rp = left.r, right.r
    n = spec.n
    geom = (r * rp) ** (-(n - 1) / 2.0)  # the sqrt(r r') lives inside G
    corr = 0.0
    small_streak = 0
    floor = max(tol * abs(base), 1e-300)
    count, _ = ck._density_mode_count(spec, lam, r, rp, floor)
    for mode in spec.modes[:min(count + 1, len(spec.modes))]:
        pi_j = mode.projector(theta)
        sol = model.mode_solution(mode.nu, lam)
        delta = pi_j * geom * (
            sol.density_factor(r, rp)
            - 2.0 * lam / math.pi
            * ck.mode_green_exact(mode.nu, lam, r, rp, +1).imag)
        corr += delta
        if abs(delta) < 0.1 * floor:
            small_streak += 1
            if small_streak >= 2:
                break
        else:
            small_streak = 0
    return base + corr


def low_energy_fit(model, left, right, lambda_grid, tol=1e-16):
    """Log-log least squares of the density over a low-energy window.

    Returns (slope, coefficient, predicted_slope, predicted_coefficient).
    """
    lams = np.asarray(lambda_grid, dtype=float)
    if lams.size < 8:
        raise ConfigError("need at least 8 points in the lambda grid")
    dens = np.array([model.density(lam, left, right, tol=tol) for lam in lams])
    if np.any(dens <= 0.0):
        raise RangeError("nonpositive density in the fit window "
                         "(numerical underflow)")
    slope, intercept = np.polyfit(np.log(lams), np.log(dens), 1)
    spec = model.spectrum
    zm = model.zero_mode()
    predicted_slope = 2.0 * spec.nu0 + 1.0
    predicted_coeff = zm.w_eval(left.r) * zm.w_eval(right.r)
    return float(slope), float(math.exp(intercept)), predicted_slope, predicted_coeff
