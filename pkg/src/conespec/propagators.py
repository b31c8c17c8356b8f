"""Stone-formula propagator kernels and long-time decay analysis.

Wave and Schroedinger kernels localized to low energy:

    u(t; z, z') = int_0^inf chi(lam^2) F_t(lam) density(lam; z, z') dlam

with F_t = sin(t lam)/lam, cos(t lam) or e^{i t lam^2}. Composite
Gauss-Legendre quadrature on oscillation-resolving panels with density
tables cached across the whole time series; the closed-form model integral
int chi(lam) e^{i t lam} lam^s dlam is evaluated by analytic integration by
parts plus a remainder quadrature over the cutoff transition.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from conespec._backend import core
from conespec.errors import ConfigError, DomainError, FitQualityWarning
from conespec import cone_kernels as ck

KINDS = ("schrodinger", "wave_sin", "wave_cos")

CUTOFF_BETA = 2.0


def cutoff_chi(lam, lambda_c, beta=CUTOFF_BETA):
    """C-infinity cutoff profile: 1 on [0, lambda_c/2], 0 beyond lambda_c,
    glued by 1/(1 + e^{beta/(1-s) - beta/s}) on the transition."""
    if lam < 0.0:
        raise DomainError("cutoff argument must be >= 0")
    s = 2.0 * lam / lambda_c - 1.0
    if s <= 0.0:
        return 1.0
    if s >= 1.0:
        return 0.0
    g = beta / (1.0 - s) - beta / s
    if g > 700.0:
        return 0.0
    if g < -700.0:
        return 1.0
    return 1.0 / (1.0 + math.exp(g))


@dataclass(frozen=True)
class Cutoff:
    """Smooth low-energy cutoff chi with plateau [0, lambda_c/2] and
    support [0, lambda_c] (applied to lam^2 in the Stone quadrature)."""

    lambda_c: float = 1.0
    beta: float = CUTOFF_BETA

    def __post_init__(self):
        if self.lambda_c <= 0.0:
            raise ConfigError("lambda_c must be positive")

    def chi(self, u):
        return cutoff_chi(u, self.lambda_c, self.beta)

    def chi_sq(self, lam):
        return self.chi(lam * lam)

    @property
    def lam_support(self):
        """Support edge in the lam variable for chi(lam^2)."""
        return math.sqrt(self.lambda_c)

    def chi_jet(self, lam, order):
        """[chi(lam), chi'(lam), ..., chi^(order)(lam)] exactly, by
        truncated-Taylor (jet) arithmetic through the glue formula."""
        s = 2.0 * lam / self.lambda_c - 1.0
        if s <= 0.0 or s >= 1.0:
            out = [0.0] * (order + 1)
            out[0] = 1.0 if s <= 0.0 else 0.0
            return out
        m = order + 1
        ds = 2.0 / self.lambda_c
        # jet of s(lam)
        sj = [0.0] * m
        sj[0] = s
        if m > 1:
            sj[1] = ds
        g = _jet_sub(_jet_recip(_jet_affine(1.0, -1.0, sj), self.beta),
                     _jet_recip(sj, self.beta))
        if g[0] > 500.0:  # chi and all derivatives below 1e-200
            return [0.0] * m
        if g[0] < -500.0:  # chi = 1 to 1e-200
            out = [0.0] * m
            out[0] = 1.0
            return out
        e = _jet_exp(g)
        one_plus = e[:]
        one_plus[0] += 1.0
        chi = _jet_reciprocal(one_plus)
        fact = 1.0
        out = []
        for k in range(m):
            out.append(chi[k] * fact)
            fact *= (k + 1)
        return out


# -- minimal jet (truncated Taylor) arithmetic ---------------------------


def _jet_affine(a, b, x):
    # a + b*x
    out = [b * xi for xi in x]
    out[0] += a
    return out


def _jet_sub(x, y):
    return [xi - yi for xi, yi in zip(x, y)]


def _jet_mul(x, y):
    m = len(x)
    out = [0.0] * m
    for i in range(m):
        for j in range(m - i):
            out[i + j] += x[i] * y[j]
    return out


def _jet_reciprocal(x):
    m = len(x)
    out = [0.0] * m
    out[0] = 1.0 / x[0]
    for k in range(1, m):
        acc = 0.0
        for j in range(1, k + 1):
            acc += x[j] * out[k - j]
        out[k] = -acc / x[0]
    return out


def _jet_recip(x, beta):
    # beta / x
    return [beta * v for v in _jet_reciprocal(x)]


def _jet_exp(x):
    m = len(x)
    out = [0.0] * m
    out[0] = math.exp(x[0])
    for k in range(1, m):
        acc = 0.0
        for j in range(1, k + 1):
            acc += j * x[j] * out[k - j]
        out[k] = acc / k
    return out


# -- quadrature machinery ------------------------------------------------

_GL_ORDER = 16
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)


def _panel_nodes(a, b, n_panels):
    edges = np.linspace(a, b, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    nodes = (mid + half * _GL_X[None, :]).ravel()
    wts = (half * _GL_W[None, :] * np.ones_like(_GL_X)[None, :]).ravel()
    return nodes, wts


def phase_rate(kind, t, lam_max):
    if kind == "schrodinger":
        return 2.0 * t * lam_max
    return t


def min_nodes(kind, t, cutoff):
    """Sampling floor: >= 10 nodes per period of the fastest oscillation."""
    lam_max = cutoff.lam_support
    periods = phase_rate(kind, t, lam_max) * lam_max / (2.0 * math.pi)
    return int(math.ceil(10.0 * (1.0 + periods)))


@dataclass
class DensityTable:
    """Spectral density sampled on a fixed Gauss-Legendre grid, built once
    and reused for every propagator time in a series."""

    nodes: np.ndarray
    weights: np.ndarray
    dens: np.ndarray
    cutoff: Cutoff

    @classmethod
    def build(cls, density_fn, cutoff, kind, t_max, n_lambda=None,
              dense_table=None):
        lam_max = cutoff.lam_support
        need = min_nodes(kind, t_max, cutoff)
        if n_lambda is not None and n_lambda < need:
            raise ConfigError(
                f"n_lambda = {n_lambda} undersamples the oscillation "
                f"(need >= {need})")
        n = max(n_lambda or need, 256)
        n_panels = max(int(math.ceil(n / _GL_ORDER)), 16)
        nodes, weights = _panel_nodes(0.0, lam_max, n_panels)
        if dense_table is not None:
            dens = dense_table(nodes)
        else:
            dens = np.array([density_fn(lam) for lam in nodes])
        chi = np.array([cutoff.chi_sq(lam) for lam in nodes])
        return cls(nodes, weights, dens * chi, cutoff)

    def integrate(self, kind, t):
        lam = self.nodes
        if kind == "wave_sin":
            f = np.sin(t * lam) / lam
            return complex(float(np.dot(self.weights, f * self.dens)), 0.0)
        if kind == "wave_cos":
            f = np.cos(t * lam)
            return complex(float(np.dot(self.weights, f * self.dens)), 0.0)
        if kind == "schrodinger":
            ph = np.exp(1j * t * lam * lam)
            return complex(np.dot(self.weights, ph * self.dens))
        raise ConfigError(f"unknown propagator kind {kind!r}")


def make_density_fn(model, left, right, tol=1e-12):
    """Density callable lam -> density(lam; left, right) for a RadialModel
    or bare ModeSpectrum."""
    if hasattr(model, "density"):
        return lambda lam: model.density(lam, left, right, tol=tol)
    return lambda lam: ck.spectral_measure_density(model, lam, left, right,
                                                   tol=tol)


def make_dense_interp(model, left, right, cutoff, n_dense=2048, tol=1e-12):
    """Cubic-interpolated dense density table (for expensive perturbed
    densities); returns a vectorized callable on [0, lam_support]."""
    lam_max = cutoff.lam_support
    grid = np.linspace(lam_max / n_dense, lam_max, n_dense)
    fn = make_density_fn(model, left, right, tol=tol)
    vals = np.array([fn(lam) for lam in grid])
    from conespec.radial_scattering import _natural_cubic
    tx, tc = _natural_cubic(grid, vals)
    spec = model.spectrum if hasattr(model, "spectrum") else model
    p0 = 2.0 * spec.nu0 + 1.0  # leading vanishing order at lam = 0

    def interp(lams):
        out = np.empty(len(lams))
        for i, lam in enumerate(lams):
            if lam <= grid[0]:
                out[i] = vals[0] * (lam / grid[0]) ** p0 if lam > 0 else 0.0
            else:
                out[i] = core.eval_w(core.POT_TABLE, [], tx, tc, min(lam, grid[-1]))
        return out

    return interp


def stone_quadrature(model, kind, cutoff, t, left, right, n_lambda=None,
                     tol=1e-12, convergence_check=False, table=None):
    """One propagator kernel value at time t.

    Composite Gauss-Legendre quadrature of chi(lam^2) F_t(lam) density(lam)
    over the cutoff support; with convergence_check, doubles the grid and
    raises ConfigError if the value moves by more than 1e-3 relative.
    """
    if kind not in KINDS:
        raise ConfigError(f"unknown propagator kind {kind!r}")
    if t <= 0.0:
        raise DomainError("t must be positive")
    if table is None:
        fn = make_density_fn(model, left, right, tol=tol)
        table = DensityTable.build(fn, cutoff, kind, t, n_lambda=n_lambda)
    val = table.integrate(kind, t)
    if convergence_check:
        fn = make_density_fn(model, left, right, tol=tol)
        fine = DensityTable.build(fn, cutoff, kind, t,
                                  n_lambda=2 * len(table.nodes))
        ref = fine.integrate(kind, t)
        if abs(val - ref) > 1e-3 * max(abs(ref), 1e-300):
            raise ConfigError(
                f"stone quadrature not converged at t={t}: "
                f"{abs(val - ref):.3g} vs {abs(ref):.3g}")
    return val


def warn_if_bound_state(model):
    """Cheap Rayleigh-quotient scan of the lowest mode: a negative
    eigenvalue means e^{itP} and e^{itP_+} differ by a bound-state term."""
    if not hasattr(model, "w_pert") or model.w_pert is None:
        return False
    from conespec.oracle import BoxProblem, box_eigen
    prob = BoxProblem(nu=model.spectrum.nu0, r0=1e-3,
                      R=max(4.0 * model.r_match, 16.0), N=240, model=model)
    eig = box_eigen(prob)
    if eig.lam_sq[0] < -1e-10:
        warnings.warn(
            f"bound state detected (lowest mode eigenvalue "
            f"{eig.lam_sq[0]:.3g} < 0): the propagator differs from its "
            "positive-part localization", UserWarning)
        return True
    return False


def stone_series(model, kind, cutoff, t_values, left, right, tol=1e-12,
                 n_lambda=None, dense_points=None):
    """Propagator kernel over a time series with one shared density table
    (sized by the largest t). For perturbed models a dense interpolated
    density is used; exact-cone densities are evaluated at every node."""
    warn_if_bound_state(model)
    t_values = sorted(float(t) for t in t_values)
    t_max = t_values[-1]
    dense = None
    if dense_points or (hasattr(model, "w_pert") and model.w_pert is not None):
        dense = make_dense_interp(model, left, right, cutoff,
                                  n_dense=dense_points or 2048, tol=tol)
    fn = make_density_fn(model, left, right, tol=tol)
    table = DensityTable.build(fn, cutoff, kind, t_max, n_lambda=n_lambda,
                               dense_table=dense)
    return [table.integrate(kind, t) for t in t_values]


# -- model integral -------------------------------------------------------


def model_integral(s, t, cutoff, pts_per_period=8.0):
    """(quadrature, closed_form) for int_0^inf chi(lam) e^{i t lam} lam^s.

    closed_form = Gamma(s+1) e^{i pi (s+1)/2} t^-(s+1). The quadrature
    integrates by parts m = floor(s)+1 times analytically (for integer s
    the boundary algebra reproduces the closed form exactly and the
    remainder integrand is supported on the cutoff transition) and applies
    oscillation-resolving Gauss-Legendre to the remainder.
    """
    if s <= 0.0:
        raise DomainError("s must be positive")
    if t < 10.0 / cutoff.lambda_c:
        raise DomainError("t below the asymptotic-regime floor 10/lambda_c")
    lc = cutoff.lambda_c
    closed = (core.gammafn(s + 1.0)
              * complex(math.cos(0.5 * math.pi * (s + 1.0)),
                        math.sin(0.5 * math.pi * (s + 1.0)))
              * t ** -(s + 1.0))
    m = int(math.floor(s)) + 1
    it = 1j * t
    # boundary terms at lam = 0: k-th derivative of chi*lam^s is s!/(s-k)!
    # lam^{s-k} near 0; only k = s contributes for integer s
    boundary = 0.0j
    if abs(s - round(s)) < 1e-14:
        si = int(round(s))
        if si < m:
            boundary = (-1.0) ** (si + 1) * core.gammafn(s + 1.0) * it ** -(si + 1)
    # remainder: (-1/it)^m  int (chi lam^s)^(m) e^{i t lam}
    # on the plateau (chi = 1) the integrand is d^m/dlam^m lam^s, nonzero
    # only for non-integer s; on the transition use the chi jet
    def amp(lam):
        jet = cutoff.chi_jet(lam, m)
        total = 0.0
        for k in range(m + 1):
            # binom(m, k) * chi^(k) * (lam^s)^(m-k)
            p = m - k
            fall = 1.0
            for i in range(p):
                fall *= (s - i)
            total += (math.comb(m, k) * jet[k] * fall * lam ** (s - p))
        return total

    integr = 0.0j
    # transition region
    n_per = phase_rate("wave", t, 1.0) * (0.5 * lc) / (2.0 * math.pi)
    n_panels = max(int(math.ceil(n_per * 16.0 / pts_per_period / 2.0)), 32)
    nodes, wts = _panel_nodes(0.5 * lc, lc, n_panels)
    vals = np.array([amp(x) for x in nodes])
    integr += np.dot(wts, vals * np.exp(1j * t * nodes))
    if abs(s - round(s)) >= 1e-14:
        # plateau contribution of the fractional power: analytic Taylor of
        # the phase on [0, eps), graded oscillation-resolving panels beyond
        fall = 1.0
        for i in range(m):
            fall *= (s - i)
        eps = min(1e-6 / t, 0.25 * lc)
        p0 = s - m
        head = 0.0j
        phase_pow = 1.0 + 0.0j
        for k in range(4):
            head += phase_pow * eps ** (p0 + k + 1.0) / (p0 + k + 1.0)
            phase_pow *= it / (k + 1.0)
        integr += fall * head
        edges = np.geomspace(eps, 0.5 * lc, 200)
        for a, b in zip(edges[:-1], edges[1:]):
            per = max(int(math.ceil((b - a) * t / (2.0 * math.pi))), 1)
            nds, ws = _panel_nodes(a, b, min(per * 2, 2000))
            v = fall * nds ** p0
            integr += np.dot(ws, v * np.exp(1j * t * nds))
    quad = boundary + (-1.0 / it) ** m * integr
    return quad, closed


# -- decay fitting --------------------------------------------------------


@dataclass
class DecayFit:
    exponent: float
    coefficient: complex
    ci_exponent: float
    predicted_exponent: Optional[float] = None
    predicted_coefficient: Optional[complex] = None
    oscillatory: bool = False


def fit_decay(t_values, values, predicted_exponent=None,
              predicted_coefficient=None):
    """Power-law fit of a decaying time series.

    Exponent from OLS of log|value| vs log t; coefficient as the phase-
    averaged value * t^p at the prediction (or the rounded fit); confidence
    interval from the regression residual variance. Non-monotone |value|
    flags oscillatory contamination (warning + inflated interval).
    """
    ts = np.asarray([float(t) for t in t_values])
    vs = np.asarray([complex(v) for v in values])
    if ts.size < 4:
        raise ConfigError("need at least 4 points to fit a decay law")
    mags = np.abs(vs)
    if np.any(mags == 0.0):
        raise ConfigError("zero magnitudes in the fit window")
    x = np.log(ts)
    y = np.log(mags)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    dof = max(ts.size - 2, 1)
    sxx = float(np.sum((x - x.mean()) ** 2))
    stderr = math.sqrt(float(np.sum(resid ** 2)) / dof / sxx)
    ci = 1.96 * stderr
    oscillatory = bool(np.any(np.diff(mags) > 0.0))
    if oscillatory:
        warnings.warn("non-monotone |value| in the decay-fit window "
                      "(oscillatory contamination)", FitQualityWarning)
        ci = max(ci, float(np.std(resid)))
    exponent = -slope
    p = predicted_exponent if predicted_exponent is not None else round(exponent)
    coeff = complex(np.mean(vs * ts ** p))
    return DecayFit(float(exponent), coeff, float(ci),
                    predicted_exponent, predicted_coefficient,
                    oscillatory)


def predicted_constants(model, kind, left, right):
    """Predicted long-time (exponent, coefficient) of the localized kernel.

    wave_sin: (2nu0+1, -Gamma(2nu0+1) cos(pi(nu0+1)) w w');
    wave_cos: (2nu0+2, +Gamma(2nu0+2) cos(pi(nu0+1)) w w');
    schrodinger: (nu0+1, (1/2) Gamma(nu0+1) e^{i pi (nu0+1)/2} w w').
    When the wave cosine factor vanishes the exponent prediction falls to
    the remainder order and the coefficient to 0.
    """
    if kind not in KINDS:
        raise ConfigError(f"unknown propagator kind {kind!r}")
    spec = model.spectrum if hasattr(model, "spectrum") else model
    nu0 = spec.nu0
    nu1 = spec.nu1
    if hasattr(model, "zero_mode"):
        zm = model.zero_mode()
        ww = zm.w_eval(left.r) * zm.w_eval(right.r)
    else:
        raise ConfigError("predicted_constants needs a RadialModel")
    cosfac = math.cos(math.pi * (nu0 + 1.0))
    if kind == "schrodinger":
        c = 0.5 * core.gammafn(nu0 + 1.0) * complex(
            math.cos(0.5 * math.pi * (nu0 + 1.0)),
            math.sin(0.5 * math.pi * (nu0 + 1.0))) * ww
        return nu0 + 1.0, c
    if kind == "wave_sin":
        if abs(cosfac) < 1e-12:
            return min(2.0 * nu0 + 2.0, 2.0 * nu1 + 1.0), 0.0j
        return 2.0 * nu0 + 1.0, complex(
            -core.gammafn(2.0 * nu0 + 1.0) * cosfac * ww, 0.0)
    if abs(cosfac) < 1e-12:
        return min(2.0 * nu0 + 3.0, 2.0 * nu1 + 2.0), 0.0j
    return 2.0 * nu0 + 2.0, complex(
        core.gammafn(2.0 * nu0 + 2.0) * cosfac * ww, 0.0)


def dyadic_times(t0, octaves):
    """t0, 2 t0, ..., over the given number of octaves (two points per
    octave to satisfy the 12-point fit floor over [t0, 64 t0])."""
    nsteps = 2 * octaves
    return [t0 * 2.0 ** (k / 2.0) for k in range(nsteps + 1)]
