"""Cross-section eigendata.

Produces the mode data (nu_j^2, multiplicities, angular projectors) of the
operator  Delta_Y + (n-2)^2/4 + V0  on the cross-section Y and enforces the
positivity hypothesis nu_0^2 > 0.

Conventions: projectors are functions of the angular separation theta
(geodesic distance on Y), normalized so the diagonal value is
multiplicity / vol(Y). For a nonconstant potential on the circle the
projector is translation-averaged, which preserves that normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from conespec._backend import core
from conespec.errors import ConfigError, HypothesisError

MERGE_TOL = 1e-10


@dataclass(frozen=True)
class CrossSectionSpec:
    """Declarative cross-section description (also the config-file schema).

    kind: 'sphere' | 'circle' | 'custom' | 'discretized_circle'
    n: ambient dimension (the cone has dimension n, Y has dimension n-1)
    v0: constant potential on Y ('sphere', 'circle') -- for
        'discretized_circle' use v0_samples
    l_max: number of angular levels to generate
    length: circumference for 'circle'
    modes: [(nu, multiplicity), ...] for 'custom'
    v0_samples: periodic samples of V0 for 'discretized_circle'
    grid: grid size for 'discretized_circle'
    """

    kind: str
    n: int = 3
    v0: float = 0.0
    l_max: int = 40
    length: float = 2.0 * math.pi
    modes: tuple = ()
    v0_samples: tuple = ()
    grid: int = 128
    vol: float = 1.0  # abstract volume for 'custom'


@dataclass
class Mode:
    nu: float
    multiplicity: int
    projector: Callable[[float], float]


@dataclass
class ModeSpectrum:
    """Ordered eigendata of the cross-section operator."""

    modes: list
    n: int
    vol: float
    kind: str = "custom"

    def __post_init__(self):
        if not self.modes:
            raise ConfigError("empty mode list")
        nu0 = self.modes[0].nu
        if not nu0 > 0.0:
            raise HypothesisError(
                f"lowest cross-section eigenvalue nu_0^2 = {nu0 * abs(nu0):.6g} "
                "is not strictly positive", nu0_sq=nu0 * abs(nu0))
        for a, b in zip(self.modes, self.modes[1:]):
            if b.nu < a.nu - MERGE_TOL:
                raise ConfigError("modes must be sorted by nu")

    @property
    def nu0(self):
        return self.modes[0].nu

    @property
    def nu1(self):
        return self.modes[1].nu if len(self.modes) > 1 else math.inf

    def nus(self):
        if self._nus_cache is None:
            self._nus_cache = np.array([m.nu for m in self.modes])
        return self._nus_cache

    def projector_diagonal(self, j):
        return self.diagonals()[j]

    def diagonals(self):
        """Pi_j(0) = multiplicity/vol for every mode (cached array)."""
        if self._diag_cache is None:
            self._diag_cache = np.array(
                [m.multiplicity / self.vol for m in self.modes])
        return self._diag_cache

    def lgammas(self):
        """log Gamma(nu_j + 1) per mode (cached array)."""
        if self._lgam_cache is None:
            self._lgam_cache = np.array(
                [core.lgammafn(m.nu + 1.0) for m in self.modes])
        return self._lgam_cache

    def projector_values(self, theta, count):
        """[Pi_j(theta) for j < count]; fast path for spheres."""
        count = min(count, len(self.modes))
        if self.kind == "sphere" and self._geg_alpha > 0.0:
            return _gegenbauer_projectors(theta, count, self.n, self.vol,
                                          self._geg_alpha)
        return np.array([self.modes[j].projector(theta) for j in range(count)])

    def w_angular(self):
        """sqrt of the nu_0 projector diagonal per eigenvector: the angular
        factor of the zero mode (constant-eigenfunction cross-sections)."""
        m0 = self.modes[0]
        return math.sqrt(m0.projector(0.0) / m0.multiplicity)

    _geg_alpha: float = field(default=0.0, repr=False)
    _nus_cache: object = field(default=None, repr=False, compare=False)
    _diag_cache: object = field(default=None, repr=False, compare=False)
    _lgam_cache: object = field(default=None, repr=False, compare=False)


def sphere_volume(n):
    """vol(S^{n-1})."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def _sphere_multiplicity(n, l):
    if l == 0:
        return 1
    if n == 2:
        return 2
    num = (2 * l + n - 2) * math.factorial(l + n - 3)
    return num // (math.factorial(l) * math.factorial(n - 2))


def _gegenbauer_projectors(theta, count, n, vol, alpha):
    """Pi_l(theta) for l < count on S^{n-1} via the addition theorem,
    C^alpha_l three-term recurrence in cos(theta)."""
    t = math.cos(theta)
    out = np.empty(count)
    c_prev = 1.0  # C_0
    c_curr = 2.0 * alpha * t  # C_1
    for l in range(count):
        if l == 0:
            c = c_prev
        elif l == 1:
            c = c_curr
        else:
            c_next = (2.0 * t * (l - 1 + alpha) * c_curr
                      - (l + 2.0 * alpha - 2.0) * c_prev) / l
            c_prev, c_curr = c_curr, c_next
            c = c_next
        out[l] = (2.0 * l + n - 2.0) / ((n - 2.0) * vol) * c
    return out


def sphere_spectrum(n, v0, l_max):
    """Spectrum for Y = S^{n-1} with constant potential v0.

    nu_l = sqrt(l(l+n-2) + (n-2)^2/4 + v0); projectors by the Gegenbauer
    addition theorem (cosine series for n = 2).
    """
    if n < 2:
        raise ConfigError("dimension must be >= 2")
    if n == 2 and v0 <= 0.0:
        raise HypothesisError(
            "a vanishing potential is not allowed on the 2-d cone "
            f"(nu_0^2 = {v0:.6g} <= 0)", nu0_sq=float(v0))
    if l_max < 0:
        raise ConfigError("l_max must be >= 0")
    vol = sphere_volume(n)
    quarter = (n - 2.0) ** 2 / 4.0
    modes = []
    for l in range(l_max + 1):
        nu_sq = l * (l + n - 2.0) + quarter + v0
        if nu_sq <= 0.0:
            raise HypothesisError(
                f"cross-section eigenvalue nu_{l}^2 = {nu_sq:.6g} <= 0 "
                "(positivity hypothesis fails)", nu0_sq=nu_sq)
        mult = _sphere_multiplicity(n, l)
        if n == 2:
            proj = _circle_projector(l, 2.0 * math.pi)
        else:
            proj = _sphere_projector(n, vol, l)
        modes.append(Mode(math.sqrt(nu_sq), mult, proj))
    spec = ModeSpectrum(modes, n, vol, kind="sphere" if n >= 3 else "circle")
    if n >= 3:
        spec._geg_alpha = (n - 2.0) / 2.0
    return spec


def _sphere_projector(n, vol, l):
    alpha = (n - 2.0) / 2.0

    def proj(theta):
        return float(_gegenbauer_projectors(theta, l + 1, n, vol, alpha)[l])

    return proj


def _circle_projector(j, length):
    k = 2.0 * math.pi * j / length

    def proj(theta):
        if j == 0:
            return 1.0 / length
        return 2.0 * math.cos(k * theta) / length

    return proj


def circle_spectrum(length, v0, l_max, n=2):
    """Spectrum for Y a circle of the given circumference, constant v0."""
    if length <= 0.0:
        raise ConfigError("circle length must be positive")
    quarter = (n - 2.0) ** 2 / 4.0
    modes = []
    for j in range(l_max + 1):
        k = 2.0 * math.pi * j / length
        nu_sq = k * k + quarter + v0
        if nu_sq <= 0.0:
            raise HypothesisError(
                f"cross-section eigenvalue nu_{j}^2 = {nu_sq:.6g} <= 0",
                nu0_sq=nu_sq)
        modes.append(Mode(math.sqrt(nu_sq), 1 if j == 0 else 2,
                          _circle_projector(j, length)))
    return ModeSpectrum(modes, n, length, kind="circle")


def custom_spectrum(pairs, n, vol=1.0):
    """Spectrum from explicit (nu, multiplicity) pairs; projectors are the
    constant mult/vol (abstract cross-section, no angular structure)."""
    pairs = sorted((float(nu), int(m)) for nu, m in pairs)
    modes = []
    for nu, mult in pairs:
        if mult < 1:
            raise ConfigError("multiplicities must be >= 1")
        if nu <= 0.0:
            raise HypothesisError(
                f"custom eigenvalue nu^2 = {nu * abs(nu):.6g} <= 0",
                nu0_sq=nu * abs(nu))
        modes.append(Mode(nu, mult, (lambda m=mult, v=vol: (lambda theta: m / v))()))
    return merge_degenerate(ModeSpectrum(modes, n, vol, kind="custom"))


def discretized_circle_spectrum(v0_samples, grid, n=2, length=2.0 * math.pi):
    """Spectrum of the periodic second-difference operator plus
    (n-2)^2/4 + V0 on a circle, with eigenvector-based projectors.

    Second-order accurate in the grid spacing. V0 samples are resampled to
    the requested grid by trigonometric-free linear interpolation.
    """
    if grid < 8:
        raise ConfigError("grid must be >= 8")
    samples = np.asarray(v0_samples, dtype=float)
    if samples.ndim != 1 or samples.size < 1:
        raise ConfigError("v0_samples must be a nonempty 1-d sequence")
    h = length / grid
    theta = np.arange(grid) * h
    src = np.arange(samples.size) * (length / samples.size)
    v0 = np.interp(theta, np.concatenate([src, [length]]),
                   np.concatenate([samples, [samples[0]]]))
    quarter = (n - 2.0) ** 2 / 4.0

    # periodic tridiagonal-plus-corner operator: reduce to tridiagonal by
    # Householder, then QL
    a = np.zeros((grid, grid))
    idx = np.arange(grid)
    a[idx, idx] = 2.0 / h ** 2 + quarter + v0
    a[idx, (idx + 1) % grid] += -1.0 / h ** 2
    a[idx, (idx - 1) % grid] += -1.0 / h ** 2
    d, e, q = _householder_tridiag(a)
    w, vt = core.ql_eigen(d, e)
    vecs = vt @ q.T  # eigenvectors of the original operator, as rows

    lowest = w[0]
    # strict positivity, with a numerical floor against a zero eigenvalue
    # rounding to +eps
    if lowest <= 1e-9 * max(1.0, abs(w[-1])):
        raise HypothesisError(
            f"lowest circle eigenvalue nu_0^2 = {lowest:.6g} is not "
            "strictly positive", nu0_sq=float(lowest))
    # discrete L2 normalization: sum phi^2 h = 1
    vecs = vecs / math.sqrt(h)
    modes = []
    for k in range(grid):
        modes.append(Mode(math.sqrt(w[k]), 1,
                          _averaged_projector(vecs[k], length)))
    return merge_degenerate(ModeSpectrum(modes, n, length, kind="circle"))


def _averaged_projector(phi, length):
    """Translation-averaged projector (1/L) int phi(y) phi(y+theta) dy.

    Collapses to the exact cos(k theta)-projector in the constant-potential
    case and keeps the diagonal normalization Pi(0) = 1/L in general.
    """
    grid = phi.size
    h = length / grid
    # circular autocorrelation via FFT
    f = np.fft.rfft(phi)
    auto = np.fft.irfft(np.abs(f) ** 2, n=grid) * h / length

    def proj(theta):
        pos = (theta % length) / h
        i = int(math.floor(pos)) % grid
        frac = pos - math.floor(pos)
        return float((1.0 - frac) * auto[i] + frac * auto[(i + 1) % grid])

    return proj


def _householder_tridiag(a):
    """Reduce a symmetric matrix to tridiagonal form: returns (d, e, q)
    with q^T a q tridiagonal(d, e); vectorized over numpy rows."""
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    q = np.eye(n)
    for k in range(n - 2):
        x = a[k + 1:, k].copy()
        alpha = -math.copysign(np.linalg.norm(x), x[0] if x[0] != 0.0 else 1.0)
        if abs(alpha) < 1e-300:
            continue
        v = x.copy()
        v[0] -= alpha
        vnorm = np.linalg.norm(v)
        if vnorm < 1e-300:
            continue
        v /= vnorm
        # apply P = I - 2 v v^T on the trailing block, both sides
        sub = a[k + 1:, k + 1:]
        w = sub @ v
        w -= v * (v @ w)
        sub -= 2.0 * np.outer(v, w) + 2.0 * np.outer(w, v)
        a[k + 1:, k] = 0.0
        a[k, k + 1:] = 0.0
        a[k + 1, k] = alpha
        a[k, k + 1] = alpha
        q[:, k + 1:] -= 2.0 * np.outer(q[:, k + 1:] @ v, v)
    d = np.diag(a).copy()
    e = np.diag(a, 1).copy()
    return d, e, q


def merge_degenerate(spectrum, tol=MERGE_TOL):
    """Merge modes with equal nu within tol: multiplicities add and the
    projector is the sum (degenerate-level projector)."""
    merged = []
    for mode in spectrum.modes:
        if merged and abs(mode.nu - merged[-1].nu) <= tol:
            prev = merged[-1]
            p1, p2 = prev.projector, mode.projector
            merged[-1] = Mode(prev.nu, prev.multiplicity + mode.multiplicity,
                              (lambda a=p1, b=p2: (lambda th: a(th) + b(th)))())
        else:
            merged.append(mode)
    out = ModeSpectrum(merged, spectrum.n, spectrum.vol, kind=spectrum.kind)
    out._geg_alpha = spectrum._geg_alpha
    return out


def build_spectrum(spec: CrossSectionSpec):
    """Spectrum from a declarative CrossSectionSpec."""
    if spec.kind == "sphere":
        return sphere_spectrum(spec.n, spec.v0, spec.l_max)
    if spec.kind == "circle":
        return circle_spectrum(spec.length, spec.v0, spec.l_max, n=spec.n)
    if spec.kind == "custom":
        return custom_spectrum(spec.modes, spec.n, spec.vol)
    if spec.kind == "discretized_circle":
        return discretized_circle_spectrum(spec.v0_samples, spec.grid,
                                           n=spec.n, length=spec.length)
    raise ConfigError(f"unknown cross-section kind {spec.kind!r}")


def check_hyp2(spec: CrossSectionSpec):
    """Build the spectrum, raising HypothesisError unless nu_0^2 > 0."""
    return build_spectrum(spec)
