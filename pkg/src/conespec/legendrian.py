"""Geodesic leaf parametrization of the propagating Legendrian on an exact
cone, with contact-form annihilation checks.

A leaf is generated by a unit-speed closed-form geodesic on the
cross-section (a great circle of S^{n-1}, or the circle itself): at
parameters (s, s') in (0, pi)^2 it carries

    y = y(s), y' = y(s'), mu = eta(s) sin s, mu' = -eta(s') sin s',
    nu = -cos s, nu' = cos s', sigma = sin s'/sin s,

and the contact form  mu.dy - dnu + sigma (mu'.dy' - dnu')  vanishes on it.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from conespec.errors import ConfigError, DomainError


@dataclass(frozen=True)
class GreatCircle:
    """Unit-speed geodesic  y(s) = y0 cos s + u0 sin s  on S^{n-1}."""

    y0: np.ndarray
    u0: np.ndarray

    def __post_init__(self):
        y0 = np.asarray(self.y0, dtype=float)
        u0 = np.asarray(self.u0, dtype=float)
        if y0.shape != u0.shape or y0.ndim != 1 or y0.size < 2:
            raise ConfigError("need two same-length vectors in R^m, m >= 2")
        ny, nu = np.linalg.norm(y0), np.linalg.norm(u0)
        if ny < 1e-12 or nu < 1e-12:
            raise ConfigError("basis vectors must be nonzero")
        y0 = y0 / ny
        u0 = u0 - (u0 @ y0) * y0
        nu = np.linalg.norm(u0)
        if nu < 1e-12:
            raise ConfigError("direction vector parallel to base point")
        object.__setattr__(self, "y0", y0)
        object.__setattr__(self, "u0", u0 / nu)

    def point(self, s):
        return self.y0 * math.cos(s) + self.u0 * math.sin(s)

    def tangent(self, s):
        return -self.y0 * math.sin(s) + self.u0 * math.cos(s)


def random_great_circle(dim, rng):
    """Random great circle on S^{dim-1} embedded in R^dim."""
    y0 = rng.normal(size=dim)
    u0 = rng.normal(size=dim)
    return GreatCircle(y0, u0)


@dataclass(frozen=True)
class LeafPoint:
    s: float
    s_prime: float
    y: np.ndarray
    y_prime: np.ndarray
    mu: np.ndarray
    mu_prime: np.ndarray
    nu: float
    nu_prime: float
    sigma: float


def leaf_sample(geodesic, s, s_prime):
    """Leaf point at interior parameters (s, s') in (0, pi)^2."""
    if not (0.0 < s < math.pi) or not (0.0 < s_prime < math.pi):
        raise DomainError("leaf parameters must be interior to (0, pi)")
    return LeafPoint(
        s=s, s_prime=s_prime,
        y=geodesic.point(s),
        y_prime=geodesic.point(s_prime),
        mu=geodesic.tangent(s) * math.sin(s),
        mu_prime=-geodesic.tangent(s_prime) * math.sin(s_prime),
        nu=-math.cos(s),
        nu_prime=math.cos(s_prime),
        sigma=math.sin(s_prime) / math.sin(s),
    )


def contact_check(geodesic, s, s_prime, step=1e-4):
    """Max residual of the contact form pulled back along the two
    coordinate directions, by central differences; O(step^2) for a leaf."""
    base = leaf_sample(geodesic, s, s_prime)

    def along_s(h):
        return leaf_sample(geodesic, s + h, s_prime)

    def along_sp(h):
        return leaf_sample(geodesic, s, s_prime + h)

    res_s = _pullback(base, along_s(step), along_s(-step), step)
    res_sp = _pullback(base, along_sp(step), along_sp(-step), step)
    return max(abs(res_s), abs(res_sp))


def _pullback(base, plus, minus, step):
    dy = (plus.y - minus.y) / (2.0 * step)
    dnu = (plus.nu - minus.nu) / (2.0 * step)
    dyp = (plus.y_prime - minus.y_prime) / (2.0 * step)
    dnup = (plus.nu_prime - minus.nu_prime) / (2.0 * step)
    return (base.mu @ dy - dnu
            + base.sigma * (base.mu_prime @ dyp - dnup))


def tangent_residuals(geodesic, s, s_prime, step=1e-4):
    """Residuals against the leaf tangents V_l = sin s d/ds and
    V_r = sin s' d/ds' (same finite-difference orders)."""
    base = leaf_sample(geodesic, s, s_prime)
    plus_s = leaf_sample(geodesic, s + step, s_prime)
    minus_s = leaf_sample(geodesic, s - step, s_prime)
    plus_p = leaf_sample(geodesic, s, s_prime + step)
    minus_p = leaf_sample(geodesic, s, s_prime - step)
    rl = math.sin(s) * _pullback(base, plus_s, minus_s, step)
    rr = math.sin(s_prime) * _pullback(base, plus_p, minus_p, step)
    return abs(rl), abs(rr)


def cone_geodesic_closed_form(r0, s):
    """(r, arclength) of the conic geodesic with closest approach r0 at
    s = pi/2:  r = r0 csc s, arclength = -r0 cot s."""
    if not (0.0 < s < math.pi) or r0 <= 0.0:
        raise DomainError("need r0 > 0 and s in (0, pi)")
    return r0 / math.sin(s), -r0 / math.tan(s)


def leaf_grid_residuals(geodesic, grid=20, step=1e-4):
    """Contact residuals on an interior (s, s') grid; rows for the CSV."""
    svals = np.linspace(0.0, math.pi, grid + 2)[1:-1]
    rows = []
    for s in svals:
        for sp in svals:
            rows.append((s, sp, contact_check(geodesic, s, sp, step)))
    return rows


def write_leaf_csv(path, geodesic, grid=20, step=1e-4):
    """CSV schema: s, s_prime, nu, nu_prime, sigma, residual."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "s_prime", "nu", "nu_prime", "sigma", "residual"])
        for s, sp, res in leaf_grid_residuals(geodesic, grid, step):
            pt = leaf_sample(geodesic, s, sp)
            w.writerow([repr(s), repr(sp), repr(pt.nu), repr(pt.nu_prime),
                        repr(pt.sigma), repr(res)])
