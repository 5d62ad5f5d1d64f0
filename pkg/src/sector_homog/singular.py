"""Harmonic sector modes and the radial cutoff bump.

The sector of opening ``omega`` carries a family of harmonic functions that
vanish on both edges,

    t_n(r, theta) = r**rho_n * sin(rho_n * theta),   rho_n = n*pi/omega,

together with dual modes carrying the negative exponent,

    t*_n(r, theta) = -r**(-rho_n) * sin(rho_n * theta),

which are harmonic away from the tip.  Mode coefficients of a field are
extracted by pairing it against the dual mode through a radial cutoff; the
cutoff here is a C^2 quintic profile so that its Laplacian is available
pointwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularityError

TWO_PI = 2.0 * np.pi


def polar_angle(x, y):
    """Angle in [0, 2*pi) measured from the positive x-axis.

    Points exactly on the positive x-axis (y == +0.0) report angle 0; points
    infinitesimally below it report close to 2*pi, which is what slit-domain
    evaluations need.
    """
    th = np.arctan2(y, x)
    return np.where(th < 0.0, th + TWO_PI, th)


@dataclass(frozen=True)
class SingularFunction:
    """One sector mode: primal (growing) or dual (decaying)."""

    n: int
    omega: float
    dual: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("mode index must be >= 1")
        if not 0.0 < self.omega <= TWO_PI:
            raise ValueError("omega must lie in (0, 2*pi]")

    @property
    def rho(self) -> float:
        return self.n * np.pi / self.omega

    def value(self, points):
        points = np.asarray(points, dtype=float)
        x, y = points[..., 0], points[..., 1]
        r = np.hypot(x, y)
        th = polar_angle(x, y)
        rho = self.rho
        if self.dual:
            if np.any(r == 0.0):
                raise SingularityError("dual mode undefined at the tip")
            return -(r ** (-rho)) * np.sin(rho * th)
        return r ** rho * np.sin(rho * th)

    def gradient(self, points):
        """Cartesian gradient, shape (..., 2). Undefined at the tip."""
        points = np.asarray(points, dtype=float)
        x, y = points[..., 0], points[..., 1]
        r = np.hypot(x, y)
        if np.any(r == 0.0):
            raise SingularityError("gradient undefined at the tip")
        th = polar_angle(x, y)
        rho = self.rho
        s, c = np.sin(rho * th), np.cos(rho * th)
        if self.dual:
            dr = rho * r ** (-rho - 1.0) * s
            dth_over_r = -rho * r ** (-rho - 1.0) * c
        else:
            dr = rho * r ** (rho - 1.0) * s
            dth_over_r = rho * r ** (rho - 1.0) * c
        er = np.stack([x / r, y / r], axis=-1)
        et = np.stack([-y / r, x / r], axis=-1)
        return dr[..., None] * er + dth_over_r[..., None] * et

    def hessian(self, points):
        """Cartesian Hessian, shape (..., 2, 2). Used by residual checks."""
        points = np.asarray(points, dtype=float)
        x, y = points[..., 0], points[..., 1]
        r = np.hypot(x, y)
        if np.any(r == 0.0):
            raise SingularityError("hessian undefined at the tip")
        th = polar_angle(x, y)
        # v = A * r^p * sin(q*theta); primal has (A,p,q) = (1,rho,rho), dual
        # (-1,-rho,rho).  Polar derivatives, then the polar-to-cartesian
        # Hessian with cross term v_rt/r - v_t/r^2.
        q = self.rho
        p = -q if self.dual else q
        amp = -1.0 if self.dual else 1.0
        s, c = np.sin(q * th), np.cos(q * th)
        vr = amp * p * r ** (p - 1.0) * s
        vrr = amp * p * (p - 1.0) * r ** (p - 2.0) * s
        vt = amp * q * r ** p * c
        vtt = -amp * q * q * r ** p * s
        vrt = amp * p * q * r ** (p - 1.0) * c
        cth, sth = np.cos(th), np.sin(th)
        cross = vrt / r - vt / r ** 2
        radial = vr / r + vtt / r ** 2
        vxx = cth ** 2 * vrr - 2.0 * sth * cth * cross + sth ** 2 * radial
        vyy = sth ** 2 * vrr + 2.0 * sth * cth * cross + cth ** 2 * radial
        vxy = sth * cth * (vrr - radial) + (cth ** 2 - sth ** 2) * cross
        hess = np.empty(points.shape[:-1] + (2, 2))
        hess[..., 0, 0] = vxx
        hess[..., 0, 1] = vxy
        hess[..., 1, 0] = vxy
        hess[..., 1, 1] = vyy
        return hess


def eval_tau(sf: SingularFunction, x):
    """Value and gradient of a sector mode at one point or a batch."""
    return sf.value(x), sf.gradient(x)


def smoothstep(t):
    """Quintic smoothstep clamped to [0, 1]: C^2, flat at both ends."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


def smoothstep_d1(t):
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < 1.0)
    tc = np.clip(t, 0.0, 1.0)
    d = 30.0 * tc * tc * (1.0 - tc) ** 2
    return np.where(inside, d, 0.0)


def smoothstep_d2(t):
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < 1.0)
    tc = np.clip(t, 0.0, 1.0)
    d = 60.0 * tc * (1.0 - tc) * (1.0 - 2.0 * tc)
    return np.where(inside, d, 0.0)


@dataclass(frozen=True)
class CutoffBump:
    """Radial C^2 cutoff: 1 on r <= R/2, 0 on r >= R, quintic in between."""

    R: float

    def __post_init__(self):
        if self.R <= 0.0:
            raise ValueError("cutoff radius must be positive")

    def _t(self, r):
        # transition parameter in [0,1] across [R/2, R]
        return (np.asarray(r, dtype=float) - 0.5 * self.R) / (0.5 * self.R)

    def profile(self, r):
        return 1.0 - smoothstep(self._t(r))

    def profile_d1(self, r):
        return -smoothstep_d1(self._t(r)) * (2.0 / self.R)

    def profile_d2(self, r):
        return -smoothstep_d2(self._t(r)) * (2.0 / self.R) ** 2

    def value(self, points):
        points = np.asarray(points, dtype=float)
        r = np.hypot(points[..., 0], points[..., 1])
        return self.profile(r)

    def gradient(self, points):
        points = np.asarray(points, dtype=float)
        r = np.hypot(points[..., 0], points[..., 1])
        d1 = self.profile_d1(r)
        with np.errstate(invalid="ignore", divide="ignore"):
            scale = np.where(r > 0.0, d1 / np.where(r > 0.0, r, 1.0), 0.0)
        return scale[..., None] * points

    def laplacian(self, points):
        # radial Laplacian eta'' + eta'/r; eta' vanishes near 0 so finite.
        points = np.asarray(points, dtype=float)
        r = np.hypot(points[..., 0], points[..., 1])
        d1 = self.profile_d1(r)
        d2 = self.profile_d2(r)
        out = np.where(r > 0.0, d2 + d1 / np.where(r > 0.0, r, 1.0), 0.0)
        return out


def eval_cutoff(bump: CutoffBump, x):
    """(value, gradient, laplacian) of the bump at one point or a batch."""
    return bump.value(x), bump.gradient(x), bump.laplacian(x)
