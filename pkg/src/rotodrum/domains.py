"""Drum geometry, hard-ball admissibility and the system-state container.

Four drum variants are supported:

* ``Disc2D(rho)`` -- the planar disc of radius rho,
* ``CylinderFinite(rho, half_len, dim)`` -- the product of the radius-rho
  disc in the rotation plane with the cube ``|z_k| <= half_len`` in the
  remaining coordinates,
* ``CylinderTorus(rho, dim)`` -- the same cylinder with every transverse
  coordinate identified modulo 2 (period 2, i.e. wrapped into [-1, 1)),
* ``StarShaped2D(...)`` -- a planar star-shaped domain whose boundary is a
  strictly positive trigonometric polynomial r(phi); the boundary co-rotates
  with the drum, so at time t the shape is evaluated at angle phi - omega t.

All geometry is expressed in the inertial frame.  The rotation-invariant
variants (disc, cylinder, torus) look static from the inertial frame, which
makes event prediction exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotOnBoundary, UnsupportedDomain

#: |distance to boundary| below which a point counts as a wall contact.
CONTACT_TOL = 1e-9


@dataclass(frozen=True)
class BallSpec:
    """Mass and radius of one hard ball; radius 0 means pointlike."""

    mass: float
    radius: float = 0.0

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError("mass must be > 0")
        if self.radius < 0:
            raise ValueError("radius must be >= 0")


@dataclass(frozen=True)
class Disc2D:
    rho: float

    def __post_init__(self):
        if self.rho <= 0:
            raise ValueError("rho must be > 0")

    @property
    def dim(self) -> int:
        return 2


@dataclass(frozen=True)
class CylinderFinite:
    rho: float
    half_len: float
    dim: int

    def __post_init__(self):
        if self.rho <= 0:
            raise ValueError("rho must be > 0")
        if self.half_len <= 0:
            raise ValueError("half_len must be > 0")
        if self.dim < 3:
            raise ValueError("finite cylinder needs dim >= 3")


@dataclass(frozen=True)
class CylinderTorus:
    rho: float
    dim: int

    def __post_init__(self):
        if self.rho <= 0:
            raise ValueError("rho must be > 0")
        if self.dim < 3:
            raise ValueError("torus drum needs dim >= 3")


@dataclass(frozen=True)
class StarShaped2D:
    """Star-shaped planar drum with radius function given by a Fourier series.

    r(phi) = cos_coeffs[0] + sum_k cos_coeffs[k] cos(k phi)
                           + sum_k sin_coeffs[k] sin(k phi)

    The series must stay strictly positive.  Supporting balls of positive
    radius against this boundary would require offset-curve geometry, so the
    dynamical operations accept pointlike particles only; ``contains`` works
    for any radius via a numeric distance bound.
    """

    cos_coeffs: tuple
    sin_coeffs: tuple = ()
    _extrema: tuple = field(init=False, default=None, repr=False, compare=False)

    def __post_init__(self):
        cos_c = tuple(float(c) for c in self.cos_coeffs)
        sin_c = tuple(float(c) for c in self.sin_coeffs)
        object.__setattr__(self, "cos_coeffs", cos_c)
        object.__setattr__(self, "sin_coeffs", sin_c)
        rmin, rmax = _polar_extrema(self)
        if rmin <= 0:
            raise ValueError("radius function must be strictly positive")
        object.__setattr__(self, "_extrema", (rmin, rmax))

    @property
    def dim(self) -> int:
        return 2

    def radius(self, phi):
        r = np.full_like(np.asarray(phi, dtype=float), self.cos_coeffs[0])
        for k, c in enumerate(self.cos_coeffs[1:], start=1):
            if c:
                r = r + c * np.cos(k * np.asarray(phi))
        for k, s in enumerate(self.sin_coeffs, start=1):
            if s:
                r = r + s * np.sin(k * np.asarray(phi))
        return r if np.ndim(phi) else float(r)

    def radius_deriv(self, phi):
        r = np.zeros_like(np.asarray(phi, dtype=float))
        for k, c in enumerate(self.cos_coeffs[1:], start=1):
            if c:
                r = r - k * c * np.sin(k * np.asarray(phi))
        for k, s in enumerate(self.sin_coeffs, start=1):
            if s:
                r = r + k * s * np.cos(k * np.asarray(phi))
        return r if np.ndim(phi) else float(r)

    def radius_deriv2(self, phi):
        r = np.zeros_like(np.asarray(phi, dtype=float))
        for k, c in enumerate(self.cos_coeffs[1:], start=1):
            if c:
                r = r - k * k * c * np.cos(k * np.asarray(phi))
        for k, s in enumerate(self.sin_coeffs, start=1):
            if s:
                r = r - k * k * s * np.sin(k * np.asarray(phi))
        return r if np.ndim(phi) else float(r)

    def min_radius(self) -> float:
        return self._extrema[0]

    def max_radius(self) -> float:
        return self._extrema[1]

    def min_osculating_radius(self, n_grid: int = 2048) -> float:
        """Smallest radius of curvature over convex parts of the boundary.

        Heuristic support for the ball-curvature requirement: a tangent
        interior ball of radius r_max can exist only where the boundary
        curves no tighter than r_max.  Exact global verification is a
        documented user responsibility.
        """
        phi = np.linspace(0.0, 2 * math.pi, n_grid, endpoint=False)
        r = self.radius(phi)
        r1 = self.radius_deriv(phi)
        r2 = self.radius_deriv2(phi)
        kappa = (r * r + 2 * r1 * r1 - r * r2) / np.power(r * r + r1 * r1, 1.5)
        convex = kappa > 0
        if not np.any(convex):
            return math.inf
        return float(np.min(1.0 / kappa[convex]))


Domain = Disc2D | CylinderFinite | CylinderTorus | StarShaped2D


def _polar_extrema(dom: StarShaped2D, n_grid: int = 4096):
    """Min and max of the radius function via dense grid plus local refinement."""
    phi = np.linspace(0.0, 2 * math.pi, n_grid, endpoint=False)
    r = dom.radius(phi)
    lo_i, hi_i = int(np.argmin(r)), int(np.argmax(r))
    h = 2 * math.pi / n_grid

    def refine(center, sign):
        a, b = center - h, center + h
        for _ in range(80):
            m1 = a + (b - a) / 3
            m2 = b - (b - a) / 3
            if sign * dom.radius(m1) < sign * dom.radius(m2):
                a = m1
            else:
                b = m2
        return dom.radius(0.5 * (a + b))

    return (
        min(float(np.min(r)), refine(phi[lo_i], -1.0)),
        max(float(np.max(r)), refine(phi[hi_i], 1.0)),
    )


def _wrap_torus(x: np.ndarray) -> np.ndarray:
    """Wrap transverse coordinates into [-1, 1) (period 2)."""
    out = np.array(x, dtype=float, copy=True)
    out[2:] = np.mod(out[2:] + 1.0, 2.0) - 1.0
    return out


def contains(dom: Domain, x: np.ndarray, ball_radius: float = 0.0) -> bool:
    """True iff the open ball of the given radius about ``x`` lies in the drum."""
    rH = math.hypot(x[0], x[1])
    if isinstance(dom, Disc2D):
        return rH <= dom.rho - ball_radius
    if isinstance(dom, CylinderFinite):
        if rH > dom.rho - ball_radius:
            return False
        return bool(np.all(np.abs(x[2:]) <= dom.half_len - ball_radius))
    if isinstance(dom, CylinderTorus):
        if ball_radius >= 1.0:
            return False  # ball would wrap onto itself
        return rH <= dom.rho - ball_radius
    if isinstance(dom, StarShaped2D):
        if ball_radius == 0.0:
            phi = math.atan2(x[1], x[0])
            return rH <= dom.radius(phi)
        return _star_boundary_distance(dom, x) >= ball_radius
    raise UnsupportedDomain(f"unknown domain {dom!r}")


def _star_boundary_distance(dom: StarShaped2D, x: np.ndarray, n_grid: int = 720) -> float:
    """Distance from an interior point to the star boundary (numeric)."""
    phi = np.linspace(0.0, 2 * math.pi, n_grid, endpoint=False)
    r = dom.radius(phi)
    bx = r * np.cos(phi) - x[0]
    by = r * np.sin(phi) - x[1]
    d2 = bx * bx + by * by
    i = int(np.argmin(d2))
    # ternary refinement around the closest boundary sample
    a = phi[i] - 2 * math.pi / n_grid
    b = phi[i] + 2 * math.pi / n_grid

    def dist(p):
        rp = dom.radius(p)
        return math.hypot(rp * math.cos(p) - x[0], rp * math.sin(p) - x[1])

    for _ in range(60):
        m1 = a + (b - a) / 3
        m2 = b - (b - a) / 3
        if dist(m1) > dist(m2):
            a = m1
        else:
            b = m2
    return dist(0.5 * (a + b))


def admissible(dom: Domain, balls) -> bool:
    """True iff every ball is contained and no two ball interiors overlap.

    ``balls`` is a sequence of ``(BallSpec, position)`` pairs.
    """
    specs = [b[0] for b in balls]
    xs = [np.asarray(b[1], dtype=float) for b in balls]
    for spec, x in zip(specs, xs):
        if not contains(dom, x, spec.radius):
            return False
    torus = isinstance(dom, CylinderTorus)
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            dx = xs[i] - xs[j]
            if torus:
                dx[2:] = np.mod(dx[2:] + 1.0, 2.0) - 1.0
            if float(np.sqrt(dx @ dx)) < specs[i].radius + specs[j].radius:
                return False
    return True


def sup_H_radius(dom: Domain) -> float:
    """Largest horizontal distance from the rotation axis over the drum."""
    if isinstance(dom, (Disc2D, CylinderFinite, CylinderTorus)):
        return dom.rho
    if isinstance(dom, StarShaped2D):
        return dom.max_radius()
    raise UnsupportedDomain(f"unknown domain {dom!r}")


def wall_point_and_normal(
    dom: Domain, x: np.ndarray, t: float, omega: float, ball_radius: float = 0.0
):
    """Contact point on the wall and unit inward normal, in the inertial frame.

    ``x`` is the ball center (particle position for radius 0); it must lie
    within ``CONTACT_TOL`` of the contact surface.  For the star-shaped drum
    the boundary rotates, so the shape is evaluated at angle phi - omega t.
    """
    d = len(x)
    rH = math.hypot(x[0], x[1])
    if isinstance(dom, (Disc2D, CylinderFinite, CylinderTorus)):
        lateral_gap = abs(rH - (dom.rho - ball_radius))
        cap_gap = math.inf
        cap_axis = -1
        if isinstance(dom, CylinderFinite):
            wall = dom.half_len - ball_radius
            for k in range(2, d):
                gap = abs(abs(x[k]) - wall)
                if gap < cap_gap:
                    cap_gap = gap
                    cap_axis = k
        if lateral_gap <= min(cap_gap, CONTACT_TOL):
            if rH == 0.0:
                raise NotOnBoundary("center on the rotation axis")
            normal = np.zeros(d)
            normal[0] = -x[0] / rH
            normal[1] = -x[1] / rH
            contact = np.array(x, dtype=float, copy=True)
            scale = dom.rho / rH
            contact[0] *= scale
            contact[1] *= scale
            return contact, normal
        if cap_gap <= CONTACT_TOL:
            normal = np.zeros(d)
            normal[cap_axis] = -math.copysign(1.0, x[cap_axis])
            contact = np.array(x, dtype=float, copy=True)
            contact[cap_axis] = math.copysign(dom.half_len, x[cap_axis])
            return contact, normal
        raise NotOnBoundary(
            f"distance to boundary exceeds tolerance (lateral gap {lateral_gap:.3e})"
        )
    if isinstance(dom, StarShaped2D):
        if ball_radius != 0.0:
            raise UnsupportedDomain("star-shaped walls support pointlike particles only")
        phi = math.atan2(x[1], x[0])
        psi = phi - omega * t
        r = dom.radius(psi)
        if abs(rH - r) > CONTACT_TOL * max(1.0, r):
            raise NotOnBoundary(f"gap {abs(rH - r):.3e} at phi={phi:.6f}")
        r1 = dom.radius_deriv(psi)
        c, s = math.cos(phi), math.sin(phi)
        # outward normal of the polar curve, rotated to the current phi
        nx = r1 * s + r * c
        ny = r * s - r1 * c
        norm = math.hypot(nx, ny)
        normal = np.array([-nx / norm, -ny / norm])
        contact = np.array([r * c, r * s])
        return contact, normal
    raise UnsupportedDomain(f"unknown domain {dom!r}")


@dataclass
class Ball:
    """One ball of the system: spec plus inertial-frame center and velocity."""

    spec: BallSpec
    x: np.ndarray
    v: np.ndarray


@dataclass
class SystemState:
    """Simulation time plus all balls, in the inertial frame."""

    time: float
    balls: list

    def copy(self) -> "SystemState":
        return SystemState(
            self.time,
            [Ball(b.spec, b.x.copy(), b.v.copy()) for b in self.balls],
        )

    def total_mass(self) -> float:
        return sum(b.spec.mass for b in self.balls)
