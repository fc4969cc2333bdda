"""Closed-form stationary quantities for a single pointlike particle.

For a pointlike particle with cosine-law reflections in a rotating
cylindrical drum the stationary position density and the expected free
flight time between lateral-wall reflections have closed forms indexed
by the conserved rotating-frame energy E_F:

* the position density is proportional to
  ``(E_F + m omega^2 |z_H|^2 / 2)^(d/2 - 1)`` on the drum, restricted to
  the annulus |z_H| > rho0 when E_F < 0, where ``rho0`` is the inner
  radius at which the co-rotating speed would vanish;
* the mean flight carries the ratio of unit-ball volumes B(d)/B(d-1)
  and reduces to  pi rho / (2 v*)  in the planar disc for E_F >= 0 and to
  pi v* / (2 omega^2 rho)  for E_F < 0, with ``v*`` the maximum speed in
  the co-rotating frame (attained at the wall).

For large d the mean flight behaves like sqrt(2 pi / d) * v* / (omega^2 rho).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .domains import CylinderFinite, CylinderTorus, Disc2D
from .errors import UnsupportedDomain


def unit_ball_volume(d: int) -> float:
    """Lebesgue volume of the unit ball in R^d."""
    return math.exp(0.5 * d * math.log(math.pi) - gammaln(0.5 * d + 1.0))


def ball_volume_ratio(d: int) -> float:
    """B(d)/B(d-1), the ratio of consecutive unit-ball volumes."""
    return math.sqrt(math.pi) * math.exp(gammaln(0.5 * (d + 1)) - gammaln(0.5 * d + 1.0))


def v_star(ef: float, mass: float, omega: float, rho: float) -> float:
    """Maximum co-rotating speed, attained at the lateral wall."""
    val = 2.0 * ef / mass + omega * omega * rho * rho
    if val <= 0.0:
        raise ValueError("empty state space: E_F too negative for this drum")
    return math.sqrt(val)


def rho0(ef: float, mass: float, omega: float) -> float:
    """Inner forbidden radius; zero when E_F >= 0."""
    if ef >= 0.0:
        return 0.0
    return math.sqrt(-2.0 * ef / (mass * omega * omega))


def _cylinder_geometry(dom):
    """(d, rho, half_len) of a drum usable for the closed forms.

    The planar disc is the d=2 cylinder (no transverse coordinates); the
    torus variant has unit transverse half-period.
    """
    if isinstance(dom, Disc2D):
        return 2, dom.rho, 1.0
    if isinstance(dom, CylinderTorus):
        return dom.dim, dom.rho, 1.0
    if isinstance(dom, CylinderFinite):
        return dom.dim, dom.rho, dom.half_len
    raise UnsupportedDomain(f"closed forms need a disc/cylinder/torus drum, got {dom!r}")


def stationary_density(
    r_H, d: int, ef: float, mass: float, omega: float, rho: float, half_len: float = 1.0
):
    """Stationary position density at horizontal radius ``r_H``.

    Density with respect to Lebesgue measure on the drum times normalized
    direction measure; it does not depend on the direction argument.
    Vanishes on |z_H| <= rho0 when E_F < 0.
    """
    r = np.asarray(r_H, dtype=float)
    base = ef + 0.5 * mass * omega * omega * r * r
    top = ef + 0.5 * mass * omega * omega * rho * rho
    pref = d * mass * omega * omega / (4.0 * (2.0 * half_len) ** (d - 2) * math.pi)
    if ef >= 0.0:
        denom = top ** (d / 2.0) - ef ** (d / 2.0)
        out = pref * base ** (d / 2.0 - 1.0) / denom
    else:
        denom = top ** (d / 2.0)
        inner = rho0(ef, mass, omega)
        with np.errstate(invalid="ignore"):
            out = np.where(
                r > inner,
                pref * np.maximum(base, 0.0) ** (d / 2.0 - 1.0) / denom,
                0.0,
            )
    return out if np.ndim(r_H) else float(out)


def theoretical_density(z, p) -> float:
    """Stationary density at position ``z`` for EnsembleParams ``p``.

    Defined for a single pointlike particle in a disc/cylinder/torus drum.
    """
    _require_single_pointlike(p)
    d, rho_, half_len = _cylinder_geometry(p.dom)
    rH = math.hypot(z[0], z[1])
    return stationary_density(rH, d, p.ef, p.balls[0].mass, p.fp.omega, rho_, half_len)


def radial_density(r_H, d, ef, mass, omega, rho, half_len: float = 1.0):
    """Marginal density of |z_H|: the transverse cube and the angle integrated out."""
    r = np.asarray(r_H, dtype=float)
    h = stationary_density(r_H, d, ef, mass, omega, rho, half_len)
    out = np.asarray(h) * (2.0 * half_len) ** (d - 2) * 2.0 * math.pi * r
    return out if np.ndim(r_H) else float(out)


def radial_bin_masses(edges, d, ef, mass, omega, rho):
    """Exact stationary probability of each radial bin [edges[i], edges[i+1]].

    The radial antiderivative is closed-form:
    integral of 2 pi r (E_F + m w^2 r^2/2)^(d/2-1) dr
    = (4 pi / (d m w^2)) (E_F + m w^2 r^2/2)^(d/2).
    """
    e = np.asarray(edges, dtype=float)
    inner = rho0(ef, mass, omega)
    e = np.clip(e, inner, rho)
    prim = (ef + 0.5 * mass * omega * omega * e * e) ** (d / 2.0)
    top = (ef + 0.5 * mass * omega * omega * rho * rho) ** (d / 2.0)
    bottom = (ef + 0.5 * mass * omega * omega * inner * inner) ** (d / 2.0)
    return np.diff(prim) / (top - bottom)


def mean_flight_time(d: int, ef: float, mass: float, omega: float, rho: float) -> float:
    """Expected flight time between lateral-wall reflections.

    Evaluated in the overflow-safe form
    sqrt(2/m) * B(d)/B(d-1) / (omega^2 rho) * sqrt(A) * (1 - (E_F/A)^(d/2)),
    A = E_F + m omega^2 rho^2 / 2; the last factor is 1 when E_F < 0.
    """
    if omega <= 0.0:
        raise ValueError("mean flight time needs omega > 0; see the cosine-billiard chord limit")
    top = ef + 0.5 * mass * omega * omega * rho * rho
    if top <= 0.0:
        raise ValueError("empty state space: E_F too negative for this drum")
    ratio = ball_volume_ratio(d)
    scale = math.sqrt(2.0 / mass) * ratio / (omega * omega * rho) * math.sqrt(top)
    if ef <= 0.0:
        return scale
    return scale * (1.0 - (ef / top) ** (d / 2.0))


def theoretical_mean_flight(p) -> float:
    """Mean flight time for EnsembleParams ``p`` (single pointlike particle)."""
    _require_single_pointlike(p)
    d, rho_, _ = _cylinder_geometry(p.dom)
    return mean_flight_time(d, p.ef, p.balls[0].mass, p.fp.omega, rho_)


def mean_flight_large_d(ef: float, mass: float, omega: float, rho: float, d: int) -> float:
    """Large-d limit form sqrt(2 pi / d) * v* / (omega^2 rho)."""
    return math.sqrt(2.0 * math.pi / d) * v_star(ef, mass, omega, rho) / (omega * omega * rho)


def mean_chord_flight_static(rho: float, speed: float) -> float:
    """Classical cosine-billiard mean chord time in a static disc: pi rho / (2 v)."""
    return math.pi * rho / (2.0 * speed)


def _require_single_pointlike(p):
    if len(p.balls) != 1 or p.balls[0].radius != 0.0:
        raise UnsupportedDomain("closed forms hold for a single pointlike particle")


@dataclass(frozen=True)
class TheoryValues:
    """Bundle of the closed-form stationary quantities for one setup."""

    mean_flight: float
    rho0: float
    v_star: float
    wall_density: float


def theory_values(p) -> TheoryValues:
    """Evaluate all closed forms for EnsembleParams ``p`` at once."""
    _require_single_pointlike(p)
    d, rho_, half_len = _cylinder_geometry(p.dom)
    mass = p.balls[0].mass
    omega = p.fp.omega
    return TheoryValues(
        mean_flight=mean_flight_time(d, p.ef, mass, omega, rho_),
        rho0=rho0(p.ef, mass, omega),
        v_star=v_star(p.ef, mass, omega, rho_),
        wall_density=stationary_density(rho_, d, p.ef, mass, omega, rho_, half_len),
    )
