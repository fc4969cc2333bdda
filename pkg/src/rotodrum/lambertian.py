"""Cosine-law (Knudsen) random reflection in any dimension d >= 2.

The outgoing direction at a wall has density proportional to the cosine of
the angle to the inward normal, independent of the incoming direction.
Sampling lifts a uniform point of the unit (d-1)-ball in the tangent plane
onto the hemisphere: the projection pushforward of uniform ball measure is
exactly the cosine law, so one code path covers every dimension.

Applied at a drum wall the law acts in the co-rotating frame: the speed
seen by the rotating observer is kept and only the direction is redrawn,
which preserves the conserved energy E_F.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domains import wall_point_and_normal
from .frames import L_op, frame_velocity


@dataclass(frozen=True)
class HemisphereSample:
    """Unit direction with positive component along the inward normal."""

    direction: np.ndarray
    cos_angle: float


def _tangent_ball_points(k: int, n: int, rng) -> np.ndarray:
    """Uniform points of the unit k-ball, shape (n, k)."""
    if k == 1:
        return (2.0 * rng.random((n, 1))) - 1.0
    g = rng.standard_normal((n, k))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0  # vanishing probability
    radii = rng.random((n, 1)) ** (1.0 / k)
    return g * (radii / norms)


def sample_cosine_directions(normal: np.ndarray, d: int, n: int, rng) -> np.ndarray:
    """Draw ``n`` cosine-law directions about ``normal``, shape (n, d).

    ``normal`` must be a unit vector of length d.  Tangent coordinates are
    uniform over the unit (d-1)-ball and the normal component is the lift
    onto the hemisphere; a Householder reflection sending the last basis
    vector onto ``normal`` maps the local frame into the ambient space.
    """
    w = _tangent_ball_points(d - 1, n, rng)
    c = np.sqrt(np.maximum(0.0, 1.0 - np.sum(w * w, axis=1)))
    local = np.empty((n, d))
    local[:, :-1] = w
    local[:, -1] = c
    # Householder vector u = e_d - normal maps normal <-> e_d
    u = -np.asarray(normal, dtype=float).copy()
    u[-1] += 1.0
    uu = float(u @ u)
    if uu > 1e-24:
        local -= np.outer(local @ u, (2.0 / uu) * u)
    return local


def sample_cosine_direction(normal: np.ndarray, d: int, rng) -> HemisphereSample:
    """Draw one cosine-law direction on the hemisphere about ``normal``."""
    direction = sample_cosine_directions(normal, d, 1, rng)[0]
    return HemisphereSample(
        direction=direction, cos_angle=float(direction @ np.asarray(normal, dtype=float))
    )


def reflect_lambertian(dom, x, v, t, fp, radius=0.0, rng=None):
    """Cosine-law wall reflection preserving the co-rotating speed.

    Computes the co-rotating velocity at the contact, keeps its norm,
    redraws the direction by the cosine law about the inward normal (the
    normal is common to both frames at the contact point) and maps back to
    the inertial frame.  E_F is preserved exactly.
    """
    if rng is None:
        raise ValueError("reflect_lambertian needs an explicit rng")
    _, normal = wall_point_and_normal(dom, x, t, fp.omega, radius)
    vF = frame_velocity(x, v, fp.omega)
    speed_F = math.sqrt(float(vF @ vF))
    sample = sample_cosine_direction(normal, len(x), rng)
    return speed_F * sample.direction + fp.omega * L_op(x)


def make_lambertian_law(rng):
    """Adapter with the wall-law signature used by ``dynamics.advance``."""

    def law(dom, x, v, t, fp, radius=0.0):
        return reflect_lambertian(dom, x, v, t, fp, radius, rng)

    return law


def angle_from_normal(direction: np.ndarray, normal: np.ndarray) -> float:
    """Unsigned angle in [0, pi/2) between a hemisphere direction and the normal."""
    c = float(direction @ normal)
    return math.acos(min(1.0, max(-1.0, c)))


def cosine_angle_cdf(theta, d: int):
    """CDF of the angle from the normal under the cosine law: sin^(d-1)(theta)."""
    th = np.clip(theta, 0.0, math.pi / 2)
    return np.sin(th) ** (d - 1)


def signed_angle_cdf_2d(theta):
    """d=2 signed-angle CDF on (-pi/2, pi/2): (1 + sin(theta)) / 2."""
    th = np.clip(theta, -math.pi / 2, math.pi / 2)
    return 0.5 * (1.0 + np.sin(th))
