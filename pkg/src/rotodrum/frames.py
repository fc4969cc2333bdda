"""Rotating-frame kinematics and energy bookkeeping.

The drum rotates with constant angular velocity ``omega`` in the plane H
spanned by the first two coordinate axes; the remaining ``d - 2``
coordinates are untouched by the rotation.  Positions and velocities are
stored in the inertial frame, where free flight is a straight line, and
co-rotating-frame quantities are computed on demand.

The conserved quantity of the rotating system is

    E_F = sum_k m_k |v_k^F|^2 / 2  -  sum_k m_k omega^2 |x_k^H|^2 / 2,

the kinetic energy seen by the co-rotating observer minus the centrifugal
potential term.  ``energy_breakdown`` evaluates both pieces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FrameParams:
    """Angular velocity of the drum and the spatial dimension."""

    omega: float
    dim: int

    def __post_init__(self):
        if self.omega < 0:
            raise ValueError("omega must be >= 0")
        if self.dim < 2:
            raise ValueError("dim must be >= 2")


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energy components of a state, in the co-rotating and inertial frames."""

    kinetic_F: float
    potential_F: float
    total_F: float
    kinetic_inertial: float


def rotate_H(theta: float, x: np.ndarray) -> np.ndarray:
    """Rotate the first two coordinates of ``x`` by ``theta``; fix the rest."""
    out = np.array(x, dtype=float, copy=True)
    c, s = math.cos(theta), math.sin(theta)
    x0, x1 = out[0], out[1]
    out[0] = c * x0 - s * x1
    out[1] = s * x0 + c * x1
    return out


def L_op(x: np.ndarray) -> np.ndarray:
    """Quarter-turn of the horizontal projection: x -> (-x2, x1, 0, ..., 0).

    ``omega * L_op(x)`` is the local velocity of the rotating drum at x.
    The result is orthogonal to x for every x.
    """
    out = np.zeros(len(x), dtype=float)
    out[0] = -x[1]
    out[1] = x[0]
    return out


def frame_velocity(x: np.ndarray, v: np.ndarray, omega: float) -> np.ndarray:
    """Co-rotating-frame velocity, expressed in inertial axes.

    This is ``v - omega * L_op(x)``; it differs from the frame-F velocity
    by the rotation ``rotate_H(-omega t, .)``, which preserves norms and
    angles to the wall normal, so it is the working representation for
    all energy and reflection computations.
    """
    out = np.array(v, dtype=float, copy=True)
    out[0] += omega * x[1]
    out[1] -= omega * x[0]
    return out


def to_frame_F(t: float, x: np.ndarray, v: np.ndarray, fp: FrameParams):
    """Map an inertial-frame (position, velocity) into the co-rotating frame."""
    xF = rotate_H(-fp.omega * t, x)
    vF = rotate_H(-fp.omega * t, frame_velocity(x, v, fp.omega))
    return xF, vF


def from_frame_F(t: float, xF: np.ndarray, vF: np.ndarray, fp: FrameParams):
    """Inverse of ``to_frame_F`` up to floating-point roundoff."""
    x = rotate_H(fp.omega * t, xF)
    v = rotate_H(fp.omega * t, vF)
    v[0] -= fp.omega * x[1]
    v[1] += fp.omega * x[0]
    return x, v


def energy_breakdown(state, fp: FrameParams) -> EnergyBreakdown:
    """Energies of a multi-ball state; ``state`` is a SystemState."""
    kin_F = 0.0
    pot_F = 0.0
    kin_I = 0.0
    for ball in state.balls:
        m = ball.spec.mass
        vF = frame_velocity(ball.x, ball.v, fp.omega)
        kin_F += 0.5 * m * float(vF @ vF)
        rH2 = ball.x[0] * ball.x[0] + ball.x[1] * ball.x[1]
        pot_F -= 0.5 * m * fp.omega**2 * rH2
        kin_I += 0.5 * m * float(ball.v @ ball.v)
    return EnergyBreakdown(
        kinetic_F=kin_F,
        potential_F=pot_F,
        total_F=kin_F + pot_F,
        kinetic_inertial=kin_I,
    )
