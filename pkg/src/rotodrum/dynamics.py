"""Event-driven evolution of hard balls in a rotating drum.

Free flight is a straight line in the inertial frame, so all event times
are exact roots: ball-ball impacts and lateral/cap wall crossings reduce
to quadratics or linear crossings; only the rotating star-shaped boundary
needs bracketing plus bisection.

Reflections follow two laws:

* ball-ball: elastic exchange of the velocity components along the line of
  centers (inertial frame),
* ball-wall: specular reflection in the co-rotating frame, which preserves
  the co-rotating speed and hence the conserved energy E_F.  A different
  wall law (e.g. the cosine law) can be plugged into ``advance``.

Event prediction is naive O(n^2) per event; n stays small at desk scale
and determinism matters more than throughput here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .domains import (
    CylinderFinite,
    CylinderTorus,
    Disc2D,
    StarShaped2D,
    SystemState,
    wall_point_and_normal,
)
from .errors import (
    NoWallHit,
    NotApproaching,
    NotInContact,
    NotOutgoing,
    SimultaneousCollision,
    UnsupportedDomain,
)
from .frames import frame_velocity

#: two candidate events closer than this are treated as simultaneous
SIMULTANEOUS_TOL = 1e-12

#: post-event positional nudge along the separation normal
NUDGE = 1e-12


@dataclass(frozen=True)
class Event:
    """Next dynamical event.  ``kind`` is 'ball_ball', 'ball_wall' or 'horizon'."""

    kind: str
    time: float
    i: int = -1
    j: int = -1


@dataclass
class LogEntry:
    index: int
    time: float
    kind: str
    i: int
    j: int
    ef_pre: float
    ef_post: float
    ek_pre: float
    ek_post: float


class CollisionLog:
    """Per-event energy records of one run."""

    CSV_HEADER = "event_index,time,kind,i,j,EF_pre,EF_post,EK_pre,EK_post"

    def __init__(self):
        self.entries: list[LogEntry] = []

    def append(self, entry: LogEntry):
        self.entries.append(entry)

    def __len__(self):
        return len(self.entries)

    def max_relative_ef_jump(self) -> float:
        """Largest per-event |delta E_F| / (1 + |E_F|)."""
        worst = 0.0
        for e in self.entries:
            worst = max(worst, abs(e.ef_post - e.ef_pre) / (1.0 + abs(e.ef_pre)))
        return worst

    def cumulative_ef_drift(self) -> float:
        if not self.entries:
            return 0.0
        first = self.entries[0].ef_pre
        last = self.entries[-1].ef_post
        return abs(last - first) / (1.0 + abs(first))

    def to_csv_rows(self):
        for e in self.entries:
            yield (
                f"{e.index},{float(e.time)!r},{e.kind},{e.i},{e.j},"
                f"{float(e.ef_pre)!r},{float(e.ef_post)!r},"
                f"{float(e.ek_pre)!r},{float(e.ek_post)!r}"
            )


def time_to_pair_collision(xi, vi, ri, xj, vj, rj):
    """Time until two balls touch, or None if they never do.

    Smallest t > 0 with |(xi + t vi) - (xj + t vj)| = ri + rj, requiring the
    radial relative speed to be negative (approaching) at contact.
    """
    dx = xj - xi
    dv = vj - vi
    b = float(dx @ dv)
    if b >= 0.0:
        return None  # receding or parallel
    a = float(dv @ dv)
    c = float(dx @ dx) - (ri + rj) ** 2
    disc = b * b - a * c
    if disc <= 0.0:
        return None
    t = (-b - math.sqrt(disc)) / a
    return t if t > 0.0 else None


def _lateral_exit_time(x, v, wall_r):
    """Root of |x_H + t v_H| = wall_r with the trajectory inside for t < root."""
    a = v[0] * v[0] + v[1] * v[1]
    if a == 0.0:
        return None
    b = x[0] * v[0] + x[1] * v[1]
    c = x[0] * x[0] + x[1] * x[1] - wall_r * wall_r
    disc = b * b - a * c
    if disc < 0.0:
        return None
    t = (-b + math.sqrt(disc)) / a
    return t if t > 0.0 else None


def time_to_wall(dom, x, v, r, t0: float, omega: float) -> float:
    """Time from ``t0`` until the ball of radius ``r`` at ``x`` meets the wall.

    Rotation-invariant drums look static from the inertial frame; for them
    the lateral wall is a quadratic root and cap faces are linear crossings.
    The rotating star boundary is bracketed on a time grid and bisected.
    """
    if isinstance(dom, (Disc2D, CylinderFinite, CylinderTorus)):
        best = _lateral_exit_time(x, v, dom.rho - r)
        if isinstance(dom, CylinderFinite):
            wall = dom.half_len - r
            for k in range(2, len(x)):
                vk = v[k]
                if vk > 0.0:
                    t = (wall - x[k]) / vk
                elif vk < 0.0:
                    t = (-wall - x[k]) / vk
                else:
                    continue
                if t > 0.0 and (best is None or t < best):
                    best = t
        if best is None:
            raise NoWallHit("no wall crossing found (degenerate state)")
        return best
    if isinstance(dom, StarShaped2D):
        if r != 0.0:
            raise UnsupportedDomain("star-shaped walls support pointlike particles only")
        return _star_wall_time(dom, x, v, t0, omega)
    raise UnsupportedDomain(f"unknown domain {dom!r}")


def _star_gap(dom, x, v, t0, omega, t):
    px = x[0] + v[0] * t
    py = x[1] + v[1] * t
    rH = math.hypot(px, py)
    phi = math.atan2(py, px)
    return dom.radius(phi - omega * (t0 + t)) - rH


def _star_wall_time(dom, x, v, t0, omega):
    """First crossing of the rotating star boundary by a straight flight.

    Marches a fixed grid looking for a sign change of the inside-gap
    g(t) = r(phi(t) - omega (t0+t)) - |x_H(t)|, with a local-minimum probe
    (discrete derivative sign change) to catch tangential grazing, then
    bisects to 1e-12.
    """
    speed = math.hypot(v[0], v[1])
    rel_speed = speed + omega * dom.max_radius()
    if rel_speed == 0.0:
        raise NoWallHit("static particle in static drum")
    h = 1e-3 * dom.min_radius() / rel_speed
    horizon = (4.0 * dom.max_radius() / max(speed, 1e-300)) if speed > 0 else math.inf
    if omega > 0:
        horizon = min(horizon if speed > 0 else math.inf, 1e4 * 2 * math.pi / omega)
    g_prev = _star_gap(dom, x, v, t0, omega, 0.0)
    slope_prev = None
    t_prev = 0.0
    t = h
    while t_prev < horizon:
        g = _star_gap(dom, x, v, t0, omega, t)
        if g <= 0.0:
            return _bisect_star(dom, x, v, t0, omega, t_prev, t)
        slope = g - g_prev
        if slope_prev is not None and slope_prev < 0.0 <= slope and g_prev < 10 * h * rel_speed:
            # local minimum of the gap: refine to rule out a grazing touch
            a, b = max(t_prev - h, 0.0), t
            for _ in range(60):
                m1 = a + (b - a) / 3
                m2 = b - (b - a) / 3
                if _star_gap(dom, x, v, t0, omega, m1) > _star_gap(dom, x, v, t0, omega, m2):
                    a = m1
                else:
                    b = m2
            tm = 0.5 * (a + b)
            if _star_gap(dom, x, v, t0, omega, tm) <= 0.0:
                return _bisect_star(dom, x, v, t0, omega, max(t_prev - h, 0.0), tm)
        slope_prev = slope
        g_prev = g
        t_prev = t
        t += h
    raise NoWallHit("no boundary crossing before horizon")


def _bisect_star(dom, x, v, t0, omega, lo, hi):
    # g(lo) > 0 >= g(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo < 1e-12:
            break
        if _star_gap(dom, x, v, t0, omega, mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def resolve_ball_ball(xi, vi, mi, xj, vj, mj, ri=0.0, rj=0.0):
    """Elastic collision of two balls; returns the outgoing velocities.

    Velocity components orthogonal to the line of centers are unchanged;
    the parallel components follow the standard one-dimensional exchange.
    Conserves inertial momentum and kinetic energy.
    """
    dx = xj - xi
    dist = math.sqrt(float(dx @ dx))
    if ri + rj > 0 and abs(dist - (ri + rj)) > 1e-6 * (ri + rj):
        raise NotInContact(f"center gap {dist:.6e} vs contact {ri + rj:.6e}")
    if dist == 0.0:
        raise NotInContact("coincident centers")
    e = dx / dist
    ui = float(vi @ e)
    uj = float(vj @ e)
    if ui - uj <= 0.0:
        raise NotApproaching("relative radial speed is not negative")
    ms = mi + mj
    ui_new = ((mi - mj) * ui + 2.0 * mj * uj) / ms
    uj_new = ((mj - mi) * uj + 2.0 * mi * ui) / ms
    return vi + (ui_new - ui) * e, vj + (uj_new - uj) * e


def resolve_wall_specular(dom, x, v, t, omega, r=0.0):
    """Specular reflection in the co-rotating frame at a wall contact.

    The co-rotating velocity is mirrored across the tangent plane at the
    contact point; its norm, and hence E_F, is preserved.  For walls whose
    horizontal normal is radial the wall moves tangentially and this
    coincides with inertial specular reflection.
    """
    _, normal = wall_point_and_normal(dom, x, t, omega, r)
    vF = frame_velocity(x, v, omega)
    vn = float(vF @ normal)
    if vn >= 0.0:
        raise NotOutgoing("co-rotating velocity points inward at a wall event")
    return v - 2.0 * vn * normal


def predict_next_event(state: SystemState, dom, fp, t_horizon: float) -> Event:
    """Minimal event over all ball pairs and walls, or the horizon."""
    t = state.time
    candidates = [Event("horizon", t_horizon)]
    n = len(state.balls)
    for i in range(n):
        bi = state.balls[i]
        tw = time_to_wall(dom, bi.x, bi.v, bi.spec.radius, t, fp.omega)
        candidates.append(Event("ball_wall", t + tw, i))
        for j in range(i + 1, n):
            bj = state.balls[j]
            tp = time_to_pair_collision(
                bi.x, bi.v, bi.spec.radius, bj.x, bj.v, bj.spec.radius
            )
            if tp is not None:
                candidates.append(Event("ball_ball", t + tp, i, j))
    candidates.sort(key=lambda e: e.time)
    best = candidates[0]
    if len(candidates) > 1 and best.kind != "horizon":
        gap = candidates[1].time - best.time
        if gap < SIMULTANEOUS_TOL and candidates[1].kind != "horizon":
            raise SimultaneousCollision(
                f"events {best} and {candidates[1]} coincide within {SIMULTANEOUS_TOL}"
            )
    return best


def _ef_ek(state: SystemState, omega: float):
    ef = 0.0
    ek = 0.0
    for b in state.balls:
        m = b.spec.mass
        vF = frame_velocity(b.x, b.v, omega)
        rH2 = b.x[0] * b.x[0] + b.x[1] * b.x[1]
        ef += 0.5 * m * float(vF @ vF) - 0.5 * m * omega * omega * rH2
        ek += 0.5 * m * float(b.v @ b.v)
    return ef, ek


def advance(
    state: SystemState,
    dom,
    fp,
    t_horizon: float,
    reflection_law="specular",
    log: CollisionLog | None = None,
    max_events: int | None = None,
):
    """Evolve ``state`` to ``t_horizon``, resolving events as they come.

    ``reflection_law`` is either ``"specular"`` or a callable
    ``law(dom, x, v, t, fp, radius) -> v'`` applied at wall events (the
    cosine-law reflection from :mod:`rotodrum.lambertian` fits this slot).
    Returns ``(state, log)``; the log gains one entry per resolved event.
    """
    if log is None:
        log = CollisionLog()
    state = state.copy()
    n_events = 0
    while state.time < t_horizon:
        if max_events is not None and n_events >= max_events:
            break
        ev = predict_next_event(state, dom, fp, t_horizon)
        dt = ev.time - state.time
        for b in state.balls:
            b.x += dt * b.v
        state.time = ev.time
        if ev.kind == "horizon":
            break
        ef_pre, ek_pre = _ef_ek(state, fp.omega)
        if ev.kind == "ball_ball":
            bi, bj = state.balls[ev.i], state.balls[ev.j]
            bi.v, bj.v = resolve_ball_ball(
                bi.x, bi.v, bi.spec.mass, bj.x, bj.v, bj.spec.mass,
                bi.spec.radius, bj.spec.radius,
            )
            dx = bj.x - bi.x
            e = dx / math.sqrt(float(dx @ dx))
            bi.x -= 0.5 * NUDGE * e
            bj.x += 0.5 * NUDGE * e
        else:
            b = state.balls[ev.i]
            if reflection_law == "specular":
                b.v = resolve_wall_specular(
                    dom, b.x, b.v, state.time, fp.omega, b.spec.radius
                )
            else:
                b.v = reflection_law(dom, b.x, b.v, state.time, fp, b.spec.radius)
            _, normal = wall_point_and_normal(
                dom, b.x, state.time, fp.omega, b.spec.radius
            )
            b.x += NUDGE * normal
        ef_post, ek_post = _ef_ek(state, fp.omega)
        log.append(
            LogEntry(len(log), state.time, ev.kind, ev.i, ev.j,
                     ef_pre, ef_post, ek_pre, ek_post)
        )
        n_events += 1
    return state, log
