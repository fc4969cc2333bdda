"""Two-fixed-point bounce sequences under gravity in a rotating disc.

A pointlike particle inside the rotating unit disc, subject to in-plane
gravity ``-g e_y``, reflects alternately at two points fixed on the circle
in the inertial frame.  Each reflection conserves the energy seen by the
co-rotating observer, i.e. the speed relative to the local wall velocity
``omega * (-y, x)``.  Writing ``w`` for the incoming horizontal speed and
``v_x(out) = -w + delta``, that conservation plus the requirement that the
outgoing parabola return to the other anchor point reduces to a cubic in
``delta`` whose physical ("relevant") root stays away from the
pass-through solution ``delta = 2 w``.  For large ``|w|`` the root has the
expansion ``delta = delta0 + delta2 / w^2 + O(|w|^-3)`` and the horizontal
speed obeys a cube-growth law |v_x|^3 ~ |v_x(0)|^3 + (3 c1 / 2) k with

    c1 = g omega (x2 - x1)^3 (x1 + x2) / ((x2 - x1)^2 + (y2 - y1)^2),

so the particle's energy grows without bound when x1 + x2 != 0: a
Fermi-acceleration mechanism.  ``iterate_bounces`` runs the exact model,
``fit_asymptotics`` checks the growth laws, and ``lambertian_gravity_run``
replaces the two-point rule by cosine-law reflections anywhere on the
circle (the random model that attains high energies with positive
probability).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    InsufficientData,
    IrrelevantRoot,
    RootNotFound,
    SequenceTerminates,
    VerticalChord,
)

#: default floor for the admissible initial horizontal speed
def default_speed_floor(g: float, omega: float) -> float:
    return 20.0 * max(1.0, g, omega)


@dataclass(frozen=True)
class BouncePoints:
    """Two distinct anchor points on the unit circle plus g and omega."""

    p1: tuple
    p2: tuple
    g: float
    omega: float

    def __post_init__(self):
        for p in (self.p1, self.p2):
            if abs(math.hypot(*p) - 1.0) > 1e-12:
                raise ValueError(f"anchor {p} not on the unit circle")
        if self.p1 == self.p2:
            raise ValueError("anchor points must be distinct")
        if self.g <= 0:
            raise ValueError("g must be > 0")
        if self.omega <= 0:
            raise ValueError("omega must be > 0")

    @property
    def x1(self):
        return self.p1[0]

    @property
    def y1(self):
        return self.p1[1]

    @property
    def x2(self):
        return self.p2[0]

    @property
    def y2(self):
        return self.p2[1]

    @property
    def alpha(self) -> float:
        """Horizontal anchor separation x2 - x1."""
        return self.x2 - self.x1

    @property
    def lam(self) -> float:
        """Chord slope (y2 - y1) / (x2 - x1)."""
        if self.alpha == 0.0:
            raise VerticalChord("chord slope undefined for x1 == x2")
        return (self.y2 - self.y1) / self.alpha

    def chord2(self) -> float:
        return self.alpha**2 + (self.y2 - self.y1) ** 2

    def c1(self) -> float:
        """Cube-growth constant of the horizontal speed."""
        return self.g * self.omega * self.alpha**3 * (self.x1 + self.x2) / self.chord2()

    def delta0(self) -> float:
        """Leading reflection increment (same at both anchors)."""
        return (
            2.0
            * self.omega
            * (self.x1 * self.y2 - self.x2 * self.y1)
            * self.alpha
            / self.chord2()
        )

    def delta2(self, at_p2: bool) -> float:
        """1/w^2 coefficient of the reflection increment."""
        xa = self.x2 if at_p2 else -self.x1
        return -self.alpha**3 * self.g * self.omega * xa / self.chord2()


@dataclass
class BounceRecord:
    """One reflection of the two-point model."""

    k: int
    s_k: float
    v_pre: tuple
    v_post: tuple
    delta: float
    residual: float
    ef_residual: float


@dataclass
class AsymptoticsFit:
    """Fitted growth laws of a bounce sequence."""

    c1: float
    c1_fitted: float
    exponent: float
    prefactor: float
    energy_slope: float
    k_offset: float
    n_records: int


def parabola_through(p_from, p_to, vx: float, g: float):
    """Initial velocity and flight time of the parabola joining two points.

    ``vx`` is the signed horizontal speed; its sign must match the
    direction of travel.  Returns ``(v0, t_flight)`` with v0 = (vx, vy).
    """
    dx = p_to[0] - p_from[0]
    if dx == 0.0:
        raise VerticalChord("use vertical_bounce for x1 == x2")
    if vx == 0.0 or math.copysign(1.0, vx) != math.copysign(1.0, dx):
        raise ValueError("sign(vx) must match sign(x_to - x_from)")
    t_flight = dx / vx
    lam = (p_to[1] - p_from[1]) / dx
    vy = lam * vx + g * dx / (2.0 * vx)
    return (vx, vy), t_flight


def stays_inside(p_from, v0, t_flight: float, g: float) -> bool:
    """True iff the parabolic arc stays strictly inside the unit disc.

    The squared distance from the center is a quartic in t; its interior
    critical points are roots of a cubic, solved in closed form (via the
    companion matrix), with the endpoints excluded.
    """
    px, py = p_from
    vx, vy = v0
    # d|x(t)|^2/dt / 2 = (g^2/2) t^3 - (3 g vy / 2) t^2 + (|v|^2 - g py) t + p.v
    coeffs = [
        0.5 * g * g,
        -1.5 * g * vy,
        vx * vx + vy * vy - g * py,
        px * vx + py * vy,
    ]
    while coeffs and abs(coeffs[0]) == 0.0:
        coeffs.pop(0)
    roots = np.roots(coeffs) if len(coeffs) > 1 else []
    for r in roots:
        if abs(r.imag) > 1e-9:
            continue
        t = r.real
        if t <= 1e-12 or t >= t_flight - 1e-12:
            continue
        x = px + vx * t
        y = py + vy * t - 0.5 * g * t * t
        if x * x + y * y >= 1.0:
            return False
    return True


def _cubic_in_delta(bp: BouncePoints, at_p2: bool):
    """Coefficients of the root equation as a cubic in delta, given u = 1/w.

    F(u, delta) = 4 (1 - u delta)^2 (A delta + B) + C u^2 (1 - u delta)
                  - D u^4 delta
    with A = 1 + lam^2, B = 2 omega (y - lam x) at the reflecting anchor,
    C = +-4 alpha g omega x, D = alpha^2 g^2.  Expanded in delta:
      [4 A u^2] d^3 + [4 B u^2 - 8 A u] d^2
      + [4 A - 8 B u - C u^3 - D u^4] d + [4 B + C u^2].
    """
    lam = bp.lam
    a = 1.0 + lam * lam
    if at_p2:
        b = 2.0 * bp.omega * (bp.y2 - lam * bp.x2)
        c = 4.0 * bp.alpha * bp.g * bp.omega * bp.x2
    else:
        b = 2.0 * bp.omega * (bp.y1 - lam * bp.x1)
        c = -4.0 * bp.alpha * bp.g * bp.omega * bp.x1
    dcoef = bp.alpha**2 * bp.g**2
    return a, b, c, dcoef


def _f_and_deriv(a, b, c, dcoef, u, delta):
    one = 1.0 - u * delta
    f = 4.0 * one * one * (a * delta + b) + c * u * u * one - dcoef * u**4 * delta
    fp = 4.0 * (-2.0 * u * one * (a * delta + b) + one * one * a) - c * u**3 - dcoef * u**4
    return f, fp


def bounce_delta(w: float, bp: BouncePoints, at_p2: bool = True) -> float:
    """Relevant root of the reflection equation at an anchor point.

    ``w`` is the incoming horizontal speed at the anchor (signed).  The
    root is found by Newton iteration seeded with the two-term large-|w|
    expansion delta0 + delta2 / w^2, safeguarded by bisection on a bracket
    around the seed; the pass-through root delta = 2 w is rejected.
    """
    if w == 0.0:
        raise VerticalChord("use vertical_bounce for vertical motion")
    a, b, c, dcoef = _cubic_in_delta(bp, at_p2)
    u = 1.0 / w
    d0 = -b / a
    d2 = -c / (4.0 * a)
    seed = d0 + d2 * u * u
    scale = max(
        abs(4.0 * a * u * u),
        abs(4.0 * b * u * u - 8.0 * a * u),
        abs(4.0 * a - 8.0 * b * u - c * u**3 - dcoef * u**4),
        abs(4.0 * b + c * u * u),
    )
    width = max(10.0 * abs(d2) * u * u, 1e-9 * (1.0 + abs(d0)))
    lo, hi = seed - width, seed + width
    f_lo, _ = _f_and_deriv(a, b, c, dcoef, u, lo)
    f_hi, _ = _f_and_deriv(a, b, c, dcoef, u, hi)
    bracketed = f_lo * f_hi < 0.0
    delta = seed
    for _ in range(100):
        f, fp = _f_and_deriv(a, b, c, dcoef, u, delta)
        if abs(f) <= 1e-13 * scale:
            break
        if fp == 0.0:
            step = math.inf
        else:
            step = f / fp
        new = delta - step
        if bracketed and not (lo <= new <= hi):
            if f_lo * f < 0.0:
                hi, f_hi = delta, f
            else:
                lo, f_lo = delta, f
            new = 0.5 * (lo + hi)
        delta = new
    else:
        raise RootNotFound(
            f"no convergence at w={w!r} (|w| likely below the expansion regime)"
        )
    if abs(delta - 2.0 * w) < 1e-6 * abs(w):
        raise IrrelevantRoot("root collided with the pass-through solution delta = 2w")
    return delta


def bounce_residual(w: float, delta: float, bp: BouncePoints, at_p2: bool = True):
    """(|F(u, delta)|, coefficient scale) for a candidate root."""
    a, b, c, dcoef = _cubic_in_delta(bp, at_p2)
    u = 1.0 / w
    f, _ = _f_and_deriv(a, b, c, dcoef, u, delta)
    scale = max(
        abs(4.0 * a * u * u),
        abs(4.0 * b * u * u - 8.0 * a * u),
        abs(4.0 * a - 8.0 * b * u - c * u**3 - dcoef * u**4),
        abs(4.0 * b + c * u * u),
    )
    return abs(f), scale


def vertical_bounce(v_pre, x_contact: float, omega: float):
    """Reflection map for the vertical-chord configuration (x1 == x2).

    The horizontal speed stays zero and the vertical speed maps to
    ``-v_y + 2 omega x``; two applications at the same x restore the
    velocity, so the vertical dance is 2-periodic.
    """
    return (0.0, -v_pre[1] + 2.0 * omega * x_contact)


def _wall_speed_residual(v_pre, v_post, p, omega):
    """Relative mismatch of the co-rotating speed across a reflection."""
    wx, wy = -omega * p[1], omega * p[0]
    fin = math.hypot(v_pre[0] - wx, v_pre[1] - wy)
    fout = math.hypot(v_post[0] - wx, v_post[1] - wy)
    return abs(fout - fin) / max(fin, 1e-300)


def iterate_bounces(bp: BouncePoints, vx_init: float, n_bounces: int,
                    check_inside: bool = True):
    """Run the two-point bounce sequence for ``n_bounces`` reflections.

    The particle starts at p1 with horizontal speed ``vx_init`` (sign is
    corrected to point at p2) and the vertical speed fixed by the parabola
    through p2.  Raises ``SequenceTerminates`` (with partial records
    attached) if a flight leaves the disc or the root solve fails.
    """
    if bp.alpha == 0.0:
        raise VerticalChord("use vertical_bounce for x1 == x2")
    w_min = default_speed_floor(bp.g, bp.omega)
    if abs(vx_init) < w_min:
        raise ValueError(f"|vx_init| below the admissible floor {w_min}")
    vx = math.copysign(abs(vx_init), bp.alpha)
    points = (bp.p1, bp.p2)
    cur = 0  # flying from points[cur]
    v0, t_flight = parabola_through(points[0], points[1], vx, bp.g)
    if check_inside and not stays_inside(points[0], v0, t_flight, bp.g):
        raise SequenceTerminates("first flight leaves the disc", [])
    records = []
    s = 0.0
    v = v0
    for k in range(2, n_bounces + 2):
        s += t_flight
        cur = 1 - cur
        at_p2 = cur == 1
        p = points[cur]
        # arrival velocity: vx unchanged, vy from the flight
        v_pre = (v[0], v[1] - bp.g * t_flight)
        w = v_pre[0]
        try:
            delta = bounce_delta(w, bp, at_p2)
        except (RootNotFound, IrrelevantRoot) as exc:
            raise SequenceTerminates(str(exc), records) from exc
        vx_out = -w + delta
        res, res_scale = bounce_residual(w, delta, bp, at_p2)
        target = points[1 - cur]
        try:
            v_post, t_flight = parabola_through(p, target, vx_out, bp.g)
        except ValueError as exc:
            raise SequenceTerminates(str(exc), records) from exc
        if check_inside and not stays_inside(p, v_post, t_flight, bp.g):
            raise SequenceTerminates(f"flight {k} leaves the disc", records)
        records.append(
            BounceRecord(
                k=k,
                s_k=s,
                v_pre=v_pre,
                v_post=v_post,
                delta=delta,
                residual=res / max(res_scale, 1e-300),
                ef_residual=_wall_speed_residual(v_pre, v_post, p, bp.omega),
            )
        )
        v = v_post
    return records


def iterate_vertical(x_anchor: float, vy_init: float, n_bounces: int, omega: float):
    """Iterate the vertical-chord reflection map (anchors share x_anchor).

    Returns the post-reflection velocities; two consecutive bounces
    compose to the identity, so the sequence is 2-periodic.
    """
    v = (0.0, vy_init)
    out = []
    for _ in range(n_bounces):
        v = vertical_bounce(v, x_anchor, omega)
        out.append(v)
    return out


def fit_asymptotics(records, bp: BouncePoints | None = None) -> AsymptoticsFit:
    """Fit the growth laws of a (non-periodic) bounce sequence.

    The cube of the horizontal arrival speed grows linearly,
    |v_x(s_k)|^3 ~ |v_x(0)|^3 + (3 c1 / 2) k, so the linear fit of
    |v_x|^3 on k estimates c1 and the start offset K; the log-log fit of
    |v_x| against (k + K) then exposes the 1/3 power law and its
    prefactor (3 c1 / 2)^(1/3).  A run started above the asymptotic range
    has K >> 1 and the offset is what makes the power law visible.
    Also fits the linear growth of |v|^2 against the reflection times,
    whose slope tends to g omega |x1 + x2|.
    """
    if len(records) < 1000:
        raise InsufficientData("need at least 1000 bounce records")
    k = np.array([r.k for r in records], dtype=float)
    vx = np.array([abs(r.v_pre[0]) for r in records])
    v2 = np.array([r.v_pre[0] ** 2 + r.v_pre[1] ** 2 for r in records])
    s = np.array([r.s_k for r in records])
    cube = vx**3
    slope, intercept = np.polyfit(k, cube, 1)
    c1_fitted = 2.0 * slope / 3.0
    k_offset = intercept / slope if slope > 0 else math.inf
    if not math.isfinite(k_offset) or k_offset <= 0:
        raise InsufficientData("cube-growth fit failed: non-positive slope")
    logx = np.log(k + k_offset)
    logy = np.log(vx)
    p, logc = np.polyfit(logx, logy, 1)
    energy_slope = np.polyfit(s, v2, 1)[0]
    return AsymptoticsFit(
        c1=bp.c1() if bp is not None else float("nan"),
        c1_fitted=c1_fitted,
        exponent=float(p),
        prefactor=float(np.exp(logc)),
        energy_slope=float(energy_slope),
        k_offset=float(k_offset),
        n_records=len(records),
    )


def lambertian_gravity_run(rho: float, omega: float, g: float, speed0: float,
                           max_events: int, rng):
    """Cosine-law reflections plus gravity in the rotating disc.

    The particle starts at the bottom of the disc with co-rotating speed
    ``speed0`` and a cosine-drawn direction.  Returns a dict with the
    per-event inertial kinetic energies (pre and post reflection), the
    running-max energy, the worst co-rotating-speed residual across
    reflections, the event count and the elapsed time.  A run may end
    before ``max_events`` if flight times collapse below the resolvable
    scale (the particle settling into co-rotation against the wall).
    """
    seed = int(rng.integers(0, 2**63 - 1))
    ek_pre, ek_post, ek0, worst, n_done, t_total = kernels.gravity_run(
        rho, omega, g, speed0, max_events, seed
    )
    max_ek = float(max(ek_pre.max(initial=ek0), ek_post.max(initial=ek0)))
    return {
        "ek_pre": ek_pre,
        "ek_post": ek_post,
        "ek_initial": ek0,
        "max_ek": max_ek,
        "max_speed_residual": float(worst),
        "n_events": int(n_done),
        "total_time": float(t_total),
    }
