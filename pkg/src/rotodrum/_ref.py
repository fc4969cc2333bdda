"""Pure-Python kernels for the hot simulation loops.

This is the fallback backend: the same loops exist as a compiled Cython
twin in ``rotodrum._speed`` and one of the two is selected at import time
by :mod:`rotodrum.kernels`.  The two backends are statistically equivalent
(same algorithms, same per-draw distributions) but do not share bit-exact
random streams; each is deterministic for a fixed seed.

Kernel geometry modes:

* ``MODE_OPEN``   -- no transverse walls (planar disc, or infinite cylinder),
* ``MODE_TORUS``  -- transverse coordinates wrapped into [-1, 1),
* ``MODE_FINITE`` -- cap faces at +/- half_len (specular or cosine-law).

All kernels take a plain integer seed and build their own generator, so a
caller consumes exactly one value from its generator to spawn a kernel
stream regardless of backend.
"""

from __future__ import annotations

import math

import numpy as np

MODE_OPEN = 0
MODE_TORUS = 1
MODE_FINITE = 2

BACKEND_NAME = "python"


def _draw_tangent_ball(rng, k):
    """Uniform point of the unit k-ball (tangent coordinates)."""
    if k == 1:
        return [2.0 * rng.random() - 1.0]
    while True:
        g = [rng.standard_normal() for _ in range(k)]
        n2 = sum(v * v for v in g)
        if n2 > 0.0:
            break
    scale = rng.random() ** (1.0 / k) / math.sqrt(n2)
    return [scale * v for v in g]


def _reflect_lateral(x, v, d, rho, omega, rng, speed_override=-1.0):
    """Cosine-law reflection at the lateral wall; updates v in place.

    ``x`` must lie on the wall.  The co-rotating speed is preserved, or
    forced to ``speed_override`` when that is positive (used to impose the
    target energy on the very first draw).  Returns the outgoing normal
    cosine (diagnostics only).
    """
    erx = x[0] / rho
    ery = x[1] / rho
    if speed_override > 0.0:
        speed_f = speed_override
    else:
        # co-rotating velocity in inertial axes
        wx = v[0] + omega * x[1]
        wy = v[1] - omega * x[0]
        s2 = wx * wx + wy * wy
        for k in range(2, d):
            s2 += v[k] * v[k]
        speed_f = math.sqrt(s2)
    w = _draw_tangent_ball(rng, d - 1)
    t2 = sum(c * c for c in w)
    cn = math.sqrt(max(0.0, 1.0 - t2))
    # basis: inward normal -e_r, horizontal tangent t1 = rot90(e_r), axes e_k
    ux = -cn * erx - w[0] * ery
    uy = -cn * ery + w[0] * erx
    v[0] = speed_f * ux - omega * x[1]
    v[1] = speed_f * uy + omega * x[0]
    for k in range(2, d):
        v[k] = speed_f * w[k - 1]
    return cn


def knudsen_run(
    d,
    rho,
    omega,
    vstar,
    mode,
    half_len,
    cap_lambertian,
    max_flights,
    t_stop,
    sample_dt,
    max_samples,
    seed,
    state=None,
):
    """Simulate cosine-law flights off the lateral wall of a rotating drum.

    Returns ``(durations, start_angles, end_angles, sample_r, sample_theta,
    n_cap_hits, state)`` where ``state = (x, v, t, theta, next_sample_t)``
    always sits at a lateral-wall contact, so runs can be chunked.
    A flight is the span between consecutive lateral reflections; cap
    bounces (finite cylinder) are interior events of a flight.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    if state is None:
        x = [0.0] * d
        x[0] = rho
        v = [0.0] * d
        t = 0.0
        theta = 0.0
        next_sample = sample_dt if sample_dt > 0.0 else math.inf
        _reflect_lateral(x, v, d, rho, omega, rng, speed_override=vstar)
    else:
        x, v, t, theta, next_sample = state
        x = list(x)
        v = list(v)
        if sample_dt <= 0.0:
            next_sample = math.inf

    durations = np.empty(max_flights)
    ang0 = np.empty(max_flights)
    ang1 = np.empty(max_flights)
    sample_r = np.empty(max_samples)
    sample_theta = np.empty(max_samples)
    n_flights = 0
    n_samples = 0
    n_caps = 0

    wall2 = rho * rho
    while n_flights < max_flights and t < t_stop:
        flight_start = t
        start_angle = math.atan2(x[1], x[0])
        # segments until the next lateral contact (cap bounces in between)
        while True:
            a = v[0] * v[0] + v[1] * v[1]
            b = x[0] * v[0] + x[1] * v[1]
            c = x[0] * x[0] + x[1] * x[1] - wall2
            disc = b * b - a * c
            t_lat = (-b + math.sqrt(max(disc, 0.0))) / a
            cap_axis = -1
            t_seg = t_lat
            if mode == MODE_FINITE:
                for k in range(2, d):
                    vk = v[k]
                    if vk > 0.0:
                        tk = (half_len - x[k]) / vk
                    elif vk < 0.0:
                        tk = (-half_len - x[k]) / vk
                    else:
                        continue
                    if tk < t_seg:
                        t_seg = tk
                        cap_axis = k
            # samples inside this segment
            if sample_dt > 0.0:
                while next_sample <= t + t_seg and next_sample <= t_stop and n_samples < max_samples:
                    rel = next_sample - t
                    px = x[0] + v[0] * rel
                    py = x[1] + v[1] * rel
                    sample_r[n_samples] = math.hypot(px, py)
                    sample_theta[n_samples] = theta + math.atan2(
                        x[0] * py - x[1] * px, x[0] * px + x[1] * py
                    )
                    n_samples += 1
                    next_sample += sample_dt
            # advance to segment end, accumulate winding
            px = x[0] + v[0] * t_seg
            py = x[1] + v[1] * t_seg
            theta += math.atan2(x[0] * py - x[1] * px, x[0] * px + x[1] * py)
            x[0] = px
            x[1] = py
            for k in range(2, d):
                x[k] += v[k] * t_seg
            t += t_seg
            if cap_axis >= 0:
                n_caps += 1
                x[cap_axis] = math.copysign(half_len, x[cap_axis])
                if cap_lambertian:
                    _reflect_cap(x, v, d, cap_axis, omega, rng)
                else:
                    v[cap_axis] = -v[cap_axis]
                continue
            break
        if mode == MODE_TORUS:
            for k in range(2, d):
                x[k] = (x[k] + 1.0) % 2.0 - 1.0
        # pin the contact exactly onto the wall circle
        rH = math.hypot(x[0], x[1])
        x[0] *= rho / rH
        x[1] *= rho / rH
        durations[n_flights] = t - flight_start
        ang0[n_flights] = start_angle
        ang1[n_flights] = math.atan2(x[1], x[0])
        n_flights += 1
        _reflect_lateral(x, v, d, rho, omega, rng)

    state_out = (list(x), list(v), t, theta, next_sample)
    return (
        durations[:n_flights],
        ang0[:n_flights],
        ang1[:n_flights],
        sample_r[:n_samples],
        sample_theta[:n_samples],
        n_caps,
        state_out,
    )


def _reflect_cap(x, v, d, axis, omega, rng):
    """Cosine-law reflection at a cap face (normal along a transverse axis)."""
    wx = v[0] + omega * x[1]
    wy = v[1] - omega * x[0]
    s2 = wx * wx + wy * wy
    for k in range(2, d):
        s2 += v[k] * v[k]
    speed_f = math.sqrt(s2)
    w = _draw_tangent_ball(rng, d - 1)
    t2 = sum(c * c for c in w)
    cn = math.sqrt(max(0.0, 1.0 - t2))
    sign = -math.copysign(1.0, x[axis])
    # tangent coords fill the non-axis directions in index order
    u = [0.0] * d
    wi = 0
    for k in range(d):
        if k == axis:
            u[k] = sign * cn
        else:
            u[k] = w[wi]
            wi += 1
    v[0] = speed_f * u[0] - omega * x[1]
    v[1] = speed_f * u[1] + omega * x[0]
    for k in range(2, d):
        v[k] = speed_f * u[k]


def evolve_pointlike(
    d, rho, omega, mode, half_len, cap_lambertian, X, V, T, seed
):
    """Advance each row of (X, V) by time T under cosine-law wall reflections.

    X, V are (n, d) float64 arrays, modified in place.  Initial points may
    be interior.  Used for ensemble-invariance experiments.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    wall2 = rho * rho
    n = X.shape[0]
    for i in range(n):
        x = [float(c) for c in X[i]]
        v = [float(c) for c in V[i]]
        t = 0.0
        while True:
            a = v[0] * v[0] + v[1] * v[1]
            b = x[0] * v[0] + x[1] * v[1]
            c = x[0] * x[0] + x[1] * x[1] - wall2
            disc = b * b - a * c
            t_ev = (-b + math.sqrt(max(disc, 0.0))) / a
            cap_axis = -1
            if mode == MODE_FINITE:
                for k in range(2, d):
                    vk = v[k]
                    if vk > 0.0:
                        tk = (half_len - x[k]) / vk
                    elif vk < 0.0:
                        tk = (-half_len - x[k]) / vk
                    else:
                        continue
                    if tk < t_ev:
                        t_ev = tk
                        cap_axis = k
            if t + t_ev >= T:
                rel = T - t
                for k in range(d):
                    x[k] += v[k] * rel
                break
            for k in range(d):
                x[k] += v[k] * t_ev
            t += t_ev
            if cap_axis >= 0:
                x[cap_axis] = math.copysign(half_len, x[cap_axis])
                if cap_lambertian:
                    _reflect_cap(x, v, d, cap_axis, omega, rng)
                else:
                    v[cap_axis] = -v[cap_axis]
            else:
                rH = math.hypot(x[0], x[1])
                x[0] *= rho / rH
                x[1] *= rho / rH
                _reflect_lateral(x, v, d, rho, omega, rng)
        if mode == MODE_TORUS:
            for k in range(2, d):
                x[k] = (x[k] + 1.0) % 2.0 - 1.0
        X[i] = x
        V[i] = v


def _smallest_crossing(a3, a2, a1, a0):
    """Smallest t > 0 where the cubic crosses from negative to positive.

    The cubic is q(t)/t for the squared-distance quartic of a parabolic
    flight that starts on the wall circle; grazing double roots (derivative
    within 1e-10 of zero at the root) are skipped, mirroring a tangential
    touch that stays inside.  Root extraction uses the companion matrix.
    """
    coeffs = [a3, a2, a1, a0]
    while coeffs and abs(coeffs[0]) < 1e-300:
        coeffs.pop(0)
    if len(coeffs) <= 1:
        return None
    roots = np.roots(coeffs)
    scale = max(abs(a3), abs(a2), abs(a1), abs(a0))
    best = None
    for r in sorted(roots, key=lambda z: z.real):
        if abs(r.imag) > 1e-9 * max(1.0, abs(r.real)):
            continue
        tr = r.real
        if tr <= 1e-12:
            continue
        deriv = (3 * a3 * tr + 2 * a2) * tr + a1
        if abs(deriv) < 1e-10 * max(scale, 1.0):
            continue  # grazing touch
        if deriv < 0.0:
            continue  # entering, not exiting
        best = tr
        break
    return best


def gravity_run(rho, omega, g, speed0, max_events, seed):
    """Cosine-law reflections plus gravity in a rotating planar disc.

    The particle starts at the bottom of the disc with speed ``speed0`` and
    a cosine-drawn direction.  Returns per-event inertial kinetic energies
    just before and after each reflection, the worst co-rotating-speed
    residual across reflections, and the number of events completed (the
    run stops early if no wall crossing is found, which does not happen for
    genuine interior flights).
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    x = [0.0, -rho]
    # initial direction: cosine law about the inward normal (0, 1),
    # co-rotating speed speed0
    w = _draw_tangent_ball(rng, 1)[0]
    cn = math.sqrt(max(0.0, 1.0 - w * w))
    v = [speed0 * w - omega * x[1], speed0 * cn + omega * x[0]]
    ek0 = 0.5 * (v[0] * v[0] + v[1] * v[1])

    ek_pre = np.empty(max_events)
    ek_post = np.empty(max_events)
    worst_residual = 0.0
    n_done = 0
    t_total = 0.0
    for _ in range(max_events):
        a3 = 0.25 * g * g
        a2 = -g * v[1]
        a1 = v[0] * v[0] + v[1] * v[1] - g * x[1]
        a0 = 2.0 * (x[0] * v[0] + x[1] * v[1])
        t_hit = _smallest_crossing(a3, a2, a1, a0)
        if t_hit is None:
            break
        t_total += t_hit
        x[0] += v[0] * t_hit
        x[1] += v[1] * t_hit - 0.5 * g * t_hit * t_hit
        rH = math.hypot(x[0], x[1])
        x[0] *= rho / rH
        x[1] *= rho / rH
        v[1] -= g * t_hit
        ek_pre[n_done] = 0.5 * (v[0] * v[0] + v[1] * v[1])
        fin = math.hypot(v[0] + omega * x[1], v[1] - omega * x[0])
        _reflect_lateral(x, v, 2, rho, omega, rng)
        fout = math.hypot(v[0] + omega * x[1], v[1] - omega * x[0])
        worst_residual = max(worst_residual, abs(fout - fin) / max(fin, 1e-300))
        ek_post[n_done] = 0.5 * (v[0] * v[0] + v[1] * v[1])
        n_done += 1
    return ek_pre[:n_done], ek_post[:n_done], ek0, worst_residual, n_done, t_total
