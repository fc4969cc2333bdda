# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the hot simulation loops.

Twin of :mod:`rotodrum._ref` (same algorithms, same per-draw
distributions); random numbers come from a numpy PCG64 bit generator
driven through its C interface, so runs are deterministic for a fixed
seed but the raw stream ordering differs from the pure-Python backend.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport (M_PI, acos, atan2, cbrt, copysign, cos, fabs, floor,
                        hypot, log, sin, sqrt)
from libc.stdint cimport uint32_t, uint64_t

cnp.import_array()

MODE_OPEN = 0
MODE_TORUS = 1
MODE_FINITE = 2

BACKEND_NAME = "compiled"

DEF MAX_DIM = 64

cdef int _MODE_FINITE = 2
cdef int _MODE_TORUS = 1


# public struct layout of numpy's bit generators (stable C API)
ctypedef struct bitgen_t:
    void *state
    uint64_t (*next_uint64)(void *st) noexcept nogil
    uint32_t (*next_uint32)(void *st) noexcept nogil
    double (*next_double)(void *st) noexcept nogil
    uint64_t (*next_raw)(void *st) noexcept nogil


cdef inline double _rand(bitgen_t *bg) noexcept nogil:
    return bg.next_double(bg.state)


cdef inline double _gauss(bitgen_t *bg) noexcept nogil:
    # Box-Muller; u1 shifted into (0, 1] to keep the log finite
    cdef double u1 = 1.0 - bg.next_double(bg.state)
    cdef double u2 = bg.next_double(bg.state)
    return sqrt(-2.0 * log(u1)) * cos(2.0 * M_PI * u2)


cdef inline double _wrap2(double z) noexcept nogil:
    # wrap into [-1, 1) with period 2 (python-style modulo, not fmod)
    cdef double r = (z + 1.0) - 2.0 * floor((z + 1.0) / 2.0)
    return r - 1.0


cdef inline double _draw_tangent_ball(bitgen_t *bg, int k, double *w) noexcept nogil:
    """Uniform point of the unit k-ball into w[0..k-1]; returns |w|^2."""
    cdef int i
    cdef double n2 = 0.0, scale, r
    if k == 1:
        w[0] = 2.0 * _rand(bg) - 1.0
        return w[0] * w[0]
    while True:
        n2 = 0.0
        for i in range(k):
            w[i] = _gauss(bg)
            n2 += w[i] * w[i]
        if n2 > 0.0:
            break
    r = _rand(bg) ** (1.0 / k)
    scale = r / sqrt(n2)
    n2 = 0.0
    for i in range(k):
        w[i] *= scale
        n2 += w[i] * w[i]
    return n2


cdef double _reflect_lateral(double *x, double *v, int d, double rho,
                             double omega, bitgen_t *bg,
                             double speed_override=-1.0) noexcept nogil:
    """Cosine-law reflection at the lateral wall; preserves co-rotating speed.

    A positive ``speed_override`` forces the outgoing co-rotating speed
    (used for the very first draw, which imposes the target energy).
    """
    cdef double erx = x[0] / rho
    cdef double ery = x[1] / rho
    cdef double wx, wy, s2, speed_f
    cdef int k
    if speed_override > 0.0:
        speed_f = speed_override
    else:
        wx = v[0] + omega * x[1]
        wy = v[1] - omega * x[0]
        s2 = wx * wx + wy * wy
        for k in range(2, d):
            s2 += v[k] * v[k]
        speed_f = sqrt(s2)
    cdef double w[MAX_DIM]
    cdef double t2 = _draw_tangent_ball(bg, d - 1, w)
    cdef double cn = sqrt(max(0.0, 1.0 - t2))
    cdef double ux = -cn * erx - w[0] * ery
    cdef double uy = -cn * ery + w[0] * erx
    v[0] = speed_f * ux - omega * x[1]
    v[1] = speed_f * uy + omega * x[0]
    for k in range(2, d):
        v[k] = speed_f * w[k - 1]
    return cn


cdef void _reflect_cap(double *x, double *v, int d, int axis, double omega,
                       bitgen_t *bg) noexcept nogil:
    cdef double wx = v[0] + omega * x[1]
    cdef double wy = v[1] - omega * x[0]
    cdef double s2 = wx * wx + wy * wy
    cdef int k
    for k in range(2, d):
        s2 += v[k] * v[k]
    cdef double speed_f = sqrt(s2)
    cdef double w[MAX_DIM]
    cdef double t2 = _draw_tangent_ball(bg, d - 1, w)
    cdef double cn = sqrt(max(0.0, 1.0 - t2))
    cdef double sign = -copysign(1.0, x[axis])
    cdef double u[MAX_DIM]
    cdef int wi = 0
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


def knudsen_run(int d, double rho, double omega, double vstar, int mode,
                double half_len, int cap_lambertian, long max_flights,
                double t_stop, double sample_dt, long max_samples,
                object seed, object state=None):
    """See rotodrum._ref.knudsen_run; identical contract."""
    if d < 2 or d > MAX_DIM:
        raise ValueError(f"d must be in [2, {MAX_DIM}]")
    bitgen_obj = np.random.PCG64(seed)
    capsule = bitgen_obj.capsule
    cdef bitgen_t *bg = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")

    cdef double x[MAX_DIM]
    cdef double v[MAX_DIM]
    cdef double t, theta, next_sample
    cdef int k
    if state is None:
        for k in range(d):
            x[k] = 0.0
            v[k] = 0.0
        x[0] = rho
        t = 0.0
        theta = 0.0
        next_sample = sample_dt if sample_dt > 0.0 else float("inf")
        _reflect_lateral(x, v, d, rho, omega, bg, vstar)
    else:
        xs, vs, t, theta, next_sample = state
        for k in range(d):
            x[k] = xs[k]
            v[k] = vs[k]
        if sample_dt <= 0.0:
            next_sample = float("inf")

    durations_arr = np.empty(max_flights)
    ang0_arr = np.empty(max_flights)
    ang1_arr = np.empty(max_flights)
    sample_r_arr = np.empty(max(max_samples, 0))
    sample_theta_arr = np.empty(max(max_samples, 0))
    cdef double[::1] durations = durations_arr
    cdef double[::1] ang0 = ang0_arr
    cdef double[::1] ang1 = ang1_arr
    cdef double[::1] sample_r = sample_r_arr
    cdef double[::1] sample_theta = sample_theta_arr

    cdef long n_flights = 0, n_samples = 0, n_caps = 0
    cdef double wall2 = rho * rho
    cdef double flight_start, start_angle
    cdef double a, b, c, disc, t_lat, t_seg, tk, vk, rel, px, py, rH
    cdef int cap_axis

    with nogil:
        while n_flights < max_flights and t < t_stop:
            flight_start = t
            start_angle = atan2(x[1], x[0])
            while True:
                a = v[0] * v[0] + v[1] * v[1]
                b = x[0] * v[0] + x[1] * v[1]
                c = x[0] * x[0] + x[1] * x[1] - wall2
                disc = b * b - a * c
                if disc < 0.0:
                    disc = 0.0
                t_lat = (-b + sqrt(disc)) / a
                cap_axis = -1
                t_seg = t_lat
                if mode == _MODE_FINITE:
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
                if sample_dt > 0.0:
                    while (next_sample <= t + t_seg and next_sample <= t_stop
                           and n_samples < max_samples):
                        rel = next_sample - t
                        px = x[0] + v[0] * rel
                        py = x[1] + v[1] * rel
                        sample_r[n_samples] = hypot(px, py)
                        sample_theta[n_samples] = theta + atan2(
                            x[0] * py - x[1] * px, x[0] * px + x[1] * py)
                        n_samples += 1
                        next_sample += sample_dt
                px = x[0] + v[0] * t_seg
                py = x[1] + v[1] * t_seg
                theta += atan2(x[0] * py - x[1] * px, x[0] * px + x[1] * py)
                x[0] = px
                x[1] = py
                for k in range(2, d):
                    x[k] += v[k] * t_seg
                t += t_seg
                if cap_axis >= 0:
                    n_caps += 1
                    x[cap_axis] = copysign(half_len, x[cap_axis])
                    if cap_lambertian:
                        _reflect_cap(x, v, d, cap_axis, omega, bg)
                    else:
                        v[cap_axis] = -v[cap_axis]
                    continue
                break
            if mode == _MODE_TORUS:
                for k in range(2, d):
                    x[k] = _wrap2(x[k])
            rH = hypot(x[0], x[1])
            x[0] *= rho / rH
            x[1] *= rho / rH
            durations[n_flights] = t - flight_start
            ang0[n_flights] = start_angle
            ang1[n_flights] = atan2(x[1], x[0])
            n_flights += 1
            _reflect_lateral(x, v, d, rho, omega, bg)

    state_out = ([x[k] for k in range(d)], [v[k] for k in range(d)],
                 t, theta, next_sample)
    return (durations_arr[:n_flights], ang0_arr[:n_flights], ang1_arr[:n_flights],
            sample_r_arr[:n_samples], sample_theta_arr[:n_samples],
            n_caps, state_out)


def evolve_pointlike(int d, double rho, double omega, int mode, double half_len,
                     int cap_lambertian, double[:, ::1] Xv, double[:, ::1] Vv,
                     double T, object seed):
    """See rotodrum._ref.evolve_pointlike; identical contract.

    Arrays must be C-contiguous float64; they are updated in place.
    """
    if d < 2 or d > MAX_DIM:
        raise ValueError(f"d must be in [2, {MAX_DIM}]")
    bitgen_obj = np.random.PCG64(seed)
    capsule = bitgen_obj.capsule
    cdef bitgen_t *bg = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")
    cdef long n = Xv.shape[0]
    cdef double x[MAX_DIM]
    cdef double v[MAX_DIM]
    cdef double wall2 = rho * rho
    cdef long i
    cdef int k, cap_axis
    cdef double t, a, b, c, disc, t_ev, vk, tk, rel, rH

    with nogil:
        for i in range(n):
            for k in range(d):
                x[k] = Xv[i, k]
                v[k] = Vv[i, k]
            t = 0.0
            while True:
                a = v[0] * v[0] + v[1] * v[1]
                b = x[0] * v[0] + x[1] * v[1]
                c = x[0] * x[0] + x[1] * x[1] - wall2
                disc = b * b - a * c
                if disc < 0.0:
                    disc = 0.0
                t_ev = (-b + sqrt(disc)) / a
                cap_axis = -1
                if mode == _MODE_FINITE:
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
                    x[cap_axis] = copysign(half_len, x[cap_axis])
                    if cap_lambertian:
                        _reflect_cap(x, v, d, cap_axis, omega, bg)
                    else:
                        v[cap_axis] = -v[cap_axis]
                else:
                    rH = hypot(x[0], x[1])
                    x[0] *= rho / rH
                    x[1] *= rho / rH
                    _reflect_lateral(x, v, d, rho, omega, bg)
            if mode == _MODE_TORUS:
                for k in range(2, d):
                    x[k] = _wrap2(x[k])
            for k in range(d):
                Xv[i, k] = x[k]
                Vv[i, k] = v[k]
    return None


cdef int _real_cubic_roots(double a3, double a2, double a1, double a0,
                           double *roots) noexcept nogil:
    """Real roots of a3 t^3 + a2 t^2 + a1 t + a0, ascending; returns count.

    Degenerate leading coefficients fall back to the quadratic / linear
    case.  Closed-form (trigonometric / Cardano) with no polish; callers
    polish with Newton where it matters.
    """
    cdef double p, q, A, B, off, disc, m, th, sq, r0, r1, tmp
    if fabs(a3) < 1e-300:
        if fabs(a2) < 1e-300:
            if fabs(a1) < 1e-300:
                return 0
            roots[0] = -a0 / a1
            return 1
        disc = a1 * a1 - 4.0 * a2 * a0
        if disc < 0.0:
            return 0
        sq = sqrt(disc)
        r0 = (-a1 - sq) / (2.0 * a2)
        r1 = (-a1 + sq) / (2.0 * a2)
        if r0 > r1:
            tmp = r0
            r0 = r1
            r1 = tmp
        roots[0] = r0
        roots[1] = r1
        return 2
    p = a2 / a3
    q = a1 / a3
    off = p / 3.0
    # depressed cubic y^3 + A y + B with t = y - off
    A = q - p * p / 3.0
    B = 2.0 * p * p * p / 27.0 - p * q / 3.0 + a0 / a3
    disc = 0.25 * B * B + A * A * A / 27.0
    if disc > 0.0:
        sq = sqrt(disc)
        roots[0] = cbrt(-0.5 * B + sq) + cbrt(-0.5 * B - sq) - off
        return 1
    if A >= 0.0:
        # disc <= 0 with A >= 0 forces A ~ B ~ 0: triple root
        roots[0] = -off
        return 1
    m = 2.0 * sqrt(-A / 3.0)
    th = 3.0 * B / (A * m)
    if th > 1.0:
        th = 1.0
    elif th < -1.0:
        th = -1.0
    th = acos(th) / 3.0
    roots[0] = m * cos(th) - off
    roots[1] = m * cos(th - 2.0 * M_PI / 3.0) - off
    roots[2] = m * cos(th - 4.0 * M_PI / 3.0) - off
    # sort 3 values
    if roots[0] > roots[1]:
        tmp = roots[0]
        roots[0] = roots[1]
        roots[1] = tmp
    if roots[1] > roots[2]:
        tmp = roots[1]
        roots[1] = roots[2]
        roots[2] = tmp
    if roots[0] > roots[1]:
        tmp = roots[0]
        roots[0] = roots[1]
        roots[1] = tmp
    return 3


cdef double _smallest_crossing(double a3, double a2, double a1, double a0) noexcept nogil:
    """Smallest t > 0 with an outward (negative-to-positive) cubic crossing.

    Mirrors rotodrum._ref._smallest_crossing: grazing double roots are
    skipped.  Returns -1.0 when no crossing exists.
    """
    cdef double roots[3]
    cdef int n = _real_cubic_roots(a3, a2, a1, a0, roots)
    cdef double scale = max(max(fabs(a3), fabs(a2)), max(fabs(a1), fabs(a0)))
    if scale < 1.0:
        scale = 1.0
    cdef int i, it
    cdef double tr, f, df
    for i in range(n):
        tr = roots[i]
        if tr <= 1e-12:
            continue
        # Newton polish
        for it in range(3):
            f = ((a3 * tr + a2) * tr + a1) * tr + a0
            df = (3.0 * a3 * tr + 2.0 * a2) * tr + a1
            if fabs(df) < 1e-300:
                break
            tr -= f / df
        df = (3.0 * a3 * tr + 2.0 * a2) * tr + a1
        if fabs(df) < 1e-10 * scale:
            continue
        if df < 0.0:
            continue
        if tr <= 1e-12:
            continue
        return tr
    return -1.0


def gravity_run(double rho, double omega, double g, double speed0,
                long max_events, object seed):
    """See rotodrum._ref.gravity_run; identical contract."""
    bitgen_obj = np.random.PCG64(seed)
    capsule = bitgen_obj.capsule
    cdef bitgen_t *bg = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")

    cdef double x[2]
    cdef double v[2]
    x[0] = 0.0
    x[1] = -rho
    cdef double wtan = 2.0 * _rand(bg) - 1.0
    cdef double cn = sqrt(max(0.0, 1.0 - wtan * wtan))
    v[0] = speed0 * wtan - omega * x[1]
    v[1] = speed0 * cn + omega * x[0]
    cdef double ek0 = 0.5 * (v[0] * v[0] + v[1] * v[1])

    ek_pre_arr = np.empty(max_events)
    ek_post_arr = np.empty(max_events)
    cdef double[::1] ek_pre = ek_pre_arr
    cdef double[::1] ek_post = ek_post_arr
    cdef double worst = 0.0
    cdef long n_done = 0
    cdef double t_total = 0.0
    cdef double a3, a2c, a1c, a0c, t_hit, rH, fin, fout
    cdef long i

    with nogil:
        for i in range(max_events):
            a3 = 0.25 * g * g
            a2c = -g * v[1]
            a1c = v[0] * v[0] + v[1] * v[1] - g * x[1]
            a0c = 2.0 * (x[0] * v[0] + x[1] * v[1])
            t_hit = _smallest_crossing(a3, a2c, a1c, a0c)
            if t_hit < 0.0:
                break
            t_total += t_hit
            x[0] += v[0] * t_hit
            x[1] += v[1] * t_hit - 0.5 * g * t_hit * t_hit
            rH = hypot(x[0], x[1])
            x[0] *= rho / rH
            x[1] *= rho / rH
            v[1] -= g * t_hit
            ek_pre[n_done] = 0.5 * (v[0] * v[0] + v[1] * v[1])
            fin = hypot(v[0] + omega * x[1], v[1] - omega * x[0])
            _reflect_lateral(x, v, 2, rho, omega, bg)
            fout = hypot(v[0] + omega * x[1], v[1] - omega * x[0])
            if fin > 0.0 and fabs(fout - fin) / fin > worst:
                worst = fabs(fout - fin) / fin
            ek_post[n_done] = 0.5 * (v[0] * v[0] + v[1] * v[1])
            n_done += 1
    return ek_pre_arr[:n_done], ek_post_arr[:n_done], ek0, worst, n_done, t_total
