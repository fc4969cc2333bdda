import math

import numpy as np
import pytest

from rotodrum.domains import Ball, BallSpec, Disc2D, StarShaped2D, SystemState
from rotodrum.dynamics import (
    CollisionLog,
    advance,
    resolve_ball_ball,
    resolve_wall_specular,
    time_to_pair_collision,
    time_to_wall,
)
from rotodrum.errors import NotApproaching, NotOutgoing, SimultaneousCollision
from rotodrum.frames import FrameParams, frame_velocity


def test_pair_time_head_on():
    # gap 2 - 0.2 = 1.8, closing speed 2 -> t = 0.9
    t = time_to_pair_collision(
        np.array([-1.0, 0.0]), np.array([1.0, 0.0]), 0.1,
        np.array([1.0, 0.0]), np.array([-1.0, 0.0]), 0.1,
    )
    assert math.isclose(t, 0.9, rel_tol=1e-14)


def test_pair_time_parallel_none():
    t = time_to_pair_collision(
        np.array([0.0, 0.0]), np.array([1.0, 0.0]), 0.1,
        np.array([0.0, 1.0]), np.array([1.0, 0.0]), 0.1,
    )
    assert t is None


def test_pair_time_receding_none():
    t = time_to_pair_collision(
        np.array([-1.0, 0.0]), np.array([-1.0, 0.0]), 0.1,
        np.array([1.0, 0.0]), np.array([1.0, 0.0]), 0.1,
    )
    assert t is None


def test_wall_time_examples():
    dom = Disc2D(1.0)
    t = time_to_wall(dom, np.array([0.0, 0.0]), np.array([1.0, 0.0]), 0.0, 0.0, 1.0)
    assert math.isclose(t, 1.0, rel_tol=1e-14)
    t = time_to_wall(dom, np.array([0.0, 0.0]), np.array([1.0, 0.0]), 0.2, 0.0, 1.0)
    assert math.isclose(t, 0.8, rel_tol=1e-14)
    t = time_to_wall(dom, np.array([0.0, 0.5]), np.array([1.0, 0.0]), 0.0, 0.0, 1.0)
    assert math.isclose(t, math.sqrt(0.75), rel_tol=1e-14)


def test_equal_mass_head_on_swaps():
    vi, vj = resolve_ball_ball(
        np.array([-0.1, 0.0]), np.array([1.0, 0.0]), 1.0,
        np.array([0.1, 0.0]), np.array([-1.0, 0.0]), 1.0,
        0.1, 0.1,
    )
    assert np.allclose(vi, [-1.0, 0.0])
    assert np.allclose(vj, [1.0, 0.0])


def test_grazing_equal_mass_right_angle():
    # moving ball strikes a resting one with 45-degree offset line of centers
    e = np.array([1.0, 1.0]) / math.sqrt(2.0)
    xi = np.zeros(2)
    xj = 0.2 * e
    vi, vj = resolve_ball_ball(xi, np.array([1.0, 0.0]), 1.0, xj, np.zeros(2), 1.0, 0.1, 0.1)
    # equal masses: outgoing velocities orthogonal
    assert abs(float(vi @ vj)) < 1e-12
    # conservation oracle
    assert np.allclose(vi + vj, [1.0, 0.0], atol=1e-14)
    assert math.isclose(float(vi @ vi + vj @ vj), 1.0, rel_tol=1e-13)


def test_not_approaching_raises():
    with pytest.raises(NotApproaching):
        resolve_ball_ball(
            np.array([-0.1, 0.0]), np.array([-1.0, 0.0]), 1.0,
            np.array([0.1, 0.0]), np.array([1.0, 0.0]), 1.0,
            0.1, 0.1,
        )


def test_frame_parallel_relation_random_collisions():
    """Elastic exchange holds for co-rotating parallel components too.

    The co-rotating parallel velocities differ from the inertial ones by a
    common wall-motion term, so the same mass-weighted exchange matrix
    must map incoming to outgoing ones; the residual is pure roundoff.
    """
    rng = np.random.default_rng(15)
    omega = 1.3
    worst = 0.0
    for _ in range(2000):
        mi, mj = rng.uniform(0.2, 5.0, size=2)
        ang = rng.uniform(0, 2 * math.pi)
        e = np.array([math.cos(ang), math.sin(ang)])
        xi = rng.uniform(-0.5, 0.5, size=2)
        xj = xi + 0.2 * e
        vi = rng.normal(size=2)
        vj = rng.normal(size=2)
        if (vi - vj) @ e <= 0:
            vi, vj = vj + 2.0 * e, vi - 2.0 * e
        if (vi - vj) @ e <= 0:
            continue
        vi2, vj2 = resolve_ball_ball(xi, vi, mi, xj, vj, mj, 0.1, 0.1)
        # co-rotating parallel components (inertial axes representation)
        li = float(np.array([-xi[1], xi[0]]) @ e)
        lj = float(np.array([-xj[1], xj[0]]) @ e)
        ui_m, uj_m = float(vi @ e) - omega * li, float(vj @ e) - omega * lj
        ui_p, uj_p = float(vi2 @ e) - omega * li, float(vj2 @ e) - omega * lj
        ms = mi + mj
        cos_a = 2.0 * math.sqrt(mi * mj) / ms
        sin_a = (mj - mi) / ms
        pred_i = (cos_a * math.sqrt(mj) * uj_m - sin_a * math.sqrt(mi) * ui_m) / math.sqrt(mi)
        pred_j = (sin_a * math.sqrt(mj) * uj_m + cos_a * math.sqrt(mi) * ui_m) / math.sqrt(mj)
        scale = 1.0 + abs(ui_p) + abs(uj_p)
        worst = max(worst, abs(pred_i - ui_p) / scale, abs(pred_j - uj_p) / scale)
        # momentum and kinetic energy conserved exactly
        p_err = np.linalg.norm(mi * vi2 + mj * vj2 - mi * vi - mj * vj)
        k_err = abs(mi * vi2 @ vi2 + mj * vj2 @ vj2 - mi * vi @ vi - mj * vj @ vj)
        assert p_err < 1e-12 * (mi + mj)
        assert k_err < 1e-12 * (mi * vi @ vi + mj * vj @ vj + 1.0)
    assert worst < 1e-12


def test_specular_static_radial_reverses():
    dom = Disc2D(1.0)
    v = resolve_wall_specular(dom, np.array([1.0, 0.0]), np.array([1.0, 0.0]), 0.0, 0.0)
    assert np.allclose(v, [-1.0, 0.0])


def test_specular_static_oblique():
    dom = Disc2D(1.0)
    vin = np.array([1.0, 0.5])
    v = resolve_wall_specular(dom, np.array([1.0, 0.0]), vin, 0.0, 0.0)
    # angle of incidence equals angle of reflection about the radial normal
    assert np.allclose(v, [-1.0, 0.5], atol=1e-14)


def test_specular_rotating_preserves_frame_speed_and_ek():
    dom = Disc2D(1.0)
    omega = 1.0
    x = np.array([math.cos(0.3), math.sin(0.3)])
    vin = np.array([0.9, 0.8])
    if float(frame_velocity(x, vin, omega) @ (-x)) >= 0:
        vin = -vin
    v = resolve_wall_specular(dom, x, vin, 0.7, omega)
    fin = np.linalg.norm(frame_velocity(x, vin, omega))
    fout = np.linalg.norm(frame_velocity(x, v, omega))
    assert math.isclose(fin, fout, rel_tol=1e-12)
    # radial walls move tangentially: no work on the particle
    assert math.isclose(float(v @ v), float(vin @ vin), rel_tol=1e-12)


def test_specular_star_wall_does_work_with_consistent_sign():
    dom = StarShaped2D((1.0, 0.0, 0.0, 0.2))
    omega = 1.0
    rng = np.random.default_rng(2)
    saw_gain = saw_loss = False
    for _ in range(200):
        phi = rng.uniform(0, 2 * math.pi)
        r = dom.radius(phi)
        x = np.array([r * math.cos(phi), r * math.sin(phi)])
        vin = rng.normal(size=2) * 2.0
        from rotodrum.domains import wall_point_and_normal

        _, n = wall_point_and_normal(dom, x, 0.0, omega)
        vF = frame_velocity(x, vin, omega)
        if float(vF @ n) >= 0:
            continue
        v = resolve_wall_specular(dom, x, vin, 0.0, omega)
        dek = 0.5 * float(v @ v - vin @ vin)
        # wall velocity component along the inward normal: positive means
        # the wall advances into the domain and should do positive work
        wall_n = omega * float(np.array([-x[1], x[0]]) @ n)
        if abs(wall_n) > 1e-9:
            assert dek * wall_n >= 0.0
        saw_gain |= dek > 1e-12
        saw_loss |= dek < -1e-12
    assert saw_gain and saw_loss


def test_not_outgoing_raises():
    dom = Disc2D(1.0)
    with pytest.raises(NotOutgoing):
        resolve_wall_specular(dom, np.array([1.0, 0.0]), np.array([-1.0, 0.0]), 0.0, 0.0)


def _three_ball_state():
    return SystemState(
        0.0,
        [
            Ball(BallSpec(1.0, 0.08), np.array([-0.5, 0.0]), np.array([0.6, 0.2])),
            Ball(BallSpec(2.0, 0.1), np.array([0.4, 0.3]), np.array([-0.3, 0.5])),
            Ball(BallSpec(0.5, 0.06), np.array([0.0, -0.5]), np.array([0.2, -0.7])),
        ],
    )


def test_static_billiard_conserves_kinetic_energy():
    fp = FrameParams(0.0, 2)
    state = SystemState(
        0.0, [Ball(BallSpec(1.0), np.array([0.1, -0.2]), np.array([0.8, 0.55]))]
    )
    _, log = advance(state, Disc2D(1.0), fp, math.inf, max_events=500)
    eks = [e.ek_post for e in log.entries]
    assert max(eks) - min(eks) < 1e-12


def test_three_ball_rotating_conservation():
    fp = FrameParams(1.0, 2)
    _, log = advance(_three_ball_state(), Disc2D(1.0), fp, math.inf, max_events=3000)
    assert len(log) == 3000
    assert log.max_relative_ef_jump() < 1e-9
    assert log.cumulative_ef_drift() < 1e-6
    kinds = {e.kind for e in log.entries}
    assert kinds == {"ball_ball", "ball_wall"}


def test_no_fermi_bound_holds():
    fp = FrameParams(1.0, 2)
    state = _three_ball_state()
    M = state.total_mass()
    _, log = advance(state, Disc2D(1.0), fp, math.inf, max_events=3000)
    ef0 = log.entries[0].ef_pre
    bound = 2.0 * ef0 + 2.0 * M * fp.omega**2 * 1.0**2
    for e in log.entries:
        assert max(e.ek_pre, e.ek_post) <= bound + 1e-9


def _reverse_and_return(state0, dom, fp, n_events):
    fwd, log = advance(state0, dom, fp, math.inf, max_events=n_events)
    elapsed = fwd.time - state0.time
    for b in fwd.balls:
        b.v = -b.v
    fwd.time = 0.0
    back, _ = advance(fwd, dom, fp, elapsed)
    return max(
        max(np.linalg.norm(b1.x - b0.x), np.linalg.norm(-b1.v - b0.v))
        for b0, b1 in zip(state0.balls, back.balls)
    )


def test_time_reversal_retraces_wall_billiard():
    # single ball in the rotating disc: integrable, so reversal drift stays
    # linear in the event count and a few hundred events retrace cleanly
    fp = FrameParams(1.0, 2)
    state0 = SystemState(
        0.0, [Ball(BallSpec(1.0, 0.05), np.array([0.15, -0.2]), np.array([0.7, 0.45]))]
    )
    assert _reverse_and_return(state0, Disc2D(1.0), fp, 300) < 1e-6


def test_time_reversal_retraces_interacting_short():
    # pair collisions amplify perturbations exponentially, so only a short
    # interacting sequence can be retraced at this tolerance in doubles
    fp = FrameParams(1.0, 2)
    assert _reverse_and_return(_three_ball_state(), Disc2D(1.0), fp, 12) < 1e-6


def test_simultaneous_collision_aborts():
    # mirror-symmetric state: both balls hit the wall at exactly the same time
    state = SystemState(
        0.0,
        [
            Ball(BallSpec(1.0, 0.1), np.array([0.5, 0.0]), np.array([1.0, 0.0])),
            Ball(BallSpec(1.0, 0.1), np.array([-0.5, 0.0]), np.array([-1.0, 0.0])),
        ],
    )
    with pytest.raises(SimultaneousCollision):
        advance(state, Disc2D(1.0), FrameParams(0.0, 2), math.inf, max_events=10)


def test_star_domain_energy_conserved_while_ek_varies():
    dom = StarShaped2D((1.0, 0.0, 0.0, 0.2))
    fp = FrameParams(1.0, 2)
    state = SystemState(0.0, [Ball(BallSpec(1.0), np.array([0.2, 0.1]), np.array([0.9, 0.4]))])
    _, log = advance(state, dom, fp, math.inf, max_events=150)
    assert log.max_relative_ef_jump() < 1e-9
    eks = [e.ek_post for e in log.entries]
    assert max(eks) - min(eks) > 1e-3  # the rotating star wall exchanges energy


def test_collision_log_csv_shape():
    fp = FrameParams(1.0, 2)
    _, log = advance(_three_ball_state(), Disc2D(1.0), fp, math.inf, max_events=5)
    rows = list(log.to_csv_rows())
    assert len(rows) == 5
    assert CollisionLog.CSV_HEADER.count(",") == rows[0].count(",")
