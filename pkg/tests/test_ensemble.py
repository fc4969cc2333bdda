import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import kstest

from rotodrum.domains import CylinderTorus, Disc2D
from rotodrum.ensemble import (
    frame_speeds,
    invariance_test,
    make_params,
    run_knudsen,
    sample_microcanonical,
    sample_positions,
    sample_velocities,
    winding_rate,
)
from rotodrum.errors import InfeasibleEnsemble
from rotodrum.frames import energy_breakdown
from rotodrum.theory import mean_chord_flight_static, theoretical_mean_flight


def test_positions_uniform_when_exponent_vanishes():
    # one pointlike ball in the plane: the configuration density is flat,
    # so the squared radius is uniform on [0, rho^2]
    p = make_params(0.3, Disc2D(1.0), 1.0)
    rng = np.random.default_rng(0)
    xs = sample_positions(p, 20_000, rng)
    r2 = xs[:, 0, 0] ** 2 + xs[:, 0, 1] ** 2
    assert kstest(r2, "uniform").statistic < 0.012


def test_positions_respect_negative_energy_cutoff():
    p = make_params(-0.32, Disc2D(1.0), 1.0)
    rng = np.random.default_rng(1)
    xs = sample_positions(p, 5000, rng)
    r = np.hypot(xs[:, 0, 0], xs[:, 0, 1])
    assert (r >= 0.8 - 1e-12).all()


def test_positions_match_quadrature_marginal_3d():
    # radial density ~ r (E_F + m w^2 r^2/2)^(1/2); oracle by quadrature
    p = make_params(0.5, CylinderTorus(1.0, 3), 1.0)
    rng = np.random.default_rng(2)
    xs = sample_positions(p, 60_000, rng)
    r = np.hypot(xs[:, 0, 0], xs[:, 0, 1])

    def unnorm(s):
        return s * (0.5 + 0.5 * s * s) ** 0.5

    total = quad(unnorm, 0.0, 1.0)[0]
    edges = np.linspace(0.0, 1.0, 41)
    hist, _ = np.histogram(r, bins=edges)
    frac = hist / len(r)
    l1 = 0.0
    for i in range(40):
        ref = quad(unnorm, edges[i], edges[i + 1])[0] / total
        l1 += abs(frac[i] - ref)
    assert l1 < 0.02


def test_sampled_states_sit_on_the_energy_level():
    for p in (
        make_params(0.5, Disc2D(1.0), 1.0, masses=(1.0, 2.0), radii=(0.1, 0.15)),
        make_params(-0.2, Disc2D(1.0), 1.2),
        make_params(0.7, CylinderTorus(1.0, 3), 0.9),
    ):
        rng = np.random.default_rng(3)
        state = sample_microcanonical(p, rng)
        eb = energy_breakdown(state, p.fp)
        assert math.isclose(eb.total_F, p.ef, rel_tol=1e-12, abs_tol=1e-12)


def test_velocity_directions_are_isotropic_in_frame():
    p = make_params(0.5, Disc2D(1.0), 1.0)
    rng = np.random.default_rng(4)
    xs = sample_positions(p, 30_000, rng)
    vs = sample_velocities(p, xs, rng)
    vF = vs.copy()
    vF[..., 0] += p.fp.omega * xs[..., 1]
    vF[..., 1] -= p.fp.omega * xs[..., 0]
    ang = np.arctan2(vF[:, 0, 1], vF[:, 0, 0])
    assert kstest((ang + math.pi) / (2 * math.pi), "uniform").statistic < 0.012


def test_infeasible_ensemble_raises():
    p = make_params(-0.51, Disc2D(1.0), 1.0)  # empty level set
    with pytest.raises(InfeasibleEnsemble):
        sample_positions(p, 10, np.random.default_rng(5))


def test_mean_flight_matches_theory_small_run():
    p = make_params(0.18, Disc2D(1.0), 0.8)
    rng = np.random.default_rng(6)
    stats = run_knudsen(p, None, rng, n_flights=50_000)
    theory = theoretical_mean_flight(p)
    z = (stats.mean_flight() - theory) / stats.flight_se()
    assert abs(z) < 4.0


def test_static_drum_recovers_mean_chord():
    # omega = 0 with E_F = m v^2 / 2: the classical cosine-billiard chord
    p = make_params(0.5, Disc2D(1.0), 0.0)
    rng = np.random.default_rng(7)
    stats = run_knudsen(p, None, rng, n_flights=50_000)
    expected = mean_chord_flight_static(1.0, 1.0)
    assert abs(stats.mean_flight() - expected) < 4.0 * stats.flight_se()


def test_time_horizon_mode_reaches_T():
    p = make_params(0.0, Disc2D(1.0), 1.0)
    rng = np.random.default_rng(8)
    stats = run_knudsen(p, 200.0, rng, sample_dt=0.25)
    assert stats.total_time >= 200.0
    assert len(stats.sample_r) == int(200.0 / 0.25)
    assert (stats.sample_r <= 1.0 + 1e-12).all()


def test_winding_rate_tracks_drum():
    p = make_params(0.0, Disc2D(1.0), 1.0)
    rng = np.random.default_rng(9)
    stats = run_knudsen(p, None, rng, n_flights=20_000)
    assert abs(winding_rate(stats) - 1.0) < 0.02


def test_winding_requires_enough_flights():
    p = make_params(0.0, Disc2D(1.0), 1.0)
    rng = np.random.default_rng(10)
    stats = run_knudsen(p, None, rng, n_flights=100)
    with pytest.raises(ValueError):
        winding_rate(stats)


def test_negative_energy_angle_increases():
    p = make_params(-0.32, Disc2D(1.0), 1.0)
    rng = np.random.default_rng(11)
    stats = run_knudsen(p, 2000.0, rng, sample_dt=0.05)
    inc = np.diff(stats.sample_theta)
    assert (inc > 0.0).all()


def test_invariance_T0_is_exact_zero():
    p = make_params(0.18, Disc2D(1.0), 0.8)
    rng = np.random.default_rng(12)
    rep = invariance_test(p, 0.0, 2000, rng)
    assert rep["ks_radius"] == 0.0
    assert rep["ks_speed_F"] == 0.0


def test_invariance_pointlike_small():
    p = make_params(0.18, Disc2D(1.0), 0.8)
    rng = np.random.default_rng(13)
    rep = invariance_test(p, 10.0, 20_000, rng)
    assert rep["law"] == "lambertian"
    assert rep["ks_radius"] < 0.02
    assert rep["ks_speed_F"] < 0.02


def test_invariance_two_ball_specular_small():
    p = make_params(
        0.5, Disc2D(1.0), 1.0, masses=(1.0, 1.0), radii=(0.1, 0.1)
    )
    rng = np.random.default_rng(14)
    rep = invariance_test(p, 2.0, 1500, rng)
    assert rep["law"] == "specular"
    assert rep["ks_radius"] < 0.05
    assert rep["ks_speed_F"] < 0.05


def test_frame_speed_helper():
    p = make_params(0.5, Disc2D(1.0), 2.0)
    x = np.array([[[0.3, 0.0]]])
    v = np.array([[[0.0, 0.6]]])  # co-rotating: v = omega L x
    assert frame_speeds(p, x, v)[0, 0] < 1e-14


def test_durations_positive_and_caps_counted():
    from rotodrum.domains import CylinderFinite

    p = make_params(0.5, CylinderFinite(1.0, 0.5, 3), 1.0)
    rng = np.random.default_rng(15)
    stats = run_knudsen(p, None, rng, n_flights=5000)
    assert (stats.durations > 0.0).all()
    assert stats.n_cap_hits > 0  # short cylinder: cap bounces interleave
    stats2 = run_knudsen(p, None, rng, n_flights=5000, lambertian_caps=True)
    assert stats2.n_cap_hits > 0
    assert (stats2.durations > 0.0).all()


def test_theory_values_bundle():
    from rotodrum.theory import theory_values

    p = make_params(-0.32, Disc2D(1.0), 1.0)
    tv = theory_values(p)
    assert math.isclose(tv.rho0, 0.8, rel_tol=1e-12)
    assert math.isclose(tv.v_star, 0.6, rel_tol=1e-12)
    assert math.isclose(tv.mean_flight, math.pi * 0.6 / 2.0, rel_tol=1e-12)
    # planar negative-energy density is flat on the annulus
    area = math.pi * (1.0 - 0.8**2)
    assert math.isclose(tv.wall_density, 1.0 / area, rel_tol=1e-12)
