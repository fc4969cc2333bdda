import math

import numpy as np
import pytest
from scipy.integrate import quad

from rotodrum.domains import CylinderFinite, CylinderTorus, Disc2D
from rotodrum.ensemble import make_params
from rotodrum.errors import UnsupportedDomain
from rotodrum.theory import (
    ball_volume_ratio,
    mean_chord_flight_static,
    mean_flight_large_d,
    mean_flight_time,
    radial_bin_masses,
    rho0,
    stationary_density,
    theoretical_density,
    theoretical_mean_flight,
    unit_ball_volume,
    v_star,
)


def test_unit_ball_volumes():
    assert math.isclose(unit_ball_volume(2), math.pi, rel_tol=1e-12)
    assert math.isclose(unit_ball_volume(3), 4 * math.pi / 3, rel_tol=1e-12)
    assert math.isclose(ball_volume_ratio(3), (4 * math.pi / 3) / math.pi, rel_tol=1e-12)


def test_v_star_and_rho0():
    assert math.isclose(v_star(0.18, 1.0, 0.8, 1.0), 1.0, rel_tol=1e-12)
    assert rho0(0.5, 1.0, 1.0) == 0.0
    assert math.isclose(rho0(-0.32, 1.0, 1.0), 0.8, rel_tol=1e-12)
    with pytest.raises(ValueError):
        v_star(-0.51, 1.0, 1.0, 1.0)


def test_density_2d_uniform():
    # planar disc with nonnegative energy: the uniform density 1/(pi rho^2)
    h = stationary_density(0.37, 2, 0.25, 1.0, 1.0, 1.0)
    assert math.isclose(h, 1.0 / math.pi, rel_tol=1e-12)
    h2 = stationary_density(0.9, 2, 0.25, 1.3, 0.7, 2.0)
    assert math.isclose(h2, 1.0 / (math.pi * 4.0), rel_tol=1e-12)


def test_density_zero_energy_power_law():
    # E_F = 0: h = d r^(d-2) / (2 (2 l)^(d-2) pi rho^d)
    d, ell, rho_w = 4, 1.5, 1.2
    for r in (0.3, 0.8, 1.1):
        h = stationary_density(r, d, 0.0, 1.0, 1.0, rho_w, half_len=ell)
        expected = d * r ** (d - 2) / (2.0 * (2 * ell) ** (d - 2) * math.pi * rho_w**d)
        assert math.isclose(h, expected, rel_tol=1e-12)


@pytest.mark.parametrize(
    "d,ef,mass,omega,rho,ell",
    [
        (2, 0.5, 1.0, 1.0, 1.0, 1.0),
        (3, 0.5, 1.0, 1.0, 1.0, 1.0),
        (3, -0.32, 1.0, 1.0, 1.0, 1.0),
        (4, 0.0, 2.0, 0.7, 1.3, 0.8),
        (5, -0.5, 1.5, 1.2, 1.1, 1.0),
        (3, 2.0, 0.5, 2.0, 0.9, 2.0),
    ],
)
def test_density_integrates_to_one(d, ef, mass, omega, rho, ell):
    # quadrature oracle over the drum (transverse cube times 2 pi r dr)
    def integrand(r):
        return (
            stationary_density(r, d, ef, mass, omega, rho, half_len=ell)
            * (2 * ell) ** (d - 2)
            * 2.0
            * math.pi
            * r
        )

    inner = rho0(ef, mass, omega)
    total, err = quad(integrand, inner, rho, limit=200)
    assert abs(total - 1.0) < 1e-6


def test_density_vanishes_inside_cutoff():
    assert stationary_density(0.5, 3, -0.32, 1.0, 1.0, 1.0) == 0.0
    assert stationary_density(0.85, 3, -0.32, 1.0, 1.0, 1.0) > 0.0


def test_zero_energy_limits_agree():
    # the nonnegative- and negative-energy forms coincide at E_F -> 0
    for d in (2, 3, 5):
        hp = stationary_density(0.6, d, 1e-300, 1.0, 1.0, 1.0)
        h0 = stationary_density(0.6, d, 0.0, 1.0, 1.0, 1.0)
        hm = stationary_density(0.6, d, -1e-300, 1.0, 1.0, 1.0)
        assert math.isclose(hp, h0, rel_tol=1e-12)
        assert math.isclose(hm, h0, rel_tol=1e-12)
        tp = mean_flight_time(d, 1e-300, 1.0, 1.0, 1.0)
        t0 = mean_flight_time(d, 0.0, 1.0, 1.0, 1.0)
        tm = mean_flight_time(d, -1e-300, 1.0, 1.0, 1.0)
        assert math.isclose(tp, t0, rel_tol=1e-12)
        assert math.isclose(tm, t0, rel_tol=1e-12)


def test_mean_flight_planar_forms():
    # nonnegative energy: pi rho / (2 v*)
    t = mean_flight_time(2, 0.18, 1.0, 0.8, 1.0)
    assert math.isclose(t, math.pi / 2.0, rel_tol=1e-12)
    # negative energy: pi v* / (2 omega^2 rho)
    ef, m, w, r = -0.32, 1.0, 1.0, 1.0
    vs = v_star(ef, m, w, r)
    t = mean_flight_time(2, ef, m, w, r)
    assert math.isclose(t, math.pi * vs / (2.0 * w * w * r), rel_tol=1e-12)


def test_mean_flight_zero_energy():
    # E_F = 0: B(d)/B(d-1) / omega
    assert math.isclose(mean_flight_time(2, 0.0, 1.0, 2.0, 1.0),
                        ball_volume_ratio(2) / 2.0, rel_tol=1e-12)
    assert math.isclose(mean_flight_time(3, 0.0, 1.0, 1.0, 1.0),
                        4.0 / 3.0, rel_tol=1e-12)


def test_mean_flight_large_d_convergence():
    for d, tol in ((50, 0.02), (100, 0.01), (200, 0.005)):
        exact = mean_flight_time(d, 0.5, 1.0, 1.0, 1.0)
        asym = mean_flight_large_d(0.5, 1.0, 1.0, 1.0, d)
        assert abs(exact / asym - 1.0) < tol


def test_mean_chord_static_limit():
    assert math.isclose(mean_chord_flight_static(1.0, 2.0), math.pi / 4.0, rel_tol=1e-12)


def test_radial_bin_masses_match_quadrature():
    d, ef, mass, omega, rho_w = 3, 0.5, 1.0, 1.0, 1.0
    edges = np.linspace(0.0, 1.0, 11)
    masses = radial_bin_masses(edges, d, ef, mass, omega, rho_w)
    assert math.isclose(masses.sum(), 1.0, rel_tol=1e-12)

    def unnorm(r):
        return 2 * math.pi * r * (ef + 0.5 * mass * omega**2 * r * r) ** (d / 2 - 1)

    total = quad(unnorm, 0, rho_w)[0]
    for i in range(10):
        ref = quad(unnorm, edges[i], edges[i + 1])[0] / total
        assert math.isclose(masses[i], ref, rel_tol=1e-10)


def test_param_level_interfaces():
    p = make_params(0.18, Disc2D(1.0), 0.8)
    assert math.isclose(theoretical_mean_flight(p), math.pi / 2, rel_tol=1e-12)
    assert math.isclose(theoretical_density(np.array([0.2, 0.1]), p), 1 / math.pi, rel_tol=1e-12)
    pt = make_params(0.5, CylinderTorus(1.0, 3), 1.0)
    assert theoretical_mean_flight(pt) > 0
    pf = make_params(0.5, CylinderFinite(1.0, 2.0, 3), 1.0)
    assert theoretical_density(np.array([0.2, 0.1, 0.0]), pf) > 0


def test_formulas_reject_multi_ball():
    p = make_params(0.5, Disc2D(1.0), 1.0, masses=(1.0, 1.0), radii=(0.1, 0.1))
    with pytest.raises(UnsupportedDomain):
        theoretical_mean_flight(p)


def test_mean_flight_needs_rotation():
    with pytest.raises(ValueError):
        mean_flight_time(2, 0.5, 1.0, 0.0, 1.0)
