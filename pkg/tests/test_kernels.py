"""Backend equivalence: the compiled kernels against the pure-Python twins.

The backends do not share random streams, so agreement is statistical:
same distributions, same invariants, deterministic per (backend, seed).
"""

import math

import numpy as np
import pytest

from rotodrum import kernels
from rotodrum.kernels import MODE_OPEN, MODE_TORUS, get_backend


def backends():
    mods = [get_backend("python")]
    try:
        mods.append(get_backend("compiled"))
    except ImportError:
        pass
    return mods


HAVE_COMPILED = len(backends()) == 2


def test_active_backend_is_reported():
    assert kernels.backend_name() in ("python", "compiled")


@pytest.mark.parametrize("mod", backends(), ids=lambda m: m.BACKEND_NAME)
def test_knudsen_deterministic_per_seed(mod):
    runs = [
        mod.knudsen_run(2, 1.0, 1.0, 1.0, MODE_OPEN, 0.0, 0, 2000, math.inf, 0.0, 0, 99, None)
        for _ in range(2)
    ]
    assert np.array_equal(runs[0][0], runs[1][0])
    assert runs[0][6][2] == runs[1][6][2]


@pytest.mark.parametrize("mod", backends(), ids=lambda m: m.BACKEND_NAME)
def test_knudsen_resumes_continuously(mod):
    full = mod.knudsen_run(3, 1.0, 1.0, 1.0, MODE_TORUS, 1.0, 0, 400, math.inf, 0.0, 0, 5, None)
    part1 = mod.knudsen_run(3, 1.0, 1.0, 1.0, MODE_TORUS, 1.0, 0, 150, math.inf, 0.0, 0, 5, None)
    state = part1[6]
    part2 = mod.knudsen_run(3, 1.0, 1.0, 1.0, MODE_TORUS, 1.0, 0, 250, math.inf, 0.0, 0, 5, state)
    # resumed time and winding continue from the chunk boundary
    assert part2[6][2] > part1[6][2]
    assert len(part1[0]) + len(part2[0]) == len(full[0])


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled backend unavailable")
def test_backends_agree_on_flight_statistics():
    py, cy = backends()
    means = {}
    for mod in (py, cy):
        dur = mod.knudsen_run(
            3, 1.0, 1.0, 0.8, MODE_TORUS, 1.0, 0, 60_000, math.inf, 0.0, 0, 17, None
        )[0]
        means[mod.BACKEND_NAME] = (dur.mean(), dur.std() / math.sqrt(len(dur)))
    diff = abs(means["python"][0] - means["compiled"][0])
    se = math.hypot(means["python"][1], means["compiled"][1])
    assert diff < 5.0 * se


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled backend unavailable")
def test_backends_agree_on_gravity_statistics():
    py, cy = backends()
    stats = {}
    for mod in (py, cy):
        grew = 0
        for s in range(30):
            ek_pre, ek_post, ek0, worst, n, t = mod.gravity_run(1.0, 1.0, 1.0, 3.0, 3000, 1000 + s)
            assert worst < 1e-12
            grew += ek_pre.max(initial=ek0) > 2.0 * ek0
        stats[mod.BACKEND_NAME] = grew
    assert abs(stats["python"] - stats["compiled"]) <= 12


@pytest.mark.parametrize("mod", backends(), ids=lambda m: m.BACKEND_NAME)
def test_evolve_keeps_points_inside(mod):
    rng = np.random.default_rng(31)
    n, d = 400, 3
    ang = rng.uniform(0, 2 * math.pi, n)
    rad = 0.9 * np.sqrt(rng.random(n))
    X = np.zeros((n, d))
    X[:, 0] = rad * np.cos(ang)
    X[:, 1] = rad * np.sin(ang)
    X[:, 2] = rng.uniform(-1, 1, n)
    V = rng.normal(size=(n, d))
    X0 = X.copy()
    mod.evolve_pointlike(d, 1.0, 1.0, MODE_TORUS, 1.0, 0, X, V, 7.0, 77)
    assert not np.allclose(X, X0)
    r = np.hypot(X[:, 0], X[:, 1])
    assert (r <= 1.0 + 1e-9).all()
    assert (np.abs(X[:, 2]) <= 1.0 + 1e-12).all()


@pytest.mark.parametrize("mod", backends(), ids=lambda m: m.BACKEND_NAME)
def test_evolve_conserves_rotating_energy(mod):
    rng = np.random.default_rng(32)
    n, d, omega = 200, 2, 0.8
    ang = rng.uniform(0, 2 * math.pi, n)
    rad = 0.95 * np.sqrt(rng.random(n))
    X = np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=1)
    ef = 0.18
    speeds = np.sqrt(2 * ef + omega**2 * rad**2)
    dirs = rng.normal(size=(n, 2))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    V = speeds[:, None] * dirs
    V[:, 0] -= omega * X[:, 1]
    V[:, 1] += omega * X[:, 0]
    mod.evolve_pointlike(d, 1.0, omega, MODE_OPEN, 0.0, 0, X, V, 25.0, 78)
    vF = V.copy()
    vF[:, 0] += omega * X[:, 1]
    vF[:, 1] -= omega * X[:, 0]
    ef_out = 0.5 * np.sum(vF**2, axis=1) - 0.5 * omega**2 * (X[:, 0] ** 2 + X[:, 1] ** 2)
    assert np.abs(ef_out - ef).max() < 1e-9


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled backend unavailable")
def test_env_var_forces_python_backend(tmp_path):
    import subprocess
    import sys

    code = "import rotodrum; print(rotodrum.backend_name())"
    out = subprocess.run(
        [sys.executable, "-c", code],
        env={"ROTODRUM_BACKEND": "python", "PATH": "/usr/bin:/bin"},
        capture_output=True,
        text=True,
        cwd=str(tmp_path),
    )
    assert out.stdout.strip() == "python"
