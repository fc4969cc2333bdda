"""Microcanonical sampling and trajectory statistics.

On a level set of the conserved rotating-frame energy E_F the invariant
measure factorizes: ball centers carry the density

    (E_F + sum_k m_k omega^2 |x_k^H|^2 / 2)^(n d / 2 - 1)

over admissible configurations, and the mass-weighted co-rotating
velocities ``sqrt(m_k/2) v_k^F`` are uniform on the sphere of radius
``sqrt(E_FK)``.  ``sample_microcanonical`` realizes this by rejection:
centers are proposed uniformly over the drum (shrunken by each ball's
radius), kept if admissible, then accepted with probability equal to the
density over its supremum, which sits at the maximal horizontal radius.

``run_knudsen`` and ``invariance_test`` drive the backend kernels for the
single-particle cosine-law statistics (flight times, occupation density,
winding) and for evolve-and-compare invariance checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import ks_2samp

from . import kernels
from .domains import (
    Ball,
    BallSpec,
    CylinderFinite,
    CylinderTorus,
    Disc2D,
    SystemState,
    admissible,
)
from .dynamics import advance
from .errors import InfeasibleEnsemble, UnsupportedDomain
from .frames import FrameParams
from .theory import rho0 as _rho0
from .theory import theoretical_mean_flight, v_star

#: consecutive rejected proposals before the sampler gives up
REJECTION_BUDGET = 1_000_000


@dataclass(frozen=True)
class EnsembleParams:
    """Target energy E_F plus ball specs, drum and frame."""

    ef: float
    balls: tuple
    dom: object
    fp: FrameParams

    def single_pointlike(self) -> bool:
        return len(self.balls) == 1 and self.balls[0].radius == 0.0


@dataclass
class FlightStats:
    """Trajectory statistics of one cosine-law run.

    ``durations`` are the flight times between consecutive lateral-wall
    reflections; ``sample_r``/``sample_theta`` are the horizontal radius
    and the unwrapped winding angle at uniformly spaced times; ``theta``
    and ``total_time`` give the final unwrapped angle and elapsed time.
    """

    durations: np.ndarray
    start_angles: np.ndarray
    end_angles: np.ndarray
    sample_r: np.ndarray
    sample_theta: np.ndarray
    sample_dt: float
    total_time: float
    theta: float
    n_cap_hits: int
    ef: float

    @property
    def n_flights(self) -> int:
        return len(self.durations)

    def mean_flight(self) -> float:
        return float(np.mean(self.durations))

    def flight_se(self) -> float:
        n = len(self.durations)
        return float(np.std(self.durations, ddof=1) / math.sqrt(n)) if n > 1 else math.inf


def _geometry(dom):
    """Kernel geometry tuple (d, rho, mode, half_len) for a drum."""
    if isinstance(dom, Disc2D):
        return 2, dom.rho, kernels.MODE_OPEN, 0.0
    if isinstance(dom, CylinderTorus):
        return dom.dim, dom.rho, kernels.MODE_TORUS, 1.0
    if isinstance(dom, CylinderFinite):
        return dom.dim, dom.rho, kernels.MODE_FINITE, dom.half_len
    raise UnsupportedDomain(f"flight statistics need a disc/cylinder/torus drum, got {dom!r}")


def _max_center_radius(dom, ball_radius):
    if isinstance(dom, (Disc2D, CylinderFinite, CylinderTorus)):
        return dom.rho - ball_radius
    return None


def _propose_positions(dom, radius, n, d, rng):
    """Uniform centers over the drum shrunk by one ball radius, (n, d)."""
    r_max = _max_center_radius(dom, radius)
    if r_max is None or r_max <= 0:
        raise InfeasibleEnsemble("ball does not fit in the drum")
    u = rng.random(n)
    ang = 2.0 * math.pi * rng.random(n)
    rad = r_max * np.sqrt(u)
    out = np.empty((n, d))
    out[:, 0] = rad * np.cos(ang)
    out[:, 1] = rad * np.sin(ang)
    if d > 2:
        if isinstance(dom, CylinderFinite):
            half = dom.half_len - radius
        else:
            half = 1.0
        out[:, 2:] = rng.uniform(-half, half, size=(n, d - 2))
    return out


def sample_positions(p: EnsembleParams, n_samples: int, rng) -> np.ndarray:
    """Draw ``n_samples`` center configurations, shape (n_samples, n, d).

    Rejection sampling with the density normalized by its supremum, which
    is attained with every center at its maximal horizontal radius.
    """
    n = len(p.balls)
    d = p.fp.dim
    omega = p.fp.omega
    exponent = n * d / 2.0 - 1.0
    sup_base = p.ef
    for spec in p.balls:
        r_max = _max_center_radius(p.dom, spec.radius)
        if r_max is None:
            raise UnsupportedDomain("microcanonical sampler needs a disc/cylinder/torus drum")
        sup_base += 0.5 * spec.mass * omega * omega * r_max * r_max
    if sup_base <= 0.0:
        raise InfeasibleEnsemble("E_F too negative: empty state space")
    if n == 1:
        return _sample_positions_single(p, n_samples, sup_base, exponent, rng)
    out = np.empty((n_samples, n, d))
    got = 0
    rejected = 0
    while got < n_samples:
        xs = [_propose_positions(p.dom, spec.radius, 1, d, rng)[0] for spec in p.balls]
        if n > 1 and not admissible(p.dom, list(zip(p.balls, xs))):
            rejected += 1
            if rejected > REJECTION_BUDGET:
                raise InfeasibleEnsemble("rejection budget exhausted (admissibility)")
            continue
        base = p.ef
        for spec, x in zip(p.balls, xs):
            base += 0.5 * spec.mass * omega * omega * (x[0] ** 2 + x[1] ** 2)
        if base <= 0.0:
            rejected += 1
            if rejected > REJECTION_BUDGET:
                raise InfeasibleEnsemble("rejection budget exhausted (energy)")
            continue
        if exponent > 0.0:
            accept = (base / sup_base) ** exponent
            if rng.random() >= accept:
                rejected += 1
                if rejected > REJECTION_BUDGET:
                    raise InfeasibleEnsemble("rejection budget exhausted (density)")
                continue
        out[got] = xs
        got += 1
        rejected = 0
    return out


def _sample_positions_single(p, n_samples, sup_base, exponent, rng):
    """Vectorized rejection for one ball (no pair admissibility needed)."""
    spec = p.balls[0]
    d = p.fp.dim
    omega = p.fp.omega
    out = np.empty((n_samples, 1, d))
    got = 0
    tried = 0
    while got < n_samples:
        batch = min(max(4096, 2 * (n_samples - got)), 1 << 20)
        xs = _propose_positions(p.dom, spec.radius, batch, d, rng)
        base = p.ef + 0.5 * spec.mass * omega * omega * (xs[:, 0] ** 2 + xs[:, 1] ** 2)
        keep = base > 0.0
        if exponent > 0.0:
            keep &= rng.random(batch) < (np.maximum(base, 0.0) / sup_base) ** exponent
        kept = xs[keep]
        tried += batch
        if tried > REJECTION_BUDGET and got == 0 and len(kept) == 0:
            raise InfeasibleEnsemble("rejection budget exhausted")
        take = min(len(kept), n_samples - got)
        out[got : got + take, 0, :] = kept[:take]
        got += take
    return out


def sample_velocities(p: EnsembleParams, positions: np.ndarray, rng) -> np.ndarray:
    """Co-rotating velocities for given centers, mapped to the inertial frame.

    The mass-weighted co-rotating velocity vector is uniform on the sphere
    of radius sqrt(E_FK), with E_FK fixed by the positions.
    """
    n_samples, n, d = positions.shape
    omega = p.fp.omega
    masses = np.array([spec.mass for spec in p.balls])
    rH2 = positions[:, :, 0] ** 2 + positions[:, :, 1] ** 2
    efk = p.ef + 0.5 * (masses[None, :] * omega * omega * rH2).sum(axis=1)
    g = rng.standard_normal((n_samples, n * d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    u = g.reshape(n_samples, n, d)
    scale = np.sqrt(2.0 * efk[:, None] / masses[None, :])  # (n_samples, n)
    vF = u * scale[:, :, None]
    v = vF.copy()
    v[:, :, 0] -= omega * positions[:, :, 1]
    v[:, :, 1] += omega * positions[:, :, 0]
    return v


def sample_microcanonical(p: EnsembleParams, rng) -> SystemState:
    """One state drawn from the invariant measure at energy ``p.ef``."""
    xs = sample_positions(p, 1, rng)
    vs = sample_velocities(p, xs, rng)
    balls = [
        Ball(spec, xs[0, k].copy(), vs[0, k].copy()) for k, spec in enumerate(p.balls)
    ]
    return SystemState(0.0, balls)


def run_knudsen(
    p: EnsembleParams,
    T: float | None,
    rng,
    n_flights: int | None = None,
    sample_dt: float = 0.0,
    lambertian_caps: bool = False,
) -> FlightStats:
    """Cosine-law flight statistics for a single pointlike particle.

    Runs until elapsed time ``T`` (completing the final flight) or, if
    ``n_flights`` is given instead, for exactly that many flights.  The
    particle starts at the lateral wall with a fresh cosine draw, which is
    the stationary wall-contact law by rotational symmetry.  Cap faces of
    a finite cylinder reflect specularly unless ``lambertian_caps`` is set.
    """
    if not p.single_pointlike():
        raise UnsupportedDomain("flight statistics need a single pointlike particle")
    d, rho, mode, half_len = _geometry(p.dom)
    mass = p.balls[0].mass
    omega = p.fp.omega
    vstar = v_star(p.ef, mass, omega, rho)
    seed = int(rng.integers(0, 2**63 - 1))
    if n_flights is None:
        if T is None:
            raise ValueError("give either T or n_flights")
        mean_est = theoretical_mean_flight(p)
        t_stop = T
        chunk = max(1024, int(1.2 * T / mean_est) + 16)
    else:
        t_stop = math.inf
        chunk = n_flights
    max_samples = int(t_stop / sample_dt) + 2 if (sample_dt > 0 and t_stop < math.inf) else 0
    if n_flights is not None and sample_dt > 0:
        raise ValueError("uniform-time sampling needs a time horizon, not a flight count")

    state = None
    dur_parts, a0_parts, a1_parts, r_parts, th_parts = [], [], [], [], []
    caps = 0
    n_sampled = 0
    remaining = n_flights
    while True:
        want = chunk if remaining is None else min(chunk, remaining)
        dur, a0, a1, sr, sth, ncap, state = kernels.knudsen_run(
            d, rho, omega, vstar, mode, half_len, int(lambertian_caps),
            want, t_stop, sample_dt, max(max_samples - n_sampled, 0),
            seed, state,
        )
        n_sampled += len(sr)
        seed = (seed + 0x9E3779B97F4A7C15) % (2**63 - 1)
        dur_parts.append(dur)
        a0_parts.append(a0)
        a1_parts.append(a1)
        r_parts.append(sr)
        th_parts.append(sth)
        caps += ncap
        if remaining is not None:
            remaining -= len(dur)
            if remaining <= 0:
                break
        if state[2] >= t_stop or len(dur) == 0:
            break
    return FlightStats(
        durations=np.concatenate(dur_parts),
        start_angles=np.concatenate(a0_parts),
        end_angles=np.concatenate(a1_parts),
        sample_r=np.concatenate(r_parts) if r_parts else np.empty(0),
        sample_theta=np.concatenate(th_parts) if th_parts else np.empty(0),
        sample_dt=sample_dt,
        total_time=state[2],
        theta=state[3],
        n_cap_hits=caps,
        ef=p.ef,
    )


def winding_rate(stats: FlightStats) -> float:
    """Long-run angular rate Theta(T)/T of the unwrapped winding angle."""
    if stats.n_flights < 1000:
        raise ValueError("winding rate needs at least 1000 flights")
    return stats.theta / stats.total_time


def frame_speeds(p: EnsembleParams, X: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Co-rotating speeds |v^F| for stacked states (n_samples, n, d)."""
    omega = p.fp.omega
    vF = V.copy()
    vF[..., 0] += omega * X[..., 1]
    vF[..., 1] -= omega * X[..., 0]
    return np.linalg.norm(vF, axis=-1)


def invariance_test(
    p: EnsembleParams, T: float, n_samples: int, rng, law: str = "auto"
) -> dict:
    """Evolve microcanonical samples by time T; compare marginals.

    Draws ``n_samples`` states, advances each by ``T`` (cosine-law walls
    for a single pointlike particle, specular hard-ball dynamics
    otherwise), and reports two-sample KS distances between the initial
    and evolved marginals of the horizontal radius and of the co-rotating
    speed, pooled over balls.
    """
    if law == "auto":
        law = "lambertian" if p.single_pointlike() else "specular"
    xs = sample_positions(p, n_samples, rng)
    vs = sample_velocities(p, xs, rng)
    r0 = np.hypot(xs[..., 0], xs[..., 1]).ravel()
    s0 = frame_speeds(p, xs, vs).ravel()
    if T == 0.0:
        x1, v1 = xs, vs
    elif law == "lambertian" and p.single_pointlike():
        d, rho, mode, half_len = _geometry(p.dom)
        X = np.ascontiguousarray(xs[:, 0, :], dtype=float)
        V = np.ascontiguousarray(vs[:, 0, :], dtype=float)
        seed = int(rng.integers(0, 2**63 - 1))
        kernels.evolve_pointlike(d, rho, p.fp.omega, mode, half_len, 0, X, V, T, seed)
        x1, v1 = X[:, None, :], V[:, None, :]
    else:
        x1 = np.empty_like(xs)
        v1 = np.empty_like(vs)
        for i in range(n_samples):
            balls = [
                Ball(spec, xs[i, k].copy(), vs[i, k].copy())
                for k, spec in enumerate(p.balls)
            ]
            state, _ = advance(SystemState(0.0, balls), p.dom, p.fp, T)
            for k in range(len(p.balls)):
                x1[i, k] = state.balls[k].x
                v1[i, k] = state.balls[k].v
    r1 = np.hypot(x1[..., 0], x1[..., 1]).ravel()
    s1 = frame_speeds(p, x1, v1).ravel()
    return {
        "ks_radius": float(ks_2samp(r0, r1).statistic) if T > 0 else _ks_identical(r0, r1),
        "ks_speed_F": float(ks_2samp(s0, s1).statistic) if T > 0 else _ks_identical(s0, s1),
        "n_samples": n_samples,
        "T": T,
        "law": law,
    }


def _ks_identical(a, b):
    return 0.0 if np.array_equal(a, b) else float(ks_2samp(a, b).statistic)


def forbidden_radius(p: EnsembleParams) -> float:
    """Inner radius below which the stationary density vanishes (E_F < 0)."""
    return _rho0(p.ef, p.balls[0].mass, p.fp.omega)


def make_params(
    ef: float, dom, omega: float, masses=(1.0,), radii=(0.0,)
) -> EnsembleParams:
    balls = tuple(BallSpec(m, r) for m, r in zip(masses, radii))
    return EnsembleParams(ef=ef, balls=balls, dom=dom, fp=FrameParams(omega, dom.dim))
