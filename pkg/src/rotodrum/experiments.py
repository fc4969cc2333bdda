"""Experiment dispatch, acceptance thresholds and structured output.

Each experiment writes CSV artifacts plus a JSON report into the output
directory.  Reports embed the full config, the package version and the
active kernel backend; every estimate carries its standard error and
sample count, and each acceptance check appears as a named pass/fail
entry.  CSV content is deterministic for a fixed (config, seed); wall
clock time lives only in the JSON report.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import EXPERIMENTS, ExperimentConfig
from .domains import BallSpec
from .dynamics import CollisionLog, advance
from .ensemble import (
    EnsembleParams,
    invariance_test,
    run_knudsen,
    sample_microcanonical,
    winding_rate,
)
from .errors import SimultaneousCollision
from .frames import FrameParams
from .gravity import BouncePoints, fit_asymptotics, iterate_bounces, iterate_vertical
from .kernels import backend_name, gravity_run
from .theory import radial_bin_masses, rho0, theoretical_mean_flight

EXPERIMENT_SUMMARIES = {
    "conservation": "co-rotating energy conservation across many hard-ball events",
    "no_fermi_bound": "global kinetic-energy bound from the conserved energy",
    "knudsen_flight": "mean free-flight time vs the closed form (cosine-law walls)",
    "stationary_density": "radial occupation histogram vs the stationary density",
    "winding": "long-run winding rate of the trajectory vs the drum rate",
    "microcanonical_invariance": "evolve microcanonical samples and compare marginals",
    "gravity_bounce": "two-point bounce model: growth laws and periodicity",
    "gravity_lambertian": "gravity plus cosine-law walls: energy-growth fraction",
}


def _f(x) -> str:
    """Shortest round-trip decimal for CSV cells (plain float repr)."""
    return repr(float(x))


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _write_csv(path: Path, header: str, rows) -> None:
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")


def _report(cfg: ExperimentConfig, estimates, theory, checks, artifacts, t0) -> dict:
    return {
        "experiment": cfg.experiment,
        "version": __version__,
        "backend": backend_name(),
        "config": cfg.echo(),
        "estimates": estimates,
        "theory": theory,
        "checks": checks,
        "passed": all(checks.values()),
        "artifacts": [str(a) for a in artifacts],
        "wall_clock_s": time.time() - t0,
    }


def _ensemble_params(cfg: ExperimentConfig) -> EnsembleParams:
    dom = cfg.domain()
    balls = tuple(
        BallSpec(m, r) for m, r in zip(cfg["balls.masses"], cfg["balls.radii"])
    )
    return EnsembleParams(
        ef=cfg["ensemble.ef"], balls=balls, dom=dom,
        fp=FrameParams(cfg["frame.omega"], dom.dim),
    )


def _run_collisions(cfg: ExperimentConfig, rng):
    p = _ensemble_params(cfg)
    state = sample_microcanonical(p, rng)
    n_events = cfg["run.n_events"]
    try:
        _, log = advance(state, p.dom, p.fp, math.inf, max_events=n_events)
    except SimultaneousCollision:
        if not cfg["perturb_on_tie"]:
            raise
        for b in state.balls:
            b.x += 1e-9 * rng.standard_normal(len(b.x))
        _, log = advance(state, p.dom, p.fp, math.inf, max_events=n_events)
    return p, log


def run_conservation(cfg: ExperimentConfig, rng, out: Path) -> dict:
    t0 = time.time()
    p, log = _run_collisions(cfg, rng)
    csv_path = out / "collision_log.csv"
    _write_csv(csv_path, CollisionLog.CSV_HEADER, log.to_csv_rows())
    jump = log.max_relative_ef_jump()
    drift = log.cumulative_ef_drift()
    estimates = {
        "n_events": len(log),
        "max_rel_ef_jump": jump,
        "cumulative_rel_drift": drift,
    }
    checks = {
        "per_event_conservation": jump < 1e-9,
        "cumulative_drift": drift < 1e-6,
    }
    return _report(cfg, estimates, {}, checks, [csv_path], t0)


def run_no_fermi_bound(cfg: ExperimentConfig, rng, out: Path) -> dict:
    t0 = time.time()
    p, log = _run_collisions(cfg, rng)
    csv_path = out / "collision_log.csv"
    _write_csv(csv_path, CollisionLog.CSV_HEADER, log.to_csv_rows())
    from .domains import sup_H_radius

    R = sup_H_radius(p.dom)
    M = sum(b.mass for b in p.balls)
    ef0 = log.entries[0].ef_pre if log.entries else p.ef
    bound = 2.0 * ef0 + 2.0 * M * p.fp.omega**2 * R * R
    ek_max = max((max(e.ek_pre, e.ek_post) for e in log.entries), default=0.0)
    estimates = {"n_events": len(log), "ek_max": ek_max, "bound": bound}
    checks = {"energy_bound": ek_max <= bound + 1e-9}
    return _report(cfg, estimates, {}, checks, [csv_path], t0)


def run_knudsen_flight(cfg: ExperimentConfig, rng, out: Path) -> dict:
    t0 = time.time()
    p = _ensemble_params(cfg)
    stats = run_knudsen(
        p, None, rng, n_flights=cfg["run.n_flights"],
        lambertian_caps=cfg["run.lambertian_caps"],
    )
    theory = theoretical_mean_flight(p)
    est = stats.mean_flight()
    se = stats.flight_se()
    z = (est - theory) / se
    csv_path = out / "flights.csv"
    _write_csv(
        csv_path,
        "duration,start_angle,end_angle,EF",
        (
            f"{_f(d)},{_f(a)},{_f(b)},{_f(stats.ef)}"
            for d, a, b in zip(stats.durations, stats.start_angles, stats.end_angles)
        ),
    )
    estimates = {
        "mean_flight": est,
        "se": se,
        "n_flights": stats.n_flights,
        "z": z,
    }
    checks = {
        "relative_error_1pct": abs(est - theory) <= 0.01 * theory,
        "within_3_sigma": abs(z) <= 3.0,
    }
    return _report(cfg, estimates, {"mean_flight": theory}, checks, [csv_path], t0)


def run_stationary_density(cfg: ExperimentConfig, rng, out: Path) -> dict:
    t0 = time.time()
    p = _ensemble_params(cfg)
    mft = theoretical_mean_flight(p)
    n_samples = cfg["run.n_samples"]
    sample_dt = cfg["run.sample_dt"] or mft / 2.0
    T = n_samples * sample_dt
    stats = run_knudsen(
        p, T, rng, sample_dt=sample_dt, lambertian_caps=cfg["run.lambertian_caps"]
    )
    d, rho_w = p.dom.dim, p.dom.rho
    mass = p.balls[0].mass
    edges = rho_w * np.sqrt(np.linspace(0.0, 1.0, 201))
    hist, _ = np.histogram(stats.sample_r, bins=edges)
    frac = hist / max(len(stats.sample_r), 1)
    theo = radial_bin_masses(edges, d, p.ef, mass, p.fp.omega, rho_w)
    l1 = float(np.abs(frac - theo).sum())
    inner = rho0(p.ef, mass, p.fp.omega)
    below = int((stats.sample_r < inner - 1e-9).sum())
    csv_path = out / "radial_histogram.csv"
    _write_csv(
        csv_path,
        "r_lo,r_hi,observed_fraction,theory_fraction",
        (
            f"{_f(edges[i])},{_f(edges[i + 1])},{_f(frac[i])},{_f(theo[i])}"
            for i in range(len(frac))
        ),
    )
    estimates = {
        "l1_distance": l1,
        "n_samples": len(stats.sample_r),
        "samples_below_cutoff": below,
        "cutoff_radius": inner,
    }
    checks = {"l1_below_0.02": l1 < 0.02, "no_mass_below_cutoff": below == 0}
    return _report(cfg, estimates, {}, checks, [csv_path], t0)


def run_winding(cfg: ExperimentConfig, rng, out: Path) -> dict:
    t0 = time.time()
    p = _ensemble_params(cfg)
    mft = theoretical_mean_flight(p)
    sample_dt = cfg["run.sample_dt"] or mft / 2.0
    T = cfg["run.n_flights"] * mft
    stats = run_knudsen(p, T, rng, sample_dt=sample_dt)
    rate = winding_rate(stats)
    omega = p.fp.omega
    # block-wise standard error of the rate over 100 time blocks
    blocks = np.array_split(np.diff(stats.sample_theta), 100)
    block_rates = np.array([b.sum() for b in blocks]) / (stats.total_time / 100.0)
    se = float(block_rates.std(ddof=1) / math.sqrt(len(block_rates)))
    estimates = {
        "winding_rate": rate,
        "se": se,
        "z": (rate - omega) / se if se > 0 else 0.0,
        "n_flights": stats.n_flights,
        "total_time": stats.total_time,
    }
    checks = {"rate_within_2pct": abs(rate - omega) <= 0.02 * omega}
    if p.ef < 0:
        increments = np.diff(stats.sample_theta)
        checks["theta_strictly_increasing"] = bool(np.all(increments > 0.0))
        estimates["min_theta_increment"] = float(increments.min()) if len(increments) else math.nan
    csv_path = out / "winding_samples.csv"
    _write_csv(
        csv_path,
        "t,theta",
        (
            f"{_f((i + 1) * sample_dt)},{_f(th)}"
            for i, th in enumerate(stats.sample_theta)
        ),
    )
    return _report(cfg, estimates, {"omega": omega}, checks, [csv_path], t0)


def run_microcanonical_invariance(cfg: ExperimentConfig, rng, out: Path) -> dict:
    t0 = time.time()
    p = _ensemble_params(cfg)
    rep = invariance_test(p, cfg["run.T"], cfg["run.n_samples"], rng)
    threshold = 0.01 if rep["law"] == "lambertian" else 0.02
    estimates = dict(rep)
    checks = {
        "ks_radius": rep["ks_radius"] < threshold,
        "ks_speed_F": rep["ks_speed_F"] < threshold,
    }
    return _report(cfg, estimates, {"ks_threshold": threshold}, checks, [], t0)


def run_gravity_bounce(cfg: ExperimentConfig, rng, out: Path) -> dict:
    t0 = time.time()
    p1 = tuple(cfg["gravity.p1"])
    p2 = tuple(cfg["gravity.p2"])
    g = cfg["gravity.g"]
    omega = cfg["frame.omega"]
    n_bounces = cfg["run.n_bounces"]
    estimates: dict = {}
    theory: dict = {}
    checks: dict = {}
    artifacts = []
    if p1[0] == p2[0]:
        posts = iterate_vertical(p1[0], -abs(cfg["gravity.vx"]), n_bounces, omega)
        vys = np.array([v[1] for v in posts])
        drift = float(np.abs(vys[2:] - vys[:-2]).max()) if len(vys) > 2 else 0.0
        estimates.update({"n_bounces": len(posts), "period2_drift": drift})
        checks["period_2"] = drift < 1e-9
    else:
        bp = BouncePoints(p1, p2, g=g, omega=omega)
        records = iterate_bounces(bp, cfg["gravity.vx"], n_bounces)
        csv_path = out / "bounces.csv"
        _write_csv(
            csv_path,
            "k,s_k,vx_pre,vy_pre,vx_post,vy_post,delta,residual,EK,EF_contact",
            (
                f"{r.k},{_f(r.s_k)},{_f(r.v_pre[0])},{_f(r.v_pre[1])},"
                f"{_f(r.v_post[0])},{_f(r.v_post[1])},{_f(r.delta)},{_f(r.residual)},"
                f"{_f(0.5 * (r.v_pre[0] ** 2 + r.v_pre[1] ** 2))},{_f(r.ef_residual)}"
                for r in records
            ),
        )
        artifacts.append(csv_path)
        estimates["n_bounces"] = len(records)
        estimates["max_ef_residual"] = max(r.ef_residual for r in records)
        checks["reflection_energy_conserved"] = estimates["max_ef_residual"] < 1e-10
        if p1[0] == -p2[0]:
            v_pre = np.array([r.v_pre for r in records])
            drift = float(np.abs(v_pre[2:] - v_pre[:-2]).max())
            estimates["period2_drift"] = drift
            checks["period_2"] = drift < 1e-9
        else:
            fit = fit_asymptotics(records, bp)
            theory.update(
                {
                    "c1": bp.c1(),
                    "exponent": 1.0 / 3.0,
                    "prefactor": (1.5 * bp.c1()) ** (1.0 / 3.0),
                    "energy_slope": g * omega * abs(p1[0] + p2[0]),
                }
            )
            estimates.update(
                {
                    "c1_fitted": fit.c1_fitted,
                    "exponent": fit.exponent,
                    "prefactor": fit.prefactor,
                    "energy_slope": fit.energy_slope,
                    "k_offset": fit.k_offset,
                }
            )
            checks.update(
                {
                    "exponent_third": abs(fit.exponent - 1.0 / 3.0) <= 0.01,
                    "prefactor_3pct": abs(fit.prefactor - theory["prefactor"])
                    <= 0.03 * theory["prefactor"],
                    "energy_slope_5pct": abs(fit.energy_slope - theory["energy_slope"])
                    <= 0.05 * theory["energy_slope"],
                }
            )
    return _report(cfg, estimates, theory, checks, artifacts, t0)


def run_gravity_lambertian(cfg: ExperimentConfig, rng, out: Path) -> dict:
    t0 = time.time()
    n_seeds = cfg["run.n_seeds"]
    max_events = cfg["run.max_events"]
    rho_w = cfg["domain.rho"]
    omega = cfg["frame.omega"]
    g = cfg["gravity.g"]
    speed0 = cfg["gravity.speed0"]
    seeds = [int(rng.integers(0, 2**63 - 1)) for _ in range(n_seeds)]

    def one(seed):
        ek_pre, ek_post, ek0, worst, n_done, _t = gravity_run(
            rho_w, omega, g, speed0, max_events, seed
        )
        max_ek = float(max(ek_pre.max(initial=ek0), ek_post.max(initial=ek0)))
        return ek0, max_ek, worst, n_done

    threads = cfg["threads"]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, seeds))
    else:
        results = [one(s) for s in seeds]
    exceeded = [max_ek > 4.0 * ek0 for ek0, max_ek, _, _ in results]
    fraction = sum(exceeded) / n_seeds
    worst_resid = max(r[2] for r in results)
    csv_path = out / "gravity_seeds.csv"
    _write_csv(
        csv_path,
        "seed_index,ek_initial,ek_max,exceeded_4x,n_events",
        (
            f"{i},{_f(r[0])},{_f(r[1])},{int(r[1] > 4.0 * r[0])},{r[3]}"
            for i, r in enumerate(results)
        ),
    )
    estimates = {
        "fraction_exceeding_4x": fraction,
        "se": math.sqrt(max(fraction * (1.0 - fraction), 1.0 / n_seeds) / n_seeds),
        "n_seeds": n_seeds,
        "max_speed_residual": worst_resid,
    }
    checks = {
        "positive_fraction": fraction > 0.0,
        "reflection_energy_conserved": worst_resid < 1e-12,
    }
    return _report(cfg, estimates, {}, checks, [csv_path], t0)


_RUNNERS = {
    "conservation": run_conservation,
    "no_fermi_bound": run_no_fermi_bound,
    "knudsen_flight": run_knudsen_flight,
    "stationary_density": run_stationary_density,
    "winding": run_winding,
    "microcanonical_invariance": run_microcanonical_invariance,
    "gravity_bounce": run_gravity_bounce,
    "gravity_lambertian": run_gravity_lambertian,
}

assert set(_RUNNERS) == set(EXPERIMENTS)


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> dict:
    """Run one experiment; writes artifacts and report.json, returns the report."""
    out = Path(out_dir if out_dir is not None else cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    report = _RUNNERS[cfg.experiment](cfg, rng, out)
    with open(out / "report.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return report
