"""Experiment configuration: parsing, validation and defaults.

Two input formats are accepted:

* a line-based key-value text (``key = value``, ``#`` comments, dotted
  keys for grouping, comma-separated lists), diff-friendly for experiment
  records;
* JSON with the same key names, either flat dotted keys or nested
  objects.

``parse_config`` validates everything it can statically and reports all
offending keys at once.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .domains import CylinderFinite, CylinderTorus, Disc2D, StarShaped2D
from .errors import ParseError, ValidationError

EXPERIMENTS = (
    "conservation",
    "no_fermi_bound",
    "knudsen_flight",
    "stationary_density",
    "winding",
    "microcanonical_invariance",
    "gravity_bounce",
    "gravity_lambertian",
)

_DEFAULTS = {
    "threads": 1,
    "out": "out",
    "domain.kind": "disc",
    "domain.rho": 1.0,
    "domain.half_len": 1.0,
    "domain.dim": 2,
    "domain.fourier_cos": (1.0,),
    "domain.fourier_sin": (),
    "frame.omega": 1.0,
    "ensemble.ef": 0.0,
    "balls.masses": (1.0,),
    "balls.radii": (0.0,),
    "run.n_flights": 100000,
    "run.n_samples": 10000,
    "run.n_events": 10000,
    "run.n_bounces": 10000,
    "run.max_events": 10000,
    "run.n_seeds": 100,
    "run.T": 10.0,
    "run.sample_dt": 0.0,
    "run.lambertian_caps": False,
    "gravity.g": 1.0,
    "gravity.p1": (0.0, 1.0),
    "gravity.p2": (1.0, 0.0),
    "gravity.vx": 100.0,
    "gravity.speed0": 3.0,
    "perturb_on_tie": False,
}

_LIST_KEYS = {
    "domain.fourier_cos",
    "domain.fourier_sin",
    "balls.masses",
    "balls.radii",
    "gravity.p1",
    "gravity.p2",
}
_INT_KEYS = {
    "seed",
    "threads",
    "domain.dim",
    "run.n_flights",
    "run.n_samples",
    "run.n_events",
    "run.n_bounces",
    "run.max_events",
    "run.n_seeds",
}
_BOOL_KEYS = {"perturb_on_tie", "run.lambertian_caps"}
_STR_KEYS = {"experiment", "out", "domain.kind"}


@dataclass
class ExperimentConfig:
    """Validated configuration of one experiment run."""

    experiment: str
    seed: int
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)

    def domain(self):
        kind = self.values["domain.kind"]
        if kind == "disc":
            return Disc2D(self.values["domain.rho"])
        if kind == "cylinder":
            return CylinderFinite(
                self.values["domain.rho"],
                self.values["domain.half_len"],
                self.values["domain.dim"],
            )
        if kind == "torus":
            return CylinderTorus(self.values["domain.rho"], self.values["domain.dim"])
        if kind == "star":
            return StarShaped2D(
                self.values["domain.fourier_cos"], self.values["domain.fourier_sin"]
            )
        raise ValidationError([f"domain.kind: unknown kind {kind!r}"])

    def echo(self) -> dict:
        """Plain-dict snapshot embedded in reports."""
        out = {"experiment": self.experiment, "seed": self.seed}
        out.update({k: (list(v) if isinstance(v, tuple) else v) for k, v in sorted(self.values.items())})
        return out


def _parse_scalar(key: str, raw: str):
    raw = raw.strip()
    if key in _STR_KEYS:
        return raw
    if key in _BOOL_KEYS:
        low = raw.lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if key in _LIST_KEYS:
        if raw == "":
            return ()
        return tuple(float(tok) for tok in raw.split(","))
    if key in _INT_KEYS:
        return int(raw)
    return float(raw)


def _read_keyvalue(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ParseError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        try:
            out[key] = _parse_scalar(key, raw)
        except ValueError as exc:
            raise ParseError(f"line {lineno}: key {key!r}: {exc}") from exc
    return out


def _flatten_json(obj, prefix="") -> dict:
    flat = {}
    for key, val in obj.items():
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            flat.update(_flatten_json(val, f"{name}."))
        elif isinstance(val, list):
            flat[name] = tuple(float(v) for v in val)
        elif isinstance(val, bool):
            flat[name] = val
        elif isinstance(val, (int, float)):
            flat[name] = int(val) if name in _INT_KEYS else float(val)
        else:
            flat[name] = str(val)
    return flat


def parse_config(path) -> ExperimentConfig:
    """Read and validate a config file; raises with every invalid key named."""
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            raw = _flatten_json(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
    else:
        raw = _read_keyvalue(text)
    return validate_config(raw)


def validate_config(raw: dict) -> ExperimentConfig:
    errors = []
    known = set(_DEFAULTS) | {"experiment", "seed"}
    for key in raw:
        if key not in known:
            errors.append(f"{key}: unknown key")
    experiment = raw.get("experiment")
    if experiment is None:
        errors.append("experiment: missing")
    elif experiment not in EXPERIMENTS:
        errors.append(f"experiment: unknown experiment {experiment!r}")
    seed = raw.get("seed")
    if seed is None:
        errors.append("seed: missing (a seed is mandatory)")
    elif not isinstance(seed, int) or isinstance(seed, bool) or not (0 <= seed < 2**64):
        errors.append("seed: must be an integer in [0, 2^64)")

    values = dict(_DEFAULTS)
    for key, val in raw.items():
        if key in ("experiment", "seed"):
            continue
        if key in values:
            values[key] = val

    def positive(key, strict=True):
        v = values[key]
        if strict and not v > 0:
            errors.append(f"{key}: must be > 0, got {v}")
        elif not strict and v < 0:
            errors.append(f"{key}: must be >= 0, got {v}")

    if values["frame.omega"] < 0:
        errors.append(f"frame.omega: must be >= 0, got {values['frame.omega']}")
    positive("domain.rho")
    positive("domain.half_len")
    if values["domain.dim"] < 2:
        errors.append("domain.dim: must be >= 2")
    if values["domain.kind"] not in ("disc", "cylinder", "torus", "star"):
        errors.append(f"domain.kind: unknown kind {values['domain.kind']!r}")
    if values["domain.kind"] == "cylinder" and values["domain.dim"] < 3:
        errors.append("domain.dim: finite cylinder needs dim >= 3")
    if values["domain.kind"] == "torus" and values["domain.dim"] < 3:
        errors.append("domain.dim: torus drum needs dim >= 3")
    masses = values["balls.masses"]
    radii = values["balls.radii"]
    if len(masses) != len(radii):
        errors.append("balls.radii: length must match balls.masses")
    if any(m <= 0 for m in masses):
        errors.append("balls.masses: all masses must be > 0")
    if any(r < 0 for r in radii):
        errors.append("balls.radii: all radii must be >= 0")
    for key in ("run.n_flights", "run.n_samples", "run.n_events", "run.n_bounces",
                "run.max_events", "run.n_seeds", "threads"):
        if values[key] < 1:
            errors.append(f"{key}: must be >= 1")
    if values["run.T"] <= 0:
        errors.append("run.T: must be > 0")
    if values["run.sample_dt"] < 0:
        errors.append("run.sample_dt: must be >= 0")
    positive("gravity.g")
    for pkey in ("gravity.p1", "gravity.p2"):
        p = values[pkey]
        if len(p) != 2:
            errors.append(f"{pkey}: expected two coordinates")
        elif abs(math.hypot(*p) - 1.0) > 1e-9:
            errors.append(f"{pkey}: anchor must lie on the unit circle")
    if values["gravity.p1"] == values["gravity.p2"]:
        errors.append("gravity.p2: anchors must be distinct")
    if errors:
        raise ValidationError(errors)
    return ExperimentConfig(experiment=experiment, seed=seed, values=values)
