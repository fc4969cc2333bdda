"""Backend selection for the hot simulation loops.

The compiled extension ``rotodrum._speed`` (Cython) is preferred; the
pure-Python twin ``rotodrum._ref`` is used when the extension is absent
or when the environment variable ``ROTODRUM_BACKEND=python`` forces it.
Both expose the same functions with the same semantics; they are
statistically equivalent but do not share bit-exact random streams.
``backend_name()`` reports which one is active, and every run report
records it.
"""

from __future__ import annotations

import os

from ._ref import MODE_FINITE, MODE_OPEN, MODE_TORUS

if os.environ.get("ROTODRUM_BACKEND", "").lower() == "python":
    from . import _ref as _impl
else:
    try:
        from . import _speed as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _ref as _impl


def backend_name() -> str:
    return _impl.BACKEND_NAME


def knudsen_run(*args, **kwargs):
    return _impl.knudsen_run(*args, **kwargs)


def evolve_pointlike(*args, **kwargs):
    return _impl.evolve_pointlike(*args, **kwargs)


def gravity_run(*args, **kwargs):
    return _impl.gravity_run(*args, **kwargs)


def get_backend(name: str):
    """Explicit backend module for tests and benchmarks."""
    if name == "python":
        from . import _ref

        return _ref
    if name == "compiled":
        from . import _speed  # type: ignore[attr-defined]

        return _speed
    raise ValueError(f"unknown backend {name!r}")
