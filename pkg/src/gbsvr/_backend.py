"""Kernel backend selection.

The compiled ``_core`` extension is used when importable; otherwise the numpy
fallback. ``GBSVR_BACKEND=python`` forces the fallback.
"""

import os

from . import _fallback

try:
    from . import _core
except ImportError:  # extension not built
    _core = None

_IMPLS = {"python": _fallback}
if _core is not None:
    _IMPLS["compiled"] = _core

_active = None


def available() -> list[str]:
    return sorted(_IMPLS)


def use(name: str) -> None:
    global _active, two_means, project_box_hyperplane, smo_svr, ball_summary, accel_ascent
    if name not in _IMPLS:
        raise ValueError(f"backend {name!r} unavailable; have {available()}")
    impl = _IMPLS[name]
    _active = name
    two_means = impl.two_means
    project_box_hyperplane = impl.project_box_hyperplane
    smo_svr = impl.smo_svr
    ball_summary = impl.ball_summary
    accel_ascent = impl.accel_ascent


def active() -> str:
    return _active


def kernels(name: str | None = None):
    """Module implementing the kernels for ``name`` (default: the active one)."""
    return _IMPLS[name or _active]


_requested = os.environ.get("GBSVR_BACKEND", "").strip().lower()
if _requested:
    use(_requested)
else:
    use("compiled" if _core is not None else "python")
