"""Discrete-time Geo/Geo/1 queue: stability and mean sojourn time.

Both functions accept scalars or numpy arrays.
"""

import numpy as np

from .errors import DomainError

__all__ = ["waiting_time", "is_stable"]


def _w(x, y):
    # unchecked kernel; x >= y maps to +inf
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    stable = x < y
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(stable, (1.0 - x) / np.where(stable, y - x, 1.0), np.inf)
    return w


def waiting_time(x, y):
    """Mean number of slots a job spends in a Geo/Geo/1 queue (waiting plus service).

    ``x`` is the per-slot arrival probability and ``y`` the per-slot service
    probability. The result is ``(1 - x) / (y - x)`` when ``x < y`` and ``inf``
    otherwise; an unstable queue is not an error.
    """
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if np.any(~((xa >= 0) & (xa <= 1))):
        raise DomainError(f"arrival probability must lie in [0, 1], got {x!r}")
    if np.any(~((ya > 0) & (ya <= 1))):
        raise DomainError(f"service probability must lie in (0, 1], got {y!r}")
    w = _w(xa, ya)
    return float(w) if w.ndim == 0 else w


def is_stable(x, y):
    """True iff the arrival probability is strictly below the service probability."""
    r = np.asarray(x) < np.asarray(y)
    return bool(r) if r.ndim == 0 else r
