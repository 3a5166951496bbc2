"""Counter-based random numbers.

Every draw is a pure function of ``(seed, ray_id, bounce, purpose)``, so a
path's random choices do not depend on which worker traces it or in which
order chunks run.
"""

from __future__ import annotations

import numpy as np

# purposes
LAUNCH_U = 0
LAUNCH_V = 1
BRANCH = 2
ROULETTE = 3

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def _mix(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer (wrapping uint64 arithmetic)."""
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def hash_key(seed, ray_id, bounce, purpose) -> np.ndarray:
    seed = np.asarray(seed, dtype=np.uint64)
    ray_id = np.atleast_1d(np.asarray(ray_id, dtype=np.uint64))
    tag = (np.asarray(bounce, dtype=np.uint64) << np.uint64(8)) | np.asarray(purpose, dtype=np.uint64)
    with np.errstate(over="ignore"):
        h = _mix(np.atleast_1d(seed ^ _GOLDEN))
        h = _mix(h + ray_id)
        return _mix(h + _GOLDEN * (tag + np.uint64(1)))


def uniform(seed, ray_id, bounce, purpose) -> np.ndarray:
    """Uniform doubles in ``[0, 1)`` with 53 random bits, one per ``ray_id``."""
    h = hash_key(seed, ray_id, bounce, purpose)
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)
