"""Counter-based uniforms: u(seed, stream, t) is a pure function of its arguments.

Built on the SplitMix64 finaliser. Because no generator state is carried
between draws, two policies run with the same seed see the same base-arm
realisation X_i(t) at every (t, i), whatever actions they play.
"""
from __future__ import annotations

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_SEED_SALT = np.uint64(0x5851F42D4C957F2D)
_S30, _S27, _S31, _S11 = (np.uint64(s) for s in (30, 27, 31, 11))
_INV53 = 1.0 / (1 << 53)

# stream = 4 * base_arm + channel
OUTCOME = 0     # Bernoulli draw of the base-arm
DELIVERY = 1    # sporadic side-observation delivery
EXPLORE = 2     # policy coin flips (base_arm slot 0)
PICK = 3        # policy categorical draws (base_arm slot 0)


def mix64(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def seed_key(seed) -> np.ndarray:
    return mix64(np.asarray(seed, dtype=np.uint64) ^ _SEED_SALT)


def uniforms(seed_keys, stream, t) -> np.ndarray:
    """Broadcast (seed_key, stream, t) -> float64 uniforms in [0, 1)."""
    with np.errstate(over="ignore"):
        k = mix64(np.asarray(seed_keys, dtype=np.uint64) + np.asarray(stream, dtype=np.uint64) * _GAMMA)
        z = mix64(k + np.asarray(t, dtype=np.uint64) * _GAMMA)
    return (z >> _S11).astype(np.float64) * _INV53


class CounterRNG:
    """Handle for one run seed; ``uniform(t, stream)`` never depends on call order."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self.key = seed_key(self.seed)

    def uniform(self, t, stream) -> np.ndarray:
        return uniforms(self.key, stream, t)

    def outcome(self, t, base_arms) -> np.ndarray:
        return self.uniform(t, 4 * np.asarray(base_arms, dtype=np.uint64) + np.uint64(OUTCOME))

    def delivery(self, t, base_arms) -> np.ndarray:
        return self.uniform(t, 4 * np.asarray(base_arms, dtype=np.uint64) + np.uint64(DELIVERY))
