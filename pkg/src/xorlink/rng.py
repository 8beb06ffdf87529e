"""Deterministic random streams shared by the reference engine and the kernels.

splitmix64 seeds xoshiro256** stream states. All 64-bit arithmetic is written
as explicit numpy ufunc calls (np.add, np.multiply, shifts) on uint64 values:
those wrap modulo 2**64 silently in plain Python and compile to native integer
ops under numba, so a stream yields bit-identical values on both paths. That
property is what lets the object-level engine and the flat-array kernel be
compared draw-for-draw in tests.

Each simulation run derives independent substreams (channel, feedback, scheme)
from its seed, so e.g. changing the feedback availability probability can
never perturb the channel's erasure sequence.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import njit

__all__ = [
    "new_state",
    "next_u64",
    "rand01",
    "rand_below",
    "normal",
    "gamma_sample",
    "choose_k_indices",
    "fill_payload",
    "payload_key",
    "Stream",
]

_U64 = np.uint64
_GOLD = _U64(0x9E3779B97F4A7C15)
_MIX1 = _U64(0xBF58476D1CE4E5B9)
_MIX2 = _U64(0x94D049BB133111EB)
_PAYLOAD_SALT = _U64(0xD1B54A32D192ED03)
_INV53 = 2.0**-53


@njit(cache=True)
def _mix64(z):
    # splitmix64 output scrambler
    z = np.multiply(z ^ np.right_shift(z, _U64(30)), _MIX1)
    z = np.multiply(z ^ np.right_shift(z, _U64(27)), _MIX2)
    return z ^ np.right_shift(z, _U64(31))


@njit(cache=True)
def new_state(seed, stream):
    """Fresh xoshiro256** state for substream `stream` of `seed`."""
    out = np.empty(4, dtype=np.uint64)
    z = np.add(_U64(seed), np.multiply(_GOLD, np.add(_U64(stream), _U64(1))))
    for i in range(4):
        z = np.add(z, _GOLD)
        out[i] = _mix64(z)
    return out


@njit(cache=True)
def _rotl(x, k):
    return np.left_shift(x, _U64(k)) | np.right_shift(x, _U64(64 - k))


@njit(cache=True)
def next_u64(state):
    r = np.add(_rotl(np.add(state[0], state[3]), 23), state[0])
    t = np.left_shift(state[1], _U64(17))
    state[2] ^= state[0]
    state[3] ^= state[1]
    state[1] ^= state[2]
    state[0] ^= state[3]
    state[2] ^= t
    state[3] = _rotl(state[3], 45)
    return r


@njit(cache=True)
def rand01(state):
    """Uniform float64 in [0, 1) with 53-bit resolution."""
    return np.float64(np.right_shift(next_u64(state), _U64(11))) * _INV53


@njit(cache=True)
def rand_below(state, n):
    """Uniform integer in [0, n). n must be >= 1 (and far below 2**63)."""
    return np.int64(next_u64(state) % _U64(n))


@njit(cache=True)
def normal(state):
    # Box-Muller; u1 is shifted into (0, 1] so the log is always finite.
    u1 = np.float64(np.add(np.right_shift(next_u64(state), _U64(11)), _U64(1))) * _INV53
    u2 = np.float64(np.right_shift(next_u64(state), _U64(11))) * _INV53
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(6.283185307179586 * u2)


@njit(cache=True)
def gamma_sample(state, shape):
    """Gamma(shape, scale=1) via Marsaglia-Tsang squeeze; any shape > 0."""
    boost = 1.0
    a = shape
    if a < 1.0:
        # boost draw happens first, then the shape+1 sample
        boost = rand01(state) ** (1.0 / a)
        a += 1.0
    d = a - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        x = normal(state)
        v = (1.0 + c * x) ** 3
        if v <= 0.0:
            continue
        u = rand01(state)
        if u < 1.0 - 0.0331 * x * x * x * x:
            return boost * d * v
        if math.log(u) < 0.5 * x * x + d * (1.0 - v + math.log(v)):
            return boost * d * v


@njit(cache=True)
def choose_k_indices(state, n, k, scratch):
    """Partial Fisher-Yates: scratch[:k] becomes k distinct indices from [0, n).

    scratch must have length >= n. Consumes exactly k draws.
    """
    for i in range(n):
        scratch[i] = i
    for j in range(k):
        r = j + rand_below(state, n - j)
        t = scratch[j]
        scratch[j] = scratch[r]
        scratch[r] = t


@njit(cache=True)
def fill_payload(out, key, seq):
    """Deterministic payload bytes for symbol `seq` (counter-mode splitmix64)."""
    base = np.add(_U64(key), np.multiply(_PAYLOAD_SALT, np.add(_U64(seq), _U64(1))))
    w = _U64(0)
    have = 0
    for j in range(out.shape[0]):
        if have == 0:
            w = _mix64(np.add(base, np.multiply(_GOLD, _U64(j // 8))))
            have = 8
        out[j] = np.uint8(w & _U64(0xFF))
        w = np.right_shift(w, _U64(8))
        have -= 1


def payload_key(seed: int) -> np.uint64:
    """Key for the payload generator, independent of the three draw streams.

    Returned as a uint64 scalar: values routinely exceed int64 range.
    """
    return _U64(new_state(seed, 3)[0])


class Stream:
    """Thin object wrapper over a xoshiro256** state array.

    The reference engine uses this for readability; the kernel manipulates the
    same state arrays directly. Both call the identical primitives above.
    """

    __slots__ = ("state",)

    def __init__(self, state: np.ndarray):
        self.state = state

    @classmethod
    def from_seed(cls, seed: int, stream: int) -> "Stream":
        return cls(new_state(seed, stream))

    def random(self) -> float:
        return float(rand01(self.state))

    def below(self, n: int) -> int:
        return int(rand_below(self.state, n))

    def randint1(self, z: int) -> int:
        """Uniform integer in [1, z]."""
        if z < 1:
            raise ValueError(f"randint1 needs z >= 1, got {z}")
        return 1 + self.below(z)

    def normal(self) -> float:
        return float(normal(self.state))

    def gamma(self, shape: float) -> float:
        return float(gamma_sample(self.state, shape))

    def choose(self, pool: list, k: int) -> list:
        """k distinct elements of pool, drawn without replacement."""
        n = len(pool)
        if not 0 <= k <= n:
            raise ValueError(f"cannot choose {k} of {n}")
        if k == 0:
            return []
        scratch = np.empty(n, dtype=np.int64)
        choose_k_indices(self.state, n, k, scratch)
        return [pool[int(scratch[j])] for j in range(k)]
