"""Erasure channels and the feedback-availability gate.

Each channel exposes one packet-level draw per interval. The step functions
are plain numeric primitives (njit-compiled when numba is enabled) operating
on an RNG state array; the classes below wrap them with per-run state. The
simulation kernel calls the same primitives, so both engines consume the
channel stream identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._accel import njit
from .rng import Stream, gamma_sample, rand01

__all__ = [
    "BernoulliParams",
    "GilbertElliottParams",
    "LoRaParams",
    "ChannelParams",
    "BernoulliChannel",
    "GilbertElliottChannel",
    "LoRaChannel",
    "make_channel",
    "channel_kind",
    "feedback_arrives",
]

GOOD = 1
BAD = 0

_GE_INIT_CODES = {"good": 0, "bad": 1, "stationary": 2}


# --- parameter records -------------------------------------------------------


@dataclass(frozen=True)
class BernoulliParams:
    """Independent per-packet delivery with probability p_success."""

    p_success: float

    def __post_init__(self):
        if not 0.0 <= self.p_success <= 1.0:
            raise ValueError(f"p_success must be in [0, 1], got {self.p_success}")


@dataclass(frozen=True)
class GilbertElliottParams:
    """Two-state Markov channel: delivery iff the chain is in the good state.

    The chain steps once before every transmission. Stationary loss rate is
    p_gb / (p_gb + p_bg).
    """

    p_gb: float
    p_bg: float
    initial_state: str = "good"

    def __post_init__(self):
        for name in ("p_gb", "p_bg"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.initial_state not in _GE_INIT_CODES:
            raise ValueError(
                f"initial_state must be one of {sorted(_GE_INIT_CODES)}, got {self.initial_state!r}"
            )

    @property
    def stationary_loss(self) -> float:
        total = self.p_gb + self.p_bg
        return self.p_gb / total if total > 0 else 0.0


@dataclass(frozen=True)
class LoRaParams:
    """Simplified uplink with log-distance path loss, Nakagami-m fading and capture.

    The receiver sits at the origin. Interferer positions are drawn uniformly
    in interferer_box x interferer_box once per run; each interval every
    interferer transmits independently with interferer_tx_prob. A packet is
    delivered iff the sender's faded power reaches sensitivity_dbm and exceeds
    the strongest concurrently active interferer by capture_db.

    interferer_tx_prob is the per-packet same-channel collision probability,
    not the raw duty cycle: 1% duty cycle, an overlap window of two airtimes,
    and uniform use of the 8 EU868 channels give 0.01 * 2 / 8 = 0.0025.
    """

    n_interferers: int = 0
    sender_pos: tuple[float, float] = (36.0, 36.0)
    interferer_box: tuple[float, float] = (30.0, 42.0)
    tx_power_dbm: float = 14.0
    sensitivity_dbm: float = -132.0
    capture_db: float = 6.0
    path_loss_exponent: float = 4.0
    ref_distance_m: float = 40.0
    ref_loss_db: float = 127.0
    nakagami_m: float = 2.5
    interferer_tx_prob: float = 0.0025

    def __post_init__(self):
        if self.n_interferers < 0:
            raise ValueError("n_interferers must be >= 0")
        if not 0.0 <= self.interferer_tx_prob <= 1.0:
            raise ValueError("interferer_tx_prob must be in [0, 1]")
        if self.ref_distance_m <= 0:
            raise ValueError("ref_distance_m must be positive")
        if self.path_loss_exponent < 0:
            raise ValueError("path_loss_exponent must be >= 0")
        if not (self.nakagami_m > 0):  # also rejects NaN; inf means no fading
            raise ValueError("nakagami_m must be > 0 (math.inf disables fading)")
        lo, hi = self.interferer_box
        if hi < lo:
            raise ValueError("interferer_box must be (low, high) with high >= low")
        if math.hypot(*self.sender_pos) <= 0:
            raise ValueError("sender must not sit on top of the receiver")

    @property
    def sender_distance(self) -> float:
        return math.hypot(*self.sender_pos)


ChannelParams = BernoulliParams | GilbertElliottParams | LoRaParams


def channel_kind(params: ChannelParams) -> str:
    if isinstance(params, BernoulliParams):
        return "bernoulli"
    if isinstance(params, GilbertElliottParams):
        return "gilbert_elliott"
    if isinstance(params, LoRaParams):
        return "lora"
    raise TypeError(f"unknown channel params: {params!r}")


# --- step primitives (shared with the kernel) --------------------------------


@njit(cache=True)
def bern_transmit(rng_state, p_success):
    return rand01(rng_state) < p_success


@njit(cache=True)
def ge_init_state(rng_state, p_gb, p_bg, init_code):
    if init_code == 0:
        return GOOD
    if init_code == 1:
        return BAD
    total = p_gb + p_bg
    pi_bad = p_gb / total if total > 0.0 else 0.0
    return BAD if rand01(rng_state) < pi_bad else GOOD


@njit(cache=True)
def ge_step(rng_state, state, p_gb, p_bg):
    """One Markov transition; returns the new state (transmit happens in it)."""
    u = rand01(rng_state)
    if state == GOOD:
        return BAD if u < p_gb else GOOD
    return GOOD if u < p_bg else BAD


@njit(cache=True)
def lora_distances(rng_state, n, lo, hi):
    """Static interferer distances to the origin: positions uniform in the box."""
    out = np.empty(n, dtype=np.float64)
    for k in range(n):
        x = lo + (hi - lo) * rand01(rng_state)
        y = lo + (hi - lo) * rand01(rng_state)
        out[k] = math.sqrt(x * x + y * y)
    return out


@njit(cache=True)
def _fading_db(rng_state, m):
    if math.isinf(m):
        return 0.0  # no fading
    # unit-mean Nakagami-m power gain ~ Gamma(m, 1/m)
    return 10.0 * math.log10(gamma_sample(rng_state, m) / m)


@njit(cache=True)
def _lora_rx_dbm(rng_state, dist, tx, ref_loss, ref_d, plexp, m):
    return tx - (ref_loss + 10.0 * plexp * math.log10(dist / ref_d)) + _fading_db(rng_state, m)


@njit(cache=True)
def lora_transmit(rng_state, d_sender, dists, tx, sens, capture, plexp, ref_d, ref_loss, m, p_active):
    """One uplink attempt. Draw order: sender fading, then interferers by index."""
    ps = _lora_rx_dbm(rng_state, d_sender, tx, ref_loss, ref_d, plexp, m)
    strongest = -math.inf
    for k in range(dists.shape[0]):
        if rand01(rng_state) < p_active:
            pk = _lora_rx_dbm(rng_state, dists[k], tx, ref_loss, ref_d, plexp, m)
            if pk > strongest:
                strongest = pk
    if ps < sens:
        return False
    if strongest > -math.inf and ps - strongest < capture:
        return False
    return True


@njit(cache=True)
def fb_draw(rng_state, p_feedback):
    return rand01(rng_state) < p_feedback


# --- object wrappers ----------------------------------------------------------


class BernoulliChannel:
    def __init__(self, params: BernoulliParams, stream: Stream):
        self.params = params
        self._stream = stream

    def transmit(self) -> bool:
        return bool(bern_transmit(self._stream.state, self.params.p_success))


class GilbertElliottChannel:
    def __init__(self, params: GilbertElliottParams, stream: Stream):
        self.params = params
        self._stream = stream
        self._state = int(
            ge_init_state(
                stream.state, params.p_gb, params.p_bg, _GE_INIT_CODES[params.initial_state]
            )
        )

    @property
    def state(self) -> str:
        return "good" if self._state == GOOD else "bad"

    def transmit(self) -> bool:
        self._state = int(
            ge_step(self._stream.state, self._state, self.params.p_gb, self.params.p_bg)
        )
        return self._state == GOOD


class LoRaChannel:
    def __init__(self, params: LoRaParams, stream: Stream):
        self.params = params
        self._stream = stream
        lo, hi = params.interferer_box
        self.interferer_distances = lora_distances(stream.state, params.n_interferers, lo, hi)

    def transmit(self) -> bool:
        p = self.params
        return bool(
            lora_transmit(
                self._stream.state,
                p.sender_distance,
                self.interferer_distances,
                p.tx_power_dbm,
                p.sensitivity_dbm,
                p.capture_db,
                p.path_loss_exponent,
                p.ref_distance_m,
                p.ref_loss_db,
                p.nakagami_m,
                p.interferer_tx_prob,
            )
        )


Channel = BernoulliChannel | GilbertElliottChannel | LoRaChannel


def make_channel(params: ChannelParams, stream: Stream) -> Channel:
    if isinstance(params, BernoulliParams):
        return BernoulliChannel(params, stream)
    if isinstance(params, GilbertElliottParams):
        return GilbertElliottChannel(params, stream)
    if isinstance(params, LoRaParams):
        return LoRaChannel(params, stream)
    raise TypeError(f"unknown channel params: {params!r}")


def feedback_arrives(p_feedback: float, stream: Stream) -> bool:
    """Whether this interval's feedback reaches the sender (one draw, always)."""
    return bool(fb_draw(stream.state, p_feedback))
