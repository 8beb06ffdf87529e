"""Core domain types: symbols, packet slots, feedback, timing rules.

One information symbol is created per interval and must be delivered within
delta_max intervals of its creation; a packet sent in interval i carries up to
b slots, each either a single symbol or an XOR of several. Feedback is
cumulative: (ack for the last packet, u = oldest undelivered unexpired symbol,
beta = how many undelivered unexpired symbols exist).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rng import fill_payload, payload_key

__all__ = [
    "SymbolId",
    "TimeConfig",
    "InfoSymbol",
    "UncodedSlot",
    "CodedSlot",
    "PayloadSlot",
    "Packet",
    "Feedback",
    "SymbolSource",
    "oldest_unexpired",
    "is_expired",
    "xor_payloads",
    "packet_cost",
]

SymbolId = int


def oldest_unexpired(now: int, delta_max: int) -> int:
    """Smallest symbol id still usable during interval `now`.

    Symbol i is live during intervals i .. i+delta_max-1 and counts as failed
    at the start of interval i+delta_max if still undelivered.
    """
    return max(0, now - delta_max + 1)


def is_expired(seq: int, now: int, delta_max: int) -> bool:
    return seq < oldest_unexpired(now, delta_max)


@dataclass(frozen=True)
class TimeConfig:
    """Timing and framing parameters shared by sender and receiver."""

    delta_max: int
    b: int = 3
    symbol_bytes: int = 1

    def __post_init__(self):
        if self.delta_max < 1:
            raise ValueError(f"delta_max must be >= 1, got {self.delta_max}")
        if self.b < 1:
            raise ValueError(f"b must be >= 1, got {self.b}")
        if self.symbol_bytes < 1:
            raise ValueError(f"symbol_bytes must be >= 1, got {self.symbol_bytes}")

    def oldest_unexpired(self, now: int) -> int:
        return oldest_unexpired(now, self.delta_max)


@dataclass(frozen=True)
class InfoSymbol:
    seq: SymbolId
    payload: bytes

    def __post_init__(self):
        if self.seq < 0:
            raise ValueError("seq must be non-negative")
        if len(self.payload) == 0:
            raise ValueError("payload must be non-empty")


@dataclass(frozen=True)
class UncodedSlot:
    """A single symbol carried verbatim."""

    seq: SymbolId
    payload: bytes


@dataclass(frozen=True)
class CodedSlot:
    """XOR of the payloads of `seqs` (degree = len(seqs), may be 1)."""

    seqs: frozenset[int]
    payload: bytes

    def __post_init__(self):
        if len(self.seqs) == 0:
            raise ValueError("coded slot needs at least one symbol")

    @property
    def degree(self) -> int:
        return len(self.seqs)


PayloadSlot = UncodedSlot | CodedSlot


@dataclass(frozen=True)
class Packet:
    """One transmission: slot 0 is always the interval's fresh symbol, uncoded."""

    seq: int
    slots: tuple[PayloadSlot, ...]

    def __post_init__(self):
        if not self.slots:
            raise ValueError("packet must carry at least one slot")
        head = self.slots[0]
        if not isinstance(head, UncodedSlot) or head.seq != self.seq:
            raise ValueError("slot 0 must be the current symbol, uncoded")
        seen: set[int] = set()
        length = len(head.payload)
        for slot in self.slots:
            if len(slot.payload) != length:
                raise ValueError("all slots must carry equal-length payloads")
            if isinstance(slot, UncodedSlot):
                if slot.seq in seen:
                    raise ValueError(f"duplicate uncoded symbol {slot.seq}")
                seen.add(slot.seq)

    @property
    def uncoded_seqs(self) -> tuple[int, ...]:
        return tuple(s.seq for s in self.slots if isinstance(s, UncodedSlot))


@dataclass(frozen=True)
class Feedback:
    """Cumulative receiver report generated at the end of an interval.

    ack     -- whether the packet of that interval arrived
    u       -- oldest undelivered unexpired symbol (last seq + 1 if none)
    beta    -- number of undelivered unexpired symbols
    """

    ack: bool
    u: int
    beta: int

    def __post_init__(self):
        if self.u < 0 or self.beta < 0:
            raise ValueError("u and beta must be non-negative")


def xor_payloads(a: bytes, b: bytes) -> bytes:
    """Bytewise XOR; arguments must be the same length."""
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    return bytes(x ^ y for x, y in zip(a, b))


def packet_cost(packet: Packet) -> tuple[int, int]:
    """(symbols combined, XOR ops) for building `packet`.

    A degree-d coded slot combines d symbols at a cost of d-1 XORs; uncoded
    slots cost nothing.
    """
    combined = 0
    ops = 0
    for slot in packet.slots:
        if isinstance(slot, CodedSlot):
            combined += slot.degree
            ops += slot.degree - 1
    return combined, ops


@dataclass
class SymbolSource:
    """Deterministic payload provider: symbol seq -> pseudorandom bytes.

    Senders regenerate any unexpired symbol's payload on demand instead of
    storing a history, and the engine uses the same generator to verify that
    decoded payloads are bit-exact.
    """

    seed: int
    symbol_bytes: int = 1
    _key: int = field(init=False, repr=False)

    def __post_init__(self):
        if self.symbol_bytes < 1:
            raise ValueError("symbol_bytes must be >= 1")
        self._key = payload_key(self.seed)

    def payload(self, seq: int) -> bytes:
        buf = np.empty(self.symbol_bytes, dtype=np.uint8)
        fill_payload(buf, self._key, seq)
        return bytes(buf)

    def symbol(self, seq: int) -> InfoSymbol:
        return InfoSymbol(seq, self.payload(seq))

    def xor_of(self, seqs) -> bytes:
        """XOR of the payloads of `seqs` (used to build coded slots)."""
        out = bytearray(self.symbol_bytes)
        for s in seqs:
            for i, byte in enumerate(self.payload(s)):
                out[i] ^= byte
        return bytes(out)
