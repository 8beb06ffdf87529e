"""Sender-side packet construction.

Four schemes share the same framing (slot 0 is always the interval's fresh
symbol): two proposed coding schemes and two benchmarks.

windowed    -- treats every symbol from the last reported missing one onward
               as the candidate window; codes over it when it doesn't fit.
selective   -- tracks exactly which symbols were never acknowledged and codes
               over that narrower candidate list.
repetition  -- no coding; repeats the newest unacknowledged symbols.
blind       -- no feedback use at all; fixed-degree random XORs over the
               unexpired past.

All schemes only ever reference unexpired symbols and never emit more than b
slots. Feedback (u, beta) always describes the previous interval's packet; a
reported u can therefore have expired by one interval, which the senders
normalize away at build time (drop it, decrement beta).
"""

from __future__ import annotations

from typing import Protocol

from .core import CodedSlot, Feedback, Packet, SymbolSource, TimeConfig, UncodedSlot
from .degree import DegreeTable, build_table, uniform_degree
from .rng import Stream

__all__ = [
    "Sender",
    "WindowedSender",
    "SelectiveSender",
    "RepetitionSender",
    "BlindSender",
    "make_sender",
    "SCHEMES",
]

SCHEMES = ("windowed", "selective", "repetition", "blind")


class Sender(Protocol):
    scheme: str

    def observe_feedback(self, now: int, fb: Feedback | None) -> None: ...

    def build_packet(self, now: int) -> Packet: ...


class _SlotBuilder:
    """Accumulates slots, enforcing the b-slot cap and uncoded uniqueness."""

    def __init__(self, cfg: TimeConfig, source: SymbolSource, now: int):
        self._b = cfg.b
        self._source = source
        self._now = now
        self._slots: list = []
        self._seen: set[int] = set()

    def add_uncoded(self, seq: int) -> bool:
        if len(self._slots) >= self._b or seq in self._seen:
            return False
        self._slots.append(UncodedSlot(seq, self._source.payload(seq)))
        self._seen.add(seq)
        return True

    def add_coded(self, seqs) -> bool:
        if len(self._slots) >= self._b:
            return False
        fs = frozenset(seqs)
        self._slots.append(CodedSlot(fs, self._source.xor_of(fs)))
        return True

    def packet(self) -> Packet:
        return Packet(self._now, tuple(self._slots))


class WindowedSender:
    """Codes over the contiguous window from the oldest reported missing symbol."""

    scheme = "windowed"

    def __init__(self, cfg: TimeConfig, stream: Stream, source: SymbolSource, table: DegreeTable):
        self._cfg = cfg
        self._stream = stream
        self._source = source
        self._table = table
        self._u_l = 0  # anchor from the most recent feedback ever received
        self._fresh: Feedback | None = None

    def observe_feedback(self, now: int, fb: Feedback | None) -> None:
        if fb is not None:
            self._u_l = fb.u
        self._fresh = fb

    def build_packet(self, now: int) -> Packet:
        cfg = self._cfg
        b = cfg.b
        lo = cfg.oldest_unexpired(now)
        pb = _SlotBuilder(cfg, self._source, now)
        pb.add_uncoded(now)

        if self._fresh is not None:
            u, beta = self._fresh.u, self._fresh.beta
            if beta > 0 and u < lo:
                u, beta = lo, beta - 1  # the reported oldest missing symbol just expired
            win = now - u
            if beta <= 0:
                pass  # receiver has everything that still matters
            elif win <= b - 1:
                for s in range(u, now):  # whole window fits uncoded
                    pb.add_uncoded(s)
            elif beta == win:
                # everything in the window is missing; coding cannot narrow it
                for s in range(u, u + b - 1):
                    pb.add_uncoded(s)
            elif beta == 1:
                pb.add_uncoded(u)
            else:
                # 1 < beta < win: retransmit s_u, code over the rest of the window
                pb.add_uncoded(u)
                pool = list(range(u + 1, now))
                d = self._table.lookup(win - 1, beta - 1)
                for _ in range(b - 2):
                    pb.add_coded(self._stream.choose(pool, d))
        else:
            z = min(now - self._u_l, now - lo)
            if z <= 0:
                pass
            elif z <= b - 1:
                for s in range(now - 1, now - z - 1, -1):  # newest first
                    pb.add_uncoded(s)
            else:
                # degree is a fresh uniform draw per slot
                pool = list(range(now - z, now))
                for _ in range(b - 1):
                    d = uniform_degree(z, self._stream)
                    pb.add_coded(self._stream.choose(pool, d))

        return pb.packet()


class _AckTrackingSender:
    """Shared bookkeeping: the set of sent-but-never-acknowledged live symbols.

    An ack only certifies the uncoded content of the immediately preceding
    packet; coded slots prove nothing about their constituents. Cumulative
    feedback prunes everything below u, and expiry prunes the rest.
    """

    def __init__(self, cfg: TimeConfig, stream: Stream, source: SymbolSource):
        self._cfg = cfg
        self._stream = stream
        self._source = source
        self._unacked: set[int] = set()
        self._last_sent: tuple[int, tuple[int, ...]] | None = None
        self._fresh: Feedback | None = None

    def observe_feedback(self, now: int, fb: Feedback | None) -> None:
        if fb is not None:
            self._unacked = {s for s in self._unacked if s >= fb.u}
            if fb.ack and self._last_sent is not None and self._last_sent[0] == now - 1:
                self._unacked.difference_update(self._last_sent[1])
        self._fresh = fb
        lo = self._cfg.oldest_unexpired(now)
        self._unacked = {s for s in self._unacked if s >= lo}

    def _finish(self, now: int, packet: Packet) -> Packet:
        self._last_sent = (now, packet.uncoded_seqs)
        self._unacked.add(now)
        return packet


class SelectiveSender(_AckTrackingSender):
    """Codes over the tracked unacknowledged set instead of a whole window."""

    scheme = "selective"

    def __init__(self, cfg: TimeConfig, stream: Stream, source: SymbolSource, table: DegreeTable):
        super().__init__(cfg, stream, source)
        self._table = table

    def build_packet(self, now: int) -> Packet:
        cfg = self._cfg
        b = cfg.b
        lo = cfg.oldest_unexpired(now)
        pb = _SlotBuilder(cfg, self._source, now)
        pb.add_uncoded(now)
        m = sorted(self._unacked)
        n = len(m)

        if self._fresh is not None:
            u, beta = self._fresh.u, self._fresh.beta
            if beta > 0 and u < lo:
                beta -= 1  # the reported oldest missing symbol just expired
                u = m[0] if (beta > 0 and m) else u
            if beta > 0 and n == 0:
                beta = 0  # cannot happen when feedback is honest; stay safe
            if beta <= 0:
                pass
            elif beta == 1:
                pb.add_uncoded(u)
            elif n <= beta:
                # the tracked set is exactly the missing set: send it plainly
                pb.add_uncoded(u)
                quota = min(n - 1, b - 2)
                added = 0
                for s in m:
                    if added >= quota:
                        break
                    if s != u:
                        pb.add_uncoded(s)
                        added += 1
            elif n <= b - 1:
                for s in m:
                    pb.add_uncoded(s)
            else:
                pb.add_uncoded(u)
                pool = [s for s in m if s != u]
                d = self._table.lookup(n - 1, beta - 1)
                for _ in range(b - 2):
                    pb.add_coded(self._stream.choose(pool, d))
        else:
            if n <= b - 1:
                for s in m:
                    pb.add_uncoded(s)
            else:
                for _ in range(b - 1):
                    d = uniform_degree(n, self._stream)
                    pb.add_coded(self._stream.choose(m, d))

        return self._finish(now, pb.packet())


class RepetitionSender(_AckTrackingSender):
    """Benchmark: plain repetition of the newest unacknowledged symbols."""

    scheme = "repetition"

    def build_packet(self, now: int) -> Packet:
        cfg = self._cfg
        lo = cfg.oldest_unexpired(now)
        pb = _SlotBuilder(cfg, self._source, now)
        pb.add_uncoded(now)
        used = {now}
        fb = self._fresh
        if fb is not None and fb.beta > 0 and fb.u >= lo:
            pb.add_uncoded(fb.u)
            used.add(fb.u)
        for s in sorted(self._unacked, reverse=True):
            if s in used:
                continue
            if not pb.add_uncoded(s):
                break
        return self._finish(now, pb.packet())


class BlindSender:
    """Benchmark: feedback-free fixed-degree XORs over the unexpired past."""

    scheme = "blind"

    def __init__(self, cfg: TimeConfig, stream: Stream, source: SymbolSource, degree: int | None = None):
        self._cfg = cfg
        self._stream = stream
        self._source = source
        self._degree = max(1, cfg.delta_max // 2) if degree is None else degree
        if not 1 <= self._degree <= cfg.delta_max:
            raise ValueError(f"blind degree must be in [1, {cfg.delta_max}], got {self._degree}")

    def observe_feedback(self, now: int, fb: Feedback | None) -> None:
        pass  # blind by design

    def build_packet(self, now: int) -> Packet:
        cfg = self._cfg
        lo = cfg.oldest_unexpired(now)
        pb = _SlotBuilder(cfg, self._source, now)
        pb.add_uncoded(now)
        w = now - lo  # previously sent symbols still alive
        if w > 0:
            d = min(self._degree, w)
            pool = list(range(lo, now))
            for _ in range(cfg.b - 1):
                pb.add_coded(self._stream.choose(pool, d))
        return pb.packet()


def make_sender(
    scheme: str,
    cfg: TimeConfig,
    stream: Stream,
    source: SymbolSource,
    table: DegreeTable | None = None,
    blind_degree: int | None = None,
) -> Sender:
    if scheme in ("windowed", "selective") and table is None:
        table = build_table(max(2, cfg.delta_max))
    if scheme == "windowed":
        return WindowedSender(cfg, stream, source, table)
    if scheme == "selective":
        return SelectiveSender(cfg, stream, source, table)
    if scheme == "repetition":
        return RepetitionSender(cfg, stream, source)
    if scheme == "blind":
        return BlindSender(cfg, stream, source, blind_degree)
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
