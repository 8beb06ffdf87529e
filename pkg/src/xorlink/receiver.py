"""Receiver: GF(2) decoder, expiry accounting, cumulative feedback.

Arriving coded slots are first reduced by every already-delivered symbol and
peeled: a slot left with a single unknown delivers it, and each delivery is
substituted back through the buffered slots to a fixed point. The buffer is
then brought to reduced row echelon form over GF(2), so anything the slot
system determines is recovered immediately. The recoverable set is a property
of the row space, not of elimination order, which is what lets two independent
engine implementations agree exactly.

When a symbol expires it is projected out of the buffer: one row containing
the dead id eliminates it from the others and is then dropped. That keeps
every relation the buffer still implies about live symbols.
"""

from __future__ import annotations

from .core import (
    Feedback,
    Packet,
    PayloadSlot,
    TimeConfig,
    UncodedSlot,
    xor_payloads,
)

__all__ = ["Receiver"]


class _Pending:
    """A buffered coded slot, kept reduced: `seqs` are all undelivered."""

    __slots__ = ("seqs", "payload")

    def __init__(self, seqs: set[int], payload: bytes):
        self.seqs = seqs
        self.payload = payload

    def xor_with(self, other: "_Pending") -> None:
        self.seqs ^= other.seqs
        self.payload = xor_payloads(self.payload, other.payload)


class Receiver:
    def __init__(self, cfg: TimeConfig):
        self._cfg = cfg
        self._payloads: dict[int, bytes] = {}  # delivered, pruned to the live window
        self._pending: list[_Pending] = []
        self.delivered_count = 0
        self.failure_count = 0

    # -- queries ---------------------------------------------------------------

    def is_delivered(self, seq: int) -> bool:
        return seq in self._payloads

    def payload_of(self, seq: int) -> bytes:
        return self._payloads[seq]

    def pending_slots(self) -> list[frozenset[int]]:
        return [frozenset(p.seqs) for p in self._pending]

    # -- per-interval operations -------------------------------------------------

    def expire_and_count(self, now: int) -> int:
        """Adjudicate the symbol whose deadline is `now`; project it out.

        Returns the number of newly counted failures (0 or 1).
        """
        expiring = now - self._cfg.delta_max
        if expiring < 0:
            return 0
        failed = expiring not in self._payloads
        if failed:
            self.failure_count += 1
            # eliminate the dead id from the buffer without losing the
            # relations it participates in
            eliminator = None
            survivors = []
            singles: list[_Pending] = []
            for p in self._pending:
                if expiring in p.seqs:
                    if eliminator is None:
                        eliminator = p
                        continue
                    p.xor_with(eliminator)
                if len(p.seqs) == 1:
                    singles.append(p)
                elif p.seqs:
                    survivors.append(p)
            self._pending = survivors
            if singles:
                # the projection determined these ids outright
                newly: set[int] = set()
                queue: list[int] = []
                for p in singles:
                    seq = next(iter(p.seqs))
                    if seq not in self._payloads:
                        self._deliver(seq, p.payload, newly, queue)
                self._peel(newly, queue)
                self._eliminate(newly, queue)
        self._payloads.pop(expiring, None)
        return int(failed)

    def process_packet(self, packet: Packet, now: int) -> set[int]:
        return self.process_slots(packet.slots, now)

    def process_slots(self, slots: tuple[PayloadSlot, ...] | list[PayloadSlot], now: int) -> set[int]:
        """Absorb slots, decode to a fixed point, return newly delivered seqs."""
        newly: set[int] = set()
        queue: list[int] = []
        lo = self._cfg.oldest_unexpired(now)
        for slot in slots:
            if isinstance(slot, UncodedSlot):
                if slot.seq < lo or slot.seq in self._payloads:
                    continue
                self._deliver(slot.seq, slot.payload, newly, queue)
            else:
                if any(seq < lo for seq in slot.seqs):
                    continue  # references data that is already dead
                unknown = set(slot.seqs)
                payload = slot.payload
                for seq in slot.seqs:
                    if seq in self._payloads:
                        unknown.discard(seq)
                        payload = xor_payloads(payload, self._payloads[seq])
                if not unknown:
                    continue  # fully redundant
                if len(unknown) == 1:
                    self._deliver(unknown.pop(), payload, newly, queue)
                else:
                    self._pending.append(_Pending(unknown, payload))
        self._peel(newly, queue)
        self._eliminate(newly, queue)
        return newly

    def make_feedback(self, received: bool, last_pkt_seq: int, now: int) -> Feedback:
        """Cumulative report over the unexpired window, after this interval's packet."""
        lo = self._cfg.oldest_unexpired(now)
        beta = 0
        u = last_pkt_seq + 1
        for seq in range(lo, last_pkt_seq + 1):
            if seq not in self._payloads:
                if beta == 0:
                    u = seq
                beta += 1
        return Feedback(ack=received, u=u, beta=beta)

    # -- internals ---------------------------------------------------------------

    def _deliver(self, seq: int, payload: bytes, newly: set[int], queue: list[int]) -> None:
        existing = self._payloads.get(seq)
        if existing is not None:
            if existing != payload:
                raise RuntimeError(f"inconsistent recovery for symbol {seq}")
            return
        self._payloads[seq] = payload
        self.delivered_count += 1
        newly.add(seq)
        queue.append(seq)

    def _peel(self, newly: set[int], queue: list[int]) -> None:
        while queue:
            seq = queue.pop()
            payload = self._payloads[seq]
            survivors: list[_Pending] = []
            for p in self._pending:
                if seq in p.seqs:
                    p.seqs.discard(seq)
                    p.payload = xor_payloads(p.payload, payload)
                    if not p.seqs:
                        continue  # redundant after reduction
                    if len(p.seqs) == 1:
                        self._deliver(next(iter(p.seqs)), p.payload, newly, queue)
                        continue
                survivors.append(p)
            self._pending = survivors

    def _eliminate(self, newly: set[int], queue: list[int]) -> None:
        """Reduce the buffer to row echelon form and deliver what it determines."""
        if len(self._pending) < 2:
            return
        # forward phase: repeatedly take the row with the smallest pivot id and
        # clear that id from the rest
        work = self._pending
        echelon: list[_Pending] = []
        while work:
            idx = min(range(len(work)), key=lambda k: min(work[k].seqs))
            row = work.pop(idx)
            pivot = min(row.seqs)
            remaining = []
            for p in work:
                if pivot in p.seqs:
                    p.xor_with(row)
                if p.seqs:
                    remaining.append(p)
            work = remaining
            echelon.append(row)
        # back-substitution: pivots strictly increase down `echelon`, so walking
        # bottom-up clears every pivot from the rows above it
        for i in range(len(echelon) - 1, 0, -1):
            pivot = min(echelon[i].seqs)
            for j in range(i):
                if pivot in echelon[j].seqs:
                    echelon[j].xor_with(echelon[i])
        self._pending = []
        for row in echelon:
            if len(row.seqs) == 1:
                self._deliver(next(iter(row.seqs)), row.payload, newly, queue)
            else:
                self._pending.append(row)
        # deliveries cannot re-reduce the echelon rows (their pivots are unique),
        # but drain the queue for uniformity
        self._peel(newly, queue)
