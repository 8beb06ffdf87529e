"""Coded-slot degree selection.

When a sender knows that exactly y of the x symbols in its candidate pool are
still missing at the receiver, a degree-d XOR of d pool symbols is immediately
decodable iff it covers exactly one missing symbol:

    P(decode | x, y, d) = y * C(x-y, d-1) / C(x, d)

degree_select maximizes this in exact integer arithmetic, breaking ties toward
the smallest degree so the table is unambiguous and cheap to apply. Senders
with no fresh knowledge fall back to a uniform degree draw.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .rng import Stream

__all__ = [
    "recovery_probability",
    "degree_select",
    "build_table",
    "DegreeTable",
    "uniform_degree",
]


def _check_domain(x: int, y: int) -> None:
    if not (x > y > 0):
        raise ValueError(f"need x > y > 0, got x={x}, y={y}")


def recovery_probability(x: int, y: int, d: int) -> float:
    """Probability a random degree-d slot over the pool decodes a new symbol."""
    _check_domain(x, y)
    if not 1 <= d <= x:
        raise ValueError(f"degree must be in [1, {x}], got {d}")
    if d - 1 > x - y:
        return 0.0
    return y * comb(x - y, d - 1) / comb(x, d)


def degree_select(x: int, y: int) -> int:
    """argmax_d P(decode | x, y, d); ties break toward the smallest d."""
    _check_domain(x, y)
    best_d = 1
    best_num = y  # y * C(x-y, 0)
    best_den = x  # C(x, 1)
    for d in range(2, x + 1):
        if d - 1 > x - y:
            break  # zero probability from here on
        num = y * comb(x - y, d - 1)
        den = comb(x, d)
        # exact cross-multiplied comparison, strict so ties keep the smaller d
        if num * best_den > best_num * den:
            best_d, best_num, best_den = d, num, den
    return best_d


@dataclass(frozen=True)
class DegreeTable:
    """Precomputed degree_select over 0 < y < x <= q_max (q_max*(q_max-1)/2 entries)."""

    q_max: int
    _entries: dict[tuple[int, int], int]

    def lookup(self, x: int, y: int) -> int:
        _check_domain(x, y)
        if x > self.q_max:
            raise ValueError(f"x={x} exceeds table bound q_max={self.q_max}")
        return self._entries[(x, y)]

    def __len__(self) -> int:
        return len(self._entries)

    def items(self):
        return self._entries.items()

    def as_array(self) -> np.ndarray:
        """Dense int64 array a[x, y] for kernel use (0 outside the domain)."""
        arr = np.zeros((self.q_max + 1, self.q_max + 1), dtype=np.int64)
        for (x, y), d in self._entries.items():
            arr[x, y] = d
        return arr


def build_table(q_max: int) -> DegreeTable:
    if q_max < 2:
        raise ValueError(f"q_max must be >= 2, got {q_max}")
    entries = {(x, y): degree_select(x, y) for x in range(2, q_max + 1) for y in range(1, x)}
    return DegreeTable(q_max, entries)


def uniform_degree(z: int, stream: Stream) -> int:
    """Uniform degree on [1, z] for senders without fresh feedback."""
    return stream.randint1(z)
