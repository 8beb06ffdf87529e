"""Shared test utilities.

Three groups: big-int mirrors of the RNG primitives (the library does all
64-bit arithmetic through numpy ufuncs, so an independent plain-int
implementation is a real cross-check), a GF(2) span oracle used as the
ground-truth decoder, and small statistics helpers for the trend tests.
"""

import math

import numpy as np
from scipy import stats

MASK64 = (1 << 64) - 1
GOLD = 0x9E3779B97F4A7C15
PAYLOAD_SALT = 0xD1B54A32D192ED03


# --- big-int RNG mirrors --------------------------------------------------


def mix64(z):
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def seed_state(seed, stream):
    """Mirror of rng.new_state as a list of four python ints."""
    z = (seed + GOLD * (stream + 1)) & MASK64
    out = []
    for _ in range(4):
        z = (z + GOLD) & MASK64
        out.append(mix64(z))
    return out


def rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & MASK64


def xoshiro_next(s):
    """Mirror of rng.next_u64; mutates the 4-element list in place."""
    r = (rotl((s[0] + s[3]) & MASK64, 23) + s[0]) & MASK64
    t = (s[1] << 17) & MASK64
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = rotl(s[3], 45)
    return r


def payload_bytes(key, seq, n):
    """Mirror of rng.fill_payload."""
    base = (int(key) + PAYLOAD_SALT * (seq + 1)) & MASK64
    out = bytearray()
    word = 0
    for j in range(n):
        if j % 8 == 0:
            word = mix64((base + GOLD * (j // 8)) & MASK64)
        out.append((word >> (8 * (j % 8))) & 0xFF)
    return bytes(out)


# --- GF(2) span oracle ------------------------------------------------------


def xor_bytes(a, b):
    return bytes(x ^ y for x, y in zip(a, b))


def _rref(rows):
    """In-place-ish reduced row echelon form; rows are [mask, payload]."""
    out = []
    work = [r for r in rows if r[0]]
    while work:
        k = min(range(len(work)), key=lambda i: work[i][0] & -work[i][0])
        row = work.pop(k)
        pivot = row[0] & -row[0]
        nxt = []
        for r in work:
            if r[0] & pivot:
                r[0] ^= row[0]
                r[1] = xor_bytes(r[1], row[1])
            if r[0]:
                nxt.append(r)
        for r in out:
            if r[0] & pivot:
                r[0] ^= row[0]
                r[1] = xor_bytes(r[1], row[1])
        work = nxt
        out.append(row)
    return out


class SpanOracle:
    """Ground-truth decoder: tracks the row space of every slot it has seen
    and delivers exactly the unit vectors that space contains.

    Delivery is a property of the span, not of any particular elimination
    order, which is what makes this a fair oracle for the shipped receiver.
    """

    def __init__(self):
        self.rows = []  # [mask, payload]; bit i of mask = symbol id i
        self.delivered = {}  # cumulative: id -> payload

    def add(self, seqs, payload):
        mask = 0
        payload = bytes(payload)
        for s in seqs:
            if s in self.delivered:
                payload = xor_bytes(payload, self.delivered[s])
            else:
                mask |= 1 << s
        if mask:
            self.rows.append([mask, payload])
            self._close()

    def expire(self, seq):
        """Project the dead id out of the rows; never forgets live relations."""
        bit = 1 << seq
        holder = None
        keep = []
        for r in self.rows:
            if r[0] & bit:
                if holder is None:
                    holder = r
                    continue
                r[0] ^= holder[0]
                r[1] = xor_bytes(r[1], holder[1])
            if r[0]:
                keep.append(r)
        self.rows = keep
        self._close()

    def _close(self):
        self.rows = _rref(self.rows)
        keep = []
        for mask, payload in self.rows:
            if mask & (mask - 1) == 0:
                seq = mask.bit_length() - 1
                self.delivered.setdefault(seq, bytes(payload))
            else:
                keep.append([mask, payload])
        self.rows = keep


# --- statistics --------------------------------------------------------------


def paired_less_p(a, b):
    """One-sided p-value for mean(a) < mean(b) on paired samples.

    Paired t-test when the differences vary; exact sign test when the t
    statistic is undefined. Identical samples give p = 1.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = b - a
    if np.ptp(d) > 0.0:
        p = stats.ttest_rel(a, b, alternative="less").pvalue
        if not math.isnan(p):
            return float(p)
    pos = int(np.sum(d > 0))
    neg = int(np.sum(d < 0))
    if pos + neg == 0:
        return 1.0
    return float(stats.binomtest(pos, pos + neg, 0.5, alternative="greater").pvalue)


def significantly_less(a, b, alpha=0.05):
    return paired_less_p(a, b) < alpha


def rule_of_three(n):
    """95% upper bound on an event rate after observing 0 events in n trials."""
    return 3.0 / n
