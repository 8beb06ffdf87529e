"""Flat-array simulation kernel.

This is the hot path: the whole per-interval loop (sender case analysis,
channel draw, GF(2) receiver, feedback) over preallocated ring buffers,
compiled with numba when available. It is an independent re-implementation of
the object-level reference engine and is required to match it draw-for-draw;
the lockstep tests compare full metrics and per-interval traces between the
two. Shared pieces (RNG primitives, degree table, payload generator, subset
sampling, channel steps) are imported from the same modules the reference
engine uses, so any divergence is confined to the loop logic itself.

Pending coded slots live as bitmask rows: ids map onto bit positions modulo
U = 64*W64 with U >= delta_max+2, collision-free because at most delta_max+1
ids are alive at once. Elimination order differs from the reference receiver
(ascending bit position here, smallest id there), but the recoverable set is
a property of the row space, not of the order, so the engines still agree
symbol for symbol.

Ring buffers are sized delta_max+1 so the symbol expiring in an interval and
the symbol created in it never collide. Arrivals add at most b-1 rows per
interval and the reduction step caps the surviving count at the rank, at most
delta_max+1, which bounds the pending store.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import njit
from .channels import (
    GOOD,
    BernoulliParams,
    GilbertElliottParams,
    LoRaParams,
    _GE_INIT_CODES,
    bern_transmit,
    fb_draw,
    ge_init_state,
    ge_step,
    lora_distances,
    lora_transmit,
)
from .degree import build_table
from .rng import choose_k_indices, fill_payload, new_state, rand_below

__all__ = ["run_kernel", "ge_loss_fraction"]

_SCHEME_IDS = {"windowed": 0, "selective": 1, "repetition": 2, "blind": 3}
_CHANNEL_IDS = {"bernoulli": 0, "gilbert_elliott": 1, "lora": 2}

_Z64 = np.uint64(0)
_I64 = np.uint64(1)
_PC1 = np.uint64(0x5555555555555555)
_PC2 = np.uint64(0x3333333333333333)
_PC4 = np.uint64(0x0F0F0F0F0F0F0F0F)


@njit(cache=True)
def _popcount(x):
    # SWAR; written as ufunc calls so the pure-python path stays warning-free
    x = np.subtract(x, np.bitwise_and(np.right_shift(x, _I64), _PC1))
    x = np.add(np.bitwise_and(x, _PC2), np.bitwise_and(np.right_shift(x, np.uint64(2)), _PC2))
    x = np.bitwise_and(np.add(x, np.right_shift(x, np.uint64(4))), _PC4)
    x = np.add(x, np.right_shift(x, np.uint64(8)))
    x = np.add(x, np.right_shift(x, np.uint64(16)))
    x = np.add(x, np.right_shift(x, np.uint64(32)))
    return int(np.bitwise_and(x, np.uint64(0x7F)))


@njit(cache=True)
def _ctz(x):
    # x & -x isolates the lowest set bit; x must be nonzero
    low = np.bitwise_and(x, np.add(np.invert(x), _I64))
    return _popcount(np.subtract(low, _I64))


@njit(cache=True)
def _row_popcount(pend_mask, pi, W64):
    n = 0
    for w in range(W64):
        if pend_mask[pi, w] != _Z64:
            n += _popcount(pend_mask[pi, w])
    return n


@njit(cache=True)
def _row_first_bit(pend_mask, pi, W64):
    for w in range(W64):
        if pend_mask[pi, w] != _Z64:
            return (w << 6) + _ctz(pend_mask[pi, w])
    return -1


@njit(cache=True)
def _bit_seq(bit, lo, U):
    """Map a bit position back to the unique live id >= lo it stands for."""
    off = bit - lo % U
    if off < 0:
        off += U
    return lo + off


@njit(cache=True)
def _deliver_row(pi, lo, U, R, W64, nbytes, delivered, orig, pend_mask, pend_pay,
                 pend_act, queue, qn, ctr):
    """Emit the single remaining id of row pi, retire the row, queue the id."""
    r = _bit_seq(_row_first_bit(pend_mask, pi, W64), lo, U)
    rs = r % R
    for by in range(nbytes):
        if pend_pay[pi, by] != orig[rs, by]:
            ctr[1] += 1
            break
    if delivered[rs] == 0:
        delivered[rs] = 1
        ctr[0] += 1
        queue[qn] = r
        qn += 1
    pend_act[pi] = 0
    return qn


@njit(cache=True)
def _peel_pending(lo, U, R, W64, nbytes, delivered, orig, pend_mask, pend_pay,
                  pend_act, queue, qn, ctr):
    """Substitute queued deliveries through the store until it settles."""
    P = pend_act.shape[0]
    qh = 0
    while qh < qn:
        s = queue[qh]
        qh += 1
        ss = s % R
        bit = s % U
        w = bit >> 6
        m = np.left_shift(_I64, np.uint64(bit & 63))
        for pi in range(P):
            if pend_act[pi] == 1 and np.bitwise_and(pend_mask[pi, w], m) != _Z64:
                pend_mask[pi, w] = np.bitwise_xor(pend_mask[pi, w], m)
                for by in range(nbytes):
                    pend_pay[pi, by] ^= orig[ss, by]
                pop = _row_popcount(pend_mask, pi, W64)
                if pop == 0:
                    pend_act[pi] = 0
                elif pop == 1:
                    qn = _deliver_row(pi, lo, U, R, W64, nbytes, delivered, orig,
                                      pend_mask, pend_pay, pend_act, queue, qn, ctr)
    return qn


@njit(cache=True)
def _reduce_pending(lo, U, R, W64, nbytes, delivered, orig, pend_mask, pend_pay,
                    pend_act, pend_asg, queue, qn, ctr):
    """One Gauss-Jordan sweep to reduced row echelon form; deliver singletons.

    Columns are visited in ascending bit order. The pivot for a column is the
    first active row not yet holding a pivot; it is cleared from every other
    active row. A pivot row never reintroduces an already-processed column
    because that column was cleared from it when its own pivot was chosen.
    """
    P = pend_act.shape[0]
    nact = 0
    for pi in range(P):
        pend_asg[pi] = 0
        if pend_act[pi] == 1:
            nact += 1
    if nact < 2:
        return qn
    for w in range(W64):
        union = _Z64
        for pi in range(P):
            if pend_act[pi] == 1:
                union = np.bitwise_or(union, pend_mask[pi, w])
        while union != _Z64:
            tz = _ctz(union)
            union = np.bitwise_and(union, np.subtract(union, _I64))
            m = np.left_shift(_I64, np.uint64(tz))
            pivot = -1
            for pi in range(P):
                if (pend_act[pi] == 1 and pend_asg[pi] == 0
                        and np.bitwise_and(pend_mask[pi, w], m) != _Z64):
                    pivot = pi
                    break
            if pivot < 0:
                continue
            pend_asg[pivot] = 1
            for pi in range(P):
                if (pi != pivot and pend_act[pi] == 1
                        and np.bitwise_and(pend_mask[pi, w], m) != _Z64):
                    for ww in range(W64):
                        pend_mask[pi, ww] = np.bitwise_xor(pend_mask[pi, ww],
                                                           pend_mask[pivot, ww])
                    for by in range(nbytes):
                        pend_pay[pi, by] ^= pend_pay[pivot, by]
    for pi in range(P):
        if pend_act[pi] == 1:
            pop = _row_popcount(pend_mask, pi, W64)
            if pop == 0:
                pend_act[pi] = 0
            elif pop == 1:
                qn = _deliver_row(pi, lo, U, R, W64, nbytes, delivered, orig,
                                  pend_mask, pend_pay, pend_act, queue, qn, ctr)
    return qn


@njit(cache=True)
def _expire_pending(e, U, R, W64, nbytes, delivered, orig, pend_mask, pend_pay,
                    pend_act, pend_asg, queue, ctr):
    """Project the expiring id e out of the pending store.

    The first row containing e eliminates it from the others and is dropped;
    the surviving rows span the same e-free subspace whichever row plays the
    eliminator, so both engines land on the same state. Chained projections
    can leave singleton rows behind, so those are delivered and the store is
    re-reduced, mirroring the reference receiver.
    """
    P = pend_act.shape[0]
    bit = e % U
    w = bit >> 6
    m = np.left_shift(_I64, np.uint64(bit & 63))
    elim = -1
    for pi in range(P):
        if pend_act[pi] == 1 and np.bitwise_and(pend_mask[pi, w], m) != _Z64:
            if elim < 0:
                elim = pi
            else:
                for ww in range(W64):
                    pend_mask[pi, ww] = np.bitwise_xor(pend_mask[pi, ww],
                                                       pend_mask[elim, ww])
                for by in range(nbytes):
                    pend_pay[pi, by] ^= pend_pay[elim, by]
    if elim < 0:
        return
    pend_act[elim] = 0
    lo = e + 1
    qn = 0
    had = 0
    for pi in range(P):
        if pend_act[pi] == 1:
            pop = _row_popcount(pend_mask, pi, W64)
            if pop == 0:
                pend_act[pi] = 0
            elif pop == 1:
                had = 1
                qn = _deliver_row(pi, lo, U, R, W64, nbytes, delivered, orig,
                                  pend_mask, pend_pay, pend_act, queue, qn, ctr)
    if had == 1:
        qn = _peel_pending(lo, U, R, W64, nbytes, delivered, orig, pend_mask,
                           pend_pay, pend_act, queue, qn, ctr)
        qn = _reduce_pending(lo, U, R, W64, nbytes, delivered, orig, pend_mask,
                             pend_pay, pend_act, pend_asg, queue, qn, ctr)
        _peel_pending(lo, U, R, W64, nbytes, delivered, orig, pend_mask,
                      pend_pay, pend_act, queue, qn, ctr)


@njit(cache=True, nogil=True)
def _simulate(
    seed,
    scheme_id,
    b,
    dmax,
    nbytes,
    p_feedback,
    min_failures,
    max_intervals,
    blind_degree,
    table,
    ckind,
    c0,
    c1,
    cinit,
    lora_f,
    lora_n,
    tr_ok,
    tr_fb,
    tr_fail,
    tr_del,
):
    ch = new_state(seed, 0)
    fbs = new_state(seed, 1)
    sc = new_state(seed, 2)
    pkey = new_state(seed, 3)[0]

    R = dmax + 1
    width = dmax if dmax > 1 else 1  # max ids a coded slot can reference
    P = (b - 1) * (dmax + 2) + 4

    # channel state
    ge_state = GOOD
    if ckind == 1:
        ge_state = ge_init_state(ch, c0, c1, cinit)
    d_sender = 0.0
    dists = np.empty(0, dtype=np.float64)
    if ckind == 2:
        d_sender = lora_f[0]
        dists = lora_distances(ch, lora_n, lora_f[9], lora_f[10])

    # receiver state; ctr packs (delivered count, decode errors) so the
    # pending-store helpers can bump both in place
    W64 = (dmax + 2 + 63) // 64
    U = 64 * W64
    delivered = np.zeros(R, dtype=np.uint8)
    orig = np.zeros((R, nbytes), dtype=np.uint8)
    pend_mask = np.zeros((P, W64), dtype=np.uint64)
    pend_pay = np.zeros((P, nbytes), dtype=np.uint8)
    pend_act = np.zeros(P, dtype=np.uint8)
    pend_asg = np.zeros(P, dtype=np.uint8)
    queue = np.zeros(R + b + 8, dtype=np.int64)
    ctr = np.zeros(2, dtype=np.int64)

    # sender state
    unacked = np.zeros(R, dtype=np.uint8)
    prev_uncoded = np.zeros(b, dtype=np.int64)
    prev_n = 0
    u_l = 0

    # per-interval packet scratch
    up_ids = np.zeros(b, dtype=np.int64)
    c_ids = np.zeros((b, width), dtype=np.int64)
    c_deg = np.zeros(b, dtype=np.int64)
    c_pay = np.zeros((b, nbytes), dtype=np.uint8)
    pool = np.zeros(R, dtype=np.int64)
    pool2 = np.zeros(R, dtype=np.int64)
    scratch = np.zeros(R, dtype=np.int64)

    have_fb = False
    fb_u = 0
    fb_beta = 0
    fb_ack = False

    failures = 0
    combined = 0
    ops = 0
    trace_on = tr_ok.shape[0] > 0

    i = 0
    while True:
        lo = i - dmax + 1
        if lo < 0:
            lo = 0

        # ---- expiry adjudication for the symbol whose deadline is now
        e = i - dmax
        if e >= 0:
            es = e % R
            if delivered[es] == 0:
                failures += 1
                _expire_pending(e, U, R, W64, nbytes, delivered, orig, pend_mask,
                                pend_pay, pend_act, pend_asg, queue, ctr)
            delivered[es] = 0
            unacked[es] = 0

        # ---- sender: fresh symbol, consume last interval's feedback, build
        si = i % R
        fill_payload(orig[si], pkey, i)
        delivered[si] = 0

        nup = 1
        ncod = 0
        up_ids[0] = i

        if scheme_id == 0:  # windowed
            if have_fb:
                u_l = fb_u
                u = fb_u
                beta = fb_beta
                if beta > 0 and u < lo:
                    u = lo
                    beta -= 1
                win = i - u
                if beta <= 0:
                    pass
                elif win <= b - 1:
                    for s in range(u, i):
                        if nup < b:
                            up_ids[nup] = s
                            nup += 1
                elif beta == win:
                    for s in range(u, u + b - 1):
                        if nup < b:
                            up_ids[nup] = s
                            nup += 1
                elif beta == 1:
                    if nup < b:
                        up_ids[nup] = u
                        nup += 1
                else:
                    if nup < b:
                        up_ids[nup] = u
                        nup += 1
                    x = win - 1
                    d = table[x, beta - 1]
                    for _c in range(b - 2):
                        choose_k_indices(sc, x, d, scratch)
                        for j in range(d):
                            c_ids[ncod, j] = u + 1 + scratch[j]
                        c_deg[ncod] = d
                        ncod += 1
            else:
                z = i - u_l
                z2 = i - lo
                if z2 < z:
                    z = z2
                if z <= 0:
                    pass
                elif z <= b - 1:
                    for s in range(i - 1, i - z - 1, -1):
                        if nup < b:
                            up_ids[nup] = s
                            nup += 1
                else:
                    for _c in range(b - 1):
                        d = 1 + rand_below(sc, z)
                        choose_k_indices(sc, z, d, scratch)
                        for j in range(d):
                            c_ids[ncod, j] = i - z + scratch[j]
                        c_deg[ncod] = d
                        ncod += 1

        elif scheme_id == 1 or scheme_id == 2:  # selective / repetition
            if have_fb:
                for s in range(lo, i):
                    if s < fb_u and unacked[s % R] == 1:
                        unacked[s % R] = 0
                if fb_ack:
                    for j in range(prev_n):
                        ps = prev_uncoded[j]
                        if ps >= lo:
                            unacked[ps % R] = 0
            n = 0
            mn = -1
            for s in range(lo, i):
                if unacked[s % R] == 1:
                    pool[n] = s
                    n += 1
                    if mn < 0:
                        mn = s

            if scheme_id == 1:  # selective
                if have_fb:
                    u = fb_u
                    beta = fb_beta
                    if beta > 0 and u < lo:
                        beta -= 1
                        if beta > 0 and n > 0:
                            u = mn
                    if beta > 0 and n == 0:
                        beta = 0
                    if beta <= 0:
                        pass
                    elif beta == 1:
                        if nup < b:
                            up_ids[nup] = u
                            nup += 1
                    elif n <= beta:
                        if nup < b:
                            up_ids[nup] = u
                            nup += 1
                        quota = n - 1
                        if b - 2 < quota:
                            quota = b - 2
                        added = 0
                        for j in range(n):
                            if added >= quota:
                                break
                            if pool[j] != u and nup < b:
                                up_ids[nup] = pool[j]
                                nup += 1
                                added += 1
                    elif n <= b - 1:
                        for j in range(n):
                            if nup < b:
                                up_ids[nup] = pool[j]
                                nup += 1
                    else:
                        if nup < b:
                            up_ids[nup] = u
                            nup += 1
                        x = 0
                        for j in range(n):
                            if pool[j] != u:
                                pool2[x] = pool[j]
                                x += 1
                        d = table[x, beta - 1]
                        for _c in range(b - 2):
                            choose_k_indices(sc, x, d, scratch)
                            for j in range(d):
                                c_ids[ncod, j] = pool2[scratch[j]]
                            c_deg[ncod] = d
                            ncod += 1
                else:
                    if n <= b - 1:
                        for j in range(n):
                            if nup < b:
                                up_ids[nup] = pool[j]
                                nup += 1
                    else:
                        for _c in range(b - 1):
                            d = 1 + rand_below(sc, n)
                            choose_k_indices(sc, n, d, scratch)
                            for j in range(d):
                                c_ids[ncod, j] = pool[scratch[j]]
                            c_deg[ncod] = d
                            ncod += 1
            else:  # repetition
                used_u = -1
                if have_fb and fb_beta > 0 and fb_u >= lo:
                    if nup < b:
                        up_ids[nup] = fb_u
                        nup += 1
                    used_u = fb_u
                for s in range(i - 1, lo - 1, -1):
                    if nup >= b:
                        break
                    if s != used_u and unacked[s % R] == 1:
                        up_ids[nup] = s
                        nup += 1

        else:  # blind
            w = i - lo
            if w > 0:
                d = blind_degree
                if w < d:
                    d = w
                for _c in range(b - 1):
                    choose_k_indices(sc, w, d, scratch)
                    for j in range(d):
                        c_ids[ncod, j] = lo + scratch[j]
                    c_deg[ncod] = d
                    ncod += 1

        # coded payloads and cost accounting
        for ci in range(ncod):
            d = c_deg[ci]
            for by in range(nbytes):
                c_pay[ci, by] = 0
            for j in range(d):
                srow = c_ids[ci, j] % R
                for by in range(nbytes):
                    c_pay[ci, by] ^= orig[srow, by]
            combined += d
            ops += d - 1

        if scheme_id == 1 or scheme_id == 2:
            for j in range(nup):
                prev_uncoded[j] = up_ids[j]
            prev_n = nup
            unacked[si] = 1

        # ---- channel
        if ckind == 0:
            ok = bern_transmit(ch, c0)
        elif ckind == 1:
            ge_state = ge_step(ch, ge_state, c0, c1)
            ok = ge_state == GOOD
        else:
            ok = lora_transmit(
                ch,
                d_sender,
                dists,
                lora_f[1],
                lora_f[2],
                lora_f[3],
                lora_f[4],
                lora_f[5],
                lora_f[6],
                lora_f[7],
                lora_f[8],
            )

        # ---- receiver
        if ok:
            qn = 0
            for j in range(nup):
                s = up_ids[j]
                ss = s % R
                if s >= lo and delivered[ss] == 0:
                    delivered[ss] = 1
                    ctr[0] += 1
                    queue[qn] = s
                    qn += 1
            for ci in range(ncod):
                d = c_deg[ci]
                k = 0
                while k < d:
                    s = c_ids[ci, k]
                    if delivered[s % R] == 1:
                        for by in range(nbytes):
                            c_pay[ci, by] ^= orig[s % R, by]
                        c_ids[ci, k] = c_ids[ci, d - 1]
                        d -= 1
                    else:
                        k += 1
                if d == 0:
                    continue
                if d == 1:
                    s = c_ids[ci, 0]
                    ss = s % R
                    for by in range(nbytes):
                        if c_pay[ci, by] != orig[ss, by]:
                            ctr[1] += 1
                            break
                    delivered[ss] = 1
                    ctr[0] += 1
                    queue[qn] = s
                    qn += 1
                else:
                    slot = -1
                    for pi in range(P):
                        if pend_act[pi] == 0:
                            slot = pi
                            break
                    if slot < 0:
                        ctr[1] += 1  # store sized to make this unreachable
                    else:
                        pend_act[slot] = 1
                        for w in range(W64):
                            pend_mask[slot, w] = _Z64
                        for j in range(d):
                            bit = c_ids[ci, j] % U
                            pend_mask[slot, bit >> 6] = np.bitwise_or(
                                pend_mask[slot, bit >> 6],
                                np.left_shift(_I64, np.uint64(bit & 63)))
                        for by in range(nbytes):
                            pend_pay[slot, by] = c_pay[ci, by]
            # substitute the new deliveries through the store, then bring the
            # survivors back to reduced row echelon form
            qn = _peel_pending(lo, U, R, W64, nbytes, delivered, orig, pend_mask,
                               pend_pay, pend_act, queue, qn, ctr)
            qn = _reduce_pending(lo, U, R, W64, nbytes, delivered, orig, pend_mask,
                                 pend_pay, pend_act, pend_asg, queue, qn, ctr)
            _peel_pending(lo, U, R, W64, nbytes, delivered, orig, pend_mask,
                          pend_pay, pend_act, queue, qn, ctr)

        # ---- feedback for this interval, gated toward the sender
        beta = 0
        u = i + 1
        for s in range(lo, i + 1):
            if delivered[s % R] == 0:
                if beta == 0:
                    u = s
                beta += 1
        got = fb_draw(fbs, p_feedback)
        have_fb = got
        if got:
            fb_u = u
            fb_beta = beta
            fb_ack = ok

        if trace_on:
            tr_ok[i] = 1 if ok else 0
            tr_fb[i] = 1 if got else 0
            tr_fail[i] = failures
            tr_del[i] = ctr[0]

        i += 1
        if failures >= min_failures or i >= max_intervals:
            break

    # drain: no more packets; each remaining symbol reaches its deadline, and
    # the projection step can still hand out what the rows pin down
    for j in range(i, i + dmax):
        e = j - dmax
        if e >= 0:
            if delivered[e % R] == 0:
                failures += 1
                _expire_pending(e, U, R, W64, nbytes, delivered, orig, pend_mask,
                                pend_pay, pend_act, pend_asg, queue, ctr)
            delivered[e % R] = 0

    out = np.empty(6, dtype=np.int64)
    out[0] = i  # generated == packets_sent == intervals_run
    out[1] = ctr[0]
    out[2] = failures
    out[3] = combined
    out[4] = ops
    out[5] = ctr[1]
    return out


@njit(cache=True, nogil=True)
def ge_loss_fraction(seed, p_gb, p_bg, init_code, n_steps):
    """Empirical loss rate of the two-state channel over n_steps transmissions."""
    rng = new_state(seed, 0)
    state = ge_init_state(rng, p_gb, p_bg, init_code)
    losses = 0
    for _ in range(n_steps):
        state = ge_step(rng, state, p_gb, p_bg)
        if state != GOOD:
            losses += 1
    return losses / n_steps


def run_kernel(cfg, want_trace: bool = False):
    """Execute one run on the kernel. Returns (totals array, trace dict | None)."""
    time = cfg.time
    scheme_id = _SCHEME_IDS[cfg.scheme]

    if cfg.scheme in ("windowed", "selective"):
        table = build_table(max(2, time.delta_max)).as_array()
    else:
        table = np.zeros((1, 1), dtype=np.int64)

    blind_degree = cfg.blind_degree
    if blind_degree is None:
        blind_degree = max(1, time.delta_max // 2)

    params = cfg.channel
    lora_f = np.zeros(11, dtype=np.float64)
    lora_n = 0
    if isinstance(params, BernoulliParams):
        ckind, c0, c1, cinit = 0, params.p_success, 0.0, 0
    elif isinstance(params, GilbertElliottParams):
        ckind, c0, c1 = 1, params.p_gb, params.p_bg
        cinit = _GE_INIT_CODES[params.initial_state]
    elif isinstance(params, LoRaParams):
        ckind, c0, c1, cinit = 2, 0.0, 0.0, 0
        lora_f[0] = params.sender_distance
        lora_f[1] = params.tx_power_dbm
        lora_f[2] = params.sensitivity_dbm
        lora_f[3] = params.capture_db
        lora_f[4] = params.path_loss_exponent
        lora_f[5] = params.ref_distance_m
        lora_f[6] = params.ref_loss_db
        lora_f[7] = params.nakagami_m if not math.isinf(params.nakagami_m) else math.inf
        lora_f[8] = params.interferer_tx_prob
        lora_f[9], lora_f[10] = params.interferer_box
        lora_n = params.n_interferers
    else:
        raise TypeError(f"unknown channel params: {params!r}")

    n_trace = cfg.stop.max_intervals if want_trace else 0
    tr_ok = np.zeros(n_trace, dtype=np.uint8)
    tr_fb = np.zeros(n_trace, dtype=np.uint8)
    tr_fail = np.zeros(n_trace, dtype=np.int64)
    tr_del = np.zeros(n_trace, dtype=np.int64)

    totals = _simulate(
        cfg.seed,
        scheme_id,
        time.b,
        time.delta_max,
        time.symbol_bytes,
        cfg.p_feedback,
        cfg.stop.min_failures,
        cfg.stop.max_intervals,
        blind_degree,
        table,
        ckind,
        c0,
        c1,
        cinit,
        lora_f,
        lora_n,
        tr_ok,
        tr_fb,
        tr_fail,
        tr_del,
    )

    if totals[5] != 0:
        raise RuntimeError(f"decoder produced {int(totals[5])} inconsistent payloads")

    trace = None
    if want_trace:
        n = int(totals[0])
        trace = {
            "channel_delivered": tr_ok[:n].astype(bool).tolist(),
            "feedback_seen": tr_fb[:n].astype(bool).tolist(),
            "failures": tr_fail[:n].tolist(),
            "delivered": tr_del[:n].tolist(),
        }
    return totals, trace
