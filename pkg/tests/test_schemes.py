"""Packet construction per scheme.

The deterministic cases pin down exact slot layouts; sender state is always
driven through observe_feedback/build_packet, never poked directly. The
property test runs a real sender/receiver loop and checks framing invariants
under arbitrary loss and feedback patterns.
"""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from xorlink.channels import feedback_arrives
from xorlink.core import CodedSlot, Feedback, SymbolSource, TimeConfig, UncodedSlot
from xorlink.degree import build_table
from xorlink.receiver import Receiver
from xorlink.rng import Stream
from xorlink.schemes import (
    SCHEMES,
    BlindSender,
    RepetitionSender,
    SelectiveSender,
    WindowedSender,
    make_sender,
)


def fresh(scheme, b=3, delta=16, seed=1, blind_degree=None):
    cfg = TimeConfig(delta_max=delta, b=b, symbol_bytes=2)
    return make_sender(
        scheme, cfg, Stream.from_seed(seed, 2), SymbolSource(seed, 2), blind_degree=blind_degree
    )


def uncoded_ids(packet):
    return [s.seq for s in packet.slots if isinstance(s, UncodedSlot)]


def coded_slots(packet):
    return [s for s in packet.slots if isinstance(s, CodedSlot)]


# --- windowed -------------------------------------------------------------------


def test_windowed_codes_over_window_tail():
    snd = fresh("windowed")
    snd.observe_feedback(10, Feedback(ack=True, u=4, beta=3))
    pkt = snd.build_packet(10)
    assert uncoded_ids(pkt) == [10, 4]
    (cs,) = coded_slots(pkt)
    assert cs.degree == 2  # argmax for 5 candidates, 2 missing
    assert cs.seqs <= set(range(5, 10))


def test_windowed_beta_one_retransmits_only_u():
    snd = fresh("windowed")
    snd.observe_feedback(10, Feedback(ack=True, u=4, beta=1))
    pkt = snd.build_packet(10)
    assert uncoded_ids(pkt) == [10, 4]
    assert not coded_slots(pkt)


def test_windowed_receiver_caught_up():
    snd = fresh("windowed")
    snd.observe_feedback(10, Feedback(ack=True, u=10, beta=0))
    pkt = snd.build_packet(10)
    assert uncoded_ids(pkt) == [10]
    assert len(pkt.slots) == 1


def test_windowed_small_window_sent_plainly():
    snd = fresh("windowed")
    snd.observe_feedback(10, Feedback(ack=False, u=9, beta=1))
    pkt = snd.build_packet(10)  # window {9} fits in b-1 slots
    assert uncoded_ids(pkt) == [10, 9]
    assert not coded_slots(pkt)


def test_windowed_everything_missing_cannot_code():
    # beta == window size: coding cannot isolate anything, send head of window
    snd = fresh("windowed")
    snd.observe_feedback(10, Feedback(ack=False, u=4, beta=6))
    pkt = snd.build_packet(10)
    assert uncoded_ids(pkt) == [10, 4, 5]
    assert not coded_slots(pkt)


def test_windowed_normalizes_expired_u():
    snd = fresh("windowed", delta=4)
    # feedback names u=6 but 6 expires at now=10 (live window starts at 7)
    snd.observe_feedback(10, Feedback(ack=True, u=6, beta=2))
    pkt = snd.build_packet(10)
    assert uncoded_ids(pkt) == [10, 7]
    assert not coded_slots(pkt)


def test_windowed_without_feedback_uses_last_anchor():
    snd = fresh("windowed")
    snd.observe_feedback(9, Feedback(ack=True, u=6, beta=1))
    snd.build_packet(9)
    snd.observe_feedback(10, None)
    pkt = snd.build_packet(10)
    assert uncoded_ids(pkt) == [10]
    assert len(coded_slots(pkt)) == 2
    for cs in coded_slots(pkt):
        assert cs.seqs <= {6, 7, 8, 9}  # blind guess over the stale window
        assert 1 <= cs.degree <= 4


def test_windowed_no_feedback_small_gap_repeats_newest():
    snd = fresh("windowed")
    snd.observe_feedback(9, Feedback(ack=True, u=8, beta=1))
    snd.build_packet(9)
    snd.observe_feedback(10, None)
    pkt = snd.build_packet(10)  # gap of 2 fits uncoded, newest first
    assert uncoded_ids(pkt) == [10, 9, 8]


def test_windowed_cold_start():
    snd = fresh("windowed")
    snd.observe_feedback(0, None)
    pkt = snd.build_packet(0)
    assert uncoded_ids(pkt) == [0]
    assert len(pkt.slots) == 1


# --- selective -------------------------------------------------------------------


def drive_unacked(snd, intervals):
    """Send (with no feedback) at the given intervals to seed the unacked set."""
    for now in intervals:
        snd.observe_feedback(now, None)
        snd.build_packet(now)


def test_selective_codes_over_unacked_pool():
    snd = fresh("selective")
    drive_unacked(snd, [5, 7, 9, 10])
    snd.observe_feedback(12, Feedback(ack=False, u=5, beta=2))
    pkt = snd.build_packet(12)
    assert uncoded_ids(pkt) == [12, 5]
    (cs,) = coded_slots(pkt)
    assert cs.seqs == {7, 9, 10}  # pool of 3, best degree is all 3


def test_selective_small_set_sent_plainly():
    snd = fresh("selective")
    drive_unacked(snd, [5, 7, 9])
    snd.observe_feedback(12, Feedback(ack=False, u=5, beta=3))
    pkt = snd.build_packet(12)
    # tracked set is exactly the missing set; no point coding
    assert uncoded_ids(pkt) == [12, 5, 7]
    assert not coded_slots(pkt)


def test_selective_ack_clears_previous_uncoded():
    snd = fresh("selective")
    drive_unacked(snd, [3, 5, 6])  # the packet at 6 carried 6, 3, 5 uncoded
    snd.observe_feedback(7, Feedback(ack=True, u=7, beta=0))
    snd.build_packet(7)
    # the ack certified {6,3,5} and the u prune covered the rest: only the
    # just-sent 7 is still tracked
    snd.observe_feedback(8, None)
    assert uncoded_ids(snd.build_packet(8)) == [8, 7]


def test_selective_nack_keeps_previous_uncoded():
    snd = fresh("selective")
    drive_unacked(snd, [3, 5, 6])
    snd.observe_feedback(7, Feedback(ack=False, u=6, beta=1))
    pkt = snd.build_packet(7)  # 6 survived the u prune and was not acked
    assert uncoded_ids(pkt) == [7, 6]
    snd.observe_feedback(8, None)
    assert uncoded_ids(snd.build_packet(8)) == [8, 6, 7]


def test_selective_stale_ack_is_ignored():
    snd = fresh("selective")
    drive_unacked(snd, [3, 4])
    # ack refers to the packet of interval 4 but arrives at 7: must not clear
    snd.observe_feedback(7, Feedback(ack=True, u=3, beta=2))
    pkt = snd.build_packet(7)
    assert 3 in uncoded_ids(pkt) or any(3 in c.seqs for c in coded_slots(pkt))


def test_selective_prunes_expired():
    snd = fresh("selective")
    drive_unacked(snd, [0, 9])
    snd.observe_feedback(16, None)  # 0 expires at 16
    pkt = snd.build_packet(16)
    assert uncoded_ids(pkt) == [16, 9]


def test_selective_beta_one():
    snd = fresh("selective")
    drive_unacked(snd, [5, 7, 9])
    snd.observe_feedback(12, Feedback(ack=False, u=7, beta=1))
    pkt = snd.build_packet(12)
    assert uncoded_ids(pkt) == [12, 7]
    assert not coded_slots(pkt)


def test_selective_no_feedback_codes_over_tracked():
    snd = fresh("selective")
    drive_unacked(snd, [1, 2, 3, 4])
    snd.observe_feedback(5, None)
    pkt = snd.build_packet(5)
    assert uncoded_ids(pkt) == [5]
    assert len(coded_slots(pkt)) == 2
    for cs in coded_slots(pkt):
        assert cs.seqs <= {1, 2, 3, 4}


# --- repetition -------------------------------------------------------------------


def test_repetition_repeats_u_then_newest():
    snd = fresh("repetition")
    drive_unacked(snd, [4, 6, 8])
    snd.observe_feedback(10, Feedback(ack=False, u=4, beta=3))
    pkt = snd.build_packet(10)
    assert uncoded_ids(pkt) == [10, 4, 8]
    assert not coded_slots(pkt)  # never codes


def test_repetition_without_feedback():
    snd = fresh("repetition")
    drive_unacked(snd, [5])
    snd.observe_feedback(6, None)
    pkt = snd.build_packet(6)
    assert uncoded_ids(pkt) == [6, 5]


def test_repetition_skips_expired_u():
    snd = fresh("repetition", delta=4)
    snd.observe_feedback(10, Feedback(ack=False, u=2, beta=1))
    pkt = snd.build_packet(10)
    assert uncoded_ids(pkt) == [10]


# --- blind ------------------------------------------------------------------------


def test_blind_first_interval_has_no_history():
    snd = fresh("blind")
    snd.observe_feedback(0, None)
    pkt = snd.build_packet(0)
    assert uncoded_ids(pkt) == [0]
    assert len(pkt.slots) == 1


def test_blind_degree_ramps_with_history():
    snd = fresh("blind")
    snd.observe_feedback(4, None)
    pkt = snd.build_packet(4)
    slots = coded_slots(pkt)
    assert len(slots) == 2
    for cs in slots:
        assert cs.seqs == {0, 1, 2, 3}  # min(8, 4) of a 4-symbol past: all of it


def test_blind_steady_state_degree():
    snd = fresh("blind")
    snd.observe_feedback(40, None)
    for cs in coded_slots(snd.build_packet(40)):
        assert cs.degree == 8  # delta_max // 2
        assert cs.seqs <= set(range(25, 40))


def test_blind_custom_degree():
    snd = fresh("blind", blind_degree=3)
    snd.observe_feedback(40, None)
    assert all(cs.degree == 3 for cs in coded_slots(snd.build_packet(40)))


def test_blind_ignores_feedback():
    a = fresh("blind", seed=4)
    b = fresh("blind", seed=4)
    a.observe_feedback(20, Feedback(ack=False, u=5, beta=9))
    b.observe_feedback(20, None)
    assert a.build_packet(20) == b.build_packet(20)


def test_blind_degree_validation():
    with pytest.raises(ValueError):
        fresh("blind", blind_degree=0)
    with pytest.raises(ValueError):
        fresh("blind", delta=8, blind_degree=9)


# --- factory ------------------------------------------------------------------------


def test_make_sender_dispatch():
    assert isinstance(fresh("windowed"), WindowedSender)
    assert isinstance(fresh("selective"), SelectiveSender)
    assert isinstance(fresh("repetition"), RepetitionSender)
    assert isinstance(fresh("blind"), BlindSender)
    with pytest.raises(ValueError):
        fresh("fountain")


def test_make_sender_accepts_shared_table():
    cfg = TimeConfig(delta_max=16, b=3, symbol_bytes=2)
    table = build_table(16)
    snd = make_sender("windowed", cfg, Stream.from_seed(1, 2), SymbolSource(1, 2), table=table)
    assert isinstance(snd, WindowedSender)


# --- framing invariants under arbitrary loss/feedback patterns -----------------------


@given(
    scheme=st.sampled_from(SCHEMES),
    b=st.integers(1, 4),
    delta=st.integers(1, 8),
    seed=st.integers(0, 2**20),
    p_loss=st.floats(0.0, 1.0),
    p_fb=st.floats(0.0, 1.0),
)
def test_packet_invariants_in_closed_loop(scheme, b, delta, seed, p_loss, p_fb):
    cfg = TimeConfig(delta_max=delta, b=b, symbol_bytes=1)
    source = SymbolSource(seed, 1)
    sender = make_sender(scheme, cfg, Stream.from_seed(seed, 2), source)
    recv = Receiver(cfg)
    chan = Stream.from_seed(seed, 0)
    fb_stream = Stream.from_seed(seed, 1)

    fb = None
    for now in range(40):
        recv.expire_and_count(now)
        sender.observe_feedback(now, fb)
        pkt = sender.build_packet(now)

        assert pkt.seq == now
        assert 1 <= len(pkt.slots) <= b
        head = pkt.slots[0]
        assert isinstance(head, UncodedSlot) and head.seq == now
        lo = cfg.oldest_unexpired(now)
        for slot in pkt.slots:
            ids = {slot.seq} if isinstance(slot, UncodedSlot) else set(slot.seqs)
            assert all(lo <= s <= now for s in ids), "expired or future reference"
            if isinstance(slot, UncodedSlot):
                assert slot.payload == source.payload(slot.seq)
            else:
                assert slot.payload == source.xor_of(slot.seqs)

        ok = chan.random() >= p_loss
        if ok:
            recv.process_packet(pkt, now)
        rep = recv.make_feedback(ok, last_pkt_seq=now, now=now)
        fb = rep if feedback_arrives(p_fb, fb_stream) else None
