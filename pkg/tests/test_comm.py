from __future__ import annotations

import hashlib

import pytest
from hypothesis import given, strategies as st

from mabfws.comm import Bus, Message, MessageKind, Termination
from mabfws.model import State, Token
from mabfws.search import solve

from conftest import load

NAMES = {0: "pub-zero", 1: "pub-one", 2: "pub-two"}


def bus3():
    bus = Bus(["alpha", "bravo", "charlie"], capture=True)
    return bus, {n: bus.connect(n, NAMES) for n in bus.agents}


@given(
    st.sampled_from(list(MessageKind)),
    st.text(min_size=1, max_size=12),
    st.integers(0, 2**63),
    st.dictionaries(st.text(max_size=5), st.one_of(st.integers(), st.text(max_size=8), st.booleans()), max_size=4),
)
def test_message_round_trip(kind, sender, seq, payload):
    msg = Message(kind, sender, seq, payload)
    assert Message.from_bytes(msg.to_bytes()) == msg


def test_truncated_message_rejected():
    data = Message(MessageKind.IDLE, "a", 1, {}).to_bytes()
    with pytest.raises(ValueError):
        Message.from_bytes(data[:-1])


def test_broadcast_enqueues_once_per_peer():
    bus, ep = bus3()
    ep["alpha"].broadcast_state(State.of([0, 2]), 3.0, 7)
    assert bus.pending("bravo") == 1 and bus.pending("charlie") == 1 and bus.pending("alpha") == 0
    assert bus.sent[("alpha", "bravo")] == 1 and len(bus.log) == 2


def test_state_round_trip():
    bus, ep = bus3()
    s = State.of([0, 2], [Token("alpha", "ab" * 8, False), Token("charlie", "cd" * 8)])
    ep["alpha"].broadcast_state(s, 2.5, 11)
    (msg,) = ep["bravo"].drain_incoming()
    assert ep["bravo"].decode_state(msg.payload) == (s, 2.5, 11)


def test_refuses_private_fact():
    _, ep = bus3()
    with pytest.raises(ValueError):
        ep["alpha"].broadcast_state(State.of([0, 5]), 1.0, 1)


def test_drain_empty_and_fifo():
    bus, ep = bus3()
    assert ep["charlie"].drain_incoming() == []
    for i in range(3):
        ep["alpha"].send("charlie", MessageKind.STATE, ep["alpha"].encode_state(State.of([0]), i, i))
        ep["bravo"].send("charlie", MessageKind.STATE, ep["bravo"].encode_state(State.of([1]), i, i))
    msgs = ep["charlie"].drain_incoming()
    for sender in ("alpha", "bravo"):
        seqs = [m.seq for m in msgs if m.sender == sender]
        ids = [m.payload["id"] for m in msgs if m.sender == sender]
        assert seqs == sorted(seqs) and ids == [0, 1, 2]


def test_single_agent_idle_terminates_immediately():
    bus = Bus(["solo"])
    assert bus.connect("solo", {}).termination_detect(True) is Termination.TERMINATED


def test_idle_with_message_in_flight_continues_until_delivery():
    bus = Bus(["alpha", "bravo"])
    a, b = bus.connect("alpha", NAMES), bus.connect("bravo", NAMES)
    assert b.termination_detect(True) is Termination.CONTINUE  # alpha still busy
    a.broadcast_state(State.of([0]), 1, 0)
    # alpha idles while its state is still queued for bravo: sent != received
    assert a.termination_detect(True) is Termination.CONTINUE
    assert not bus.quiescent()
    # bravo cannot claim idleness while a STATE waits in its inbox
    assert b.termination_detect(True) is Termination.CONTINUE
    b.drain_incoming()
    assert not bus.quiescent()  # draining a state lowers bravo's flag
    assert b.termination_detect(False) is Termination.CONTINUE
    assert b.termination_detect(True) is Termination.TERMINATED
    kinds = [m.kind for m in a.drain_incoming()]
    assert MessageKind.TERMINATE in kinds and MessageKind.RESUME in kinds


def test_all_idle_counters_matched_terminates_in_one_round():
    bus = Bus(["alpha", "bravo", "charlie"])
    eps = [bus.connect(n, NAMES) for n in bus.agents]
    eps[0].broadcast_state(State.of([1]), 1, 0)
    for e in eps:
        e.drain_incoming()
    outcomes = [e.termination_detect(True) for e in eps]
    assert outcomes == [Termination.CONTINUE, Termination.CONTINUE, Termination.TERMINATED]


def test_deterministic_schedule_repeats():
    p = load("suite", "blocks-04")
    digests = set()
    for _ in range(5):
        r = solve(p, "f3", seed=3, capture=True)
        digests.add(hashlib.sha256(b"".join(r.log)).hexdigest())
    assert len(digests) == 1
