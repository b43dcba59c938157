"""In-process message bus between agents.

Every message crosses the bus as bytes (length-prefixed: kind byte, sender,
sequence number, JSON payload), so agents never share objects and the
captured log is exactly what a socket transport would carry.

Quiescence uses shared per-channel counters of STATE messages: an agent's
idle flag can only be raised while its inbox is empty, and draining a STATE
message lowers it again, all under one lock. Termination is declared when
every flag is up and every channel has sent == received.
"""

from __future__ import annotations

import json
import struct
import threading
from collections import Counter, deque
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Any, Mapping

from mabfws.model import State, Token

_HEADER = struct.Struct(">BH")
_SEQ = struct.Struct(">Q")
_LEN = struct.Struct(">I")


class MessageKind(IntEnum):
    STATE = 1
    TRACEBACK_REQUEST = 2
    TRACEBACK_SEGMENT = 3
    IDLE = 4
    RESUME = 5
    TERMINATE = 6
    SOLUTION_FOUND = 7


class Termination(Enum):
    CONTINUE = "continue"
    TERMINATED = "terminated"


@dataclass(frozen=True)
class Message:
    kind: MessageKind
    sender: str
    seq: int
    payload: dict[str, Any]

    def to_bytes(self) -> bytes:
        sender = self.sender.encode("utf-8")
        body = json.dumps(self.payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
        rest = _HEADER.pack(int(self.kind), len(sender)) + sender + _SEQ.pack(self.seq) + body
        return _LEN.pack(len(rest)) + rest

    @classmethod
    def from_bytes(cls, data: bytes) -> Message:
        (length,) = _LEN.unpack_from(data, 0)
        if length != len(data) - _LEN.size:
            raise ValueError("truncated message")
        kind, slen = _HEADER.unpack_from(data, _LEN.size)
        pos = _LEN.size + _HEADER.size
        sender = data[pos:pos + slen].decode("utf-8")
        pos += slen
        (seq,) = _SEQ.unpack_from(data, pos)
        payload = json.loads(data[pos + _SEQ.size:].decode("utf-8"))
        return cls(MessageKind(kind), sender, seq, payload)


class Bus:
    """Per-recipient FIFO queues plus the shared quiescence counters."""

    def __init__(self, agents: list[str] | tuple[str, ...], capture: bool = False):
        self.agents = tuple(agents)
        self._lock = threading.Lock()
        self._ready = {a: threading.Condition(self._lock) for a in self.agents}
        self._inbox: dict[str, deque[tuple[MessageKind, str, bytes]]] = {a: deque() for a in self.agents}
        self.sent: Counter[tuple[str, str]] = Counter()
        self.received: Counter[tuple[str, str]] = Counter()
        self._idle = {a: False for a in self.agents}
        self.capture = capture
        self.log: list[bytes] = []
        self.first_solution: str | None = None

    def connect(self, name: str, public_names: Mapping[int, str]) -> Endpoint:
        return Endpoint(self, name, public_names)

    def deliver(self, sender: str, recipient: str, msg: Message) -> None:
        data = msg.to_bytes()
        with self._lock:
            if self.capture:
                self.log.append(data)
            self._inbox[recipient].append((msg.kind, sender, data))
            if msg.kind is MessageKind.STATE:
                self.sent[sender, recipient] += 1
            elif msg.kind is MessageKind.SOLUTION_FOUND and self.first_solution is None:
                self.first_solution = sender
            self._ready[recipient].notify()

    def drain(self, name: str) -> list[bytes]:
        with self._lock:
            box = self._inbox[name]
            out = []
            while box:
                kind, sender, data = box.popleft()
                if kind is MessageKind.STATE:
                    self.received[sender, name] += 1
                    self._idle[name] = False
                out.append(data)
            return out

    def wait(self, name: str, timeout: float) -> None:
        with self._lock:
            if not self._inbox[name]:
                self._ready[name].wait(timeout)

    def try_set_idle(self, name: str) -> bool:
        with self._lock:
            if any(kind is MessageKind.STATE for kind, _, _ in self._inbox[name]):
                return False
            self._idle[name] = True
            return True

    def set_busy(self, name: str) -> None:
        with self._lock:
            self._idle[name] = False

    def quiescent(self) -> bool:
        with self._lock:
            if not all(self._idle.values()):
                return False
            return all(self.received[ch] == n for ch, n in self.sent.items())

    def pending(self, name: str) -> int:
        with self._lock:
            return len(self._inbox[name])


class Endpoint:
    """One agent's handle on the bus."""

    def __init__(self, bus: Bus, name: str, public_names: Mapping[int, str]):
        self.bus = bus
        self.name = name
        self.peers = [a for a in bus.agents if a != name]
        self._names = dict(public_names)
        self._ids = {n: i for i, n in self._names.items()}
        self._seq = 0
        self.announced_idle = False
        self.states_sent = 0
        self.states_received = 0
        self.messages_sent = 0
        self.messages_received = 0

    def _next(self, kind: MessageKind, payload: dict) -> Message:
        self._seq += 1
        return Message(kind, self.name, self._seq, payload)

    def send(self, recipient: str, kind: MessageKind, payload: dict) -> None:
        self.bus.deliver(self.name, recipient, self._next(kind, payload))
        self.messages_sent += 1
        if kind is MessageKind.STATE:
            self.states_sent += 1

    def broadcast(self, kind: MessageKind, payload: dict) -> None:
        for peer in self.peers:
            self.send(peer, kind, payload)

    def encode_state(self, state: State, g: float, state_id: int) -> dict:
        try:
            facts = sorted(self._names[f] for f in state.plain)
        except KeyError as exc:
            raise ValueError(f"refusing to send non-public fact id {exc.args[0]}") from None
        tokens = [[t.issuer, t.code, t.goal_ok] for t in state.tokens]
        return {"facts": facts, "tokens": tokens, "g": g, "id": state_id}

    def decode_state(self, payload: dict) -> tuple[State, float, int]:
        state = State.of(
            (self._ids[n] for n in payload["facts"]),
            (Token(i, c, ok) for i, c, ok in payload["tokens"]),
        )
        return state, payload["g"], payload["id"]

    def broadcast_state(self, state: State, g: float, state_id: int) -> None:
        """Send an already-encrypted state with its cost and sender-local id."""
        self.broadcast(MessageKind.STATE, self.encode_state(state, g, state_id))

    def drain_incoming(self) -> list[Message]:
        msgs = [Message.from_bytes(d) for d in self.bus.drain(self.name)]
        self.messages_received += len(msgs)
        self.states_received += sum(m.kind is MessageKind.STATE for m in msgs)
        return msgs

    def termination_detect(self, local_idle: bool) -> Termination:
        if not local_idle:
            self.bus.set_busy(self.name)
            if self.announced_idle:
                self.announced_idle = False
                self.broadcast(MessageKind.RESUME, {})
            return Termination.CONTINUE
        if not self.bus.try_set_idle(self.name):
            return Termination.CONTINUE
        if not self.announced_idle:
            self.announced_idle = True
            self.broadcast(MessageKind.IDLE, {"states_sent": self.states_sent,
                                              "states_received": self.states_received})
        if self.bus.quiescent():
            self.broadcast(MessageKind.TERMINATE, {})
            return Termination.TERMINATED
        return Termination.CONTINUE
