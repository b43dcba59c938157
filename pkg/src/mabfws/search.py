"""Per-agent k-MA-BFWS and the run orchestration around it.

Each :class:`Agent` owns its open list, closed map, novelty tables, token
vault and heuristic evaluator; the bus is the only thing agents share.
:func:`solve` wires agents together and drives them either round-robin in
one thread (deterministic) or one thread per agent (concurrent).
"""

from __future__ import annotations

import heapq
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Any

from mabfws.comm import Bus, Endpoint, Message, MessageKind, Termination
from mabfws.heuristics import Evaluator, NodeEval, Variant
from mabfws.model import Action, Problem, State, Token, apply, goal_satisfied
from mabfws.novelty import CostNoveltyTable, NoveltyLevel
from mabfws.privacy import TokenVault, decrypt_incoming, encrypt_outgoing

UNBOUNDED = None


class ConfigError(ValueError):
    pass


class ZeroCostWithPruning(ConfigError):
    """Novelty pruning needs strictly positive action costs to stay complete."""


class TracebackMiss(LookupError):
    pass


def parse_k(value: Any) -> int | None:
    if value is None or value == "unbounded":
        return UNBOUNDED
    k = int(value)
    if k not in (1, 2):
        raise ConfigError(f"k must be 1, 2 or unbounded (novelty is capped at 3 levels), got {value!r}")
    return k


@dataclass
class SearchNode:
    id: int
    state: State
    g: float
    parent: int | None
    # ("act", action_id), ("recv", sender, sender_state_id), or None for the root
    via: tuple | None
    novelty_g: NoveltyLevel
    insertion_seq: int
    eval: NodeEval | None = None


@dataclass
class AgentStats:
    expanded: int = 0
    generated: int = 0
    pruned: int = 0
    duplicates: int = 0
    received_opened: int = 0
    states_sent: int = 0
    states_received: int = 0
    messages_sent: int = 0
    messages_received: int = 0
    rpg_builds: int = 0

    def as_dict(self) -> dict[str, int]:
        return dict(self.__dict__)


@dataclass
class AgentResult:
    agent: str
    status: str  # "solved", "failure" or "timeout"
    plan: list[tuple[str, str]] | None
    cost: float | None
    revealed: dict[str, str]
    stats: AgentStats


class Agent:
    def __init__(
        self,
        problem: Problem,
        name: str,
        variant: Variant | str,
        k: int | None,
        endpoint: Endpoint,
        vault: TokenVault,
        *,
        record: bool = False,
    ):
        self.problem = problem
        self.name = name
        self.k = k
        self.endpoint = endpoint
        self.vault = vault
        self.actions: list[Action] = sorted(problem.actions[name], key=lambda a: a.id)
        self._action = {a.id: a for a in self.actions}
        self.goals = problem.visible_goals(name)
        self.own_private = problem.private_facts(name)
        visible = problem.public_facts() | self.own_private
        self.init_plain = problem.init & visible
        self.evaluator = Evaluator(variant, self.actions, self.goals, self.init_plain)
        self.novelty = CostNoveltyTable()

        self.nodes: list[SearchNode] = []
        self.open: list[tuple[tuple, int, int]] = []
        self.open_msg: deque[Message] = deque()
        self.best_g: dict[Any, float] = {}
        self.closed: dict[Any, float] = {}
        self._seq = 0
        self._token_ids: dict[tuple[str, str], int] = {}
        self._placeholders: dict[int, str] = {}
        self.revealed: dict[str, str] = {}
        self._pending_request: int | None = None
        self._requests = 0

        self.stats = AgentStats()
        self.done = False
        self.result: AgentResult | None = None
        self.record = record
        self.pops: list[Any] = []
        self.novelty_log: list[tuple[State, float, NoveltyLevel]] = []
        self.broadcasts: list[int] = []

    # -- setup -------------------------------------------------------------

    def initial_token(self) -> Token:
        return self.vault.token_for(self.problem.init & self.own_private)

    def start(self, foreign_tokens: list[Token]) -> None:
        """Create the root from the initial state and the others' initial tokens."""
        state = State.of(self.init_plain, [t for t in foreign_tokens if t.issuer != self.name])
        w = self._cost_novelty(state, 0.0)
        root = self._new_node(state, 0.0, None, None, w)
        root.eval = self.evaluator.evaluate(root.id, state.plain, self._view(state), 0.0, w)
        self.best_g[state.key()] = 0.0
        self._push(root)

    # -- helpers -----------------------------------------------------------

    def _view(self, state: State) -> list[int]:
        """Fact ids as this agent sees them, tokens mapped to synthetic ids."""
        out = list(state.plain)
        base = len(self.problem.facts)
        for t in state.tokens:
            tid = self._token_ids.setdefault((t.issuer, t.code), base + len(self._token_ids))
            out.append(tid)
        return out

    def _cost_novelty(self, state: State, g: float) -> NoveltyLevel:
        w = self.novelty.evaluate(self._view(state), g)
        if self.record:
            self.novelty_log.append((state, g, w))
        return w

    def _new_node(self, state, g, parent, via, w) -> SearchNode:
        node = SearchNode(len(self.nodes), state, g, parent, via, w, self._seq)
        self._seq += 1
        self.nodes.append(node)
        return node

    def _push(self, node: SearchNode) -> None:
        heapq.heappush(self.open, (node.eval.key, node.insertion_seq, node.id))

    def _pop(self) -> SearchNode | None:
        while self.open:
            _, _, nid = heapq.heappop(self.open)
            node = self.nodes[nid]
            key = node.state.key()
            if node.g > self.best_g.get(key, node.g):
                continue
            done_g = self.closed.get(key)
            if done_g is not None and done_g <= node.g:
                continue
            return node
        return None

    def is_goal(self, state: State) -> bool:
        return goal_satisfied(state, self.goals) and all(t.goal_ok for t in state.tokens)

    def _label(self, action: Action) -> list[str]:
        if action.is_public:
            return [self.name, action.name]
        ph = self._placeholders.get(action.id)
        if ph is None:
            ph = f"private-{len(self._placeholders)}"
            self._placeholders[action.id] = ph
            self.revealed[ph] = action.name
        return [self.name, ph]

    # -- search loop pieces ------------------------------------------------

    def expand(self, node: SearchNode) -> list[SearchNode]:
        """Unfiltered successors of ``node`` under this agent's actions (not yet registered)."""
        children = []
        for a in self.actions:
            if a.prec <= node.state.plain:
                state = apply(node.state, a)
                children.append(
                    SearchNode(-1, state, node.g + a.cost, node.id, ("act", a.id), NoveltyLevel.GT2, -1)
                )
        return children

    def _admit(self, child: SearchNode, parent: SearchNode) -> None:
        self.stats.generated += 1
        key = child.state.key()
        old = self.best_g.get(key)
        if old is not None and old <= child.g:
            self.stats.duplicates += 1
            return
        w = self._cost_novelty(child.state, child.g)
        if self.k is not UNBOUNDED and w > self.k:
            self.stats.pruned += 1
            return
        self.best_g[key] = child.g
        node = self._new_node(child.state, child.g, parent.id, child.via, w)
        node.eval = self.evaluator.evaluate(
            node.id, node.state.plain, self._view(node.state), node.g, w,
            parent=(parent.state.plain, parent.eval),
        )
        self._push(node)

    def receive_state(self, msg: Message) -> SearchNode | None:
        """Move one incoming STATE message into open; None if it is a duplicate."""
        encrypted, g, sender_id = self.endpoint.decode_state(msg.payload)
        state = decrypt_incoming(encrypted, self.name, self.vault)
        key = state.key()
        old = self.best_g.get(key)
        if old is not None and old <= g:
            self.stats.duplicates += 1
            return None
        w = self._cost_novelty(state, g)
        self.best_g[key] = g
        node = self._new_node(state, g, None, ("recv", msg.sender, sender_id), w)
        node.eval = self.evaluator.evaluate(
            node.id, state.plain, self._view(state), g, w, incoming=True
        )
        self.stats.received_opened += 1
        self._push(node)
        return node

    def _trace(self, node_id: int) -> tuple[list[list[str]], tuple[str, int] | None]:
        if not 0 <= node_id < len(self.nodes):
            raise TracebackMiss(f"{self.name} has no state {node_id}")
        labels = []
        node = self.nodes[node_id]
        while node.parent is not None:
            labels.append(self._label(self._action[node.via[1]]))
            node = self.nodes[node.parent]
        labels.reverse()
        if node.via is None:
            return labels, None
        return labels, (node.via[1], node.via[2])

    def reconstruct_plan(self, goal: SearchNode) -> None:
        """Start the distributed trace-back from a goal node."""
        labels, origin = self._trace(goal.id)
        if origin is None:
            self._complete(labels, goal.g)
            return
        self._requests += 1
        self._pending_request = self._requests
        self.endpoint.send(origin[0], MessageKind.TRACEBACK_REQUEST, {
            "state_id": origin[1], "suffix": labels, "initiator": self.name,
            "request": self._requests, "cost": goal.g,
        })

    def _serve_traceback(self, payload: dict) -> None:
        labels, origin = self._trace(payload["state_id"])
        suffix = labels + payload["suffix"]
        if origin is not None:
            self.endpoint.send(origin[0], MessageKind.TRACEBACK_REQUEST, {**payload, "state_id": origin[1], "suffix": suffix})
        elif payload["initiator"] == self.name:
            if self._pending_request == payload["request"]:
                self._complete(suffix, payload["cost"])
        else:
            self.endpoint.send(payload["initiator"], MessageKind.TRACEBACK_SEGMENT, {
                "plan": suffix, "request": payload["request"], "cost": payload["cost"],
            })

    def _complete(self, plan: list[list[str]], cost: float) -> None:
        self.endpoint.broadcast(MessageKind.SOLUTION_FOUND, {"plan": plan, "cost": cost})
        self._finish("solved", plan, cost)

    def _finish(self, status: str, plan=None, cost=None) -> None:
        self.done = True
        self._pending_request = None
        s = self.stats
        s.states_sent = self.endpoint.states_sent
        s.states_received = self.endpoint.states_received
        s.messages_sent = self.endpoint.messages_sent
        s.messages_received = self.endpoint.messages_received
        s.rpg_builds = self.evaluator.rpg_builds
        steps = [tuple(x) for x in plan] if plan is not None else None
        self.result = AgentResult(self.name, status, steps, cost, dict(self.revealed), s)

    def _dispatch(self, msg: Message) -> None:
        kind = msg.kind
        if kind is MessageKind.STATE:
            self.open_msg.append(msg)
        elif kind is MessageKind.TRACEBACK_REQUEST:
            self._serve_traceback(msg.payload)
        elif kind is MessageKind.TRACEBACK_SEGMENT:
            if self._pending_request == msg.payload["request"]:
                self._complete(msg.payload["plan"], msg.payload["cost"])
        elif kind is MessageKind.SOLUTION_FOUND:
            self._finish("solved", msg.payload["plan"], msg.payload["cost"])
        elif kind is MessageKind.TERMINATE:
            self._finish("failure")

    def step(self) -> str:
        """One iteration of the search loop: ``"busy"``, ``"idle"`` or ``"done"``."""
        if self.done:
            return "done"
        for msg in self.endpoint.drain_incoming():
            self._dispatch(msg)
            if self.done:
                return "done"
        if self._pending_request is not None:
            return "busy"
        while self.open_msg:
            self.receive_state(self.open_msg.popleft())
        node = self._pop()
        if node is None:
            if self.endpoint.termination_detect(True) is Termination.TERMINATED:
                self._finish("failure")
                return "done"
            return "idle"
        self.endpoint.termination_detect(False)
        if self.record:
            self.pops.append(node.state.key())
        if self.is_goal(node.state):
            self.reconstruct_plan(node)
            return "done" if self.done else "busy"
        if node.via is not None and node.via[0] == "act" and self._action[node.via[1]].is_public:
            self.endpoint.broadcast_state(encrypt_outgoing(node.state, self.name, self.vault), node.g, node.id)
            if self.record:
                self.broadcasts.append(node.id)
        self.closed[node.state.key()] = node.g
        self.stats.expanded += 1
        for child in self.expand(node):
            self._admit(child, node)
        return "busy"

    def stop(self) -> None:
        if not self.done:
            self._finish("timeout")


def run_agent(agent: Agent, stop: threading.Event, poll: float = 0.005) -> AgentResult:
    """Thread body for concurrent mode: loop the search until done or stopped."""
    while not stop.is_set():
        status = agent.step()
        if status == "done":
            break
        if status != "busy" or agent._pending_request is not None:
            agent.endpoint.bus.wait(agent.name, poll)
    if not agent.done:
        agent.stop()
    return agent.result


@dataclass
class SolveResult:
    status: str  # "solved", "failure" or "timeout"
    plan: list[tuple[str, str]] | None
    cost: float | None
    agents: dict[str, AgentResult]
    wall_time: float
    rounds: int
    log: list[bytes] = field(default_factory=list)
    vaults: dict[str, TokenVault] = field(default_factory=dict)
    agent_objects: dict[str, Agent] = field(default_factory=dict)


def check_costs(problem: Problem, k: int | None, allow_zero_cost: bool = False) -> None:
    if k is UNBOUNDED or allow_zero_cost:
        return
    zero = [a.name for a in problem.all_actions() if a.cost <= 0]
    if zero:
        raise ZeroCostWithPruning(f"k={k} needs positive costs; zero-cost actions: {zero[:3]}")


def build_agents(problem: Problem, variant, k, seed: int | None, capture: bool = False,
                 record: bool = False) -> tuple[Bus, dict[str, Agent]]:
    bus = Bus(problem.agents, capture=capture)
    public_names = {f.id: f.name for f in problem.facts if f.is_public}
    agents = {}
    for name in problem.agents:
        private = problem.private_facts(name)
        goals = problem.private_goals(name)
        if seed is None:
            vault = TokenVault(name, private, goals)
        else:
            vault = TokenVault.seeded(name, private, goals, seed)
        agents[name] = Agent(problem, name, variant, k, bus.connect(name, public_names), vault, record=record)
    tokens = [a.initial_token() for a in agents.values()]
    for a in agents.values():
        a.start(tokens)
    return bus, agents


def resolve_plan(plan: list[tuple[str, str]], agents: dict[str, AgentResult]) -> list[tuple[str, str]]:
    """Swap private placeholders for real action names (full-knowledge harness side)."""
    return [(ag, agents[ag].revealed.get(label, label)) for ag, label in plan]


def solve(
    problem: Problem,
    variant: Variant | str = Variant.F6,
    k: int | None = UNBOUNDED,
    *,
    mode: str = "det",
    seed: int | None = 0,
    time_limit: float = 60.0,
    allow_zero_cost: bool = False,
    capture: bool = False,
    record: bool = False,
) -> SolveResult:
    """Run every agent of ``problem`` to completion and assemble the MA-plan."""
    k = parse_k(k)
    check_costs(problem, k, allow_zero_cost)
    if mode == "det" and seed is None:
        raise ConfigError("deterministic mode requires a seed")
    bus, agents = build_agents(problem, variant, k, seed if mode == "det" else None,
                               capture=capture, record=record)
    start = time.perf_counter()
    rounds = 0
    if mode == "det":
        while not all(a.done for a in agents.values()):
            if time.perf_counter() - start > time_limit:
                for a in agents.values():
                    a.stop()
                break
            for a in agents.values():
                a.step()
            rounds += 1
    elif mode == "conc":
        stop = threading.Event()
        threads = [threading.Thread(target=run_agent, args=(a, stop), daemon=True) for a in agents.values()]
        for t in threads:
            t.start()
        deadline = start + time_limit
        for t in threads:
            t.join(max(0.0, deadline - time.perf_counter()))
        stop.set()
        for t in threads:
            t.join()
    else:
        raise ConfigError(f"unknown mode {mode!r}")
    wall = time.perf_counter() - start

    results = {n: a.result for n, a in agents.items()}
    solved = [r for r in results.values() if r.status == "solved"]
    if solved:
        # the first SOLUTION_FOUND on the bus wins when several agents finish
        first = results[bus.first_solution] if bus.first_solution else solved[0]
        plan = resolve_plan(first.plan, results)
        status, cost = "solved", first.cost
    elif any(r.status == "timeout" for r in results.values()):
        status, plan, cost = "timeout", None, None
    else:
        status, plan, cost = "failure", None, None
    return SolveResult(status, plan, cost, results, wall, rounds, bus.log,
                       {n: a.vault for n, a in agents.items()}, agents if record else {})

