"""Shared builders and independent oracles for the test suite.

The oracles here deliberately avoid the package's own search and heuristic
code: they work on full (centralized) states with plain Python sets.
"""

from __future__ import annotations

import random
from collections import deque
from pathlib import Path

import pytest

from mabfws.fixtures import data_dir
from mabfws.ingest import load_problem, parse_document
from mabfws.model import Problem

DATA = data_dir()


def mk(agents, actions, init, goals, private=None, name="t"):
    """Problem from compact action tuples ``(name, agent, prec, add, del[, cost])``."""
    facts = set(init) | set(goals)
    acts = []
    for row in actions:
        aname, agent, prec, add, dele, *rest = row
        facts |= set(prec) | set(add) | set(dele)
        acts.append({"name": aname, "agent": agent, "prec": list(prec), "add": list(add),
                     "del": list(dele), "cost": rest[0] if rest else 1})
    for fs in (private or {}).values():
        facts |= set(fs)
    doc = {"agents": list(agents), "facts": sorted(facts), "init": list(init),
           "goals": list(goals), "actions": acts}
    if private:
        doc["private"] = private
    return parse_document(doc, name)


def ids(problem: Problem, *names: str) -> frozenset[int]:
    return frozenset(problem.fact_id(n) for n in names)


def paths(group: str) -> list[Path]:
    return sorted((DATA / group).glob("*.json"))


def load(group: str, name: str) -> Problem:
    return load_problem(DATA / group / f"{name}.json")


def bfs_optimal(problem: Problem, limit: int = 200_000) -> int | None:
    """Shortest plan length by centralized breadth-first search over full states."""
    start = frozenset(problem.init)
    if problem.goals <= start:
        return 0
    acts = problem.all_actions()
    seen = {start}
    frontier = deque([(start, 0)])
    while frontier:
        s, d = frontier.popleft()
        for a in acts:
            if a.prec <= s:
                t = (s - a.delete) | a.add
                if t in seen:
                    continue
                if problem.goals <= t:
                    return d + 1
                seen.add(t)
                if len(seen) > limit:
                    raise RuntimeError("state space too large for the oracle")
                frontier.append((t, d + 1))
    return None


def saturate(facts, actions) -> frozenset[int]:
    """Delete-relaxed reachability by naive fixpoint iteration."""
    reached = set(facts)
    changed = True
    while changed:
        changed = False
        for a in actions:
            if a.prec <= reached and not a.add <= reached:
                reached |= a.add
                changed = True
    return frozenset(reached)


def centralized_ff(state, actions, goals) -> float:
    """FF heuristic computed from h_max levels (no layered graph object).

    Level of a fact = cheapest number of parallel relaxed steps; an action's
    level = max level of its preconditions. Extraction walks goals from the
    highest level down, picking the lowest-id achiever whose level is exactly
    one below, marking the achiever's adds as true at that level and the one
    below.
    """
    level = {f: 0 for f in state}
    acts = sorted(actions, key=lambda a: a.id)
    act_level: dict[int, int] = {}
    k = 0
    while True:
        fired = [a for a in acts if a.id not in act_level and all(level.get(p, 10**9) <= k for p in a.prec)]
        for a in fired:
            act_level[a.id] = k
        new = {f for a in fired for f in a.add if f not in level}
        if not new:
            break
        for f in new:
            level[f] = k + 1
        k += 1
    if any(g not in level for g in goals):
        return float("inf")
    todo: dict[int, set[int]] = {}
    for g in goals:
        if level[g] > 0:
            todo.setdefault(level[g], set()).add(g)
    true_at: dict[int, set[int]] = {}
    chosen = set()
    for lv in range(max(todo, default=0), 0, -1):
        for g in sorted(todo.get(lv, ())):
            if g in true_at.get(lv, ()):
                continue
            a = min((a for a in acts if act_level.get(a.id) == lv - 1 and g in a.add), key=lambda a: a.id)
            chosen.add(a.id)
            for p in a.prec:
                if level[p] > 0 and p not in true_at.get(lv - 1, ()):
                    todo.setdefault(level[p], set()).add(p)
            for q in a.add:
                true_at.setdefault(lv, set()).add(q)
                true_at.setdefault(lv - 1, set()).add(q)
    return len(chosen)


def random_problem(rng: random.Random, n_agents: int = 2, n_facts: int = 8, n_actions: int = 10,
                   n_goals: int = 2) -> Problem:
    """Small random MA-STRIPS instance (may be unsolvable)."""
    agents = [f"agent{i}" for i in range(n_agents)]
    facts = [f"fact-{i:02d}" for i in range(n_facts)]
    acts = []
    for j in range(n_actions):
        prec = rng.sample(facts, rng.randint(0, 2))
        add = rng.sample([f for f in facts if f not in prec], rng.randint(1, 2))
        dele = [f for f in prec if rng.random() < 0.5]
        acts.append((f"act-{j:02d}", agents[j % n_agents], prec, add, dele))
    init = rng.sample(facts, rng.randint(1, 3))
    goals = rng.sample(facts, n_goals)
    return mk(agents, acts, init, goals, name=f"rand{rng.random():.6f}")


@pytest.fixture
def relay():
    """Two-agent relay: alpha moves a parcel to the hub, bravo finishes."""
    return mk(
        ["alpha", "bravo"],
        [
            ("alpha-wrap", "alpha", ["alpha-raw-parcel"], ["alpha-wrapped"], ["alpha-raw-parcel"]),
            ("alpha-drop", "alpha", ["alpha-wrapped"], ["parcel-at-hub"], ["alpha-wrapped"]),
            ("bravo-take", "bravo", ["parcel-at-hub"], ["bravo-has-parcel"], ["parcel-at-hub"]),
            ("bravo-deliver", "bravo", ["bravo-has-parcel"], ["parcel-delivered"], ["bravo-has-parcel"]),
        ],
        ["alpha-raw-parcel"],
        ["parcel-delivered"],
    )


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def criterion(request):
    """Record a one-line PASS/FAIL verdict for an acceptance criterion.

    Usage: ``criterion(n, label, ok, detail)``; the line is printed at the
    end of the session and the call asserts ``ok``.
    """

    def record(number: int, label: str, ok: bool, detail: str = "") -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] AC{number:02d} {label}" + (f": {detail}" if detail else "")
        ACCEPTANCE_LINES[number] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
