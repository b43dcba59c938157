"""Load JSON problem documents into grounded, privacy-labelled problems.

Document layout::

    {"version": 1,
     "agents": ["truck1", ...],
     "facts": ["pkg1-at-depot", ...],
     "init": [...], "goals": [...],
     "actions": [{"name": ..., "agent": ..., "prec": [...], "add": [...],
                  "del": [...], "cost": 1}],
     "private": {"truck1": ["truck1-done"]}}       # optional

``cost`` defaults to 1. ``private`` forces ownership of the listed facts and
is the way to declare private goals.
"""

from __future__ import annotations

import json
from dataclasses import replace
from pathlib import Path
from typing import Any

from mabfws.model import Action, Fact, Problem
from mabfws.privacy import classify

FORMAT_VERSION = 1


class ParseError(ValueError):
    """The document is not well-formed JSON of the expected shape."""


class SemanticError(ValueError):
    """The document parses but describes an invalid problem."""


def _str_list(doc: dict, key: str, where: str = "document") -> list[str]:
    value = doc.get(key, [])
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ParseError(f"{where}: '{key}' must be a list of strings")
    return value


def parse_document(doc: Any, name: str = "problem") -> Problem:
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    if doc.get("version", FORMAT_VERSION) != FORMAT_VERSION:
        raise ParseError(f"unsupported version {doc.get('version')!r}")
    for key in ("agents", "facts", "actions"):
        if key not in doc:
            raise ParseError(f"missing '{key}'")
    agents = _str_list(doc, "agents")
    fact_names = _str_list(doc, "facts")
    init_names = _str_list(doc, "init")
    goal_names = _str_list(doc, "goals")
    raw_actions = doc["actions"]
    if not isinstance(raw_actions, list):
        raise ParseError("'actions' must be a list")

    if len(set(agents)) != len(agents):
        raise SemanticError("duplicate agent")
    if not agents:
        raise SemanticError("no agents")
    if len(set(fact_names)) != len(fact_names):
        raise SemanticError("duplicate fact")

    fact_ids = {n: i for i, n in enumerate(sorted(fact_names))}

    def resolve(names: list[str], where: str) -> frozenset[int]:
        missing = [n for n in names if n not in fact_ids]
        if missing:
            raise SemanticError(f"{where}: undefined fact {missing[0]!r}")
        return frozenset(fact_ids[n] for n in names)

    records = []
    seen_names: set[str] = set()
    for raw in raw_actions:
        if not isinstance(raw, dict) or not isinstance(raw.get("name"), str) \
                or not isinstance(raw.get("agent"), str):
            raise ParseError("each action needs string 'name' and 'agent'")
        aname = raw["name"]
        if aname in seen_names:
            raise SemanticError(f"duplicate action {aname!r}")
        seen_names.add(aname)
        if raw["agent"] not in agents:
            raise SemanticError(f"action {aname}: unknown agent {raw['agent']!r}")
        cost = raw.get("cost", 1)
        if isinstance(cost, bool) or not isinstance(cost, (int, float)):
            raise ParseError(f"action {aname}: cost must be a number")
        if cost < 0:
            raise SemanticError(f"action {aname}: negative cost {cost}")
        where = f"action {aname}"
        prec = resolve(_str_list(raw, "prec", where), where)
        add = resolve(_str_list(raw, "add", where), where)
        delete = resolve(_str_list(raw, "del", where), where)
        if add & delete:
            raise SemanticError(f"{where}: add and del overlap")
        records.append((aname, raw["agent"], prec, add, delete, float(cost)))

    records.sort(key=lambda r: r[0])
    by_agent: dict[str, list[Action]] = {a: [] for a in agents}
    for aid, (aname, agent, prec, add, delete, cost) in enumerate(records):
        by_agent[agent].append(Action(aid, aname, agent, prec, add, delete, cost))

    facts = tuple(Fact(i, n) for n, i in sorted(fact_ids.items(), key=lambda kv: kv[1]))
    problem = Problem(
        agents=tuple(agents),
        facts=facts,
        actions={a: tuple(acts) for a, acts in by_agent.items()},
        init=resolve(init_names, "init"),
        goals=resolve(goal_names, "goals"),
        name=name,
    )

    declared_raw = doc.get("private", {})
    if not isinstance(declared_raw, dict):
        raise ParseError("'private' must be an object")
    declared = {}
    for agent, names in declared_raw.items():
        if agent not in agents:
            raise SemanticError(f"private: unknown agent {agent!r}")
        declared[agent] = resolve(_str_list(declared_raw, agent, "private"), "private")
    try:
        labels = classify(problem, declared)
    except ValueError as exc:
        raise SemanticError(str(exc)) from exc
    return label(problem, labels.fact_owner, labels.action_public)


def label(problem: Problem, fact_owner: dict[int, str], action_public: dict[int, bool]) -> Problem:
    facts = tuple(replace(f, owner=fact_owner[f.id]) for f in problem.facts)
    actions = {
        agent: tuple(replace(a, is_public=action_public[a.id]) for a in acts)
        for agent, acts in problem.actions.items()
    }
    return replace(problem, facts=facts, actions=actions)


def load_problem(path: str | Path) -> Problem:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return parse_document(doc, name=path.stem)


def to_document(problem: Problem) -> dict:
    """Inverse of :func:`parse_document` (up to id reassignment)."""
    names = [f.name for f in problem.facts]
    doc: dict[str, Any] = {
        "version": FORMAT_VERSION,
        "agents": list(problem.agents),
        "facts": names,
        "init": sorted(names[i] for i in problem.init),
        "goals": sorted(names[i] for i in problem.goals),
        "actions": [
            {
                "name": a.name,
                "agent": a.agent,
                "prec": sorted(names[i] for i in a.prec),
                "add": sorted(names[i] for i in a.add),
                "del": sorted(names[i] for i in a.delete),
                "cost": a.cost,
            }
            for a in problem.all_actions()
        ],
    }
    private_goals = {ag: sorted(names[g] for g in problem.private_goals(ag)) for ag in problem.agents}
    private_goals = {ag: gs for ag, gs in private_goals.items() if gs}
    if private_goals:
        doc["private"] = private_goals
    return doc


def split_single_goal(problem: Problem) -> list[Problem]:
    """One copy of ``problem`` per goal, each keeping only that goal."""
    if len(problem.goals) <= 1:
        return [problem]
    return [
        replace(problem, goals=frozenset([g]), name=f"{problem.name}-g{g}")
        for g in sorted(problem.goals)
    ]
