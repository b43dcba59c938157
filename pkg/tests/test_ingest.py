from __future__ import annotations

import json

import pytest

from mabfws.ingest import (
    ParseError, SemanticError, load_problem, parse_document, split_single_goal, to_document,
)
from mabfws.model import PUBLIC
from mabfws.search import solve

from conftest import load, mk


def micro_logistics() -> dict:
    return {
        "version": 1,
        "agents": ["truck2", "truck1"],
        "facts": ["pkg-at-b", "pkg-at-a", "truck1-at-a", "pkg-in-truck1", "pkg-at-c",
                  "pkg-in-truck2", "truck2-at-b"],
        "init": ["pkg-at-a", "truck1-at-a", "truck2-at-b"],
        "goals": ["pkg-at-c"],
        "actions": [
            {"name": "t1-load", "agent": "truck1", "prec": ["truck1-at-a", "pkg-at-a"],
             "add": ["pkg-in-truck1"], "del": ["pkg-at-a"]},
            {"name": "t1-unload", "agent": "truck1", "prec": ["pkg-in-truck1"],
             "add": ["pkg-at-b"], "del": ["pkg-in-truck1"]},
            {"name": "t2-load", "agent": "truck2", "prec": ["truck2-at-b", "pkg-at-b"],
             "add": ["pkg-in-truck2"], "del": ["pkg-at-b"], "cost": 2},
            {"name": "t2-unload", "agent": "truck2", "prec": ["pkg-in-truck2"],
             "add": ["pkg-at-c"], "del": ["pkg-in-truck2"]},
        ],
    }


def test_load_micro_logistics(tmp_path):
    path = tmp_path / "micro.json"
    path.write_text(json.dumps(micro_logistics()))
    p = load_problem(path)
    assert p.name == "micro"
    assert p.agents == ("truck2", "truck1")
    names = [f.name for f in p.facts]
    assert names == sorted(names) and [f.id for f in p.facts] == list(range(len(names)))
    assert [a.name for a in p.all_actions()] == ["t1-load", "t1-unload", "t2-load", "t2-unload"]
    assert p.action_by_name("t2-load").cost == 2.0
    assert p.action_by_name("t1-load").cost == 1.0


def test_labels_on_micro_logistics():
    p = parse_document(micro_logistics())
    owner = {f.name: f.owner for f in p.facts}
    assert owner == {
        "pkg-at-a": "truck1", "pkg-at-b": PUBLIC, "pkg-at-c": PUBLIC, "pkg-in-truck1": "truck1",
        "pkg-in-truck2": "truck2", "truck1-at-a": "truck1", "truck2-at-b": "truck2",
    }
    public = {a.name: a.is_public for a in p.all_actions()}
    assert public == {"t1-load": False, "t1-unload": True, "t2-load": True, "t2-unload": True}


@pytest.mark.parametrize("mutate, error", [
    (lambda d: d["actions"][0]["prec"].append("ghost"), SemanticError),
    (lambda d: d["actions"][0].update(cost=-1), SemanticError),
    (lambda d: d["actions"].append(dict(d["actions"][0])), SemanticError),
    (lambda d: d["facts"].append("pkg-at-a"), SemanticError),
    (lambda d: d["actions"][0].update(agent="nobody"), SemanticError),
    (lambda d: d["actions"][0].update(add=["pkg-at-a"], **{"del": ["pkg-at-a"]}), SemanticError),
    (lambda d: d["init"].append("ghost"), SemanticError),
    (lambda d: d.update(private={"truck1": ["pkg-at-b"]}), SemanticError),
    (lambda d: d.pop("actions"), ParseError),
    (lambda d: d.update(version=7), ParseError),
    (lambda d: d["actions"][0].update(cost="cheap"), ParseError),
    (lambda d: d.update(goals="pkg-at-c"), ParseError),
])
def test_rejects_bad_documents(mutate, error):
    doc = micro_logistics()
    mutate(doc)
    with pytest.raises(error):
        parse_document(doc)


def test_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ParseError):
        load_problem(path)


def test_document_round_trip():
    p = load("suite", "workshop-03")
    again = parse_document(to_document(p), p.name)
    assert again == p


def test_split_three_goals():
    p = mk(["alpha"], [("a", "alpha", [], ["goal-1", "goal-2", "goal-3"], [])], [],
           ["goal-1", "goal-2", "goal-3"])
    parts = split_single_goal(p)
    assert [set(q.goals) for q in parts] == [{g} for g in sorted(p.goals)]
    assert all(q.actions == p.actions and q.init == p.init for q in parts)


def test_split_single_goal_identity():
    p = mk(["alpha"], [("a", "alpha", [], ["goal-1"], [])], [], ["goal-1"])
    assert split_single_goal(p) == [p]


def test_split_solvable_iff_goal_individually_reachable():
    # one goal needs a resource the other goal consumes; a third is unreachable
    p = mk(
        ["alpha", "bravo"],
        [
            ("alpha-use", "alpha", ["shared-coin"], ["goal-one"], ["shared-coin"]),
            ("bravo-use", "bravo", ["shared-coin"], ["goal-two"], ["shared-coin"]),
            ("bravo-wish", "bravo", ["never-true"], ["goal-three"], []),
            ("alpha-four", "alpha", ["goal-one"], ["goal-four"], []),
            ("bravo-five", "bravo", ["goal-four"], ["goal-five"], []),
        ],
        ["shared-coin"],
        ["goal-one", "goal-two", "goal-three", "goal-four", "goal-five"],
    )
    parts = split_single_goal(p)
    assert len(parts) == 5
    status = {p.fact_name(next(iter(q.goals))): solve(q, "hff").status for q in parts}
    assert status == {"goal-one": "solved", "goal-two": "solved", "goal-three": "failure",
                      "goal-four": "solved", "goal-five": "solved"}
    assert solve(p, "hff").status == "failure"
