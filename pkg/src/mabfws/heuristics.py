"""Single-agent goal-distance estimates and the evaluation functions built on them.

Everything here sees only one agent's actions. Goals that need another
agent show up as unreachable in that agent's relaxed planning graph.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from mabfws.model import Action, State
from mabfws.novelty import NoveltyLevel, PartitionNoveltyTable

INFINITY = math.inf


@dataclass
class RPG:
    """Layered delete-relaxation fixpoint.

    ``action_layers[i]`` holds the actions whose preconditions first all hold
    in ``fact_layers[i]``. ``injected`` facts were forced true without an
    achiever (two-step construction) and count as given during extraction.
    """

    fact_layers: list[frozenset[int]]
    action_layers: list[tuple[Action, ...]]
    first_layer_of: dict[int, int]
    injected: frozenset[int] = frozenset()

    @property
    def levels(self) -> int:
        return len(self.fact_layers)

    @property
    def fixpoint(self) -> frozenset[int]:
        return self.fact_layers[-1]

    def layer(self, fact: int) -> int | None:
        return self.first_layer_of.get(fact)


def _facts_of(state: State | Iterable[int]) -> frozenset[int]:
    return state.plain if isinstance(state, State) else frozenset(state)


def _grow(rpg: RPG, pending: list[Action]) -> RPG:
    reached = set(rpg.fact_layers[-1])
    while True:
        fired = [a for a in pending if a.prec <= reached]
        pending = [a for a in pending if not a.prec <= reached]
        rpg.action_layers.append(tuple(fired))
        new = set()
        for a in fired:
            new |= a.add
        new -= reached
        if not new:
            return rpg
        idx = len(rpg.fact_layers)
        for f in new:
            rpg.first_layer_of[f] = idx
        reached |= new
        rpg.fact_layers.append(frozenset(reached))


def build_rpg(state: State | Iterable[int], actions: Sequence[Action]) -> RPG:
    facts = _facts_of(state)
    rpg = RPG([facts], [], {f: 0 for f in facts})
    return _grow(rpg, sorted(actions, key=lambda a: a.id))


def init_rpg_two_step(init_state: State | Iterable[int], own_actions: Sequence[Action]) -> RPG:
    """RPG from the initial state, re-grown after forcing foreign preconditions true.

    After the ordinary fixpoint, every precondition of an own action that no
    own action adds and that is still false gets injected into the last fact
    layer; growth then resumes to a new fixpoint.
    """
    rpg = build_rpg(init_state, own_actions)
    addable = set()
    for a in own_actions:
        addable |= a.add
    missing = set()
    for a in own_actions:
        missing |= a.prec
    missing -= addable
    missing -= rpg.fixpoint
    if not missing:
        return rpg
    last = len(rpg.fact_layers) - 1
    rpg.fact_layers[-1] = rpg.fact_layers[-1] | missing
    for f in missing:
        rpg.first_layer_of[f] = last
    rpg.injected = frozenset(missing)
    rpg.action_layers.pop()
    applied = {a.id for layer in rpg.action_layers for a in layer}
    pending = [a for a in sorted(own_actions, key=lambda a: a.id) if a.id not in applied]
    return _grow(rpg, pending)


def relaxed_plan(rpg: RPG, goals: Iterable[int]) -> list[Action]:
    """FF-style backward extraction towards the reachable subset of ``goals``.

    Achiever choice: an action from the layer just below the subgoal's first
    layer (the earliest possible), lowest id first.
    """
    first = rpg.first_layer_of
    given = rpg.fact_layers[0] | rpg.injected
    goals_at: dict[int, set[int]] = defaultdict(set)
    for g in goals:
        layer = first.get(g)
        if layer is not None and g not in given:
            goals_at[layer].add(g)
    if not goals_at:
        return []
    marked: dict[int, set[int]] = defaultdict(set)
    plan: list[Action] = []
    chosen: set[int] = set()
    for layer in range(max(goals_at), 0, -1):
        for g in sorted(goals_at[layer]):
            if g in marked[layer]:
                continue
            achiever = min(
                (a for a in rpg.action_layers[layer - 1] if g in a.add), key=lambda a: a.id
            )
            if achiever.id not in chosen:
                chosen.add(achiever.id)
                plan.append(achiever)
            for p in achiever.prec:
                lp = first[p]
                if p not in given and p not in marked[layer - 1]:
                    goals_at[lp].add(p)
            for q in achiever.add:
                marked[layer].add(q)
                marked[layer - 1].add(q)
    return plan


def h_ff(state: State | Iterable[int], rpg: RPG, goals: Iterable[int]) -> float:
    goals = frozenset(goals)
    if not goals <= rpg.fixpoint:
        return INFINITY
    return len(relaxed_plan(rpg, goals))


def count_false_goals(state: State | Iterable[int], goals: Iterable[int]) -> int:
    return len(frozenset(goals) - _facts_of(state))


def count_unreachable_goals(state: State | Iterable[int], rpg: RPG, goals: Iterable[int]) -> int:
    return len(frozenset(goals) - rpg.fixpoint)


def h_ff_plus(state: State | Iterable[int], rpg: RPG, goals: Iterable[int], max_levels_seen: int) -> int:
    goals = frozenset(goals)
    reachable = goals & rpg.fixpoint
    return len(relaxed_plan(rpg, reachable)) + (len(goals) - len(reachable)) * max_levels_seen


def super_relaxed_plan(
    init_state: State | Iterable[int],
    target_facts: Iterable[int],
    own_actions: Sequence[Action],
    init_rpg: RPG,
) -> list[Action]:
    """Own actions estimated to lie between the initial state and ``target_facts``.

    Runs the relaxed-plan extraction on the two-step initial RPG, where the
    injected (unreachable) preconditions count as already satisfied. Targets
    outside that fixpoint (foreign tokens, facts only others can add) are
    skipped.
    """
    del init_state, own_actions  # both are baked into init_rpg
    targets = frozenset(target_facts) & init_rpg.fixpoint
    return relaxed_plan(init_rpg, targets)


@dataclass(frozen=True)
class RelevantSet:
    anchor_state_id: int
    facts: frozenset[int]


def relevant_count_f5(achieved: frozenset[int], relevant: RelevantSet) -> int:
    return len(relevant.facts) - len(achieved & relevant.facts)


class Variant(str, Enum):
    HFF = "hff"
    F1 = "f1"
    F2 = "f2"
    F3 = "f3"
    F4 = "f4"
    F5 = "f5"
    F6 = "f6"
    # <w_(g), g>: the blind ordering used for width profiling
    WG = "wg"


HEURISTICS = [Variant.HFF, Variant.F1, Variant.F2, Variant.F3, Variant.F4, Variant.F5, Variant.F6]


@dataclass
class NodeEval:
    """Per-node heuristic memo."""

    key: tuple
    components: tuple
    relevant: RelevantSet | None = None
    achieved: frozenset[int] = field(default_factory=frozenset)


class Evaluator:
    """Computes open-list keys for one agent under one evaluation function.

    ``rpg_builds`` counts relaxed-planning-graph constructions; f5 builds one
    per anchor (initial state and each opened incoming state), f6 one in
    total.
    """

    def __init__(self, variant: Variant, actions: Sequence[Action], goals: Iterable[int],
                 init_facts: Iterable[int]):
        self.variant = Variant(variant)
        self.actions = sorted(actions, key=lambda a: a.id)
        self.goals = frozenset(goals)
        self.partition = PartitionNoveltyTable()
        self.rpg_builds = 0
        self.max_levels_seen = 0
        self.init_facts = frozenset(init_facts)
        self.init_rpg: RPG | None = None
        self.init_relevant: frozenset[int] = frozenset()
        if self.variant is Variant.F6:
            self.init_rpg = init_rpg_two_step(self.init_facts, self.actions)
            self.rpg_builds += 1
            plan = relaxed_plan(self.init_rpg, self.goals)
            self.init_relevant = frozenset(p for a in plan for p in a.prec)

    def _rpg(self, plain: frozenset[int]) -> RPG:
        rpg = build_rpg(plain, self.actions)
        self.rpg_builds += 1
        self.max_levels_seen = max(self.max_levels_seen, rpg.levels)
        return rpg

    def _anchor_relevant(self, plain: frozenset[int]) -> frozenset[int]:
        rpg = self._rpg(plain)
        plan = relaxed_plan(rpg, self.goals & rpg.fixpoint)
        return frozenset(p for a in plan for p in a.prec)

    def evaluate(
        self,
        node_id: int,
        plain: frozenset[int],
        view: Iterable[int],
        g: float,
        novelty_g: NoveltyLevel,
        parent: tuple[frozenset[int], NodeEval] | None = None,
        incoming: bool = False,
    ) -> NodeEval:
        """Key for a node entering open.

        ``view`` is the fact-id rendering used for novelty (tokens included).
        ``parent`` is the parent's plain facts and memo for locally generated
        nodes; None for the root and for incoming states.
        """
        v = self.variant
        relevant = None
        achieved: frozenset[int] = frozenset()
        if v is Variant.WG:
            return NodeEval((int(novelty_g), g), (g,))
        if v in (Variant.F5, Variant.F6):
            gbot = count_false_goals(plain, self.goals)
            if parent is not None:
                parent_plain, parent_eval = parent
                relevant = parent_eval.relevant
                achieved = parent_eval.achieved | ((plain - parent_plain) & relevant.facts)
            elif v is Variant.F5:
                relevant = RelevantSet(node_id, self._anchor_relevant(plain))
            else:
                relevant = RelevantSet(node_id, self.init_relevant)
                if incoming:
                    srp = super_relaxed_plan(self.init_facts, plain, self.actions, self.init_rpg)
                    adds = frozenset(f for a in srp for f in a.add)
                    achieved = adds & relevant.facts
            components = (gbot, relevant_count_f5(achieved, relevant))
        else:
            rpg = self._rpg(plain)
            hff = h_ff(plain, rpg, self.goals)
            if v in (Variant.HFF, Variant.F1):
                components = (hff,)
            elif v is Variant.F2:
                components = (count_false_goals(plain, self.goals), hff)
            else:
                gu = count_unreachable_goals(plain, rpg, self.goals)
                gbot = count_false_goals(plain, self.goals)
                if v is Variant.F4:
                    hff = h_ff_plus(plain, rpg, self.goals, self.max_levels_seen)
                components = (gu, gbot, hff)
        if v is Variant.HFF:
            return NodeEval(components, components)
        w = self.partition.evaluate(view, components)
        return NodeEval((int(w), *components), components, relevant, achieved)


def evaluate(variant: Variant, evaluator: Evaluator, **node) -> tuple:
    """Functional wrapper returning only the ordered key."""
    assert evaluator.variant is Variant(variant)
    return evaluator.evaluate(**node).key
