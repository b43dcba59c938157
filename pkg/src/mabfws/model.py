"""Grounded MA-STRIPS data model and state-transition semantics."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

PUBLIC = "PUBLIC"


class NotApplicable(ValueError):
    """Raised when an action is applied to a state missing one of its preconditions."""


@dataclass(frozen=True)
class Fact:
    id: int
    name: str
    owner: str = PUBLIC

    @property
    def is_public(self) -> bool:
        return self.owner == PUBLIC


@dataclass(frozen=True)
class Action:
    id: int
    name: str
    agent: str
    prec: frozenset[int]
    add: frozenset[int]
    delete: frozenset[int]
    cost: float = 1.0
    is_public: bool = True

    def __post_init__(self) -> None:
        if self.add & self.delete:
            raise ValueError(f"action {self.name}: add and del effects overlap")


@dataclass(frozen=True)
class Token:
    """Opaque stand-in for one agent's true private facts.

    ``goal_ok`` is the issuer's certificate that its own private goals hold
    in the hidden subset; agents without private goals always set it.
    """

    issuer: str
    code: str
    goal_ok: bool = True


@dataclass(frozen=True)
class State:
    plain: frozenset[int]
    tokens: tuple[Token, ...] = ()

    @staticmethod
    def of(facts: Iterable[int], tokens: Iterable[Token] = ()) -> State:
        return State(frozenset(facts), tuple(sorted(tokens, key=lambda t: t.issuer)))

    def token_for(self, agent: str) -> Token | None:
        for tok in self.tokens:
            if tok.issuer == agent:
                return tok
        return None

    def key(self) -> tuple[frozenset[int], tuple[tuple[str, str], ...]]:
        return self.plain, tuple((t.issuer, t.code) for t in self.tokens)


@dataclass(frozen=True)
class Problem:
    agents: tuple[str, ...]
    facts: tuple[Fact, ...]
    actions: dict[str, tuple[Action, ...]]
    init: frozenset[int]
    goals: frozenset[int]
    name: str = "problem"

    @cached_property
    def _by_name(self) -> dict[str, int]:
        return {f.name: f.id for f in self.facts}

    def fact_id(self, name: str) -> int:
        return self._by_name[name]

    def fact_name(self, fid: int) -> str:
        return self.facts[fid].name

    def all_actions(self) -> list[Action]:
        return sorted((a for acts in self.actions.values() for a in acts), key=lambda a: a.id)

    def action_by_name(self, name: str) -> Action:
        for a in self.all_actions():
            if a.name == name:
                return a
        raise KeyError(name)

    def private_facts(self, agent: str) -> frozenset[int]:
        return frozenset(f.id for f in self.facts if f.owner == agent)

    def public_facts(self) -> frozenset[int]:
        return frozenset(f.id for f in self.facts if f.is_public)

    def visible_goals(self, agent: str) -> frozenset[int]:
        """Goals an agent can check itself: public ones plus its own private ones."""
        return frozenset(g for g in self.goals if self.facts[g].owner in (PUBLIC, agent))

    def private_goals(self, agent: str) -> frozenset[int]:
        return frozenset(g for g in self.goals if self.facts[g].owner == agent)


def applicable(state: State, action: Action) -> bool:
    return action.prec <= state.plain


def apply(state: State, action: Action) -> State:
    if not action.prec <= state.plain:
        raise NotApplicable(f"{action.name}: missing {sorted(action.prec - state.plain)}")
    return State((state.plain - action.delete) | action.add, state.tokens)


def goal_satisfied(state: State, goals: Iterable[int]) -> bool:
    """True iff every goal fact is in the state's plain part.

    Goals owned by another agent are never in ``plain`` for this agent, so a
    state whose outstanding goal is foreign-private tests false here; the
    search layer consults the owner's token certificate instead.
    """
    return frozenset(goals) <= state.plain
