"""Public/private classification and dummy-token encryption of shared states."""

from __future__ import annotations

import hashlib
import hmac
import secrets
from dataclasses import dataclass, field
from typing import Mapping

from mabfws.model import PUBLIC, Problem, State, Token

TOKEN_HEX_WIDTH = 16
EMPTY_CODE = "0" * TOKEN_HEX_WIDTH


class UnknownToken(LookupError):
    """A token names this agent as issuer but was never issued by it."""


@dataclass(frozen=True)
class PrivacyLabels:
    fact_owner: dict[int, str]
    action_public: dict[int, bool]


def classify(problem: Problem, declared: Mapping[str, frozenset[int]] | None = None) -> PrivacyLabels:
    """Label facts by owner and actions by visibility.

    A fact touched (required, added or deleted) by the actions of exactly one
    agent is private to it. Facts shared by several agents, goal facts, and
    facts no action mentions are public. ``declared`` forces ownership of
    listed facts; this is how private goals are expressed.
    """
    touched_by: dict[int, set[str]] = {}
    for agent, acts in problem.actions.items():
        for a in acts:
            for f in a.prec | a.add | a.delete:
                touched_by.setdefault(f, set()).add(agent)

    owner: dict[int, str] = {}
    for fact in problem.facts:
        users = touched_by.get(fact.id, set())
        if len(users) == 1 and fact.id not in problem.goals:
            owner[fact.id] = next(iter(users))
        else:
            owner[fact.id] = PUBLIC
    for agent, fids in (declared or {}).items():
        for f in fids:
            others = touched_by.get(f, set()) - {agent}
            if others:
                raise ValueError(
                    f"fact {problem.fact_name(f)} declared private to {agent} "
                    f"but used by {sorted(others)}"
                )
            owner[f] = agent

    action_public = {
        a.id: any(owner[f] == PUBLIC for f in a.prec | a.add | a.delete)
        for acts in problem.actions.values()
        for a in acts
    }
    return PrivacyLabels(owner, action_public)


@dataclass
class TokenVault:
    """Per-agent bijection between private-fact subsets and opaque codes.

    Codes come from a keyed PRF over the sorted subset, so a subset always
    maps to the same code within a run, and the empty subset gets the
    reserved :data:`EMPTY_CODE`.
    """

    agent: str
    private_facts: frozenset[int]
    private_goals: frozenset[int] = frozenset()
    key: bytes = field(default_factory=lambda: secrets.token_bytes(32))
    forward: dict[frozenset[int], str] = field(default_factory=dict)
    backward: dict[str, frozenset[int]] = field(default_factory=dict)

    @classmethod
    def seeded(cls, agent: str, private_facts: frozenset[int], private_goals: frozenset[int],
               seed: int) -> TokenVault:
        key = hashlib.sha256(f"mabfws-vault:{seed}:{agent}".encode()).digest()
        return cls(agent, private_facts, private_goals, key)

    def code_for(self, subset: frozenset[int]) -> str:
        code = self.forward.get(subset)
        if code is None:
            if subset:
                msg = b",".join(str(f).encode() for f in sorted(subset))
                code = hmac.new(self.key, msg, hashlib.sha256).hexdigest()[:TOKEN_HEX_WIDTH]
                # A truncated-HMAC collision would merge two states; treat it as fatal.
                if code in self.backward or code == EMPTY_CODE:
                    raise RuntimeError("token collision")
            else:
                code = EMPTY_CODE
            self.forward[subset] = code
            self.backward[code] = subset
        return code

    def token_for(self, subset: frozenset[int]) -> Token:
        return Token(self.agent, self.code_for(subset), self.private_goals <= subset)


def encrypt_outgoing(state: State, agent: str, vault: TokenVault) -> State:
    """Replace the agent's private facts in ``state`` by one token."""
    mine = state.plain & vault.private_facts
    token = vault.token_for(mine)
    others = [t for t in state.tokens if t.issuer != agent]
    return State.of(state.plain - mine, [*others, token])


def decrypt_incoming(state: State, agent: str, vault: TokenVault) -> State:
    """Expand the agent's own token (if any) back into its private facts."""
    token = state.token_for(agent)
    if token is None:
        return state
    subset = vault.backward.get(token.code)
    if subset is None:
        raise UnknownToken(f"{agent} never issued token {token.code}")
    others = [t for t in state.tokens if t.issuer != agent]
    return State.of(state.plain | subset, others)
