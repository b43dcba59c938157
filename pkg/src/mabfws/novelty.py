"""Novelty measures capped at three levels (1, 2, more than 2).

Two flavours are kept per agent:

* :class:`CostNoveltyTable`: a tuple counts as novel when it is new, or
  when the state reaches it with strictly lower accumulated cost than every
  earlier state containing it. Used for pruning.
* :class:`PartitionNoveltyTable`: classic novelty restricted to earlier
  states sharing the same heuristic values. Used for ranking.

States are given as iterables of integer fact ids; foreign tokens must
already be mapped to synthetic ids by the caller.
"""

from __future__ import annotations

from enum import IntEnum
from itertools import combinations
from typing import Hashable, Iterable, Sequence


class NoveltyLevel(IntEnum):
    ONE = 1
    TWO = 2
    GT2 = 3


class CostNoveltyTable:
    def __init__(self) -> None:
        self.best_g_1: dict[int, float] = {}
        self.best_g_2: dict[tuple[int, int], float] = {}

    def evaluate(self, facts: Iterable[int], g: float) -> NoveltyLevel:
        """Novelty of a newly generated state; records its tuples at cost ``g``."""
        ordered = sorted(facts)
        level = NoveltyLevel.GT2
        best1 = self.best_g_1
        for f in ordered:
            old = best1.get(f)
            if old is None or old > g:
                level = NoveltyLevel.ONE
                best1[f] = g
        best2 = self.best_g_2
        for pair in combinations(ordered, 2):
            old = best2.get(pair)
            if old is None or old > g:
                if level > NoveltyLevel.TWO:
                    level = NoveltyLevel.TWO
                best2[pair] = g
        return level

    def peek(self, facts: Iterable[int], g: float) -> NoveltyLevel:
        """Same as :meth:`evaluate` without recording anything."""
        ordered = sorted(facts)
        for f in ordered:
            old = self.best_g_1.get(f)
            if old is None or old > g:
                return NoveltyLevel.ONE
        for pair in combinations(ordered, 2):
            old = self.best_g_2.get(pair)
            if old is None or old > g:
                return NoveltyLevel.TWO
        return NoveltyLevel.GT2


class PartitionNoveltyTable:
    def __init__(self) -> None:
        self.partitions: dict[Hashable, tuple[set[int], set[tuple[int, int]]]] = {}

    def evaluate(self, facts: Iterable[int], key: Hashable) -> NoveltyLevel:
        seen, seen_pairs = self.partitions.setdefault(key, (set(), set()))
        ordered = sorted(facts)
        level = NoveltyLevel.GT2
        for f in ordered:
            if f not in seen:
                seen.add(f)
                level = NoveltyLevel.ONE
        for pair in combinations(ordered, 2):
            if pair not in seen_pairs:
                seen_pairs.add(pair)
                if level > NoveltyLevel.TWO:
                    level = NoveltyLevel.TWO
        return level


def brute_force_novelty(
    history: Sequence[tuple[Iterable[int], float]], query: tuple[Iterable[int], float]
) -> NoveltyLevel:
    """Recompute cost novelty of ``query`` against a full generation history.

    Test oracle: enumerates every tuple of size 1 and 2 of the query state and
    scans the whole history for an earlier state containing it at cost <= g.
    Pass a constant cost everywhere to get plain (partition) novelty.
    """
    qfacts, g = query
    ordered = sorted(set(qfacts))
    cheaper = [s if isinstance(s, (set, frozenset)) else set(s) for s, sg in history if sg <= g]
    for f in ordered:
        if not any(f in s for s in cheaper):
            return NoveltyLevel.ONE
    for a, b in combinations(ordered, 2):
        if not any(a in s and b in s for s in cheaper):
            return NoveltyLevel.TWO
    return NoveltyLevel.GT2
