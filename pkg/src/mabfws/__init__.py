"""Multi-agent best-first width search with privacy-preserving state exchange."""

from __future__ import annotations

from mabfws.heuristics import HEURISTICS, Variant
from mabfws.ingest import load_problem, parse_document
from mabfws.search import UNBOUNDED, SolveResult, solve

__all__ = ["HEURISTICS", "UNBOUNDED", "SolveResult", "Variant", "load_problem", "parse_document", "solve"]
__version__ = "0.1.0"
