"""Plan validation, repeated runs, width profiling and suite benchmarking.

The harness has full knowledge of the problem: privacy only applies between
agents, not to the offline validator or the reports.

Stats CSV columns (one row per problem x config cell), in order:
``problem, heuristic, k, solved, status, plan_length, plan_cost, expanded,
generated, pruned, messages, states_exchanged, rpg_builds, wall_time``.
``wall_time`` is left empty in deterministic mode so that repeated runs
produce byte-identical files. The summary CSV has ``heuristic, k, solved,
common, avg_time, avg_plan_length, messages_k, states_k``; the averages are
taken over the problems solved by every compared config.
"""

from __future__ import annotations

import csv
import io
import json
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

from mabfws.heuristics import HEURISTICS, Variant
from mabfws.ingest import ParseError, load_problem, split_single_goal
from mabfws.model import Problem
from mabfws.search import UNBOUNDED, ConfigError, SolveResult, parse_k, solve

CSV_COLUMNS = [
    "problem", "heuristic", "k", "solved", "status", "plan_length", "plan_cost", "expanded",
    "generated", "pruned", "messages", "states_exchanged", "rpg_builds", "wall_time",
]
SUMMARY_COLUMNS = [
    "heuristic", "k", "solved", "common", "avg_time", "avg_plan_length", "messages_k", "states_k",
]
MODES = ("det", "conc")


@dataclass
class Validation:
    ok: bool
    failed_step: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def validate(problem: Problem, plan: Sequence[tuple[str, str]]) -> Validation:
    """Execute ``plan`` from the initial state and check every step and the goals."""
    state = set(problem.init)
    for i, (agent, name) in enumerate(plan):
        try:
            action = problem.action_by_name(name)
        except KeyError:
            return Validation(False, i, f"unknown action {name!r}")
        if action.agent != agent:
            return Validation(False, i, f"{name!r} belongs to {action.agent!r}, not {agent!r}")
        missing = action.prec - state
        if missing:
            names = sorted(problem.fact_name(f) for f in missing)
            return Validation(False, i, f"{name!r} is missing {names}")
        state -= action.delete
        state |= action.add
    unmet = problem.goals - state
    if unmet:
        return Validation(False, len(plan), f"goals not reached: {sorted(problem.fact_name(f) for f in unmet)}")
    return Validation(True)


def plan_cost(problem: Problem, plan: Sequence[tuple[str, str]]) -> float:
    return sum(problem.action_by_name(name).cost for _, name in plan)


def load_plan(path: str | Path) -> list[tuple[str, str]]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, list):
        raise ParseError("plan file must be a JSON list of {agent, action}")
    try:
        return [(step["agent"], step["action"]) for step in raw]
    except (TypeError, KeyError):
        raise ParseError("every plan step needs 'agent' and 'action'") from None


def dump_plan(plan: Sequence[tuple[str, str]]) -> list[dict[str, str]]:
    return [{"agent": a, "action": n} for a, n in plan]


@dataclass
class RunConfig:
    problem: str
    heuristic: str = Variant.F6.value
    k: int | None = UNBOUNDED
    mode: str = "det"
    seed: int | None = 0
    time_limit: float = 60.0
    repeats: int = 5

    def __post_init__(self) -> None:
        self.heuristic = Variant(self.heuristic).value
        if self.heuristic == Variant.WG.value:
            raise ConfigError("wg is reserved for width profiling")
        self.k = parse_k(self.k)
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.repeats < 1:
            raise ConfigError("repeats must be at least 1")
        if self.mode == "det" and self.seed is None:
            raise ConfigError("deterministic mode requires a seed")
        if self.time_limit <= 0:
            raise ConfigError("time_limit must be positive")


@dataclass
class RunReport:
    problem: str
    heuristic: str
    k: int | None
    mode: str
    seed: int | None
    solved: bool
    status: str
    plan: list[tuple[str, str]] | None
    plan_length: int | None
    plan_cost: float | None
    agents: dict[str, dict[str, int]]
    wall_time: float
    runs: int = 1
    timeouts: int = 0
    validation_error: str = ""

    @property
    def messages(self) -> int:
        return sum(s["messages_sent"] for s in self.agents.values())

    @property
    def states_exchanged(self) -> int:
        return sum(s["states_sent"] for s in self.agents.values())

    def total(self, stat: str) -> int:
        return sum(s[stat] for s in self.agents.values())

    def to_dict(self, timing: bool | None = None) -> dict[str, Any]:
        """Report as plain data; timing is dropped in deterministic mode unless asked for."""
        if timing is None:
            timing = self.mode != "det"
        out = {
            "problem": self.problem, "heuristic": self.heuristic,
            "k": "unbounded" if self.k is None else self.k, "mode": self.mode, "seed": self.seed,
            "solved": self.solved, "status": self.status,
            "plan": dump_plan(self.plan) if self.plan is not None else None,
            "plan_length": self.plan_length, "plan_cost": self.plan_cost,
            "agents": self.agents, "runs": self.runs, "timeouts": self.timeouts,
        }
        if self.validation_error:
            out["validation_error"] = self.validation_error
        if timing:
            out["wall_time"] = round(self.wall_time, 6)
        return out

    def to_json(self, timing: bool | None = None) -> str:
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=True) + "\n"


def _report(config: RunConfig, problem: Problem, result: SolveResult, runs: int, timeouts: int) -> RunReport:
    agents = {n: r.stats.as_dict() for n, r in sorted(result.agents.items())}
    solved = result.status == "solved"
    plan = result.plan if solved else None
    error = ""
    if solved:
        check = validate(problem, plan)
        if not check:
            solved, error = False, f"step {check.failed_step}: {check.reason}"
    return RunReport(
        problem=problem.name, heuristic=config.heuristic, k=config.k, mode=config.mode,
        seed=config.seed if config.mode == "det" else None,
        solved=solved, status=result.status if not error else "invalid",
        plan=plan, plan_length=len(plan) if plan is not None else None,
        plan_cost=plan_cost(problem, plan) if plan is not None else None,
        agents=agents, wall_time=result.wall_time, runs=runs, timeouts=timeouts,
        validation_error=error,
    )


def run(config: RunConfig, problem: Problem | None = None,
        solver: Callable[..., SolveResult] = solve) -> RunReport:
    """Run ``config.repeats`` times and report the median-time run.

    The problem counts as unsolved when more than half the runs (rounded
    down) time out.
    """
    if problem is None:
        problem = load_problem(config.problem)
    results = []
    for _ in range(config.repeats):
        results.append(solver(problem, config.heuristic, config.k, mode=config.mode,
                              seed=config.seed if config.mode == "det" else None,
                              time_limit=config.time_limit))
    timeouts = sum(r.status == "timeout" for r in results)
    ordered = sorted(results, key=lambda r: r.wall_time)
    median = ordered[(len(ordered) - 1) // 2]
    report = _report(config, problem, median, len(results), timeouts)
    report.wall_time = statistics.median(r.wall_time for r in results)
    if timeouts > config.repeats // 2:
        report.solved, report.status = False, "timeout"
        report.plan = report.plan_length = report.plan_cost = None
    return report


@dataclass
class WidthRow:
    goal: str
    solved_k1: bool
    solved_k2: bool
    solved_hff: bool


@dataclass
class WidthProfile:
    problem: str
    rows: list[WidthRow] = field(default_factory=list)

    def coverage(self, column: str) -> float:
        if not self.rows:
            return 0.0
        return 100.0 * sum(getattr(r, column) for r in self.rows) / len(self.rows)

    def table(self) -> str:
        """Per-goal flags followed by a coverage line in the usual width-coverage layout."""
        lines = ["goal\t1-BFWS\t2-BFWS\thFF"]
        for r in self.rows:
            lines.append("\t".join([r.goal, *("yes" if x else "no" for x in (r.solved_k1, r.solved_k2, r.solved_hff))]))
        lines.append("")
        lines.append("domain\t#instances\t1-BFWS\t2-BFWS\thFF")
        lines.append(f"{self.problem}\t{len(self.rows)}\t{self.coverage('solved_k1'):.2f}\t"
                     f"{self.coverage('solved_k2'):.2f}\t{self.coverage('solved_hff'):.2f}")
        return "\n".join(lines) + "\n"


def width_profile(problem: Problem, time_limit: float = 60.0, seed: int = 0) -> WidthProfile:
    """Split into single-goal problems; run the blind <w_(g), g> search at k=1, k=2, plus hFF."""
    profile = WidthProfile(problem.name)
    for single in split_single_goal(problem):
        (goal,) = single.goals
        flags = []
        for variant, k in ((Variant.WG, 1), (Variant.WG, 2), (Variant.HFF, UNBOUNDED)):
            result = solve(single, variant, k, seed=seed, time_limit=time_limit)
            flags.append(result.status == "solved" and bool(validate(single, result.plan)))
        profile.rows.append(WidthRow(single.fact_name(goal), *flags))
    return profile


@dataclass
class BenchConfig:
    """Which (heuristic, k) pairs to compare and how to run each cell."""

    configs: list[tuple[str, int | None]] = field(
        default_factory=lambda: [(v.value, UNBOUNDED) for v in HEURISTICS])
    mode: str = "det"
    seed: int = 0
    time_limit: float = 60.0
    repeats: int = 1

    @classmethod
    def from_dict(cls, raw: dict) -> BenchConfig:
        bc = cls(mode=raw.get("mode", "det"), seed=raw.get("seed", 0),
                 time_limit=raw.get("time_limit", 60.0), repeats=raw.get("repeats", 1))
        if "configs" in raw:
            bc.configs = [(c["heuristic"], parse_k(c.get("k"))) for c in raw["configs"]]
        return bc

    @classmethod
    def load(cls, path: str | Path) -> BenchConfig:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass
class BenchResult:
    cells: list[dict[str, Any]]
    summary: list[dict[str, Any]]

    def cells_csv(self) -> str:
        return _csv(CSV_COLUMNS, self.cells)

    def summary_csv(self) -> str:
        return _csv(SUMMARY_COLUMNS, self.summary)


def _csv(columns: list[str], rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _k_label(k: int | None) -> str:
    return "unbounded" if k is None else str(k)


def _cell(name: str, heuristic: str, k, report: RunReport | None, error: str, mode: str) -> dict:
    row = {c: "" for c in CSV_COLUMNS}
    row.update(problem=name, heuristic=heuristic, k=_k_label(k))
    if report is None:
        row.update(solved="false", status=f"error: {error}")
        return row
    row.update(
        solved="true" if report.solved else "false", status=report.status,
        plan_length="" if report.plan_length is None else report.plan_length,
        plan_cost="" if report.plan_cost is None else f"{report.plan_cost:g}",
        expanded=report.total("expanded"), generated=report.total("generated"),
        pruned=report.total("pruned"), messages=report.messages,
        states_exchanged=report.states_exchanged, rpg_builds=report.total("rpg_builds"),
        wall_time="" if mode == "det" else f"{report.wall_time:.4f}",
    )
    return row


def bench_suite(directory: str | Path, bench: BenchConfig | None = None) -> BenchResult:
    """Coverage matrix over every ``*.json`` problem in ``directory``; per-cell errors never abort."""
    bench = bench or BenchConfig()
    paths = sorted(Path(directory).glob("*.json"))
    cells: list[dict] = []
    reports: dict[tuple[str, str], dict[str, RunReport]] = {}
    for path in paths:
        try:
            problem = load_problem(path)
        except (OSError, ValueError) as exc:
            for h, k in bench.configs:
                cells.append(_cell(path.stem, h, k, None, str(exc), bench.mode))
            continue
        for h, k in bench.configs:
            try:
                cfg = RunConfig(str(path), h, k, bench.mode, bench.seed, bench.time_limit, bench.repeats)
                report = run(cfg, problem)
            except (ConfigError, ValueError) as exc:
                cells.append(_cell(problem.name, h, k, None, str(exc), bench.mode))
                continue
            cells.append(_cell(problem.name, h, k, report, "", bench.mode))
            reports.setdefault((h, _k_label(k)), {})[problem.name] = report
    return BenchResult(cells, _summary(bench, reports))


def _summary(bench: BenchConfig, reports: dict[tuple[str, str], dict[str, RunReport]]) -> list[dict]:
    keys = [(h, _k_label(k)) for h, k in bench.configs]
    solved_by = {key: {p for p, r in reports.get(key, {}).items() if r.solved} for key in keys}
    common = set.intersection(*solved_by.values()) if solved_by else set()
    rows = []
    for key in keys:
        chosen = [reports[key][p] for p in sorted(common)]
        row = {"heuristic": key[0], "k": key[1], "solved": len(solved_by[key]), "common": len(chosen)}
        if chosen:
            row.update(
                avg_time="" if bench.mode == "det" else f"{statistics.fmean(r.wall_time for r in chosen):.4f}",
                avg_plan_length=f"{statistics.fmean(r.plan_length for r in chosen):.2f}",
                messages_k=f"{statistics.fmean(r.messages for r in chosen) / 1000:.3f}",
                states_k=f"{statistics.fmean(r.total('expanded') for r in chosen) / 1000:.3f}",
            )
        else:
            row.update(avg_time="", avg_plan_length="", messages_k="", states_k="")
        rows.append(row)
    return rows


def suite_dir(group: str = "suite") -> Path:
    return Path(__file__).parent / "data" / group
