"""Generators for the bundled micro benchmark suite.

Four small multi-agent domains (logistics, shared-table blocks, a workshop
domain with long private action chains and private goals, and rovers
sharing a radio channel), plus constructed width-1/width-2 single-goal
instances, unsolvable instances, single-agent instances and one
message-heavy instance.

``python -m mabfws.fixtures DIR`` rewrites the JSON files.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path


class _Doc:
    def __init__(self, agents):
        self.agents = list(agents)
        self.facts: set[str] = set()
        self.actions: list[dict] = []
        self.init: list[str] = []
        self.goals: list[str] = []
        self.private: dict[str, list[str]] = {}

    def act(self, name, agent, prec=(), add=(), dele=(), cost=1):
        for f in (*prec, *add, *dele):
            self.facts.add(f)
        self.actions.append({"name": name, "agent": agent, "prec": sorted(prec),
                             "add": sorted(add), "del": sorted(dele), "cost": cost})

    def build(self) -> dict:
        self.facts.update(self.init)
        self.facts.update(self.goals)
        doc = {"version": 1, "agents": self.agents, "facts": sorted(self.facts),
               "init": sorted(self.init), "goals": sorted(self.goals), "actions": self.actions}
        if self.private:
            doc["private"] = self.private
        return doc


def logistics(n_trucks: int, packages: dict[str, tuple[int, int]]) -> dict:
    """Trucks on a line of depots; truck i shuttles between depot i and i+1."""
    trucks = [f"truck{i + 1}" for i in range(n_trucks)]
    d = _Doc(trucks)
    for i, t in enumerate(trucks):
        here, there = f"depot{i}", f"depot{i + 1}"
        d.init.append(f"{t}-at-{here}")
        for a, b in ((here, there), (there, here)):
            d.act(f"drive-{t}-{a}-{b}", t, [f"{t}-at-{a}"], [f"{t}-at-{b}"], [f"{t}-at-{a}"])
        for p in packages:
            for loc in (here, there):
                d.act(f"load-{p}-{t}-{loc}", t, [f"{t}-at-{loc}", f"{p}-at-{loc}"],
                      [f"{p}-in-{t}"], [f"{p}-at-{loc}"])
                d.act(f"unload-{p}-{t}-{loc}", t, [f"{t}-at-{loc}", f"{p}-in-{t}"],
                      [f"{p}-at-{loc}"], [f"{p}-in-{t}"])
    for p, (src, dst) in packages.items():
        d.init.append(f"{p}-at-depot{src}")
        d.goals.append(f"{p}-at-depot{dst}")
    return d.build()


def blocks(arms: int, blocks_init: list[list[str]], goal_on: list[tuple[str, str]],
           goal_table: tuple[str, ...] = ()) -> dict:
    """Several arms manipulating blocks on one shared table."""
    names = [f"arm{i + 1}" for i in range(arms)]
    every = sorted(b for tower in blocks_init for b in tower)
    d = _Doc(names)
    for arm in names:
        empty = f"{arm}-empty"
        d.init.append(empty)
        for b in every:
            hold = f"{arm}-holding-{b}"
            d.act(f"pickup-{arm}-{b}", arm, [f"clear-{b}", f"ontable-{b}", empty], [hold],
                  [f"ontable-{b}", f"clear-{b}", empty])
            d.act(f"putdown-{arm}-{b}", arm, [hold], [f"ontable-{b}", f"clear-{b}", empty], [hold])
            for c in every:
                if b == c:
                    continue
                d.act(f"stack-{arm}-{b}-{c}", arm, [hold, f"clear-{c}"],
                      [f"on-{b}-{c}", f"clear-{b}", empty], [hold, f"clear-{c}"])
                d.act(f"unstack-{arm}-{b}-{c}", arm, [f"on-{b}-{c}", f"clear-{b}", empty],
                      [hold, f"clear-{c}"], [f"on-{b}-{c}", f"clear-{b}", empty])
    for tower in blocks_init:
        d.init.append(f"ontable-{tower[0]}")
        for lower, upper in zip(tower, tower[1:]):
            d.init.append(f"on-{upper}-{lower}")
        d.init.append(f"clear-{tower[-1]}")
    d.goals.extend(f"on-{b}-{c}" for b, c in goal_on)
    d.goals.extend(f"ontable-{b}" for b in goal_table)
    return d.build()


def workshop(chain: int, parts: int, cleanup: bool = True, detour: bool = False) -> dict:
    """A supplier machines parts through a private chain, an assembler builds.

    Each part needs ``chain`` private machining steps at the supplier before
    it is shipped (public). The assembler runs its own private chain per part
    and publishes the product. With ``cleanup`` both agents carry a private
    goal (tools stowed); with ``detour`` the supplier has a tempting
    dead-end branch.
    """
    sup, asm = "supplier", "assembler"
    d = _Doc([sup, asm])
    d.init += [f"{sup}-tools-out", f"{asm}-bench-ready"]
    for p in range(parts):
        part = f"part{p}"
        d.init.append(f"{sup}-{part}-stage0")
        for s in range(chain):
            d.act(f"{sup}-machine-{part}-s{s}", sup, [f"{sup}-{part}-stage{s}", f"{sup}-tools-out"],
                  [f"{sup}-{part}-stage{s + 1}"], [f"{sup}-{part}-stage{s}"])
        if detour:
            d.act(f"{sup}-scrap-{part}", sup, [f"{sup}-{part}-stage1", f"{sup}-tools-out"],
                  [f"{sup}-{part}-scrapped"], [f"{sup}-{part}-stage1"])
        d.act(f"ship-{part}", sup, [f"{sup}-{part}-stage{chain}"], [f"{part}-delivered"],
              [f"{sup}-{part}-stage{chain}"])
        d.act(f"{asm}-fit-{part}-a", asm, [f"{part}-delivered", f"{asm}-bench-ready"],
              [f"{asm}-{part}-fitted"], [f"{part}-delivered"])
        d.act(f"{asm}-fit-{part}-b", asm, [f"{asm}-{part}-fitted"], [f"{asm}-{part}-tested"],
              [f"{asm}-{part}-fitted"])
    d.act("assemble-product", asm, [f"{asm}-part{p}-tested" for p in range(parts)],
          ["product-assembled"], [])
    d.goals.append("product-assembled")
    if cleanup:
        d.act(f"{sup}-stow-tools", sup, [f"{sup}-tools-out"], [f"{sup}-tools-stowed"],
              [f"{sup}-tools-out"])
        d.act(f"{asm}-clear-bench", asm, [f"{asm}-bench-ready", "product-assembled"],
              [f"{asm}-bench-cleared"], [f"{asm}-bench-ready"])
        d.goals += [f"{sup}-tools-stowed", f"{asm}-bench-cleared"]
        d.private = {sup: [f"{sup}-tools-stowed"], asm: [f"{asm}-bench-cleared"]}
    return d.build()


def rovers(n_rovers: int, waypoints: int, targets: list[int]) -> dict:
    """Rovers drive a private waypoint line, sample, and share one radio channel."""
    names = [f"rover{i + 1}" for i in range(n_rovers)]
    d = _Doc(names)
    d.init.append("channel-free")
    for i, r in enumerate(names):
        start = (i * (waypoints - 1)) // max(1, n_rovers - 1) if n_rovers > 1 else 0
        d.init.append(f"{r}-at-wp{start}")
        for w in range(waypoints - 1):
            for a, b in ((w, w + 1), (w + 1, w)):
                d.act(f"nav-{r}-wp{a}-wp{b}", r, [f"{r}-at-wp{a}"], [f"{r}-at-wp{b}"], [f"{r}-at-wp{a}"])
        for w in targets:
            d.act(f"sample-{r}-wp{w}", r, [f"{r}-at-wp{w}", f"{r}-store-empty"],
                  [f"{r}-holds-wp{w}"], [f"{r}-store-empty"])
            d.act(f"open-link-{r}-wp{w}", r, [f"{r}-holds-wp{w}", "channel-free"],
                  [f"{r}-link-wp{w}"], ["channel-free"])
            d.act(f"transmit-{r}-wp{w}", r, [f"{r}-link-wp{w}"],
                  [f"sent-data-wp{w}", "channel-free", f"{r}-store-empty"],
                  [f"{r}-link-wp{w}", f"{r}-holds-wp{w}"])
        d.init.append(f"{r}-store-empty")
    d.goals += [f"sent-data-wp{w}" for w in targets]
    return d.build()


def chain_width1(agents: int, segment: int, private_steps: bool = False) -> dict:
    """A baton passed along a line; each agent moves it through its segment."""
    names = [f"runner{i + 1}" for i in range(agents)]
    d = _Doc(names)
    pos, cur = 0, "baton-at-0"
    for a in names:
        for s in range(segment):
            inner = private_steps and s < segment - 1
            dst = f"{a}-carry-{pos + 1}" if inner else f"baton-at-{pos + 1}"
            d.act(f"pass-{a}-{pos}", a, [cur], [dst], [cur])
            pos, cur = pos + 1, dst
    d.init.append("baton-at-0")
    d.goals.append(f"baton-at-{pos}")
    return d.build()


def pair_width2(extra_steps: int = 0) -> dict:
    """Goal needs a pair of facts each first seen at lower cost elsewhere.

    Left and right switches are flipped by different agents; the goal
    action needs both flipped. The joint state appears only at a higher
    cost than either single flip, so w_(g) of that state is 2 and
    1-pruning removes it.
    """
    d = _Doc(["lefty", "righty"])
    d.init += ["lefty-switch-off", "righty-switch-off"]
    d.act("flip-left", "lefty", ["lefty-switch-off"], ["left-is-on"], ["lefty-switch-off"])
    d.act("flip-right", "righty", ["righty-switch-off"], ["right-is-on"], ["righty-switch-off"])
    last = "goal-light-0"
    d.act("press-go", "righty", ["left-is-on", "right-is-on"], [last], [])
    for i in range(extra_steps):
        d.act(f"relay-{i}", "lefty", [last], [f"goal-light-{i + 1}"], [])
        last = f"goal-light-{i + 1}"
    d.goals.append(last)
    return d.build()


def unsolvable(kind: str) -> dict:
    if kind == "no-achiever":
        d = _Doc(["alpha", "bravo"])
        d.init += ["shared-item-a"]
        d.act("alpha-move", "alpha", ["shared-item-a"], ["shared-item-b"], ["shared-item-a"])
        d.act("bravo-move", "bravo", ["shared-item-b"], ["shared-item-a"], ["shared-item-b"])
        d.goals.append("shared-item-c")
        d.facts.add("shared-item-c")
        return d.build()
    if kind == "one-key":
        d = _Doc(["alpha", "bravo"])
        d.init += ["master-key-free"]
        d.act("alpha-open", "alpha", ["master-key-free"], ["alpha-door-open"], ["master-key-free"])
        d.act("bravo-open", "bravo", ["master-key-free"], ["bravo-door-open"], ["master-key-free"])
        d.act("alpha-pass", "alpha", ["alpha-door-open"], ["alpha-passed"], [])
        d.act("bravo-pass", "bravo", ["bravo-door-open"], ["bravo-passed"], [])
        d.goals += ["alpha-passed", "bravo-passed"]
        return d.build()
    if kind == "blocks-cycle":
        return blocks(2, [["blk1"], ["blk2"]], [("blk1", "blk2"), ("blk2", "blk1")])
    if kind == "stranded":
        doc = logistics(2, {"pkg1": (0, 2)})
        doc["actions"] = [a for a in doc["actions"] if a["name"] != "unload-pkg1-truck1-depot1"]
        return doc
    if kind == "private-dead-end":
        d = _Doc(["maker", "taker"])
        d.init += ["maker-raw-stock"]
        d.act("maker-burn", "maker", ["maker-raw-stock"], ["maker-ash-heap"], ["maker-raw-stock"])
        d.act("maker-press", "maker", ["maker-ash-heap"], ["maker-brick-made"], ["maker-ash-heap"])
        d.act("maker-offer", "maker", ["maker-molded-item"], ["crate-on-dock"], ["maker-molded-item"])
        d.act("taker-take", "taker", ["crate-on-dock"], ["crate-received"], ["crate-on-dock"])
        d.goals.append("crate-received")
        d.facts.add("maker-molded-item")
        return d.build()
    raise ValueError(kind)


def single_agent(kind: str) -> dict:
    if kind == "logistics":
        return logistics(1, {"pkg1": (0, 1), "pkg2": (1, 0)})
    if kind == "blocks":
        return blocks(1, [["blk1", "blk2", "blk3"]], [("blk1", "blk2"), ("blk2", "blk3")])
    raise ValueError(kind)


def suite() -> dict[str, dict[str, dict]]:
    """All bundled instances, grouped by directory."""
    core = {
        "logistics-01": logistics(2, {"pkg1": (0, 2)}),
        "logistics-02": logistics(2, {"pkg1": (0, 2), "pkg2": (2, 0)}),
        "logistics-03": logistics(3, {"pkg1": (0, 3)}),
        "logistics-04": logistics(3, {"pkg1": (0, 2), "pkg2": (3, 1)}),
        "logistics-05": logistics(2, {"pkg1": (0, 2), "pkg2": (0, 1), "pkg3": (1, 2)}),
        "blocks-01": blocks(2, [["blk1", "blk2"], ["blk3"]], [("blk2", "blk3")]),
        "blocks-02": blocks(2, [["blk1", "blk2", "blk3"]], [("blk1", "blk2"), ("blk2", "blk3")]),
        "blocks-03": blocks(2, [["blk1"], ["blk2"], ["blk3"]], [("blk1", "blk2"), ("blk2", "blk3")]),
        "blocks-04": blocks(3, [["blk1", "blk2"], ["blk3"]], [("blk1", "blk3")]),
        "blocks-05": blocks(2, [["blk1", "blk2"], ["blk3", "blk4"]], [("blk2", "blk4"), ("blk4", "blk1")]),
        "workshop-01": workshop(2, 1),
        "workshop-02": workshop(3, 1),
        "workshop-03": workshop(2, 2),
        "workshop-04": workshop(3, 2, detour=True),
        "workshop-05": workshop(4, 1, cleanup=False, detour=True),
        "rovers-01": rovers(2, 3, [1]),
        "rovers-02": rovers(2, 3, [0, 2]),
        "rovers-03": rovers(2, 4, [1, 2]),
        "rovers-04": rovers(3, 3, [0, 1, 2]),
        "rovers-05": rovers(2, 4, [0, 3]),
    }
    width = {
        "width1-chain-2": chain_width1(2, 3),
        "width1-chain-3": chain_width1(3, 2),
        "width1-private-2": chain_width1(2, 4, private_steps=True),
        "width2-pair": pair_width2(),
        "width2-pair-relay": pair_width2(2),
    }
    dead = {f"unsolvable-{k}": unsolvable(k) for k in
            ("no-achiever", "one-key", "blocks-cycle", "stranded", "private-dead-end")}
    single = {f"single-{k}": single_agent(k) for k in ("logistics", "blocks")}
    # three arms on five blocks: nearly every state is public, so most get broadcast
    stress = {"message-heavy": blocks(3, [["blk1", "blk2", "blk3"], ["blk4", "blk5"]],
                                      [("blk5", "blk1"), ("blk1", "blk3"), ("blk3", "blk2"), ("blk2", "blk4")])}
    return {"suite": core, "width": width, "unsolvable": dead, "single": single, "stress": stress}


def write_suite(root: str | Path) -> list[Path]:
    root = Path(root)
    written = []
    for group, docs in suite().items():
        (root / group).mkdir(parents=True, exist_ok=True)
        for name, doc in docs.items():
            path = root / group / f"{name}.json"
            path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")
            written.append(path)
    return written


def data_dir() -> Path:
    return Path(__file__).parent / "data"


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else data_dir()
    for p in write_suite(target):
        print(p)
