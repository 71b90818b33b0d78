"""Lifespan-restricted rewriting with per-node ages.

Every node carries the number of control-state changes since it was last
(re)written.  A transition may only rewrite a subtree whose nodes all have age
at most the lifespan; rewritten nodes restart at age 0, and when the control
state changes every untouched node ages by one.  Ages saturate at lifespan+1
(FOSSIL): a node past the lifespan can never again satisfy the rewrite
precondition, so the saturated quotient is exact and keeps the visited set
finite per bound.
"""

from __future__ import annotations

from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Hashable, Optional

from . import verdicts
from .automata import nta_accepts
from .systems import SGTRS, Configuration, subtree_index
from .trees import Tree, format_tree, parse_tree
from .verdicts import Verdict

FOSSIL = "FOSSIL"


class SenescentError(ValueError):
    pass


class FossilisedNode(SenescentError):
    pass


class RuleNotApplicable(SenescentError):
    pass


@dataclass(frozen=True)
class SenescentSystem:
    base: SGTRS
    lifespan: int

    def __post_init__(self):
        if self.lifespan < 0:
            raise SenescentError("lifespan must be a natural number")

    @property
    def fossil_age(self) -> int:
        return self.lifespan + 1


class AgedConfiguration:
    """Control state, tree, and one age per node (pre-order, saturated at
    lifespan+1)."""

    __slots__ = ("control", "tree", "ages", "_hash")

    def __init__(self, control: Hashable, tree: Tree, ages: tuple[int, ...]):
        if len(ages) != tree.size:
            raise SenescentError("need one age per node")
        self.control = control
        self.tree = tree
        self.ages = ages
        self._hash = hash((control, tree, ages))

    @classmethod
    def initial(cls, config: Configuration) -> "AgedConfiguration":
        return cls(config.control, config.tree, (0,) * config.tree.size)

    def __eq__(self, other):
        return (
            isinstance(other, AgedConfiguration)
            and self.control == other.control
            and self.tree is other.tree
            and self.ages == other.ages
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "<%r, %s, ages=%s>" % (self.control, format_tree(self.tree), list(self.ages))

    def _preorder_index(self) -> dict[tuple[int, ...], int]:
        return {pos: k for k, (pos, _) in enumerate(self.tree.walk())}

    def age_at(self, pos: tuple[int, ...]) -> int:
        return self.ages[self._preorder_index()[tuple(pos)]]

    def ages_by_position(self) -> dict[tuple[int, ...], int]:
        return {pos: self.ages[k] for k, (pos, _) in enumerate(self.tree.walk())}

    def is_fossil(self, pos: tuple[int, ...], lifespan: int) -> bool:
        return self.age_at(pos) > lifespan

    def plain(self) -> Configuration:
        return Configuration(self.control, self.tree)


def _subtree_span(tree: Tree, pos: tuple[int, ...]) -> tuple[int, int]:
    """Pre-order index range [start, end) of the subtree at pos."""
    start = 0
    t = tree
    for i in pos:
        start += 1
        for j in range(i - 1):
            start += t.children[j].size
        t = t.children[i - 1]
    return start, start + t.size


def step(
    system: SenescentSystem,
    config: AgedConfiguration,
    rule_idx: int,
    position: tuple[int, ...],
    rhs: Tree,
) -> AgedConfiguration:
    """Apply one transition: rule `rule_idx` at `position`, inserting `rhs`.

    Precondition: the rule's lhs accepts the subtree at `position`, `rhs` is in
    the rule's rhs language, and every node of the replaced subtree has age at
    most the lifespan.
    """
    position = tuple(position)
    rule = system.base.rules[rule_idx]
    if rule.source != config.control:
        raise RuleNotApplicable(
            "rule %d fires from %r, configuration is at %r"
            % (rule_idx + 1, rule.source, config.control)
        )
    sub = config.tree.subtree_at(position)
    if not nta_accepts(rule.lhs, sub):
        raise RuleNotApplicable("lhs of rule %d does not match at %s" % (rule_idx + 1, position))
    if not nta_accepts(rule.rhs, rhs):
        raise RuleNotApplicable("inserted tree not in rhs language of rule %d" % (rule_idx + 1))
    start, end = _subtree_span(config.tree, position)
    if any(a > system.lifespan for a in config.ages[start:end]):
        raise FossilisedNode(
            "subtree at %s contains a fossilised node (lifespan %d)"
            % (position, system.lifespan)
        )
    return _apply(system, config, rule_idx, position, rhs)


def _apply(system, config, rule_idx, position, rhs) -> AgedConfiguration:
    """Age bookkeeping, assuming preconditions hold."""
    rule = system.base.rules[rule_idx]
    changed = rule.source != rule.target
    start, end = _subtree_span(config.tree, position)
    fossil = system.fossil_age
    new_tree = config.tree.replace_at(position, rhs)
    before = config.ages[:start]
    after = config.ages[end:]
    if changed:
        before = tuple(min(a + 1, fossil) for a in before)
        after = tuple(min(a + 1, fossil) for a in after)
    ages = before + (0,) * rhs.size + after
    return AgedConfiguration(rule.target, new_tree, ages)


def tagged_successors(system: SenescentSystem, config: AgedConfiguration, rhs_bound: int):
    """(AgedConfiguration, rule index, position, inserted tree, output) for
    every transition allowed by the age precondition, in deterministic order."""
    from .systems import match_candidates

    base = system.base
    lifespan = system.lifespan
    out = []
    plain_tree = config.tree
    for i, positions in match_candidates(base, config.control, plain_tree):
        rule = base.rules[i]
        inserts = None
        for pos in positions:
            start, end = _subtree_span(plain_tree, pos)
            if any(a > lifespan for a in config.ages[start:end]):
                continue
            if inserts is None:
                inserts = base.rhs_trees(i, rhs_bound)
            for t in inserts:
                out.append((_apply(system, config, i, pos, t), i, pos, t, rule.output))
    out.sort(key=lambda item: (item[1], item[2], format_tree(item[3])))
    return out


def senescent_successors(system: SenescentSystem, config: AgedConfiguration, rhs_bound: int):
    seen = set()
    result = []
    for cfg, *_ in tagged_successors(system, config, rhs_bound):
        if cfg not in seen:
            seen.add(cfg)
            result.append(cfg)
    return result


@dataclass(frozen=True)
class WitnessStep:
    rule_idx: int
    position: tuple[int, ...]
    rhs: Tree

    def format(self) -> str:
        pos = ".".join(map(str, self.position)) if self.position else "e"
        return "apply %d at %s insert %s" % (self.rule_idx + 1, pos, format_tree(self.rhs))


def format_witness(witness) -> str:
    return "\n".join(s.format() for s in witness) + ("\n" if witness else "")


def parse_witness(text: str) -> list[WitnessStep]:
    steps = []
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        parts = ln.split(None, 5)
        if len(parts) != 6 or parts[0] != "apply" or parts[2] != "at" or parts[4] != "insert":
            raise SenescentError("bad witness line %r" % ln)
        idx = int(parts[1]) - 1
        pos = () if parts[3] == "e" else tuple(int(p) for p in parts[3].split("."))
        steps.append(WitnessStep(idx, pos, parse_tree(parts[5])))
    return steps


def replay(system: SenescentSystem, initial: Configuration, witness) -> AgedConfiguration:
    """Replay a witness with full precondition checking."""
    cfg = AgedConfiguration.initial(initial)
    for s in witness:
        cfg = step(system, cfg, s.rule_idx, s.position, s.rhs)
    return cfg


def _search(
    system: SenescentSystem,
    initial: Configuration,
    goal,
    depth_bound: int,
    rhs_bound: int,
    jobs: int = 1,
) -> Verdict:
    """BFS over aged configurations; `goal` is a predicate on AgedConfiguration.
    Deterministic: successors are expanded in (rule, position, tree) order and
    the frontier is processed FIFO, so the first witness found is canonical."""
    bounds = {"depth": depth_bound, "rhs-size": rhs_bound, "lifespan": system.lifespan}
    start = AgedConfiguration.initial(initial)
    if goal(start):
        return verdicts.reachable((), bounds)
    parents: dict = {start: None}
    frontier = [start]
    pool = ThreadPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for _depth in range(depth_bound):
            if not frontier:
                break
            if pool is None:
                expansions = [tagged_successors(system, c, rhs_bound) for c in frontier]
            else:
                expansions = list(
                    pool.map(lambda c: tagged_successors(system, c, rhs_bound), frontier)
                )
            next_frontier = []
            for cfg, succs in zip(frontier, expansions):
                for nxt, i, pos, t, _out in succs:
                    if nxt in parents:
                        continue
                    parents[nxt] = (cfg, WitnessStep(i, pos, t))
                    if goal(nxt):
                        return verdicts.reachable(_trace(parents, nxt), bounds)
                    next_frontier.append(nxt)
            frontier = next_frontier
    finally:
        if pool is not None:
            pool.shutdown(wait=False)
    return verdicts.unknown(bounds)


def _trace(parents, cfg) -> tuple[WitnessStep, ...]:
    steps = []
    while parents[cfg] is not None:
        cfg, s = parents[cfg]
        steps.append(s)
    return tuple(reversed(steps))


def reach_control(
    system: SenescentSystem,
    initial: Configuration,
    target_control,
    depth_bound: int,
    rhs_bound: int,
    jobs: int = 1,
) -> Verdict:
    return _search(
        system,
        initial,
        lambda cfg: cfg.control == target_control,
        depth_bound,
        rhs_bound,
        jobs,
    )


def reach_regular(
    system: SenescentSystem,
    initial: Configuration,
    target_control,
    target_nta,
    depth_bound: int,
    rhs_bound: int,
    jobs: int = 1,
) -> Verdict:
    def goal(cfg: AgedConfiguration) -> bool:
        return cfg.control == target_control and nta_accepts(target_nta, cfg.tree)

    return _search(system, initial, goal, depth_bound, rhs_bound, jobs)


def reachable_set(
    system: SenescentSystem, initial: Configuration, depth_bound: int, rhs_bound: int
) -> set[AgedConfiguration]:
    """Everything reachable within the bounds (test/oracle helper)."""
    start = AgedConfiguration.initial(initial)
    seen = {start}
    frontier = deque([(start, 0)])
    while frontier:
        cfg, d = frontier.popleft()
        if d == depth_bound:
            continue
        for nxt in senescent_successors(system, cfg, rhs_bound):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append((nxt, d + 1))
    return seen
