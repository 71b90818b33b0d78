"""Multi-stack pushdown systems with scope-bounded round/phase semantics.

A run is organised into rounds of n phases; during phase i only stack i moves.
Every pushed cell is tagged with the round it was pushed in, and a pop in
round j may only remove a cell tagged j' >= j - W.  Phase and round advances
are explicit (empty phases are allowed), so the explorer ranges over all round
decompositions of the underlying move sequence.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Hashable, Iterable

from . import verdicts
from .verdicts import Verdict

PUSH = "push"
INTERNAL = "int"
POP = "pop"


class MpdsError(ValueError):
    pass


class ScopeViolation(MpdsError):
    pass


class TopMismatch(MpdsError):
    pass


class WrongPhase(MpdsError):
    pass


@dataclass(frozen=True)
class MpdsRule:
    kind: str  # push | int | pop
    stack: int  # 1-based
    source: Hashable
    target: Hashable
    symbol: Hashable = None  # pushed / popped character


class MPDS:
    __slots__ = ("controls", "alphabet", "bottom", "stacks", "rules", "_by_stack")

    def __init__(self, controls: Iterable, alphabet: Iterable, bottom, stacks: int, rules):
        self.controls = frozenset(controls)
        self.alphabet = frozenset(alphabet) | {bottom}
        self.bottom = bottom
        self.stacks = stacks
        self.rules = tuple(rules)
        if stacks < 1:
            raise MpdsError("need at least one stack")
        by_stack: dict = {}
        for i, r in enumerate(self.rules):
            if not (1 <= r.stack <= stacks):
                raise MpdsError("rule %d names stack %d" % (i, r.stack))
            if r.kind in (PUSH, POP) and r.symbol == bottom:
                raise MpdsError("bottom symbol is never pushed or popped")
            if r.source not in self.controls or r.target not in self.controls:
                raise MpdsError("rule %d uses undeclared control" % i)
            by_stack.setdefault(r.stack, []).append(i)
        self._by_stack = by_stack


@dataclass(frozen=True)
class MPDSConfiguration:
    """Control, stacks of (symbol, push-round) cells (top first), and the
    explorer's position in the round structure."""

    control: Hashable
    stacks: tuple  # tuple of tuples of (symbol, round)
    round: int
    phase: int


def initial_configuration(system: MPDS) -> MPDSConfiguration:
    stacks = tuple(((system.bottom, 0),) for _ in range(system.stacks))
    return MPDSConfiguration(None, stacks, 1, 1)


def mpds_step(
    system: MPDS,
    config: MPDSConfiguration,
    stack: int,
    rule: MpdsRule | int,
    scope: int,
) -> MPDSConfiguration:
    """Fire a rule on the given stack; only the current phase's stack moves."""
    if isinstance(rule, int):
        rule = system.rules[rule]
    if stack != config.phase or rule.stack != stack:
        raise WrongPhase("phase %d active, move names stack %d" % (config.phase, stack))
    if rule.source != config.control:
        raise MpdsError("rule fires from %r, configuration at %r" % (rule.source, config.control))
    cells = config.stacks[stack - 1]
    if rule.kind == PUSH:
        new_cells = ((rule.symbol, config.round),) + cells
    elif rule.kind == INTERNAL:
        new_cells = cells
    elif rule.kind == POP:
        if not cells or cells[0][0] != rule.symbol:
            raise TopMismatch("top of stack %d is not %r" % (stack, rule.symbol))
        sym, pushed_at = cells[0]
        if pushed_at < config.round - scope:
            raise ScopeViolation(
                "%r pushed in round %d, popped in round %d with scope %d"
                % (sym, pushed_at, config.round, scope)
            )
        new_cells = cells[1:]
    else:
        raise MpdsError("unknown rule kind %r" % rule.kind)
    stacks = config.stacks[: stack - 1] + (new_cells,) + config.stacks[stack:]
    return MPDSConfiguration(rule.target, stacks, config.round, config.phase)


def advance_phase(system: MPDS, config: MPDSConfiguration) -> MPDSConfiguration:
    if config.phase < system.stacks:
        return MPDSConfiguration(config.control, config.stacks, config.round, config.phase + 1)
    return MPDSConfiguration(config.control, config.stacks, config.round + 1, 1)


def _successors(system: MPDS, config: MPDSConfiguration, scope: int):
    """Deterministically ordered (config, move) pairs; a move is a rule index
    or the string "advance"."""
    out = []
    for i in system._by_stack.get(config.phase, ()):
        rule = system.rules[i]
        if rule.source != config.control:
            continue
        try:
            nxt = mpds_step(system, config, config.phase, rule, scope)
        except (TopMismatch, ScopeViolation):
            continue
        out.append((nxt, i))
    out.append((advance_phase(system, config), "advance"))
    return out


def mpds_reach_control(
    system: MPDS,
    scope: int,
    initial_control,
    target_control,
    round_bound: int,
    step_bound: int = 64,
) -> Verdict:
    """BFS over round-structured runs from <init, bottom stacks>; REACHABLE or
    UNKNOWN.  `step_bound` caps total moves (phase advances included) so the
    search terminates even though stacks are unbounded."""
    bounds = {"rounds": round_bound, "steps": step_bound, "scope": scope}
    start = MPDSConfiguration(initial_control, initial_configuration(system).stacks, 1, 1)
    if initial_control == target_control:
        return verdicts.reachable((), bounds)
    parents = {start: None}
    frontier = deque([(start, 0)])
    while frontier:
        cfg, d = frontier.popleft()
        if d == step_bound:
            continue
        for nxt, move in _successors(system, cfg, scope):
            if nxt.round > round_bound or nxt in parents:
                continue
            parents[nxt] = (cfg, move)
            if nxt.control == target_control:
                steps = []
                cur = nxt
                while parents[cur] is not None:
                    cur, mv = parents[cur]
                    steps.append(mv)
                return verdicts.reachable(tuple(reversed(steps)), bounds)
            frontier.append((nxt, d + 1))
    return verdicts.unknown(bounds)


# ---------------------------------------------------------------------------
# text format
#
#   mpds n=<k> scope=<W>
#   bottom <sym>          (optional, defaults to "bot")
#   push i q q' a
#   int i q q'
#   pop i q a q'


def parse_mpds(text: str):
    """Returns (MPDS, scope)."""
    stacks = None
    scope = None
    bottom = "bot"
    rules = []
    controls = set()
    alphabet = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        ln = raw.strip()
        if not ln or ln.startswith("#"):
            continue
        parts = ln.split()
        if parts[0] == "mpds":
            for item in parts[1:]:
                k, v = item.split("=")
                if k == "n":
                    stacks = int(v)
                elif k == "scope":
                    scope = int(v)
                else:
                    raise MpdsError("line %d: unknown mpds parameter %r" % (lineno, k))
        elif parts[0] == "bottom":
            bottom = parts[1]
        elif parts[0] == "push" and len(parts) == 5:
            _, i, q, q2, a = parts
            rules.append(MpdsRule(PUSH, int(i), q, q2, a))
            controls.update((q, q2))
            alphabet.add(a)
        elif parts[0] == "int" and len(parts) == 4:
            _, i, q, q2 = parts
            rules.append(MpdsRule(INTERNAL, int(i), q, q2))
            controls.update((q, q2))
        elif parts[0] == "pop" and len(parts) == 5:
            _, i, q, a, q2 = parts
            rules.append(MpdsRule(POP, int(i), q, q2, a))
            controls.update((q, q2))
            alphabet.add(a)
        else:
            raise MpdsError("line %d: unrecognised %r" % (lineno, ln))
    if stacks is None or scope is None:
        raise MpdsError("missing 'mpds n=<k> scope=<W>' header")
    return MPDS(controls, alphabet, bottom, stacks, rules), scope


def format_mpds(system: MPDS, scope: int) -> str:
    lines = ["mpds n=%d scope=%d" % (system.stacks, scope), "bottom %s" % system.bottom]
    for r in system.rules:
        if r.kind == PUSH:
            lines.append("push %d %s %s %s" % (r.stack, r.source, r.target, r.symbol))
        elif r.kind == INTERNAL:
            lines.append("int %d %s %s" % (r.stack, r.source, r.target))
        else:
            lines.append("pop %d %s %s %s" % (r.stack, r.source, r.symbol, r.target))
    return "\n".join(lines) + "\n"
