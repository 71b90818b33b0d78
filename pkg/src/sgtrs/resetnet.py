"""Reset Petri nets as counter machines: incr / decr / reset operation sets.

Operations of one rule apply in the fixed order decrement, reset, increment;
a decrement on a zero counter blocks the rule.  Two coverability engines:

* `pn_cover_forward` - bounded BFS, a semi-decision used as a cross-check;
* `pn_cover_backward` - the backward pred-basis algorithm over upward-closed
  sets, which is sound, complete and terminating for coverability (markings
  are well-quasi-ordered, so the minimal-basis fixpoint stabilises).

The backward engine is the engine of record; reset arcs break the classical
Karp-Miller coverability tree for some analyses, so we do not attempt it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Hashable, Iterable, Optional

from . import verdicts
from .verdicts import Verdict

INCR = "incr"
DECR = "decr"
RESET = "reset"


class ResetNetError(ValueError):
    pass


class StuckOnDecrement(ResetNetError):
    pass


class WrongControl(ResetNetError):
    pass


@dataclass(frozen=True)
class PnRule:
    source: Hashable
    ops: frozenset  # of (op, counter) pairs
    target: Hashable

    def __post_init__(self):
        for op, _c in self.ops:
            if op not in (INCR, DECR, RESET):
                raise ResetNetError("unknown counter operation %r" % op)


class Marking:
    """Counter valuation over a fixed counter ordering."""

    __slots__ = ("counters", "values")

    def __init__(self, counters: tuple, values: Iterable[int]):
        self.counters = tuple(counters)
        self.values = tuple(values)
        if len(self.counters) != len(self.values):
            raise ResetNetError("marking arity mismatch")
        if any(v < 0 for v in self.values):
            raise ResetNetError("negative counter value")

    def __getitem__(self, counter) -> int:
        return self.values[self.counters.index(counter)]

    def covers(self, other: "Marking") -> bool:
        """self >= other componentwise (other is covered by self)."""
        return self.counters == other.counters and all(
            a >= b for a, b in zip(self.values, other.values)
        )

    def as_dict(self) -> dict:
        return dict(zip(self.counters, self.values))

    def __eq__(self, other):
        return (
            isinstance(other, Marking)
            and self.counters == other.counters
            and self.values == other.values
        )

    def __hash__(self):
        return hash((self.counters, self.values))

    def __repr__(self):
        return " ".join("%s=%d" % kv for kv in zip(self.counters, self.values))


class ResetNet:
    __slots__ = ("controls", "counters", "rules", "_by_source", "_by_target", "_compiled")

    def __init__(self, controls: Iterable, counters: Iterable, rules: Iterable[PnRule]):
        self.controls = frozenset(controls)
        self.counters = tuple(counters)
        if len(set(self.counters)) != len(self.counters):
            raise ResetNetError("duplicate counters")
        self.rules = tuple(rules)
        cset = set(self.counters)
        for i, r in enumerate(self.rules):
            if r.source not in self.controls or r.target not in self.controls:
                raise ResetNetError("rule %d uses undeclared control" % i)
            for _op, c in r.ops:
                if c not in cset:
                    raise ResetNetError("rule %d uses undeclared counter %r" % (i, c))
        by_source: dict = {}
        by_target: dict = {}
        for i, r in enumerate(self.rules):
            by_source.setdefault(r.source, []).append(i)
            by_target.setdefault(r.target, []).append(i)
        self._by_source = by_source
        self._by_target = by_target
        pos = {c: i for i, c in enumerate(self.counters)}
        self._compiled = tuple(
            (
                tuple(pos[c] for op, c in r.ops if op == DECR),
                tuple(pos[c] for op, c in r.ops if op == RESET),
                tuple(pos[c] for op, c in r.ops if op == INCR),
            )
            for r in self.rules
        )

    def marking(self, values: dict | None = None, **kw) -> Marking:
        vals = dict(values or {})
        vals.update(kw)
        unknown = set(vals) - set(self.counters)
        if unknown:
            raise ResetNetError("unknown counters %s" % sorted(unknown))
        return Marking(self.counters, tuple(vals.get(c, 0) for c in self.counters))

    def zero(self) -> Marking:
        return Marking(self.counters, (0,) * len(self.counters))


def pn_step(net: ResetNet, config, rule: PnRule | int):
    """Fire one rule: decrements, then resets, then increments."""
    control, marking = config
    if isinstance(rule, int):
        rule = net.rules[rule]
    if rule.source != control:
        raise WrongControl("rule fires from %r, configuration at %r" % (rule.source, control))
    vals = list(marking.values)
    idx = {c: i for i, c in enumerate(marking.counters)}
    for op, c in rule.ops:
        if op == DECR:
            if vals[idx[c]] == 0:
                raise StuckOnDecrement("decrement of %r at zero" % (c,))
            vals[idx[c]] -= 1
    for op, c in rule.ops:
        if op == RESET:
            vals[idx[c]] = 0
    for op, c in rule.ops:
        if op == INCR:
            vals[idx[c]] += 1
    return rule.target, Marking(marking.counters, vals)


def _enabled_step(net, control, values, rule_idx):
    """Fast non-raising variant over raw value tuples; None if blocked."""
    decr, reset, incr = net._compiled[rule_idx]
    vals = list(values)
    for i in decr:
        if vals[i] == 0:
            return None
        vals[i] -= 1
    for i in reset:
        vals[i] = 0
    for i in incr:
        vals[i] += 1
    return net.rules[rule_idx].target, tuple(vals)


def _forward_search(net, initial, accept, depth_bound) -> Verdict:
    bounds = {"depth": depth_bound}
    control, marking = initial
    state = (control, tuple(marking.values))
    if accept(state):
        return verdicts.reachable((), bounds)
    parents = {state: None}
    frontier = deque([(state, 0)])
    while frontier:
        (ctrl, vals), d = frontier.popleft()
        if d == depth_bound:
            continue
        for i in net._by_source.get(ctrl, ()):
            nxt = _enabled_step(net, ctrl, vals, i)
            if nxt is None or nxt in parents:
                continue
            parents[nxt] = ((ctrl, vals), i)
            if accept(nxt):
                steps = []
                cur = nxt
                while parents[cur] is not None:
                    cur, ri = parents[cur]
                    steps.append(ri)
                return verdicts.reachable(tuple(reversed(steps)), bounds)
            frontier.append((nxt, d + 1))
    return verdicts.unknown(bounds)


def pn_cover_forward(net: ResetNet, initial, target, depth_bound: int) -> Verdict:
    """REACHABLE iff some reached configuration covers the target within the
    depth bound.  Witness is a sequence of rule indices."""
    tctrl, tmarking = target
    tvals = tuple(tmarking.values)

    def accept(state):
        ctrl, vals = state
        return ctrl == tctrl and all(a >= b for a, b in zip(vals, tvals))

    return _forward_search(net, initial, accept, depth_bound)


def pn_reach_forward(net: ResetNet, initial, target, depth_bound: int) -> Verdict:
    """Exact-marking reachability, bounded (test oracle; the exact problem is
    undecidable)."""
    tctrl, tmarking = target
    tvals = tuple(tmarking.values)

    def accept(state):
        ctrl, vals = state
        return ctrl == tctrl and vals == tvals

    return _forward_search(net, initial, accept, depth_bound)


# ---------------------------------------------------------------------------
# backward coverability


def pred_basis_values(rule: PnRule, target_values: tuple, counters: tuple):
    """Minimal marking m such that firing `rule` from m is enabled and yields
    a marking covering `target_values`; None if no predecessor exists.

    Inverting decr -> reset -> incr: for a reset counter the post-value is
    [incr], so a predecessor exists only if target <= [incr] and the minimal
    pre-value is just what the decrement needs; otherwise the pre-value is
    max(0, target - [incr]) + [decr].
    """
    ops = {}
    for op, c in rule.ops:
        ops.setdefault(c, set()).add(op)
    out = []
    for c, t in zip(counters, target_values):
        o = ops.get(c, ())
        d = 1 if DECR in o else 0
        i = 1 if INCR in o else 0
        if RESET in o:
            if t > i:
                return None
            out.append(d)
        else:
            out.append(max(0, t - i) + d)
    return tuple(out)


class CoverBasis:
    """Finite antichain of (control, value-tuple) pairs representing an
    upward-closed set of configurations; insertion keeps it minimal."""

    def __init__(self):
        self._per_control: dict = {}

    def covered(self, control, values) -> bool:
        """Is (control, values) already in the upward closure?"""
        for v in self._per_control.get(control, ()):
            if all(a <= b for a, b in zip(v, values)):
                return True
        return False

    def insert(self, control, values) -> bool:
        """Insert if not covered; drop elements the new one subsumes.
        Returns True if the basis changed."""
        if self.covered(control, values):
            return False
        pool = self._per_control.setdefault(control, [])
        pool[:] = [v for v in pool if not all(a <= b for a, b in zip(values, v))]
        pool.append(values)
        return True

    def items(self):
        for control in sorted(self._per_control, key=repr):
            for values in sorted(self._per_control[control]):
                yield control, values

    def __len__(self):
        return sum(len(v) for v in self._per_control.values())


@dataclass
class BackwardResult:
    covered: bool
    basis: CoverBasis
    witness: Optional[tuple[int, ...]] = None  # rule indices, forward order

    def __bool__(self):
        return self.covered


def pn_cover_backward(net: ResetNet, initial, target) -> BackwardResult:
    """Exact coverability decision via the least fixpoint of pred-basis over
    upward-closed sets.  Terminates on every input (Dickson's lemma)."""
    init_ctrl, init_marking = initial
    init_vals = tuple(init_marking.values)
    tctrl, tmarking = target
    tvals = tuple(tmarking.values)

    basis = CoverBasis()
    basis.insert(tctrl, tvals)
    # trail: (control, values) -> forward rule sequence to coverage
    trail = {(tctrl, tvals): ()}
    frontier = deque([(tctrl, tvals)])
    while frontier:
        ctrl, vals = frontier.popleft()
        if not basis.covered(ctrl, vals):
            continue  # subsumed after insertion
        for i in net._by_target.get(ctrl, ()):
            rule = net.rules[i]
            pre = pred_basis_values(rule, vals, net.counters)
            if pre is None:
                continue
            if basis.insert(rule.source, pre):
                trail[(rule.source, pre)] = (i,) + trail[(ctrl, vals)]
                frontier.append((rule.source, pre))

    for (ctrl, vals), seq in sorted(trail.items(), key=lambda kv: (len(kv[1]), repr(kv[0]))):
        if ctrl == init_ctrl and all(a <= b for a, b in zip(vals, init_vals)):
            return BackwardResult(True, basis, seq)
    return BackwardResult(False, basis, None)


# ---------------------------------------------------------------------------
# text format
#
#   counters c1 c2 ...
#   controls q1 q2 ...
#   rule q {incr c1, reset c2} q'
#
# markings: "c1=3 c2=0" (or comma separated); configs: "ctrl: marking".


def parse_resetnet(text: str) -> ResetNet:
    counters: list = []
    controls: list = []
    rules: list = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        ln = raw.strip()
        if not ln or ln.startswith("#"):
            continue
        if ln.startswith("counters"):
            counters.extend(ln.split()[1:])
        elif ln.startswith("controls"):
            controls.extend(ln.split()[1:])
        elif ln.startswith("rule"):
            try:
                head, rest = ln.split("{", 1)
                ops_text, tail = rest.split("}", 1)
            except ValueError:
                raise ResetNetError("line %d: rule needs {...} ops" % lineno)
            src = head.split()[1]
            tgt = tail.split()[0]
            ops = set()
            for item in ops_text.replace(",", " , ").split(","):
                item = item.strip()
                if not item:
                    continue
                try:
                    op, c = item.split()
                except ValueError:
                    raise ResetNetError("line %d: bad op %r" % (lineno, item))
                ops.add((op, c))
            rules.append(PnRule(src, frozenset(ops), tgt))
        else:
            raise ResetNetError("line %d: unrecognised %r" % (lineno, ln))
    return ResetNet(controls, counters, rules)


def format_resetnet(net: ResetNet) -> str:
    lines = [
        "counters " + " ".join(map(str, net.counters)),
        "controls " + " ".join(sorted(map(str, net.controls))),
    ]
    for r in net.rules:
        ops = ", ".join("%s %s" % (op, c) for op, c in sorted(r.ops))
        lines.append("rule %s {%s} %s" % (r.source, ops, r.target))
    return "\n".join(lines) + "\n"


def parse_marking(text: str, net: ResetNet) -> Marking:
    vals = {}
    for item in text.replace(",", " ").split():
        try:
            c, v = item.split("=")
        except ValueError:
            raise ResetNetError("bad marking item %r" % item)
        vals[c] = int(v)
    return net.marking(vals)


def parse_config(text: str, net: ResetNet):
    """"ctrl" or "ctrl:c1=2 c2=0" -> (control, Marking)."""
    if ":" in text:
        ctrl, rest = text.split(":", 1)
        ctrl = ctrl.strip()
        marking = parse_marking(rest, net) if rest.strip() else net.zero()
    else:
        ctrl, marking = text.strip(), net.zero()
    if ctrl not in net.controls:
        raise ResetNetError("unknown control %r" % ctrl)
    return ctrl, marking
