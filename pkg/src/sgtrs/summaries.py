"""Interface-summary pipeline: senescent control reachability via reset-net
coverability.

An independent sub-tree's externally visible behaviour is an interface: the
controls it witnesses, which control changes it effected (bit 1), and how many
new independent sub-trees each rule generated per window index.  A reset net
holds the running merge of interfaces (the summary) in its control state plus
counters c_{rule,index}; adding an interface walks a regular automaton of
realizable generation vectors, and resolving a completed window shifts the
counters down by one index.

Window length.  The source construction caps interface sequences at the
lifespan, but a sequence of n entries only ever exercises rewrites of nodes
aged up to n-2 when the last rewrite also effects a control change; rewriting
a node at the full lifespan while changing control therefore needs
lifespan + 2 entries (birth + lifespan witnessed changes + the effected one).
We use that cap, and keep it sound by disallowing rewrite activity at the
final index of a full-length window: rule families that rewrite are available
at indices <= lifespan + 1 only, so the oldest node ever rewritten has age
exactly the lifespan.  Anything younger that needs touching later can always
be re-declared independent at its own insertion (generation), so no behaviour
is lost.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .automata import (
    NTA,
    ParikhVector,
    automaton_from_vectors,
    nta_min_size,
    singleton_nta,
)
from .resetnet import (
    DECR,
    INCR,
    RESET,
    BackwardResult,
    PnRule,
    ResetNet,
    pn_cover_backward,
)
from .senescent import SenescentSystem, reach_control
from .systems import SGTRS, Configuration, Rule, subtree_index
from .trees import Tree
from .verdicts import Verdict


class SummaryError(ValueError):
    pass


class Incompatible(SummaryError):
    pass


class ResolutionBlocked(SummaryError):
    pass


# ---------------------------------------------------------------------------
# interfaces and summaries


@dataclass(frozen=True)
class Interface:
    """((control, bit, generation-row) ...); row r counts sub-trees generated
    via rule r (0-based) at that window index."""

    entries: tuple

    def __post_init__(self):
        if len(self.entries) < 1:
            raise SummaryError("interface must have at least one entry")
        for _q, b, row in self.entries:
            if b not in (0, 1):
                raise SummaryError("bit must be 0 or 1")
            if any(v < 0 for v in row):
                raise SummaryError("generation counts must be naturals")

    @property
    def pairs(self) -> tuple:
        return tuple((q, b) for q, b, _row in self.entries)

    @property
    def vectors(self) -> tuple:
        return tuple(row for _q, _b, row in self.entries)


@dataclass(frozen=True)
class Summary:
    """Sequence of (control, bit) pairs plus counters[index][rule]; counter
    rows beyond the sequence length stay zero."""

    pairs: tuple
    counters: tuple  # cap rows, each a tuple of per-rule counts

    @classmethod
    def initial(cls, control, rule_count: int, cap: int) -> "Summary":
        zero_row = (0,) * rule_count
        return cls(((control, 1),), tuple(zero_row for _ in range(cap)))

    @property
    def cap(self) -> int:
        return len(self.counters)


def sequences_compatible(a: tuple, b: tuple) -> bool:
    """Agree on controls over the overlap, and never both effect the same
    control change."""
    for (qa, ba), (qb, bb) in zip(a, b):
        if qa != qb:
            return False
        if ba == 1 and bb == 1:
            return False
    return True


def merge_sequences(a: tuple, b: tuple) -> tuple:
    if not sequences_compatible(a, b):
        raise Incompatible("sequences disagree: %r vs %r" % (a, b))
    overlap = tuple(
        (qa, 1 if (ba or bb) else 0) for (qa, ba), (qb, bb) in zip(a, b)
    )
    tail = a[len(b) :] if len(a) >= len(b) else b[len(a) :]
    return overlap + tail


def summary_add(summary: Summary, interface: Interface) -> Summary:
    pairs = merge_sequences(summary.pairs, interface.pairs)
    if len(pairs) > summary.cap:
        raise Incompatible("merged sequence exceeds the window cap")
    rows = list(summary.counters)
    for i, row in enumerate(interface.vectors):
        rows[i] = tuple(a + b for a, b in zip(rows[i], row))
    return Summary(pairs, tuple(rows))


def summary_resolve(summary: Summary) -> Summary:
    if len(summary.pairs) < 2:
        raise ResolutionBlocked("nothing to resolve: sequence has one entry")
    if summary.pairs[1][1] != 1:
        raise ResolutionBlocked("next control change not yet accounted for")
    zero_row = (0,) * len(summary.counters[0])
    rows = tuple(summary.counters[1:]) + (zero_row,)
    return Summary(summary.pairs[1:], rows)


# ---------------------------------------------------------------------------
# the per-rule weakly extended system


@dataclass
class IstiSystem:
    """Weakly extended output-sGTRS simulating one sub-tree window."""

    system: SGTRS
    sigma: tuple  # ((control, bit) ...)
    init_control: tuple
    final_control: tuple
    init_label: str
    ext_label: str
    rule_count: int
    output_symbols: tuple  # ordered (rule_idx, index) pairs
    lifespan: int


def _fresh_label(alphabet, base: str) -> str:
    name = base
    k = 1
    while name in alphabet:
        k += 1
        name = "%s_%d" % (base, k)
    return name


def build_istigtrs(system: SenescentSystem, rule_idx: int, sigma) -> IstiSystem:
    """The six rule families simulating a sub-tree generated by `rule_idx`
    whose window is `sigma` = ((control, bit) ...).

    Valid window lengths are 1..lifespan+2; rewriting families (simulation and
    generation) are restricted to indices <= lifespan+1 so a full-length
    window's final index is arrival-only.
    """
    base = system.base
    sigma = tuple((q, b) for q, b in sigma)
    n = len(sigma)
    cap = system.lifespan + 2
    if not 1 <= n <= cap:
        raise SummaryError("window length must be in 1..lifespan+2")
    rewrite_limit = system.lifespan + 1

    init_label = _fresh_label(base.alphabet, "init")
    ext_label = _fresh_label(base.alphabet, "ext")
    alphabet = base.alphabet.extended({init_label: 0, ext_label: 0})
    ext_leaf = singleton_nta(Tree(ext_label), alphabet)

    def lift(nta: NTA) -> NTA:
        # same automaton over the extended alphabet
        return NTA(nta.states, nta.finals, nta.rules, alphabet, singleton=nta.singleton)

    controls = [(q, b, i) for i, (q, b) in enumerate(sigma, 1)]
    rules: list[Rule] = []
    seed = base.rules[rule_idx]
    q1, b1 = sigma[0]
    rules.append(Rule((q1, b1, 1), singleton_nta(Tree(init_label), alphabet), (q1, b1, 1), lift(seed.rhs)))
    arity0 = sorted(a for a, r in alphabet.items() if r == 0)
    for i, (qi, bi) in enumerate(sigma, 1):
        me = (qi, bi, i)
        nxt = sigma[i] if i < n else None
        for r2, rule in enumerate(base.rules):
            if rule.source == qi and rule.target == qi and i <= rewrite_limit:
                # in-window rewrite, and the generating variant
                rules.append(Rule(me, lift(rule.lhs), me, lift(rule.rhs)))
                rules.append(Rule(me, lift(rule.lhs), me, ext_leaf, output=(r2, i)))
            if nxt is not None and nxt[1] == 1 and rule.source == qi and rule.target == nxt[0] and rule.target != qi:
                to = (nxt[0], 1, i + 1)
                rules.append(Rule(me, lift(rule.lhs), to, lift(rule.rhs)))
                rules.append(Rule(me, lift(rule.lhs), to, ext_leaf, output=(r2, i + 1)))
        if nxt is not None and nxt[1] == 0:
            to = (nxt[0], 0, i + 1)
            for a in arity0:
                one = singleton_nta(Tree(a), alphabet)
                rules.append(Rule(me, one, to, one))

    out_symbols = tuple((r2, i) for r2 in range(len(base.rules)) for i in range(1, n + 1))
    return IstiSystem(
        system=SGTRS(controls, alphabet, rules),
        sigma=sigma,
        init_control=(q1, b1, 1),
        final_control=(sigma[-1][0], sigma[-1][1], n),
        init_label=init_label,
        ext_label=ext_label,
        rule_count=len(base.rules),
        output_symbols=out_symbols,
        lifespan=system.lifespan,
    )


def interface_parikh(isti: IstiSystem, depth_bound: int, rhs_bound: int) -> frozenset:
    """All generation-vector sequences of runs from the init leaf to any
    configuration in the window's final control, within the bounds.  Sound
    (every tuple is realized by a run), possibly incomplete."""
    n = len(isti.sigma)
    m = isti.rule_count
    zero = tuple((0,) * m for _ in range(n))
    start = (isti.init_control, Tree(isti.init_label), zero)
    seen = {start}
    frontier = deque([(start, 0)])
    found = set()
    if isti.init_control == isti.final_control:
        found.add(zero)
    sys_ = isti.system
    while frontier:
        (control, tree, vec), d = frontier.popleft()
        if d == depth_bound:
            continue
        for cfg, _ri, _pos, out in _successors_with_outputs(sys_, control, tree, rhs_bound):
            nvec = vec
            if out is not None:
                r2, i = out
                row = list(nvec[i - 1])
                row[r2] += 1
                nvec = nvec[: i - 1] + (tuple(row),) + nvec[i:]
            state = (cfg.control, cfg.tree, nvec)
            if state in seen:
                continue
            seen.add(state)
            if cfg.control == isti.final_control:
                found.add(nvec)
            frontier.append((state, d + 1))
    return frozenset(found)


def _successors_with_outputs(system: SGTRS, control, tree, rhs_bound):
    from .systems import successors

    return successors(system, Configuration(control, tree), rhs_bound)


# ---------------------------------------------------------------------------
# batched window enumeration
#
# Building one IstiSystem per candidate window is wasteful: the run itself
# discovers its window.  This explorer runs once per generating rule and
# returns every (window, vector-sequence) pair realizable within the bounds.


def interface_vector_table(
    system: SenescentSystem,
    rule_idx: int,
    depth_bound: int,
    rhs_bound: int,
    seq_cap: int,
) -> dict:
    """window pairs -> set of vector sequences (rows padded to the window
    length), for sub-trees generated by `rule_idx`.  Windows start with bit 0
    at the generating rule's target control."""
    base = system.base
    rewrite_limit = system.lifespan + 1
    ext_label = _fresh_label(base.alphabet, "ext")
    init_label = _fresh_label(base.alphabet, "init")
    ext = Tree(ext_label)
    controls = sorted(base.controls, key=repr)

    seed = base.rules[rule_idx]
    start_trace = ((seed.target, 0),)
    start = (Tree(init_label), start_trace, ())
    seen = {start}
    frontier = deque([(start, 0)])
    table: dict = {start_trace: {_pad((), 1, len(base.rules))}}

    def record(trace, emissions):
        table.setdefault(trace, set()).add(_pad(emissions, len(trace), len(base.rules)))

    while frontier:
        (tree, trace, emis), d = frontier.popleft()
        if d == depth_bound:
            continue
        i = len(trace)
        qi = trace[-1][0]
        nexts = []
        if tree.label == init_label and i == 1:
            for t in base.rhs_trees(rule_idx, rhs_bound):
                nexts.append((t, trace, emis))
        if i <= rewrite_limit:
            from .systems import match_candidates

            for r2, positions in match_candidates(base, qi, tree):
                rule = base.rules[r2]
                if rule.target == qi:
                    for pos in positions:
                        for t in base.rhs_trees(r2, rhs_bound):
                            nexts.append((tree.replace_at(pos, t), trace, emis))
                        nexts.append((tree.replace_at(pos, ext), trace, emis + ((r2, i),)))
                elif i < seq_cap:
                    to = trace + ((rule.target, 1),)
                    for pos in positions:
                        for t in base.rhs_trees(r2, rhs_bound):
                            nexts.append((tree.replace_at(pos, t), to, emis))
                        nexts.append((tree.replace_at(pos, ext), to, emis + ((r2, i + 1),)))
        if i < seq_cap:
            for q2 in controls:
                if q2 != qi:
                    nexts.append((tree, trace + ((q2, 0),), emis))
        for state in nexts:
            if state in seen:
                continue
            seen.add(state)
            record(state[1], state[2])
            frontier.append((state, d + 1))
    return {trace: frozenset(vecs) for trace, vecs in table.items()}


def _match_positions(rule: Rule, tree: Tree, index):
    if rule.lhs.singleton is not None:
        return index.get(rule.lhs.singleton, ())
    return [pos for pos, sub in tree.walk() if rule.lhs.states_at(sub) & rule.lhs.finals]


def _pad(emissions, length: int, rule_count: int):
    rows = [[0] * rule_count for _ in range(length)]
    for r2, i in emissions:
        rows[i - 1][r2] += 1
    return tuple(tuple(row) for row in rows)


# ---------------------------------------------------------------------------
# the reset net


@dataclass
class PnReachEncoding:
    net: ResetNet
    initial: tuple  # (control, Marking)
    target: tuple  # (control, Marking)
    target_exists: bool
    rule_count: int
    seq_cap: int
    state_names: dict = field(default_factory=dict)
    counter_names: dict = field(default_factory=dict)
    vector_tables: dict = field(default_factory=dict)


def _virtualized(system: SenescentSystem, initial_control, initial_tree: Tree):
    """Prepend the virtual rule r1 (empty lhs language, rhs = the initial
    tree); it can never fire, it only seeds the interface machinery."""
    base = system.base
    empty_lhs = NTA(["sink"], [], [], base.alphabet)
    virtual = Rule(initial_control, empty_lhs, initial_control, singleton_nta(initial_tree, base.alphabet))
    ext = SGTRS(base.controls, base.alphabet, (virtual,) + base.rules)
    return SenescentSystem(ext, system.lifespan)


def build_pnreach(
    system: SenescentSystem,
    initial_control,
    target_control,
    initial_tree: Tree,
    parikh_depth: int = 8,
    rhs_bound: Optional[int] = None,
    seq_cap: Optional[int] = None,
) -> PnReachEncoding:
    """The reset net whose coverability of <(target,1), zero> from
    <(initial,1), c_{r1,1}=1> matches lifespan-restricted control
    reachability (exactly for unbounded window enumeration; sound-for-YES at
    the bounded enumeration used here).

    Only summary states forward-reachable in the control graph are
    materialized, and window tables are computed once per generating rule.
    """
    if initial_control not in system.base.controls:
        raise SummaryError("unknown initial control %r" % (initial_control,))
    if target_control not in system.base.controls:
        raise SummaryError("unknown target control %r" % (target_control,))
    vsys = _virtualized(system, initial_control, initial_tree)
    base = vsys.base
    m = len(base.rules)
    cap = seq_cap if seq_cap is not None else system.lifespan + 2
    if rhs_bound is None:
        rhs_bound = max(base.default_rhs_bound(), initial_tree.size)

    # window tables for every rule that can actually generate sub-trees
    tables: dict = {}
    gen_rules = deque([0])
    known = {0}
    while gen_rules:
        r = gen_rules.popleft()
        tables[r] = interface_vector_table(vsys, r, parikh_depth, rhs_bound, cap)
        for vecs in tables[r].values():
            for vec in vecs:
                for row in vec:
                    for r2, count in enumerate(row):
                        if count and r2 not in known:
                            known.add(r2)
                            gen_rules.append(r2)

    counters = ["c_r%d_i%d" % (r, i) for r in range(m) for i in range(1, cap + 1)]
    cname = {(r, i): "c_r%d_i%d" % (r, i) for r in range(m) for i in range(1, cap + 1)}

    def sum_state(pairs):
        return ("sum", pairs)

    def shift_state(pairs, i):
        return ("shift", pairs, i)

    init_pairs = ((initial_control, 1),)
    target_pairs = ((target_control, 1),)

    states = {sum_state(init_pairs)}
    rules: list[PnRule] = []
    worklist = deque([init_pairs])
    seen_pairs = {init_pairs}
    symbols = tuple((r, i) for r in range(m) for i in range(1, cap + 1))

    while worklist:
        pairs = worklist.popleft()
        src = sum_state(pairs)
        # additions: consume an available sub-tree of rule r, walk its vectors
        for r in sorted(tables):
            for sigma2, vecs in sorted(tables[r].items(), key=lambda kv: kv[0]):
                if sigma2[0][0] != pairs[0][0]:
                    continue
                if not sequences_compatible(pairs, sigma2):
                    continue
                merged = merge_sequences(pairs, sigma2)
                if len(merged) > cap:
                    continue
                chain = automaton_from_vectors(
                    [ParikhVector(symbols, _flatten(v, cap, m)) for v in sorted(vecs)],
                    symbols,
                )
                entry = ("aut", merged, r, sigma2, chain.initial)
                rules.append(PnRule(src, frozenset([(DECR, cname[(r, 1)])]), entry))
                states.add(entry)
                for q, sym, q2 in sorted(chain.transitions, key=repr):
                    a = ("aut", merged, r, sigma2, q)
                    b = ("aut", merged, r, sigma2, q2)
                    states.update((a, b))
                    rules.append(PnRule(a, frozenset([(INCR, cname[sym])]), b))
                for q in sorted(chain.finals, key=repr):
                    a = ("aut", merged, r, sigma2, q)
                    states.add(a)
                    rules.append(PnRule(a, frozenset(), sum_state(merged)))
                states.add(sum_state(merged))
                if merged not in seen_pairs:
                    seen_pairs.add(merged)
                    worklist.append(merged)
        # resolution: drop the completed first window index
        if len(pairs) >= 2 and pairs[1][1] == 1:
            rest = pairs[1:]
            first = shift_state(rest, 1)
            states.add(first)
            rules.append(
                PnRule(
                    src,
                    frozenset((RESET, cname[(r, 1)]) for r in range(m)),
                    first,
                )
            )
            for i in range(1, cap):
                cur = shift_state(rest, i)
                nxt = shift_state(rest, i + 1)
                states.update((cur, nxt))
                for r in range(m):
                    rules.append(
                        PnRule(
                            cur,
                            frozenset([(DECR, cname[(r, i + 1)]), (INCR, cname[(r, i)])]),
                            cur,
                        )
                    )
                rules.append(
                    PnRule(cur, frozenset((RESET, cname[(r, i + 1)]) for r in range(m)), nxt)
                )
            last = shift_state(rest, cap)
            states.add(last)
            rules.append(PnRule(last, frozenset(), sum_state(rest)))
            states.add(sum_state(rest))
            if rest not in seen_pairs:
                seen_pairs.add(rest)
                worklist.append(rest)

    target_exists = sum_state(target_pairs) in states
    if not target_exists:
        states.add(sum_state(target_pairs))
    net = ResetNet(states, counters, rules)
    initial_marking = net.marking({cname[(0, 1)]: 1})
    return PnReachEncoding(
        net=net,
        initial=(sum_state(init_pairs), initial_marking),
        target=(sum_state(target_pairs), net.zero()),
        target_exists=target_exists,
        rule_count=m,
        seq_cap=cap,
        state_names={s: _state_name(s) for s in states},
        counter_names=cname,
        vector_tables=tables,
    )


def _flatten(vec, cap: int, m: int) -> tuple:
    counts = [0] * (m * cap)
    for i, row in enumerate(vec, 1):
        for r, v in enumerate(row):
            counts[r * cap + (i - 1)] = v
    return tuple(counts)


def _state_name(state) -> str:
    kind = state[0]
    if kind == "sum":
        pairs = "_".join("%s%d" % (q, b) for q, b in state[1])
        return "sum__" + pairs
    if kind == "shift":
        pairs = "_".join("%s%d" % (q, b) for q, b in state[1])
        return "shift%d__%s" % (state[2], pairs)
    pairs = "_".join("%s%d" % (q, b) for q, b in state[1])
    return "aut_r%d__%s__%s" % (state[2], pairs, state[4])


# ---------------------------------------------------------------------------
# the two-route decision


@dataclass
class Decision:
    verdict: Verdict
    forward: Verdict
    summary_covered: Optional[bool]
    encoding: Optional[PnReachEncoding]
    backward: Optional[BackwardResult]


def decide_control_reachability(
    system: SenescentSystem,
    initial_control,
    initial_tree: Tree,
    target_control,
    depth_bound: int = 10,
    rhs_bound: Optional[int] = None,
    parikh_depth: int = 8,
) -> Decision:
    """Run the forward explorer and the summary route; REACHABLE if either
    succeeds.  Both routes are sound for YES; neither can certify NO at
    bounded exploration, so the combined answer is never NO."""
    if rhs_bound is None:
        rhs_bound = max(system.base.default_rhs_bound(), initial_tree.size)
    forward = reach_control(
        system, Configuration(initial_control, initial_tree), target_control, depth_bound, rhs_bound
    )
    encoding = build_pnreach(
        system, initial_control, target_control, initial_tree, parikh_depth, rhs_bound
    )
    if encoding.target_exists:
        backward = pn_cover_backward(encoding.net, encoding.initial, encoding.target)
        covered = backward.covered
    else:
        backward = None
        covered = False
    if forward.reachable:
        verdict = forward
    elif covered:
        verdict = Verdict("REACHABLE", None, {"route": "summary"})
    else:
        verdict = forward  # UNKNOWN with the forward bounds
    return Decision(verdict, forward, covered, encoding, backward)
