"""Ground tree rewrite systems with state (and optional output symbols).

A rule <q1, T1> -> <q2, T2> rewrites one subtree accepted by T1 into a tree
accepted by T2 while moving the control state from q1 to q2.  Rule order is
significant: the i-th rule is r_{i+1} in witness output (1-based).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Optional

from .automata import (
    NTA,
    format_nta,
    nta_empty,
    nta_enumerate,
    nta_min_size,
    parse_nta,
    singleton_nta,
)
from .trees import RankedAlphabet, Tree, format_tree, parse_tree


class SystemError_(ValueError):
    pass


class Rule:
    __slots__ = ("source", "lhs", "target", "rhs", "output")

    def __init__(self, source, lhs: NTA, target, rhs: NTA, output=None):
        self.source = source
        self.lhs = lhs
        self.target = target
        self.rhs = rhs
        self.output = output

    def __repr__(self):
        out = " emits %r" % (self.output,) if self.output is not None else ""
        return "Rule(%r -> %r%s)" % (self.source, self.target, out)


@dataclass(frozen=True)
class Configuration:
    control: Hashable
    tree: Tree


class SGTRS:
    """Controls, ranked alphabet and an ordered rule sequence.

    Rules whose automata have an empty language are tolerated (they can never
    fire); `validate_system` reports them.  The empty tree is not accepted by
    any NTA here since tree domains are nonempty by construction.
    """

    __slots__ = (
        "controls",
        "alphabet",
        "rules",
        "_by_source",
        "_singleton_index",
        "_general_by_source",
        "_rhs_cache",
    )

    def __init__(self, controls: Iterable, alphabet: RankedAlphabet, rules: Iterable[Rule]):
        self.controls = frozenset(controls)
        self.alphabet = alphabet
        self.rules = tuple(rules)
        for i, r in enumerate(self.rules):
            if r.source not in self.controls or r.target not in self.controls:
                raise SystemError_("rule %d uses undeclared control" % (i + 1))
        by_source: dict = {}
        singleton_index: dict = {}
        general: dict = {}
        for i, r in enumerate(self.rules):
            by_source.setdefault(r.source, []).append(i)
            if r.lhs.singleton is not None:
                singleton_index.setdefault(r.source, {}).setdefault(r.lhs.singleton, []).append(i)
            else:
                general.setdefault(r.source, []).append(i)
        self._by_source = by_source
        self._singleton_index = singleton_index
        self._general_by_source = general
        self._rhs_cache: dict = {}

    @property
    def output_symbols(self) -> frozenset:
        return frozenset(r.output for r in self.rules if r.output is not None)

    def rhs_trees(self, rule_idx: int, bound: int) -> tuple[Tree, ...]:
        """RHS instantiations with at most `bound` nodes, cached."""
        key = (rule_idx, bound)
        got = self._rhs_cache.get(key)
        if got is None:
            got = tuple(nta_enumerate(self.rules[rule_idx].rhs, bound))
            self._rhs_cache[key] = got
        return got

    def default_rhs_bound(self) -> int:
        """Largest minimal RHS tree over all rules (the singleton-rule tree
        size when every RHS is a singleton)."""
        sizes = [nta_min_size(r.rhs) for r in self.rules]
        sizes = [s for s in sizes if s is not None]
        return max(sizes, default=1)


def validate_system(system: SGTRS) -> list[str]:
    """Well-formedness report: empty-language rule automata, alphabet drift."""
    problems = []
    for i, r in enumerate(system.rules):
        if r.lhs.alphabet != system.alphabet and not _sub_alphabet(r.lhs.alphabet, system.alphabet):
            problems.append("rule %d: lhs alphabet not contained in system alphabet" % (i + 1))
        if r.rhs.alphabet != system.alphabet and not _sub_alphabet(r.rhs.alphabet, system.alphabet):
            problems.append("rule %d: rhs alphabet not contained in system alphabet" % (i + 1))
        if nta_empty(r.lhs):
            problems.append("rule %d: lhs language is empty (rule can never fire)" % (i + 1))
        if nta_empty(r.rhs):
            problems.append("rule %d: rhs language is empty (rule can never fire)" % (i + 1))
    return problems


def _sub_alphabet(small: RankedAlphabet, big: RankedAlphabet) -> bool:
    return all(a in big and big.rank(a) == n for a, n in small.items())


def subtree_index(tree: Tree) -> dict[Tree, list[tuple[int, ...]]]:
    """Map each distinct subtree to its positions (pre-order)."""
    index: dict = {}
    for pos, sub in tree.walk():
        index.setdefault(sub, []).append(pos)
    return index


def match_candidates(system: SGTRS, control, tree: Tree):
    """(rule index, positions) pairs for every rule applicable somewhere in
    `tree` from `control`, found via the (control, lhs tree) index so cost
    scales with matches rather than rule count."""
    out = []
    sing = system._singleton_index.get(control)
    if sing:
        for sub, positions in subtree_index(tree).items():
            for i in sing.get(sub, ()):
                out.append((i, positions))
    for i in system._general_by_source.get(control, ()):
        rule = system.rules[i]
        positions = [
            pos for pos, sub in tree.walk() if rule.lhs.states_at(sub) & rule.lhs.finals
        ]
        if positions:
            out.append((i, positions))
    out.sort(key=lambda item: item[0])
    return out


def successors(system: SGTRS, config: Configuration, rhs_bound: int):
    """All transitions from `config` whose inserted tree has <= rhs_bound
    nodes, as (Configuration, rule index, position, output) tuples sorted by
    (rule index, position, inserted tree)."""
    out = []
    for i, positions in match_candidates(system, config.control, config.tree):
        rule = system.rules[i]
        inserts = system.rhs_trees(i, rhs_bound)
        for pos in positions:
            for t in inserts:
                cfg = Configuration(rule.target, config.tree.replace_at(pos, t))
                out.append((cfg, i, pos, rule.output))
    out.sort(key=lambda item: (item[1], item[2], format_tree(item[0].tree)))
    return out


def underlying_control_graph(system: SGTRS) -> frozenset:
    return frozenset((r.source, r.target) for r in system.rules)


def is_weakly_extended(system: SGTRS) -> bool:
    """True iff every cycle of the underlying control graph is a self-loop,
    i.e. every strongly connected component is a single node."""
    edges: dict = {}
    for a, b in underlying_control_graph(system):
        if a != b:
            edges.setdefault(a, set()).add(b)
    # iterative Tarjan; any SCC with >= 2 nodes is a non-trivial cycle
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    counter = [0]
    nodes = set(system.controls)

    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(sorted(edges.get(root, ()), key=repr)))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(sorted(edges.get(w, ()), key=repr))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                scc = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    scc.append(w)
                    if w == v:
                        break
                if len(scc) > 1:
                    return False
    return True


# ---------------------------------------------------------------------------
# text format
#
#   controls q1 q2 ...
#   alphabet a:2 b:0 ...
#   lifespan 2              (optional; a default the CLI flag overrides)
#   nta NAME ... end        (named NTA blocks, reusable in rules)
#   rule q1 <ntaref> -> q2 <ntaref> [emits SYM]
#
# <ntaref> is either single(<tree>) or the name of an nta block.


class SystemParseError(SystemError_):
    def __init__(self, message, line):
        super().__init__("line %d: %s" % (line, message))
        self.line = line


def parse_system(text: str):
    """Returns (SGTRS, declared_lifespan or None)."""
    controls: list = []
    ranks: dict[str, int] = {}
    ntas: dict[str, str] = {}
    rule_specs: list = []
    lifespan = None

    lines = text.splitlines()
    i = 0
    while i < len(lines):
        ln = lines[i].strip()
        i += 1
        if not ln or ln.startswith("#"):
            continue
        if ln.startswith("controls"):
            controls.extend(ln.split()[1:])
        elif ln.startswith("alphabet"):
            for item in ln.split()[1:]:
                try:
                    a, n = item.rsplit(":", 1)
                    ranks[a] = int(n)
                except ValueError:
                    raise SystemParseError("bad alphabet item %r" % item, i)
        elif ln.startswith("lifespan"):
            lifespan = int(ln.split()[1])
        elif ln.startswith("nta "):
            name = ln.split()[1]
            block = ["nta"]
            while i < len(lines):
                inner = lines[i].strip()
                i += 1
                if inner == "end":
                    break
                block.append(inner)
            else:
                raise SystemParseError("nta block %r missing 'end'" % name, i)
            ntas[name] = "\n".join(block)
        elif ln.startswith("rule"):
            rule_specs.append((ln, i))
        else:
            raise SystemParseError("unrecognised line %r" % ln, i)

    if not ranks:
        raise SystemParseError("no alphabet declared", 0)
    alphabet = RankedAlphabet(ranks)

    def resolve(ref: str, line: int) -> NTA:
        ref = ref.strip()
        if ref.startswith("single(") and ref.endswith(")"):
            return singleton_nta(parse_tree(ref[len("single(") : -1]), alphabet)
        if ref in ntas:
            return parse_nta(ntas[ref], alphabet)
        raise SystemParseError("unknown nta reference %r" % ref, line)

    rules = []
    for ln, line in rule_specs:
        try:
            q1, lref, q2, rref, out = _split_rule_line(ln)
        except ValueError as exc:
            raise SystemParseError(str(exc), line)
        rules.append(Rule(q1, resolve(lref, line), q2, resolve(rref, line), out))

    return SGTRS(controls, alphabet, rules), lifespan


def _split_rule_line(ln: str):
    """rule q1 <ntaref> -> q2 <ntaref> [emits SYM], with balanced parens in
    single(...) references."""
    rest = ln[len("rule") :].strip()

    def take_word(s):
        s = s.lstrip()
        j = 0
        while j < len(s) and not s[j].isspace():
            j += 1
        if j == 0:
            raise ValueError("truncated rule line %r" % ln)
        return s[:j], s[j:]

    def take_ref(s):
        s = s.lstrip()
        if s.startswith("single("):
            depth = 0
            for j, ch in enumerate(s):
                if ch == "(":
                    depth += 1
                elif ch == ")":
                    depth -= 1
                    if depth == 0:
                        return s[: j + 1], s[j + 1 :]
            raise ValueError("unbalanced parens in %r" % ln)
        return take_word(s)

    q1, rest = take_word(rest)
    lref, rest = take_ref(rest)
    arrow, rest = take_word(rest)
    if arrow != "->":
        raise ValueError("expected '->' in rule line %r" % ln)
    q2, rest = take_word(rest)
    rref, rest = take_ref(rest)
    rest = rest.strip()
    out = None
    if rest:
        parts = rest.split()
        if parts[0] != "emits" or len(parts) != 2:
            raise ValueError("bad rule suffix %r" % rest)
        out = parts[1]
    return q1, lref, q2, rref, out


def format_system(system: SGTRS, lifespan: int | None = None) -> str:
    lines = []
    lines.append("controls " + " ".join(sorted(map(str, system.controls))))
    lines.append(
        "alphabet " + " ".join("%s:%d" % kv for kv in sorted(system.alphabet.items()))
    )
    if lifespan is not None:
        lines.append("lifespan %d" % lifespan)
    named = {}

    def ref(nta: NTA, tag: str) -> str:
        if nta.singleton is not None:
            return "single(%s)" % format_tree(nta.singleton)
        named[tag] = nta
        return tag

    rule_lines = []
    for i, r in enumerate(system.rules):
        lref = ref(r.lhs, "L%d" % (i + 1))
        rref = ref(r.rhs, "R%d" % (i + 1))
        suffix = " emits %s" % r.output if r.output is not None else ""
        rule_lines.append("rule %s %s -> %s %s%s" % (r.source, lref, r.target, rref, suffix))
    for tag, nta in named.items():
        block = format_nta(nta).rstrip("\n").splitlines()
        lines.append("nta %s" % tag)
        lines.extend(block[1:])
        lines.append("end")
    lines.extend(rule_lines)
    return "\n".join(lines) + "\n"
