"""Bottom-up tree automata and finite word automata with Parikh extraction.

The Parikh side deliberately works by bounded enumeration: `parikh_of_automaton`
returns the images of all accepted words up to a length cap, deduplicating on
(state, count-vector) so that permutations of the same multiset are explored
once.  Exact semilinear images are out of scope; the interfaces leave room for
an exact back-end.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .trees import RankedAlphabet, Tree, format_tree


class AutomatonError(ValueError):
    pass


class AlphabetMismatch(AutomatonError):
    pass


class UnknownSymbol(AutomatonError):
    pass


class NTA:
    """Bottom-up nondeterministic tree automaton (Q, rules, F) over a ranked
    alphabet.  Rules are (state_sequence, label, state) with |sequence| equal
    to the label's rank.  Immutable after construction."""

    __slots__ = (
        "states",
        "finals",
        "rules",
        "alphabet",
        "singleton",
        "_by_label",
        "_states_memo",
        "_hash",
    )

    def __init__(self, states, finals, rules, alphabet: RankedAlphabet, singleton=None):
        self.states = frozenset(states)
        self.finals = frozenset(finals)
        self.rules = frozenset(
            (tuple(lhs), label, q) for (lhs, label, q) in rules
        )
        self.alphabet = alphabet
        # set by singleton_nta; lets rewrite engines take the fast path
        self.singleton = singleton
        if not self.finals <= self.states:
            raise AutomatonError("final states not a subset of states")
        by_label: dict = {}
        for lhs, label, q in self.rules:
            if label not in alphabet:
                raise AlphabetMismatch("rule label %r not in alphabet" % label)
            if alphabet.rank(label) != len(lhs):
                raise AlphabetMismatch(
                    "rule for %r has %d predecessors, rank is %d"
                    % (label, len(lhs), alphabet.rank(label))
                )
            if not (set(lhs) <= self.states and q in self.states):
                raise AutomatonError("rule uses undeclared state")
            by_label.setdefault(label, []).append((lhs, q))
        self._by_label = by_label
        self._states_memo: dict = {}
        self._hash = hash((self.states, self.finals, self.rules))

    def __eq__(self, other):
        return (
            isinstance(other, NTA)
            and self.states == other.states
            and self.finals == other.finals
            and self.rules == other.rules
            and self.alphabet == other.alphabet
        )

    def __hash__(self):
        return self._hash

    def states_at(self, tree: Tree) -> frozenset:
        """States reachable at the root of `tree`, bottom-up.  Memoized per
        subtree; labels outside the alphabet simply admit no run."""
        memo = self._states_memo
        got = memo.get(tree)
        if got is not None:
            return got
        out = set()
        if tree.label in self.alphabet and self.alphabet.rank(tree.label) == len(tree.children):
            child_states = [self.states_at(c) for c in tree.children]
            for lhs, q in self._by_label.get(tree.label, ()):
                if all(s in cs for s, cs in zip(lhs, child_states)):
                    out.add(q)
        res = frozenset(out)
        memo[tree] = res
        return res


def nta_accepts(automaton: NTA, tree: Tree) -> bool:
    """True iff an accepting bottom-up run exists.  The tree must be over the
    automaton's alphabet."""
    for _pos, sub in tree.walk():
        if sub.label not in automaton.alphabet:
            raise AlphabetMismatch("label %r not in automaton alphabet" % sub.label)
        if automaton.alphabet.rank(sub.label) != len(sub.children):
            raise AlphabetMismatch("tree violates rank of %r" % sub.label)
    return bool(automaton.states_at(tree) & automaton.finals)


def singleton_nta(tree: Tree, alphabet: RankedAlphabet | None = None) -> NTA:
    """An NTA whose language is exactly {tree}: one state per position."""
    if alphabet is None:
        ranks: dict[str, int] = {}
        for _, sub in tree.walk():
            n = len(sub.children)
            if ranks.setdefault(sub.label, n) != n:
                raise AutomatonError("inconsistent ranks in tree %r" % format_tree(tree))
        alphabet = RankedAlphabet(ranks)
    states = []
    rules = []

    def build(t: Tree, pos) -> str:
        q = "p" + "_".join(map(str, pos)) if pos else "p"
        states.append(q)
        kids = [build(c, pos + (i,)) for i, c in enumerate(t.children, 1)]
        rules.append((tuple(kids), t.label, q))
        return q

    root = build(tree, ())
    return NTA(states, [root], rules, alphabet, singleton=tree)


def nta_enumerate(automaton: NTA, max_nodes: int) -> list[Tree]:
    """Exactly the accepted trees with at most max_nodes nodes, sorted by
    (size, serialization).  Dynamic programming on (state, node budget)."""
    if max_nodes < 1:
        raise AutomatonError("max_nodes must be >= 1")
    # trees[q][k] = set of trees with exactly k nodes reaching state q
    trees: dict = {q: {} for q in automaton.states}
    for k in range(1, max_nodes + 1):
        for lhs, label, q in automaton.rules:
            if len(lhs) == 0:
                if k == 1:
                    trees[q].setdefault(1, set()).add(Tree(label))
                continue
            # distribute k-1 nodes among the children
            for combo in _compositions(k - 1, len(lhs)):
                pools = []
                ok = True
                for s, kk in zip(lhs, combo):
                    pool = trees[s].get(kk)
                    if not pool:
                        ok = False
                        break
                    pools.append(sorted(pool, key=_tree_key))
                if not ok:
                    continue
                for kids in _product(pools):
                    trees[q].setdefault(k, set()).add(Tree(label, kids))
    out = set()
    for q in automaton.finals:
        for pool in trees[q].values():
            out |= pool
    return sorted(out, key=_tree_key)


def _tree_key(t: Tree):
    return (t.size, format_tree(t))


def _compositions(total: int, parts: int):
    """All tuples of `parts` positive ints summing to total."""
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _product(pools):
    if not pools:
        yield ()
        return
    for head in pools[0]:
        for rest in _product(pools[1:]):
            yield (head,) + rest


def nta_empty(automaton: NTA) -> bool:
    """True iff the language is empty: fixpoint of productive states."""
    productive: set = set()
    changed = True
    while changed:
        changed = False
        for lhs, _label, q in automaton.rules:
            if q not in productive and all(s in productive for s in lhs):
                productive.add(q)
                changed = True
    return not (productive & automaton.finals)


def nta_min_size(automaton: NTA) -> int | None:
    """Size of a smallest accepted tree, None if the language is empty."""
    best: dict = {}
    changed = True
    while changed:
        changed = False
        for lhs, _label, q in automaton.rules:
            if all(s in best for s in lhs):
                cand = 1 + sum(best[s] for s in lhs)
                if cand < best.get(q, cand + 1):
                    best[q] = cand
                    changed = True
    sizes = [best[q] for q in automaton.finals if q in best]
    return min(sizes) if sizes else None


# ---------------------------------------------------------------------------
# word automata and Parikh images


class RegularAutomaton:
    """Finite word automaton (Q, output alphabet, transitions, initial, finals)."""

    __slots__ = ("states", "alphabet", "transitions", "initial", "finals", "_out")

    def __init__(self, states, alphabet, transitions, initial, finals):
        self.states = frozenset(states)
        self.alphabet = frozenset(alphabet)
        self.transitions = frozenset(tuple(t) for t in transitions)
        self.initial = initial
        self.finals = frozenset(finals)
        if initial not in self.states:
            raise AutomatonError("initial state not declared")
        if not self.finals <= self.states:
            raise AutomatonError("final states not declared")
        out: dict = {}
        for q, a, q2 in self.transitions:
            if a not in self.alphabet:
                raise UnknownSymbol("transition symbol %r not in alphabet" % (a,))
            if q not in self.states or q2 not in self.states:
                raise AutomatonError("transition uses undeclared state")
            out.setdefault(q, []).append((a, q2))
        self._out = out

    def __eq__(self, other):
        return (
            isinstance(other, RegularAutomaton)
            and self.states == other.states
            and self.alphabet == other.alphabet
            and self.transitions == other.transitions
            and self.initial == other.initial
            and self.finals == other.finals
        )

    def __hash__(self):
        return hash((self.states, self.transitions, self.initial, self.finals))


@dataclass(frozen=True)
class ParikhVector:
    """Occurrence counts under a fixed, declared symbol ordering."""

    symbols: tuple
    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.symbols) != len(self.counts):
            raise AutomatonError("symbol/count length mismatch")
        if any(c < 0 for c in self.counts):
            raise AutomatonError("negative count")

    def count(self, symbol) -> int:
        return self.counts[self.symbols.index(symbol)]

    def as_dict(self) -> dict:
        return dict(zip(self.symbols, self.counts))

    def __add__(self, other: "ParikhVector") -> "ParikhVector":
        if self.symbols != other.symbols:
            raise AutomatonError("vectors use different orderings")
        return ParikhVector(
            self.symbols, tuple(a + b for a, b in zip(self.counts, other.counts))
        )

    @property
    def total(self) -> int:
        return sum(self.counts)


def parikh_of_word(word: Sequence, symbols: Sequence) -> ParikhVector:
    symbols = tuple(symbols)
    index = {a: i for i, a in enumerate(symbols)}
    counts = [0] * len(symbols)
    for a in word:
        if a not in index:
            raise UnknownSymbol("symbol %r not in declared alphabet" % (a,))
        counts[index[a]] += 1
    return ParikhVector(symbols, tuple(counts))


def parikh_of_automaton(
    automaton: RegularAutomaton,
    max_length: int,
    symbols: Sequence | None = None,
) -> set[ParikhVector]:
    """Parikh images of all accepted words of length <= max_length.  A sound
    under-approximation of the full image; monotone in max_length."""
    if symbols is None:
        symbols = tuple(sorted(automaton.alphabet, key=repr))
    else:
        symbols = tuple(symbols)
    index = {a: i for i, a in enumerate(symbols)}
    zero = (0,) * len(symbols)
    seen = {(automaton.initial, zero)}
    queue = deque(seen)
    found: set[ParikhVector] = set()
    while queue:
        q, counts = queue.popleft()
        if q in automaton.finals:
            found.add(ParikhVector(symbols, counts))
        if sum(counts) >= max_length:
            continue
        for a, q2 in automaton._out.get(q, ()):
            i = index.get(a)
            if i is None:
                raise UnknownSymbol("symbol %r missing from the ordering" % (a,))
            nxt = counts[:i] + (counts[i] + 1,) + counts[i + 1 :]
            key = (q2, nxt)
            if key not in seen:
                seen.add(key)
                queue.append(key)
    return found


def automaton_from_vectors(
    vectors: Iterable[ParikhVector], symbols: Sequence | None = None
) -> RegularAutomaton:
    """A regular automaton whose Parikh image is exactly the given finite set:
    one linear chain per vector, sharing the initial state."""
    vectors = list(vectors)
    if symbols is None:
        if vectors:
            symbols = vectors[0].symbols
        else:
            symbols = ()
    symbols = tuple(symbols)
    for v in vectors:
        if v.symbols != symbols:
            raise AutomatonError("vectors use different orderings")
    states = ["q0"]
    transitions = []
    finals = []
    for n, v in enumerate(sorted(vectors, key=lambda v: v.counts)):
        prev = "q0"
        step = 0
        for sym, cnt in zip(symbols, v.counts):
            for _ in range(cnt):
                step += 1
                nxt = "q%d_%d" % (n, step)
                states.append(nxt)
                transitions.append((prev, sym, nxt))
                prev = nxt
        finals.append(prev)
    return RegularAutomaton(states, symbols, transitions, "q0", finals)


# ---------------------------------------------------------------------------
# text formats

def format_nta(automaton: NTA, name: str | None = None) -> str:
    lines = ["nta" + (" " + name if name else "")]
    for lhs, label, q in sorted(automaton.rules, key=lambda r: (r[1], r[0], r[2])):
        lines.append("rule %s-> %s -> %s" % ("".join(s + " " for s in lhs), label, q))
    for q in sorted(automaton.finals):
        lines.append("final %s" % q)
    return "\n".join(lines) + "\n"


def parse_nta(text: str, alphabet: RankedAlphabet | None = None) -> NTA:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or not lines[0].startswith("nta"):
        raise AutomatonError("nta text must start with an 'nta' header")
    rules = []
    finals = []
    states = set()
    ranks: dict[str, int] = {}
    for ln in lines[1:]:
        if ln == "end":
            break
        parts = ln.split()
        if parts[0] == "final":
            finals.extend(parts[1:])
            states.update(parts[1:])
        elif parts[0] == "rule":
            try:
                i = parts.index("->")
                j = parts.index("->", i + 1)
            except ValueError:
                raise AutomatonError("bad nta rule line: %r" % ln)
            lhs = tuple(parts[1:i])
            label = " ".join(parts[i + 1 : j])
            q = parts[j + 1]
            rules.append((lhs, label, q))
            states.update(lhs)
            states.add(q)
            got = ranks.setdefault(label, len(lhs))
            if got != len(lhs):
                raise AutomatonError("label %r used with two arities" % label)
        else:
            raise AutomatonError("unknown nta line: %r" % ln)
    if alphabet is None:
        alphabet = RankedAlphabet(ranks) if ranks else RankedAlphabet({"a": 0})
    return NTA(states, finals, rules, alphabet)


def format_regular(automaton: RegularAutomaton) -> str:
    lines = ["ra", "init %s" % automaton.initial]
    for q, a, q2 in sorted(automaton.transitions, key=lambda t: (str(t[0]), str(t[1]), str(t[2]))):
        lines.append("trans %s -%s-> %s" % (q, a, q2))
    for q in sorted(automaton.finals, key=str):
        lines.append("final %s" % q)
    return "\n".join(lines) + "\n"


def parse_regular(text: str) -> RegularAutomaton:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0] != "ra":
        raise AutomatonError("regular automaton text must start with 'ra'")
    initial = None
    finals = []
    transitions = []
    states = set()
    alphabet = set()
    trans_re = re.compile(r"trans\s+(\S+)\s+-(.+)->\s+(\S+)$")
    for ln in lines[1:]:
        if ln.startswith("init "):
            initial = ln.split()[1]
            states.add(initial)
        elif ln.startswith("final "):
            for q in ln.split()[1:]:
                finals.append(q)
                states.add(q)
        elif ln.startswith("trans "):
            m = trans_re.match(ln)
            if not m:
                raise AutomatonError("bad trans line: %r" % ln)
            q, a, q2 = m.group(1), m.group(2), m.group(3)
            transitions.append((q, a, q2))
            states.update((q, q2))
            alphabet.add(a)
        else:
            raise AutomatonError("unknown ra line: %r" % ln)
    if initial is None:
        raise AutomatonError("regular automaton lacks an init line")
    return RegularAutomaton(states, alphabet, transitions, initial, finals)
