"""Ranked trees, tree domains, contexts and substitution.

Positions are tuples of positive ints, () being the root.  Tree domains are
prefix-closed and younger-sibling-closed by construction: a node labelled with
a symbol of rank n has children exactly 1..n.  Trees are interned, so
structurally equal trees are the same object; this makes equality and hashing
O(1), which the explicit-state explorers rely on.
"""

from __future__ import annotations

import re
from typing import Iterable, Iterator, Mapping


class TreeError(ValueError):
    pass


class EmptyTree(TreeError):
    pass


class RankMismatch(TreeError):
    pass


class DomainNotClosed(TreeError):
    pass


class ArityMismatch(TreeError):
    pass


class PositionNotInDomain(TreeError):
    pass


class TreeParseError(TreeError):
    def __init__(self, message, line=1, col=1):
        super().__init__("%d:%d: %s" % (line, col, message))
        self.line = line
        self.col = col


IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
VAR_RE = re.compile(r"\$([1-9][0-9]*)")


class RankedAlphabet:
    """A finite label set with an arity for each label."""

    __slots__ = ("_ranks",)

    def __init__(self, ranks: Mapping[str, int]):
        if not ranks:
            raise TreeError("alphabet must be nonempty")
        for a, n in ranks.items():
            if n < 0:
                raise TreeError("negative rank for %r" % a)
        self._ranks = dict(ranks)

    def rank(self, label: str) -> int:
        return self._ranks[label]

    def __contains__(self, label: str) -> bool:
        return label in self._ranks

    def __iter__(self) -> Iterator[str]:
        return iter(self._ranks)

    def __len__(self) -> int:
        return len(self._ranks)

    def items(self):
        return self._ranks.items()

    def __eq__(self, other):
        return isinstance(other, RankedAlphabet) and self._ranks == other._ranks

    def __hash__(self):
        return hash(frozenset(self._ranks.items()))

    def __repr__(self):
        inner = " ".join("%s:%d" % kv for kv in sorted(self._ranks.items()))
        return "RankedAlphabet(%s)" % inner

    def extended(self, extra: Mapping[str, int]) -> "RankedAlphabet":
        """New alphabet with the extra labels added; re-declaring a label with a
        different rank is an error."""
        merged = dict(self._ranks)
        for a, n in extra.items():
            if merged.get(a, n) != n:
                raise TreeError("label %r re-declared with different rank" % a)
            merged[a] = n
        return RankedAlphabet(merged)


class Tree:
    """An immutable ranked tree.  Construction interns: equal trees are
    identical, so the default identity hash/eq are structural."""

    __slots__ = ("label", "children", "size")
    _pool: dict = {}

    def __new__(cls, label: str, children: Iterable["Tree"] = ()):
        children = tuple(children)
        key = (label, children)
        t = cls._pool.get(key)
        if t is None:
            t = object.__new__(cls)
            t.label = label
            t.children = children
            t.size = 1 + sum(c.size for c in children)
            # setdefault is atomic: concurrent workers agree on one instance
            t = cls._pool.setdefault(key, t)
        return t

    def __repr__(self):
        return format_tree(self)

    def is_leaf(self) -> bool:
        return not self.children

    def positions(self) -> list[tuple[int, ...]]:
        """All positions in pre-order."""
        out = []
        stack = [((), self)]
        while stack:
            pos, t = stack.pop()
            out.append(pos)
            for i in range(len(t.children), 0, -1):
                stack.append((pos + (i,), t.children[i - 1]))
        return out

    def walk(self) -> Iterator[tuple[tuple[int, ...], "Tree"]]:
        """(position, subtree) pairs in pre-order."""
        stack = [((), self)]
        while stack:
            pos, t = stack.pop()
            yield pos, t
            for i in range(len(t.children), 0, -1):
                stack.append((pos + (i,), t.children[i - 1]))

    def subtree_at(self, pos: tuple[int, ...]) -> "Tree":
        t = self
        for i in pos:
            if i < 1 or i > len(t.children):
                raise PositionNotInDomain("position %s not in domain" % (pos,))
            t = t.children[i - 1]
        return t

    def replace_at(self, pos: tuple[int, ...], sub: "Tree") -> "Tree":
        if not pos:
            return sub
        i = pos[0]
        if i < 1 or i > len(self.children):
            raise PositionNotInDomain("position %s not in domain" % (pos,))
        kids = list(self.children)
        kids[i - 1] = kids[i - 1].replace_at(pos[1:], sub)
        return Tree(self.label, kids)

    def domain(self) -> set[tuple[int, ...]]:
        return set(self.positions())

    def labelling(self) -> dict[tuple[int, ...], str]:
        return {pos: t.label for pos, t in self.walk()}


def node(label: str, *children: Tree) -> Tree:
    return Tree(label, children)


def format_tree(t: Tree) -> str:
    """Canonical pre-order serialization; injective on trees."""
    if not t.children:
        return t.label
    return "%s(%s)" % (t.label, ", ".join(format_tree(c) for c in t.children))


def _tokenize(text: str):
    pos = 0
    line, col = 1, 1
    toks = []
    while pos < len(text):
        ch = text[pos]
        if ch in " \t\r\n":
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
            pos += 1
            continue
        if ch in "(),":
            toks.append((ch, ch, line, col))
            pos += 1
            col += 1
            continue
        m = IDENT_RE.match(text, pos)
        if m:
            toks.append(("ident", m.group(), line, col))
            col += m.end() - pos
            pos = m.end()
            continue
        m = VAR_RE.match(text, pos)
        if m:
            toks.append(("var", m.group(), line, col))
            col += m.end() - pos
            pos = m.end()
            continue
        raise TreeParseError("unexpected character %r" % ch, line, col)
    toks.append(("eof", "", line, col))
    return toks


def parse_tree(text: str, allow_vars: bool = False) -> Tree:
    """Parse `IDENT | IDENT '(' tree (',' tree)* ')'`.  Context variables $1,
    $2, ... are only accepted when allow_vars is set."""
    if text is None or not text.strip():
        raise EmptyTree("empty tree text")
    toks = _tokenize(text)
    idx = 0

    def peek():
        return toks[idx]

    def take(kind):
        nonlocal idx
        tok = toks[idx]
        if tok[0] != kind:
            raise TreeParseError("expected %s, got %r" % (kind, tok[1]), tok[2], tok[3])
        idx += 1
        return tok

    def tree():
        tok = peek()
        if tok[0] == "var":
            if not allow_vars:
                raise TreeParseError("context variable not allowed here", tok[2], tok[3])
            take("var")
            return Tree(tok[1])
        name = take("ident")[1]
        if peek()[0] != "(":
            return Tree(name)
        take("(")
        kids = [tree()]
        while peek()[0] == ",":
            take(",")
            kids.append(tree())
        take(")")
        return Tree(name, kids)

    t = tree()
    tok = peek()
    if tok[0] != "eof":
        raise TreeParseError("trailing input %r" % tok[1], tok[2], tok[3])
    return t


def validate_tree(alphabet: RankedAlphabet, candidate) -> Tree:
    """Check a raw tree (Tree, text, nested (label, children) pairs, or a
    position->label mapping) against the alphabet and return it as a Tree."""
    if candidate is None:
        raise EmptyTree("no tree given")
    if isinstance(candidate, str):
        candidate = parse_tree(candidate)
    elif isinstance(candidate, Mapping):
        candidate = _tree_from_domain(candidate)
    elif isinstance(candidate, (tuple, list)) and not isinstance(candidate, Tree):
        candidate = _tree_from_nested(candidate)
    if not isinstance(candidate, Tree):
        raise TreeError("cannot interpret %r as a tree" % (candidate,))
    for pos, sub in candidate.walk():
        if sub.label not in alphabet:
            raise RankMismatch("label %r not in alphabet" % sub.label)
        want = alphabet.rank(sub.label)
        if len(sub.children) != want:
            raise RankMismatch(
                "node %s labelled %r has %d children, rank is %d"
                % (pos, sub.label, len(sub.children), want)
            )
    return candidate


def _tree_from_nested(data) -> Tree:
    if isinstance(data, Tree):
        return data
    if isinstance(data, str):
        return Tree(data)
    if isinstance(data, (tuple, list)):
        if not data:
            raise EmptyTree("empty tree data")
        label = data[0]
        kids = data[1] if len(data) > 1 else ()
        return Tree(label, [_tree_from_nested(k) for k in kids])
    raise TreeError("bad tree data %r" % (data,))


def _tree_from_domain(mapping: Mapping) -> Tree:
    if not mapping:
        raise EmptyTree("empty tree domain")
    dom = {tuple(p) for p in mapping}
    lab = {tuple(p): a for p, a in mapping.items()}
    if () not in dom:
        raise DomainNotClosed("domain lacks the root")
    for p in dom:
        if p and p[:-1] not in dom:
            raise DomainNotClosed("domain not prefix-closed at %s" % (p,))
        if p and p[-1] > 1 and p[:-1] + (p[-1] - 1,) not in dom:
            raise DomainNotClosed("domain not younger-sibling-closed at %s" % (p,))

    def build(p):
        kids = []
        i = 1
        while p + (i,) in dom:
            kids.append(build(p + (i,)))
            i += 1
        return Tree(lab[p], kids)

    return build(())


class Context:
    """A tree over the alphabet plus variables $1..$n, each occurring at
    exactly one leaf."""

    __slots__ = ("base", "holes")

    def __init__(self, base: Tree, num_vars: int | None = None):
        holes: dict[int, tuple[int, ...]] = {}
        for pos, sub in base.walk():
            m = VAR_RE.fullmatch(sub.label)
            if m:
                if sub.children:
                    raise TreeError("context variable %s must be a leaf" % sub.label)
                i = int(m.group(1))
                if i in holes:
                    raise TreeError("context variable $%d occurs twice" % i)
                holes[i] = pos
        n = num_vars if num_vars is not None else (max(holes) if holes else 0)
        if set(holes) != set(range(1, n + 1)):
            raise TreeError(
                "context variables must be exactly $1..$%d, got %s"
                % (n, sorted(holes))
            )
        self.base = base
        self.holes = holes

    @property
    def num_vars(self) -> int:
        return len(self.holes)

    def __eq__(self, other):
        return isinstance(other, Context) and self.base is other.base

    def __hash__(self):
        return hash(("ctx", self.base))

    def __repr__(self):
        return "Context(%s)" % format_tree(self.base)


def var_leaf(i: int) -> Tree:
    return Tree("$%d" % i)


def substitute(context: Context, fillers: list[Tree]) -> Tree:
    """Fill each $i with fillers[i-1]."""
    if len(fillers) != context.num_vars:
        raise ArityMismatch(
            "context has %d variables, got %d fillers"
            % (context.num_vars, len(fillers))
        )
    t = context.base
    for i, pos in sorted(context.holes.items()):
        t = t.replace_at(pos, fillers[i - 1])
    return t


def decompose(tree: Tree, pos: tuple[int, ...]) -> tuple[Context, Tree]:
    """Inverse of substitute at one position: tree == substitute(ctx, [sub])."""
    sub = tree.subtree_at(tuple(pos))
    ctx = Context(tree.replace_at(tuple(pos), var_leaf(1)))
    return ctx, sub
