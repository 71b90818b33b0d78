import pytest
from random import Random

from sgtrs.trees import (
    ArityMismatch,
    Context,
    DomainNotClosed,
    EmptyTree,
    RankMismatch,
    RankedAlphabet,
    Tree,
    decompose,
    format_tree,
    parse_tree,
    substitute,
    validate_tree,
    var_leaf,
)
from oracles import random_tree

ALPHA = RankedAlphabet({"a": 2, "b": 0, "c": 1, "d": 0})


def test_validate_accepts_wellformed():
    t = validate_tree(ALPHA, "a(b, c(d))")
    assert t.domain() == {(), (1,), (2,), (2, 1)}
    assert t.labelling()[(2, 1)] == "d"


def test_validate_rank_mismatch():
    with pytest.raises(RankMismatch):
        validate_tree(ALPHA, "a(b)")


def test_validate_empty():
    with pytest.raises(EmptyTree):
        validate_tree(ALPHA, "")
    with pytest.raises(EmptyTree):
        validate_tree(ALPHA, None)


def test_validate_domain_form():
    t = validate_tree(ALPHA, {(): "a", (1,): "b", (2,): "c", (2, 1): "d"})
    assert t is parse_tree("a(b, c(d))")
    with pytest.raises(DomainNotClosed):
        validate_tree(ALPHA, {(): "c", (2,): "d"})
    with pytest.raises(DomainNotClosed):
        validate_tree(ALPHA, {(1,): "b"})


def test_children_exactly_rank():
    rng = Random(7)
    for _ in range(50):
        t = random_tree(rng, ALPHA, 9)
        for _pos, sub in t.walk():
            assert len(sub.children) == ALPHA.rank(sub.label)


def test_substitute_basic():
    ctx = Context(parse_tree("a($1, c($2))", allow_vars=True))
    out = substitute(ctx, [parse_tree("b"), parse_tree("d")])
    assert out is parse_tree("a(b, c(d))")


def test_substitute_identity_context():
    ctx = Context(var_leaf(1))
    t = parse_tree("a(b, c(d))")
    assert substitute(ctx, [t]) is t


def test_substitute_arity_mismatch():
    ctx = Context(parse_tree("a($1, $2)", allow_vars=True))
    with pytest.raises(ArityMismatch):
        substitute(ctx, [parse_tree("b")])


def test_substitute_domain_size():
    # |result| = |C| - n + sum |t_i| on random contexts
    rng = Random(13)
    for _ in range(60):
        t = random_tree(rng, ALPHA, 9)
        hole_positions = rng.sample(t.positions(), k=min(2, len(t.positions())))
        # avoid nested holes: keep only prefix-independent picks
        if len(hole_positions) == 2:
            p, q = hole_positions
            if p[: len(q)] == q or q[: len(p)] == p:
                hole_positions = [p]
        base = t
        for i, pos in enumerate(hole_positions, 1):
            base = base.replace_at(pos, var_leaf(i))
        ctx = Context(base)
        fillers = [random_tree(rng, ALPHA, 5) for _ in hole_positions]
        out = substitute(ctx, fillers)
        assert out.size == base.size - len(fillers) + sum(f.size for f in fillers)


def test_decompose_examples():
    t = parse_tree("a(b, c(d))")
    ctx, sub = decompose(t, (2,))
    assert format_tree(ctx.base) == "a(b, $1)"
    assert sub is parse_tree("c(d)")
    ctx, sub = decompose(t, ())
    assert format_tree(ctx.base) == "$1"
    assert sub is t


def test_decompose_out_of_domain():
    from sgtrs.trees import PositionNotInDomain

    with pytest.raises(PositionNotInDomain):
        decompose(parse_tree("b"), (1,))


def test_decompose_substitute_roundtrip():
    rng = Random(99)
    for _ in range(50):
        t = random_tree(rng, ALPHA, 10)
        for pos in t.positions():
            ctx, sub = decompose(t, pos)
            assert substitute(ctx, [sub]) is t


def test_serialization_injective():
    rng = Random(5)
    seen = {}
    for _ in range(300):
        t = random_tree(rng, ALPHA, 8)
        s = format_tree(t)
        if s in seen:
            assert seen[s] is t
        seen[s] = t
        assert parse_tree(s) is t


def test_interning_equality():
    assert parse_tree("a(b, b)") is Tree("a", [Tree("b"), Tree("b")])
    assert parse_tree("a(b, b)") is not parse_tree("a(b, d)")
