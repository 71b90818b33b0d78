import pytest
from random import Random

from sgtrs.automata import (
    NTA,
    AlphabetMismatch,
    ParikhVector,
    RegularAutomaton,
    UnknownSymbol,
    automaton_from_vectors,
    format_nta,
    format_regular,
    nta_accepts,
    nta_empty,
    nta_enumerate,
    parikh_of_automaton,
    parikh_of_word,
    parse_nta,
    parse_regular,
    singleton_nta,
)
from sgtrs.trees import RankedAlphabet, Tree, parse_tree
from oracles import brute_nta_accepts, random_nta, random_tree

ALPHA = RankedAlphabet({"a": 2, "b": 0, "c": 1, "d": 0})


def test_singleton_accepts_only_itself():
    t = parse_tree("a(b, c(d))")
    n = singleton_nta(t, ALPHA)
    assert nta_accepts(n, t)
    rng = Random(3)
    for _ in range(50):
        other = random_tree(rng, ALPHA, 6)
        assert nta_accepts(n, other) == (other is t)


def test_singleton_language_exhaustive():
    t = parse_tree("a(b, d)")
    n = singleton_nta(t, ALPHA)
    assert nta_enumerate(n, t.size + 2) == [t]


def test_singleton_leaf_has_one_rule():
    n = singleton_nta(Tree("b"), ALPHA)
    assert len(n.rules) == 1


def test_accepts_vs_brute_force():
    rng = Random(41)
    agreed = 0
    for _ in range(40):
        n = random_nta(rng, ALPHA, rng.randint(1, 4), rng.randint(1, 8))
        for _ in range(6):
            t = random_tree(rng, ALPHA, 5)
            assert nta_accepts(n, t) == brute_nta_accepts(n, t)
            agreed += 1
    assert agreed >= 200


def test_accepts_alphabet_mismatch():
    n = singleton_nta(Tree("b"), ALPHA)
    with pytest.raises(AlphabetMismatch):
        nta_accepts(n, Tree("zz"))


def test_enumerate_chain_language():
    # chains c(c(...c(d))) of any length, plus the bare leaf
    chain = NTA(
        ["q"],
        ["q"],
        [((), "d", "q"), (("q",), "c", "q")],
        ALPHA,
    )
    got = nta_enumerate(chain, 3)
    assert [str(t) for t in got] == ["d", "c(d)", "c(c(d))"]


def test_enumerate_empty_language():
    dead = NTA(["q"], [], [((), "d", "q")], ALPHA)
    assert nta_enumerate(dead, 4) == []
    assert nta_empty(dead)


def test_empty_agrees_with_enumeration():
    rng = Random(17)
    for _ in range(60):
        n = random_nta(rng, ALPHA, rng.randint(1, 4), rng.randint(1, 6))
        bound = len(n.states) * 2 + 1
        assert nta_empty(n) == (nta_enumerate(n, bound) == [])


def test_enumeration_roundtrip_random_singletons():
    rng = Random(23)
    for _ in range(50):
        t = random_tree(rng, ALPHA, 7)
        assert nta_accepts(singleton_nta(t, ALPHA), t)


def test_parikh_of_word():
    v = parikh_of_word("aab", ("a", "b"))
    assert v.counts == (2, 1)
    assert parikh_of_word("", ("a", "b")).counts == (0, 0)
    with pytest.raises(UnknownSymbol):
        parikh_of_word("q", ("a", "b"))


def test_parikh_concatenation_additive():
    rng = Random(11)
    for _ in range(100):
        w1 = [rng.choice("ab") for _ in range(rng.randint(0, 6))]
        w2 = [rng.choice("ab") for _ in range(rng.randint(0, 6))]
        lhs = parikh_of_word(w1 + w2, ("a", "b"))
        assert lhs == parikh_of_word(w1, ("a", "b")) + parikh_of_word(w2, ("a", "b"))


def _astar_b():
    return RegularAutomaton(
        ["0", "1"],
        ["a", "b"],
        [("0", "a", "0"), ("0", "b", "1")],
        "0",
        ["1"],
    )


def test_parikh_of_automaton_astar_b():
    got = parikh_of_automaton(_astar_b(), 3, ("a", "b"))
    assert {v.counts for v in got} == {(0, 1), (1, 1), (2, 1)}


def test_parikh_of_automaton_empty():
    a = RegularAutomaton(["0"], ["a"], [("0", "a", "0")], "0", [])
    assert parikh_of_automaton(a, 4) == set()


def test_parikh_monotone_and_matches_word_enumeration():
    rng = Random(29)
    for _ in range(25):
        n_states = rng.randint(1, 3)
        states = [str(i) for i in range(n_states)]
        trans = [
            (rng.choice(states), rng.choice("ab"), rng.choice(states))
            for _ in range(rng.randint(1, 5))
        ]
        a = RegularAutomaton(states, "ab", trans, "0", rng.sample(states, rng.randint(1, n_states)))
        prev = set()
        for cap in range(0, 7):
            got = {v.counts for v in parikh_of_automaton(a, cap, ("a", "b"))}
            assert prev <= got
            prev = got
        # brute force: enumerate all words up to length 6
        words = {()}
        frontier = {("0", ())}
        accepted = set()
        for _ in range(6 + 1):
            new = set()
            for q, w in frontier:
                if q in a.finals:
                    accepted.add(w)
                if len(w) < 6:
                    for (p, sym, r) in trans:
                        if p == q:
                            new.add((r, w + (sym,)))
            frontier = new
        expect = {parikh_of_word(w, ("a", "b")).counts for w in accepted}
        assert prev == expect


def test_automaton_from_vectors_roundtrip():
    syms = ("a", "b")
    vecs = {(1, 0), (0, 2), (2, 1)}
    a = automaton_from_vectors([ParikhVector(syms, v) for v in vecs], syms)
    got = {v.counts for v in parikh_of_automaton(a, 3, syms)}
    assert got == vecs


def test_automaton_from_vectors_single_and_empty():
    syms = ("a",)
    one = automaton_from_vectors([ParikhVector(syms, (1,))], syms)
    assert {v.counts for v in parikh_of_automaton(one, 2, syms)} == {(1,)}
    assert len(one.states) == 2
    empty = automaton_from_vectors([], syms)
    assert parikh_of_automaton(empty, 3, syms) == set()


def test_nta_text_roundtrip():
    t = parse_tree("a(b, c(d))")
    n = singleton_nta(t, ALPHA)
    again = parse_nta(format_nta(n), ALPHA)
    assert nta_accepts(again, t)
    assert nta_enumerate(again, 6) == [t]


def test_regular_text_roundtrip():
    a = _astar_b()
    again = parse_regular(format_regular(a))
    assert again == a
