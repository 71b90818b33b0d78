"""Prebuilt systems: the five-rule interface walkthrough and the ID-spawner
concurrent program.

The spawner models a toy program where threads obtain IDs from a shared
counter that wraps at int-max; wrapped IDs collide, and a thread pair with
equal IDs can drive the system to the error control.  Thread leaves refresh
themselves (same-control self-rewrites), which keeps them young, so the error
is reachable even at lifespan 1.
"""

from __future__ import annotations

from .automata import singleton_nta
from .senescent import SenescentSystem
from .systems import SGTRS, Configuration, Rule
from .trees import RankedAlphabet, Tree


def interface_example() -> tuple[SenescentSystem, Configuration, str]:
    """The five-rule system whose run q1..q5 rewrites an aged subtree at the
    last step; minimal lifespan 2.  Returns (system at lifespan 2, initial
    configuration, target control)."""
    alphabet = RankedAlphabet(
        {"n": 2, "t0": 0, "t1": 0, "t2": 0, "t1_1": 0, "t1_2": 0, "t2_1": 0, "t2_2": 0}
    )

    def single(text_label, *kids):
        return singleton_nta(Tree(text_label, [Tree(k) for k in kids]), alphabet)

    rules = [
        Rule("q1", single("t0"), "q2", single("n", "t1", "t2")),
        Rule("q2", single("t1"), "q2", single("t1_1")),
        Rule("q2", single("t2"), "q3", single("t2_1")),
        Rule("q3", single("t2_1"), "q4", single("t2_2")),
        Rule("q4", single("t1_1"), "q5", single("t1_2")),
    ]
    base = SGTRS(["q1", "q2", "q3", "q4", "q5"], alphabet, rules)
    return SenescentSystem(base, 2), Configuration("q1", Tree("t0")), "q5"


def spawner(int_max: int) -> tuple[SenescentSystem, Configuration, str]:
    """The thread-spawning program with nextID wrapping modulo int_max.

    Controls: counter values 0..int_max, spawn requests, hasid queries, and
    the error state.  One leaf per thread; every non-split label may refresh
    itself in every control state.  Returns (system at lifespan 1, initial
    configuration, error control).
    """
    num = int_max
    ids = range(0, num + 1)
    opt_ids = range(-1, num + 1)  # -1 means "no sibling yet"

    def i2s(v: int) -> str:
        return "m1" if v == -1 else str(v)

    controls = ["err"]
    controls += ["val%d" % v for v in ids]
    controls += [
        "spawn_%d_%s_%s" % (v, i2s(i1), i2s(j1))
        for v in ids
        for i1 in ids
        for j1 in opt_ids
    ]
    controls += ["hasid%d" % v for v in ids]

    ranks = {"split": 2, "spawn": 0, "dead": 0}
    for i1 in opt_ids:
        for j1 in opt_ids:
            ranks["th_%s_%s" % (i2s(i1), i2s(j1))] = 0
    for i1 in ids:
        for j1 in opt_ids:
            for i2 in ids:
                for j2 in opt_ids:
                    ranks["case_%s_%s_%s_%s" % (i2s(i1), i2s(j1), i2s(i2), i2s(j2))] = 0
                    ranks["next_%s_%s_%s_%s" % (i2s(i1), i2s(j1), i2s(i2), i2s(j2))] = 0
    alphabet = RankedAlphabet(ranks)

    def leaf(lbl: str):
        return singleton_nta(Tree(lbl), alphabet)

    def th(i1, j1):
        return "th_%s_%s" % (i2s(i1), i2s(j1))

    rules: list[Rule] = []
    # refresh family: every arity-0 label, every control
    zero_labels = sorted(a for a, r in ranks.items() if r == 0)
    for q in controls:
        for a in zero_labels:
            rules.append(Rule(q, leaf(a), q, leaf(a)))
    # getID for id1: val i -> val (i+1) % num, remembering i as the new id
    for v in ids:
        nxt = "val%d" % ((v + 1) % num)
        for i1 in ids:
            for j1 in opt_ids:
                rules.append(
                    Rule(
                        "val%d" % v,
                        leaf(th(i1, j1)),
                        nxt,
                        leaf("case_%s_%s_%s_%s" % (i2s(i1), i2s(j1), i2s(v), i2s(-1))),
                    )
                )
    # getID for id2
    for v in ids:
        nxt = "val%d" % ((v + 1) % num)
        for i1 in ids:
            for j1 in opt_ids:
                for i2 in ids:
                    rules.append(
                        Rule(
                            "val%d" % v,
                            leaf("case_%s_%s_%s_%s" % (i2s(i1), i2s(j1), i2s(i2), i2s(-1))),
                            nxt,
                            leaf("case_%s_%s_%s_%s" % (i2s(i1), i2s(j1), i2s(i2), i2s(v))),
                        )
                    )
    # the two spawn requests
    for v in ids:
        for i1 in ids:
            for j1 in opt_ids:
                for i2 in ids:
                    for j2 in opt_ids:
                        case = "case_%s_%s_%s_%s" % (i2s(i1), i2s(j1), i2s(i2), i2s(j2))
                        nxt_case = "next_%s_%s_%s_%s" % (i2s(i1), i2s(j1), i2s(i2), i2s(j2))
                        if j2 >= 0:
                            rules.append(
                                Rule(
                                    "val%d" % v,
                                    leaf(case),
                                    "spawn_%d_%s_%s" % (v, i2s(i2), i2s(j2)),
                                    leaf(nxt_case),
                                )
                            )
                            if j2 in ids:
                                rules.append(
                                    Rule(
                                        "val%d" % v,
                                        leaf(nxt_case),
                                        "spawn_%d_%s_%s" % (v, i2s(j2), i2s(i2)),
                                        leaf(th(i1, j1)),
                                    )
                                )
    # thread creation grows the tree at the spawn leaf
    for v in ids:
        for i1 in ids:
            for j1 in opt_ids:
                grown = Tree("split", [Tree(th(i1, j1)), Tree("spawn")])
                rules.append(
                    Rule(
                        "spawn_%d_%s_%s" % (v, i2s(i1), i2s(j1)),
                        leaf("spawn"),
                        "val%d" % v,
                        singleton_nta(grown, alphabet),
                    )
                )
    # duplicate-ID detection: question, then answer
    for v in ids:
        for i1 in ids:
            for j1 in opt_ids:
                rules.append(
                    Rule("val%d" % v, leaf(th(i1, j1)), "hasid%d" % i1, leaf("dead"))
                )
    for i1 in ids:
        for j1 in opt_ids:
            rules.append(
                Rule("hasid%d" % i1, leaf(th(i1, j1)), "err", leaf(th(i1, j1)))
            )

    base = SGTRS(controls, alphabet, rules)
    initial = Configuration("val1", Tree("split", [Tree(th(0, -1)), Tree("spawn")]))
    return SenescentSystem(base, 1), initial, "err"
