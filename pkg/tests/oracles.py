"""Independent oracles and random instance generators for the test suite.

Everything here deliberately avoids the library's optimized code paths: runs
are replayed from first principles (birthdates and control-change counting),
automaton membership is checked by enumerating all state assignments, and
successor sets are rebuilt by enumerating rule languages.
"""

from __future__ import annotations

import itertools
from random import Random

from sgtrs.automata import NTA, nta_enumerate, singleton_nta
from sgtrs.mpds import INTERNAL, POP, PUSH, MPDS, MpdsRule
from sgtrs.resetnet import DECR, INCR, RESET, PnRule, ResetNet
from sgtrs.senescent import SenescentSystem
from sgtrs.systems import SGTRS, Configuration, Rule
from sgtrs.trees import RankedAlphabet, Tree


# ---------------------------------------------------------------------------
# history-based age replay (independent of sgtrs.senescent bookkeeping)


def history_replay(system: SenescentSystem, initial: Configuration, steps):
    """Replay a witness tracking each node's birth step; ages are counted from
    the run history, unclamped.  Returns (final true ages by position,
    maximum age among rewritten nodes over the whole run).

    Raises AssertionError if any step rewrites a node older than the lifespan,
    so a successful replay certifies the witness is lifespan-restricted.
    """
    tree = initial.tree
    birth = {pos: 0 for pos in tree.positions()}
    changes: list[int] = []
    max_rewritten_age = 0
    for k, s in enumerate(steps, 1):
        rule = system.base.rules[s.rule_idx]
        plen = len(s.position)
        for p in tree.positions():
            if p[:plen] == tuple(s.position):
                age = sum(1 for c in changes if c > birth[p])
                max_rewritten_age = max(max_rewritten_age, age)
                assert age <= system.lifespan, (
                    "step %d rewrites a node of age %d past lifespan %d"
                    % (k, age, system.lifespan)
                )
        tree = tree.replace_at(tuple(s.position), s.rhs)
        new_birth = {}
        for pos in tree.positions():
            if pos[:plen] == tuple(s.position):
                new_birth[pos] = k
            else:
                new_birth[pos] = birth[pos]
        birth = new_birth
        if rule.source != rule.target:
            changes.append(k)
    true_ages = {
        pos: sum(1 for c in changes if c > birth[pos]) for pos in tree.positions()
    }
    return true_ages, max_rewritten_age


# ---------------------------------------------------------------------------
# brute-force automaton membership: enumerate all runs


def brute_nta_accepts(automaton: NTA, tree: Tree) -> bool:
    positions = tree.positions()
    labels = {pos: tree.subtree_at(pos).label for pos in positions}
    states = sorted(automaton.states, key=repr)
    rules = set(automaton.rules)
    for assignment in itertools.product(states, repeat=len(positions)):
        run = dict(zip(positions, assignment))
        ok = True
        for pos in positions:
            arity = len(tree.subtree_at(pos).children)
            lhs = tuple(run[pos + (i,)] for i in range(1, arity + 1))
            if (lhs, labels[pos], run[pos]) not in rules:
                ok = False
                break
        if ok and run[()] in automaton.finals:
            return True
    return False


# ---------------------------------------------------------------------------
# brute-force transition relation


def brute_successors(system: SGTRS, config: Configuration, rhs_bound: int):
    """Enumerate positions x lhs trees x rhs trees instead of running the
    automata on the configuration."""
    found = set()
    max_sub = config.tree.size
    for i, rule in enumerate(system.rules):
        if rule.source != config.control:
            continue
        lhs_trees = set(nta_enumerate(rule.lhs, max_sub))
        rhs_trees = nta_enumerate(rule.rhs, rhs_bound)
        for pos in config.tree.positions():
            if config.tree.subtree_at(pos) not in lhs_trees:
                continue
            for t in rhs_trees:
                found.add((rule.target, config.tree.replace_at(pos, t), i, pos))
    return found


# ---------------------------------------------------------------------------
# weak extension by path enumeration


def brute_weakly_extended(controls, edges) -> bool:
    """Enumerate all paths up to |controls|+1 edges; a returning path that
    visits a second node witnesses a non-self-loop cycle."""
    adj: dict = {}
    for a, b in edges:
        adj.setdefault(a, set()).add(b)
    nodes = sorted(controls, key=repr)

    def walk(start, current, depth, visited_other):
        if depth > len(nodes) + 1:
            return True
        for nxt in sorted(adj.get(current, ()), key=repr):
            if nxt == start and visited_other:
                return False
            if nxt != start and not walk(start, nxt, depth + 1, True):
                return False
        return True

    return all(walk(q, q, 0, False) for q in nodes)


# ---------------------------------------------------------------------------
# random instance generators (all deterministic under a seeded Random)


def random_tree(rng: Random, alphabet: RankedAlphabet, max_nodes: int) -> Tree:
    leaves = sorted(a for a, r in alphabet.items() if r == 0)
    inner = sorted((a, r) for a, r in alphabet.items() if r > 0)

    def build(budget: int) -> Tree:
        if budget <= 1 or not inner or rng.random() < 0.4:
            return Tree(rng.choice(leaves))
        a, r = rng.choice(inner)
        if budget - 1 < r:
            return Tree(rng.choice(leaves))
        share = (budget - 1) // r
        return Tree(a, [build(max(1, share)) for _ in range(r)])

    return build(max_nodes)


def random_nta(rng: Random, alphabet: RankedAlphabet, n_states: int, n_rules: int) -> NTA:
    states = ["s%d" % i for i in range(n_states)]
    labels = sorted(alphabet.items())
    rules = set()
    for _ in range(n_rules):
        a, r = rng.choice(labels)
        lhs = tuple(rng.choice(states) for _ in range(r))
        rules.add((lhs, a, rng.choice(states)))
    finals = rng.sample(states, rng.randint(1, n_states))
    return NTA(states, finals, rules, alphabet)


def random_singleton_system(
    rng: Random,
    n_controls: int = 3,
    n_rules: int = 5,
    alphabet: RankedAlphabet | None = None,
    tree_nodes: int = 3,
) -> SGTRS:
    if alphabet is None:
        alphabet = RankedAlphabet({"f": 2, "g": 1, "a": 0, "b": 0, "c": 0})
    controls = ["q%d" % i for i in range(n_controls)]
    rules = []
    for _ in range(n_rules):
        src = rng.choice(controls)
        tgt = rng.choice(controls)
        lhs = random_tree(rng, alphabet, rng.randint(1, tree_nodes))
        rhs = random_tree(rng, alphabet, rng.randint(1, tree_nodes))
        rules.append(Rule(src, singleton_nta(lhs, alphabet), tgt, singleton_nta(rhs, alphabet)))
    return SGTRS(controls, alphabet, rules)


def random_net(
    rng: Random,
    n_controls: int = 4,
    n_counters: int = 3,
    n_rules: int = 6,
    max_ops: int = 2,
) -> ResetNet:
    controls = ["p%d" % i for i in range(n_controls)]
    counters = ["c%d" % i for i in range(n_counters)]
    rules = []
    for _ in range(n_rules):
        ops = set()
        for _ in range(rng.randint(0, max_ops)):
            ops.add((rng.choice([INCR, DECR, RESET]), rng.choice(counters)))
        rules.append(PnRule(rng.choice(controls), frozenset(ops), rng.choice(controls)))
    return ResetNet(controls, counters, rules)


def random_mpds(
    rng: Random, n_stacks: int = 2, n_controls: int = 3, n_rules: int = 4
):
    controls = ["m%d" % i for i in range(n_controls)]
    symbols = ["x", "y"]
    rules = []
    for _ in range(n_rules):
        stack = rng.randint(1, n_stacks)
        kind = rng.choice([PUSH, INTERNAL, POP])
        src = rng.choice(controls)
        tgt = rng.choice(controls)
        if kind == INTERNAL:
            rules.append(MpdsRule(kind, stack, src, tgt))
        else:
            rules.append(MpdsRule(kind, stack, src, tgt, rng.choice(symbols)))
    return MPDS(controls, symbols, "bot", n_stacks, rules)
