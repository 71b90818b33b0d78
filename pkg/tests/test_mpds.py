import pytest

from sgtrs.mpds import (
    INTERNAL,
    POP,
    PUSH,
    MPDS,
    MPDSConfiguration,
    MpdsRule,
    ScopeViolation,
    TopMismatch,
    WrongPhase,
    advance_phase,
    format_mpds,
    initial_configuration,
    mpds_reach_control,
    mpds_step,
    parse_mpds,
)


def _one_stack():
    rules = [
        MpdsRule(PUSH, 1, "p", "p", "a"),
        MpdsRule(POP, 1, "p", "qf", "a"),
    ]
    return MPDS(["p", "qf"], ["a"], "bot", 1, rules)


def test_push_then_pop_next_round_within_scope():
    m = _one_stack()
    cfg = MPDSConfiguration("p", initial_configuration(m).stacks, 1, 1)
    cfg = mpds_step(m, cfg, 1, 0, scope=1)
    assert cfg.stacks[0][0] == ("a", 1)
    cfg = advance_phase(m, cfg)  # round 2 (n=1)
    assert cfg.round == 2
    out = mpds_step(m, cfg, 1, 1, scope=1)
    assert out.control == "qf"


def test_pop_two_rounds_later_violates_scope():
    m = _one_stack()
    cfg = MPDSConfiguration("p", initial_configuration(m).stacks, 1, 1)
    cfg = mpds_step(m, cfg, 1, 0, scope=1)
    cfg = advance_phase(m, advance_phase(m, cfg))  # round 3
    with pytest.raises(ScopeViolation):
        mpds_step(m, cfg, 1, 1, scope=1)


def test_pop_on_bare_bottom():
    m = _one_stack()
    cfg = MPDSConfiguration("p", initial_configuration(m).stacks, 1, 1)
    with pytest.raises(TopMismatch):
        mpds_step(m, cfg, 1, 1, scope=1)


def test_wrong_phase():
    rules = [MpdsRule(PUSH, 2, "p", "p", "a")]
    m = MPDS(["p"], ["a"], "bot", 2, rules)
    cfg = MPDSConfiguration("p", initial_configuration(m).stacks, 1, 1)
    with pytest.raises(WrongPhase):
        mpds_step(m, cfg, 2, 0, scope=1)


def test_reach_trivial_target():
    m = _one_stack()
    assert mpds_reach_control(m, 1, "p", "p", 2, 4).reachable


def test_reach_push_pop():
    m = _one_stack()
    v = mpds_reach_control(m, 1, "p", "qf", 1, 8)
    assert v.reachable


def _delayed_pop():
    # the control chain forces: stack1 push, stack2 move, stack1 move,
    # stack2 move, stack1 pop -- the pop lands two rounds after the push
    rules = [
        MpdsRule(PUSH, 1, "p0", "p1", "a"),
        MpdsRule(INTERNAL, 2, "p1", "p2"),
        MpdsRule(INTERNAL, 1, "p2", "p3"),
        MpdsRule(INTERNAL, 2, "p3", "p4"),
        MpdsRule(POP, 1, "p4", "goal", "a"),
    ]
    return MPDS(["p0", "p1", "p2", "p3", "p4", "goal"], ["a"], "bot", 2, rules)


def test_forced_rounds_make_pop_out_of_scope():
    m = _delayed_pop()
    assert not mpds_reach_control(m, 1, "p0", "goal", 4, 30).reachable
    assert mpds_reach_control(m, 2, "p0", "goal", 4, 30).reachable


def test_phase_discipline_in_witness():
    # moves on stack 1 never follow moves on stack 2 within the same round
    m = _delayed_pop()
    v = mpds_reach_control(m, 2, "p0", "goal", 4, 30)
    cfg = MPDSConfiguration("p0", initial_configuration(m).stacks, 1, 1)
    last = (1, 0)  # (round, phase) ordered
    for move in v.witness:
        if move == "advance":
            cfg = advance_phase(m, cfg)
        else:
            rule = m.rules[move]
            assert rule.stack == cfg.phase
            assert (cfg.round, cfg.phase) >= last
            last = (cfg.round, cfg.phase)
            cfg = mpds_step(m, cfg, cfg.phase, rule, scope=2)
    assert cfg.control == "goal"


def test_scope_monotone():
    m = _delayed_pop()
    r1 = mpds_reach_control(m, 1, "p0", "goal", 4, 30).reachable
    r2 = mpds_reach_control(m, 2, "p0", "goal", 4, 30).reachable
    assert (not r1) or r2


def test_text_roundtrip():
    m = _delayed_pop()
    again, scope = parse_mpds(format_mpds(m, 2))
    assert scope == 2
    assert again.stacks == 2
    assert len(again.rules) == len(m.rules)
    assert mpds_reach_control(again, 1, "p0", "goal", 4, 30).reachable is False
