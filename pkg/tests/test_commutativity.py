import itertools

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from asynchist import (
    Background,
    Bernoulli,
    RuleTable1D,
    Explicit,
    FreeHalfLine,
    check_local_commutativity_1d,
    check_monotonicity,
    check_pair,
    check_pairwise_network,
    identity_rule,
    max_rule,
    network_from_rule,
    random_rule,
    shift_rule,
    simulate,
    witness_to_schedules,
    xor_rule,
)
from asynchist.commutativity import LOCAL_COMMUTATIVITY, MONOTONICITY, BudgetExceeded
from asynchist.core import iter_configurations
from asynchist.trajectory import apply, free_sites

from . import oracles


def test_identity_is_commutative():
    assert check_local_commutativity_1d(identity_rule(3)) is None


def test_max_is_commutative():
    assert check_local_commutativity_1d(max_rule(2)) is None
    assert check_local_commutativity_1d(max_rule(2, FreeHalfLine())) is None


def test_xor_witness():
    w = check_local_commutativity_1d(xor_rule())
    assert w.kind == LOCAL_COMMUTATIVITY
    assert w.tuple == (0, 0, 1, 0)
    assert w.sites == (1, 2)
    assert w.details == ((0, 1, 1, 0), (0, 1, 0, 0))


def test_three_state_max_is_not_commutative():
    # updating the right cell first lets the larger value overtake
    w = check_local_commutativity_1d(max_rule(3))
    assert w is not None
    assert oracles.commutative_on_window(max_rule(3), 4, "background") is False


def test_boundary_pair_witness():
    # interior: a 1 spreads right, never two adjacent free cells
    g = np.broadcast_to(np.arange(2)[None, :, None], (2, 2, 2)).copy()
    g[1, 0, :] = 1
    # edge: a 1 at site 0 dies when site 1 is 0
    g0 = np.array([[0, 0], [0, 1]])
    rule = RuleTable1D(2, g, g0, FreeHalfLine())
    assert check_local_commutativity_1d(rule.with_boundary(Background(0))) is None
    w = check_local_commutativity_1d(rule)
    assert w.tuple == (1, 0, 0) and w.sites == (0, 1)
    assert w.details == ((0, 0, 0), (0, 1, 0))
    window, a, b = witness_to_schedules(w)
    ta, tb = simulate(rule, window, a, 2), simulate(rule, window, b, 2)
    assert tuple(ta.frames[2]) == w.details[0]
    assert tuple(tb.frames[2]) == w.details[1]


def test_identity_network_passes():
    assert check_pairwise_network(network_from_rule(identity_rule(2), 4)) is None


def test_max_network_exhaustive():
    assert check_pairwise_network(network_from_rule(max_rule(2), 5)) is None


def test_xor_network_pair():
    rule = xor_rule()
    net = network_from_rule(rule, 4)
    cfg = net.configuration("0010")
    w = check_pair(net, cfg, 1, 2)
    assert w.details == ((0, 1, 1, 0), (0, 1, 0, 0))
    assert check_pairwise_network(net) is not None


def test_sampled_mode_is_seeded():
    net = network_from_rule(xor_rule(), 6)
    a = check_pairwise_network(net, "sampled", count=50, seed=4)
    b = check_pairwise_network(net, "sampled", count=50, seed=4)
    assert a == b and a is not None


def test_budget():
    net = network_from_rule(max_rule(3), 12)
    with pytest.raises(BudgetExceeded):
        check_pairwise_network(net, budget=1000)


def test_monotonicity_identity():
    rule = identity_rule(2)
    tr = simulate(rule, rule.configuration("0101"), Explicit([{0, 1}]), 1)
    assert check_monotonicity(rule, [tr]) is None


def test_monotonicity_shift_witness():
    rule = shift_rule(2)
    tr = simulate(rule, rule.configuration("010"), Explicit([{1}]), 1)
    w = check_monotonicity(rule, tr)
    assert w.kind == MONOTONICITY
    assert w.sites == (0,) and w.time == 0


def test_witness_schedules_xor():
    window, a, b = witness_to_schedules(check_local_commutativity_1d(xor_rule()))
    assert str(window) == "0010"
    ta, tb = simulate(xor_rule(), window, a, 2), simulate(xor_rule(), window, b, 2)
    diff = np.flatnonzero(ta.frames[2] != tb.frames[2])
    assert diff.tolist() == [2]


def test_witness_format_is_stable():
    text = check_local_commutativity_1d(xor_rule()).format()
    assert text.splitlines() == [
        "WITNESS",
        "kind\tlocal-commutativity",
        "tuple\t0 0 1 0",
        "sites\t1 2",
        "sequential\t0 1 1 0",
        "simultaneous\t0 1 0 0",
    ]


small_rules = st.builds(
    lambda seed, n, keep: random_rule(np.random.default_rng(seed), n, keep, FreeHalfLine()),
    st.integers(0, 100_000),
    st.sampled_from([2, 3]),
    st.sampled_from([0.5, 0.8, 0.9]),
)

quiet_rules = st.builds(
    lambda seed, n: random_rule(np.random.default_rng(seed), n, 0.9, FreeHalfLine()),
    st.integers(0, 100_000),
    st.sampled_from([2, 3]),
)


@settings(max_examples=60, deadline=None)
@given(small_rules)
def test_local_check_agrees_with_loop_oracle(rule):
    assert (check_local_commutativity_1d(rule) is None) == oracles.commutative_on_window(rule, 4, "free")


@settings(max_examples=40, deadline=None)
@given(small_rules)
def test_witnesses_replay_to_real_inequality(rule):
    w = check_local_commutativity_1d(rule)
    if w is None:
        return
    window, a, b = witness_to_schedules(w)
    ta, tb = simulate(rule, window, a, 2), simulate(rule, window, b, 2)
    assert tuple(ta.frames[2]) == w.details[0]
    assert tuple(tb.frames[2]) == w.details[1]
    assert w.details[0] != w.details[1]


@settings(max_examples=30, deadline=None)
@given(quiet_rules, st.integers(0, 1000))
def test_sequential_equals_simultaneous_for_commutative(rule, seed):
    assume(check_local_commutativity_1d(rule) is None)
    r = np.random.default_rng(seed)
    width = 5
    for cells in itertools.islice(iter_configurations(rule.n_states, width), 0, None, 3):
        cfg = rule.configuration(cells)
        L = sorted(free_sites(rule, cfg))
        order = list(r.permutation(L)) if L else []
        assert apply(rule, cfg, *[{int(x)} for x in order]) == apply(rule, cfg, set(L))


@settings(max_examples=30, deadline=None)
@given(quiet_rules)
def test_commutative_rules_are_monotonic(rule):
    assume(check_local_commutativity_1d(rule) is None)
    cfg = rule.configuration(np.random.default_rng(1).integers(0, rule.n_states, 10))
    trajs = [simulate(rule, cfg, Bernoulli(0.5, k), 30) for k in range(5)]
    assert check_monotonicity(rule, trajs) is None
