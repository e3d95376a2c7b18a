import itertools

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from asynchist import (
    Background,
    Bernoulli,
    Configuration,
    FreeHalfLine,
    RuleTable1D,
    Synchronous,
    build_gprime,
    build_undec_rule,
    check_local_commutativity_1d,
    divergence_demo,
    identity_rule,
    invariant_history_test,
    random_rule,
    simulate,
    standard_base,
    xor_rule,
)
from asynchist.gadgets import GadgetError, search_divergence, undec_case_index


def test_standard_base_tables():
    g = standard_base()
    assert g.g0.tolist() == [[1, 0], [1, 1]]
    assert g.g[0, 0, 0] == 0
    assert all(g.g[r, s, t] == s for r, s, t in itertools.product(range(2), repeat=3))


def test_gprime_entries():
    g = standard_base()
    n = g.n_states
    gp = build_gprime(g)
    assert gp.n_states == n + 1 and isinstance(gp.boundary, FreeHalfLine)
    for r, s in itertools.product(range(n + 1), repeat=2):
        assert gp.g[n, r, s] == n
    for r in range(n):
        for s in range(n + 1):
            assert gp.g[r, n, s] == g.g[r, 0, 0]
    for r, s in itertools.product(range(n), repeat=2):
        assert gp.g[r, s, n] == g.g[r, s, 0]
        assert gp.g0[r, s] == g.g0[r, s]
    for s in range(n + 1):
        assert gp.g0[n, s] == g.g0[0, 0]
    for r in range(n):
        assert gp.g0[r, n] == g.g0[r, 0]


def test_gprime_preconditions():
    g = standard_base()
    bad = RuleTable1D(2, np.where(np.arange(8).reshape(2, 2, 2) == 0, 1, g.g), g.g0, FreeHalfLine())
    with pytest.raises(GadgetError, match=r"g\(0,0,0\)"):
        build_gprime(bad)
    with pytest.raises(GadgetError, match=r"g0\(1,1\)"):
        build_gprime(RuleTable1D(2, g.g, np.array([[1, 0], [1, 0]]), FreeHalfLine()))


def _sweep(g, T):
    n = g.n_states
    gp = build_gprime(g)
    width = T + 3
    sweep = simulate(gp, Configuration([n] + [0] * (width - 1), 0, FreeHalfLine()), Synchronous(), T)
    plain = simulate(g, Configuration([0] * width, 0, FreeHalfLine()), Synchronous(), T)
    return sweep.frames, plain.frames


def test_sweep_wake_behind_front():
    n = 2
    front, base = _sweep(standard_base(), 30)
    for t in range(1, 31):
        assert front[t, :t].tolist() == base[t, :t].tolist()
        assert front[t, t] == n
        assert (front[t, t + 1:] == 0).all()


def test_undec_entries_follow_cases():
    g = standard_base()
    n = g.n_states
    f = build_undec_rule(g)
    assert f.n_states == n + 3
    for r, s, t in itertools.product(range(n + 3), repeat=3):
        v = f.g[r, s, t]
        if s == n and t == 0:
            assert v == n + 1
        elif s == n and t == 1:
            assert v == n + 2
        elif r >= n and s < n and t < n:
            assert v == g.g0[s, t]
        elif max(r, s, t) < n:
            assert v == g.g[r, s, t]
        elif r < n and s < n:
            assert v == g.g[r, s, 0]
        else:
            assert v == s


def test_undec_case_index():
    assert undec_case_index(2, 0, 2, 0) == 1
    assert undec_case_index(2, 4, 2, 1) == 2
    assert undec_case_index(2, 3, 0, 1) == 3
    assert undec_case_index(2, 1, 0, 1) == 4
    assert undec_case_index(2, 1, 0, 3) == 5
    assert undec_case_index(2, 1, 3, 3) == 6


def test_undec_requires_commutative_base():
    with pytest.raises(GadgetError):
        build_undec_rule(xor_rule())


def test_divergence_demo_histories():
    g = standard_base()
    n = g.n_states
    demo = divergence_demo(build_undec_rule(g), n, horizon=50)
    assert demo.site == -1
    assert demo.history_a == (n, n + 1)
    assert demo.history_b == (n, n + 2)
    assert not demo.verdict.consistent
    assert demo.verdict.witness.site == -1


def test_divergence_via_invariant_history_test():
    g = standard_base()
    f = build_undec_rule(g)
    demo = divergence_demo(f, g.n_states)
    verdict = invariant_history_test(f, demo.trajectory_a.initial, [demo.schedule_a, demo.schedule_b], demo.trajectory_a.steps)
    assert not verdict.consistent and verdict.witness.site == -1


def test_divergence_needs_reachable_one():
    # with identity edges site 0 never leaves 0
    g = identity_rule(2, FreeHalfLine())
    f = build_undec_rule(g)
    with pytest.raises(GadgetError, match="never reaches 1"):
        divergence_demo(f, 2, horizon=10)
    initial = Configuration([2] + [0] * 12, -1, Background(0))
    assert search_divergence(f, initial, 30, trials=40, seed=3).consistent


def test_divergence_horizon_too_small():
    # the flip-edge base writes 1 at site 0 after one step
    f = build_undec_rule(standard_base())
    with pytest.raises(GadgetError):
        divergence_demo(f, 2, horizon=0)


commutative_bases = st.builds(
    lambda seed, n: random_rule(np.random.default_rng(seed), n, 0.8, FreeHalfLine()),
    st.integers(0, 100_000),
    st.sampled_from([2, 3]),
)


@settings(max_examples=30, deadline=None)
@given(commutative_bases, st.integers(0, 999))
def test_walls_stay_walls(g, seed):
    assume(check_local_commutativity_1d(g) is None)
    n = g.n_states
    f = build_undec_rule(g)
    r = np.random.default_rng(seed)
    cells = r.integers(0, n + 3, 12)
    tr = simulate(f, Configuration(cells, -1, Background(0)), Bernoulli(0.5, seed), 40)
    wall = tr.frames >= n
    assert (wall[1:] >= wall[:-1]).all()


@settings(max_examples=30, deadline=None)
@given(commutative_bases)
def test_demo_certificate_when_it_succeeds(g):
    assume(check_local_commutativity_1d(g) is None)
    n = g.n_states
    try:
        demo = divergence_demo(build_undec_rule(g), n, horizon=20)
    except GadgetError:
        return
    assert demo.history_a != demo.history_b
    assert not demo.verdict.consistent


@settings(max_examples=20, deadline=None)
@given(commutative_bases, st.integers(0, 999))
def test_gprime_wake_for_random_bases(g, seed):
    # force the preconditions, keep the rest of the table random
    G = g.g.copy()
    G[0, 0, 0] = 0
    G0 = g.g0.copy()
    G0[1, :] = 1
    g = RuleTable1D(g.n_states, G, G0, FreeHalfLine())
    front, base = _sweep(g, 15)
    for t in range(1, 16):
        assert front[t, :t].tolist() == base[t, :t].tolist()
