import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asynchist import (
    Background,
    Configuration,
    Cyclic,
    FreeHalfLine,
    MarchingState,
    NetworkAutomaton,
    RuleTable1D,
    StateSpace,
    eval_local,
    identity_rule,
    max_rule,
    network_from_rule,
    random_rule,
    shift_rule,
    validate,
    xor_rule,
)
from asynchist.core import DomainError, InvalidRule, MISSING, parse_boundary

from . import oracles


def test_state_space_rejects_empty():
    with pytest.raises(ValueError):
        StateSpace(0)
    assert 2 in StateSpace(3) and 3 not in StateSpace(3)


def test_eval_local_identity_returns_center():
    assert eval_local(identity_rule(2), 0, 1, 0) == 1


def test_eval_local_max():
    assert eval_local(max_rule(2), 0, 0, 1) == 1


def test_eval_local_free_edge_uses_g0():
    g = np.broadcast_to(np.arange(2)[None, :, None], (2, 2, 2))
    g0 = np.array([[1, 0], [1, 1]])
    rule = RuleTable1D(2, g, g0, FreeHalfLine())
    cfg = rule.configuration("000")
    assert eval_local(rule, None, 0, 0) == 1
    assert rule.image(cfg)[0] == 1


def test_eval_local_rejects_out_of_range():
    with pytest.raises(DomainError):
        eval_local(max_rule(2), 0, 2, 0)


def test_validate_complete_table():
    assert validate(max_rule(2)).ok


def test_validate_names_missing_tuple():
    g = max_rule(2).g.copy()
    g[1, 1, 1] = MISSING
    report = validate(RuleTable1D(2, g))
    assert not report.ok
    assert (("g", (1, 1, 1))) in report.missing
    assert "(1, 1, 1)" in " ".join(report.problems)


def test_validate_range_violation():
    g = max_rule(3).g.copy()
    g[0, 0, 0] = 5
    report = validate(RuleTable1D(3, g))
    assert not report.ok and report.out_of_range
    with pytest.raises(InvalidRule):
        RuleTable1D(3, g).require_valid()


def test_parse_boundary_round_trip():
    for b in (FreeHalfLine(), FreeHalfLine(1), Background(0), Background(2), Cyclic()):
        assert parse_boundary(str(b)) == b
    with pytest.raises(ValueError):
        parse_boundary("torus")


def test_configuration_from_string_and_indexing():
    c = Configuration.from_string("00100", origin=-1)
    assert c.width == 5 and list(c.sites) == [-1, 0, 1, 2, 3]
    assert c[1] == 1 and str(c) == "00100"
    assert Configuration.from_string("0 11 2").cells.tolist() == [0, 11, 2]
    assert str(Configuration([0, 11, 2])) == "0 11 2"


def test_configuration_is_immutable():
    c = Configuration([0, 1])
    with pytest.raises(ValueError):
        c.cells[0] = 1
    with pytest.raises(AttributeError):
        c.origin = 3


def test_free_half_line_needs_origin_zero():
    with pytest.raises(ValueError):
        Configuration([0, 0], origin=1, boundary=FreeHalfLine())


def test_builtins():
    assert xor_rule().g[0, 1, 1] == 1 and xor_rule().g[1, 0, 1] == 0
    assert shift_rule(2).g[0, 0, 1] == 1
    assert max_rule(3).g[2, 0, 1] == 2


def test_max_rule_image_window():
    rule = max_rule(2)
    assert rule.image(rule.configuration("00100")).tolist() == [0, 1, 1, 1, 0]


def test_cyclic_image_wraps():
    rule = shift_rule(2, Cyclic())
    assert rule.image(rule.configuration("100")).tolist() == [0, 0, 1]


def test_marching_state_round_trip():
    for code in range(3 * 3 * 3):
        assert MarchingState.decode(code, 3).encode(3) == code
    assert MarchingState(1, 0, 0).encode(2) == 6


def test_network_requires_self_in_neighborhood():
    net = NetworkAutomaton(2, ["a", "b"], {"a": ("b",), "b": ("a", "b")}, {"a": np.zeros(2), "b": np.zeros((2, 2))})
    report = validate(net)
    assert not report.ok and "own neighborhood" in report.problems[0]
    with pytest.raises(InvalidRule):
        net.image(net.configuration("01"))


rules = st.builds(
    lambda seed, n, kind: random_rule(np.random.default_rng(seed), n, 0.3, kind),
    st.integers(0, 10_000),
    st.sampled_from([2, 3]),
    st.sampled_from([FreeHalfLine(), Background(0), Background(1), Cyclic()]),
)


@settings(max_examples=60, deadline=None)
@given(rule=rules, data=st.data())
def test_image_matches_loop_oracle(rule, data):
    width = data.draw(st.integers(1, 7))
    cells = data.draw(st.lists(st.integers(0, rule.n_states - 1), min_size=width, max_size=width))
    b = rule.boundary
    kind = "free" if isinstance(b, FreeHalfLine) else "cyclic" if isinstance(b, Cyclic) else "background"
    q = getattr(b, "q", getattr(b, "right", 0))
    expected = [oracles.local(rule, cells, i, kind, q) for i in range(width)]
    assert rule.image(rule.configuration(cells)).tolist() == expected


@settings(max_examples=60, deadline=None)
@given(rule=rules, data=st.data())
def test_eval_local_in_range(rule, data):
    n = rule.n_states
    l, c, r = (data.draw(st.integers(0, n - 1)) for _ in range(3))
    assert 0 <= eval_local(rule, l, c, r) < n
    assert 0 <= eval_local(rule, None, c, r) < n


@settings(max_examples=60, deadline=None)
@given(rule=rules, data=st.data())
def test_network_conversion_agrees_sitewise(rule, data):
    width = data.draw(st.integers(1, 6))
    cells = data.draw(st.lists(st.integers(0, rule.n_states - 1), min_size=width, max_size=width))
    net = network_from_rule(rule, width)
    cfg = rule.configuration(cells)
    assert net.image(net.configuration(cells)).tolist() == rule.image(cfg).tolist()
    for i in range(width):
        assert net.local(np.array(cells), i) == rule.image(cfg)[i]
