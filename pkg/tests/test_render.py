import numpy as np
import pytest

from asynchist import Bernoulli, identity_rule, max_rule, simulate
from asynchist.render import PaletteError, render_grid, render_ppm


def test_identity_rows_repeat():
    rule = identity_rule(3)
    tr = simulate(rule, rule.configuration("0120"), Bernoulli(0.5, 0), 4)
    rows = render_grid(tr.frames).splitlines()
    assert len(rows) == 5 and len(set(rows)) == 1 and rows[0] == ".#2."


def test_two_state_glyphs():
    rule = max_rule(2)
    tr = simulate(rule, rule.configuration("0001000"), Bernoulli(0.5, 1), 6)
    text = render_grid(tr.frames)
    assert set(text) <= {".", "#", "\n"}
    assert text.splitlines()[0] == "...#..."


def test_custom_palette_and_overflow():
    assert render_grid([[0, 1]], "ab") == "ab\n"
    with pytest.raises(PaletteError):
        render_grid([[0, 2]], "ab")
    with pytest.raises(PaletteError):
        render_ppm([[0, 99]])


def test_ppm_header_and_scale():
    text = render_ppm(np.array([[0, 1]]), scale=2)
    lines = text.splitlines()
    assert lines[:3] == ["P3", "4 2", "255"]
    assert lines[3] == "255 255 255 255 255 255 0 0 0 0 0 0"
    assert len(lines) == 5
