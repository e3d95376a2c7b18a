"""Space-time diagrams as text grids or plain PPM images.

Rendering is one-way: there is no parser for the output.
"""

from __future__ import annotations

import numpy as np

DEFAULT_GLYPHS = ".#" + "23456789" + "abcdefghijklmnopqrstuvwxyz"

# plain, distinguishable colours; state 0 is white
DEFAULT_COLORS = [
    (255, 255, 255),
    (0, 0, 0),
    (214, 39, 40),
    (31, 119, 180),
    (44, 160, 44),
    (255, 127, 14),
    (148, 103, 189),
    (140, 86, 75),
    (227, 119, 194),
    (127, 127, 127),
    (188, 189, 34),
    (23, 190, 207),
]


class PaletteError(ValueError):
    pass


def _check(frames: np.ndarray, size: int):
    if frames.size and (frames.min() < 0 or frames.max() >= size):
        raise PaletteError(f"state {int(frames.max())} has no entry in a palette of {size}")


def render_grid(frames, glyphs: str = DEFAULT_GLYPHS) -> str:
    """One text row per time step, one glyph per site."""
    frames = np.asarray(frames)
    _check(frames, len(glyphs))
    lut = np.array(list(glyphs))
    return "\n".join("".join(lut[row]) for row in frames) + "\n"


def render_ppm(frames, colors=DEFAULT_COLORS, scale: int = 1) -> str:
    """Plain (P3) portable pixmap, ``scale`` pixels per cell."""
    frames = np.asarray(frames)
    _check(frames, len(colors))
    img = np.asarray(colors, dtype=np.int64)[frames]
    if scale > 1:
        img = img.repeat(scale, axis=0).repeat(scale, axis=1)
    h, w = img.shape[:2]
    lines = ["P3", f"{w} {h}", "255"]
    for row in img:
        lines.append(" ".join(f"{r} {g} {b}" for r, g, b in row))
    return "\n".join(lines) + "\n"
