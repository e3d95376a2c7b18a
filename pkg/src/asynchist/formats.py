"""Plain-text file formats: rule tables, schedules and traces.

Rule file::

    # comments start with '#'
    format = asynchist-rule 1
    states = 2
    boundary = free            # free[:q] | background:q | cyclic
    kind = table               # or: marching (a composite written by transform)
    default: identity          # optional; unspecified entries keep the center
    g: 0 0 1 -> 1
    g0: 0 0 -> 1

Without ``default: identity`` every ``g`` and ``g0`` entry must be listed.
A later line for the same tuple overrides an earlier one.  ``kind =
marching`` files also carry ``base_states = n``.

Schedule file: one line per step with whitespace-separated site ids; ``*``
means every site and an empty line attempts nothing.

Trace TSV::

    # asynchist-trace 1
    # states=2 origin=0 width=5 steps=3 boundary=background:0
    t	site	state
    0	0	0        (frame 0 in full, then only changed cells)
"""

from __future__ import annotations

import io
import re
from pathlib import Path

import numpy as np

from .core import (
    MISSING,
    Background,
    RuleTable1D,
    parse_boundary,
    validate,
)
from .marching import MarchingRule, marching_transform
from .trajectory import ALL, Explicit, Trajectory

RULE_FORMAT = "asynchist-rule 1"
TRACE_FORMAT = "asynchist-trace 1"


class FormatError(ValueError):
    def __init__(self, msg: str, line: int | None = None, source: str = "<input>"):
        self.line = line
        self.source = source
        self.msg = msg
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + msg)


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        yield no, line


_ENTRY = re.compile(r"^(g0|g)\s*:\s*([-\d\s]+?)\s*->\s*(-?\d+)$")


def parse_rule(text: str, source: str = "<input>"):
    """Parse a rule file.

    Returns a :class:`RuleTable1D`, or a :class:`~asynchist.marching.MarchingRule`
    for ``kind = marching`` files.  Missing entries are left as ``MISSING``
    so :func:`~asynchist.core.validate` can name them.
    """
    header: dict[str, tuple[int, str]] = {}
    entries: list[tuple[int, str, tuple, int]] = []
    default = None
    for no, line in _lines(text):
        if not line:
            continue
        m = _ENTRY.match(line)
        if m:
            try:
                args = tuple(int(v) for v in m.group(2).split())
            except ValueError:
                raise FormatError(f"bad tuple in {line!r}", no, source) from None
            want = 3 if m.group(1) == "g" else 2
            if len(args) != want:
                raise FormatError(f"{m.group(1)} takes {want} arguments, got {len(args)}", no, source)
            entries.append((no, m.group(1), args, int(m.group(3))))
            continue
        if line.startswith("default"):
            key, _, val = line.partition(":")
            if key.strip() != "default" or val.strip() != "identity":
                raise FormatError(f"unknown default {val.strip()!r}; only 'identity' is supported", no, source)
            default = "identity"
            continue
        if "=" in line:
            key, _, val = line.partition("=")
            header[key.strip()] = (no, val.strip())
            continue
        raise FormatError(f"cannot parse {line!r}", no, source)

    if "format" in header and header["format"][1] != RULE_FORMAT:
        no, val = header["format"]
        raise FormatError(f"unsupported format {val!r}", no, source)
    if "states" not in header:
        raise FormatError("missing 'states = n' header", None, source)
    no, val = header["states"]
    try:
        n = int(val)
    except ValueError:
        raise FormatError(f"states must be an integer, got {val!r}", no, source) from None
    if n < 1:
        raise FormatError("states must be >= 1", no, source)
    boundary = Background(0)
    if "boundary" in header:
        no, val = header["boundary"]
        try:
            boundary = parse_boundary(val)
        except ValueError as exc:
            raise FormatError(str(exc), no, source) from None

    if default == "identity":
        g = np.broadcast_to(np.arange(n)[None, :, None], (n, n, n)).copy()
        g0 = np.broadcast_to(np.arange(n)[:, None], (n, n)).copy()
    else:
        g = np.full((n, n, n), MISSING, dtype=np.int64)
        g0 = np.full((n, n), MISSING, dtype=np.int64)
    for no, which, args, out in entries:
        if any(not 0 <= a < n for a in args):
            raise FormatError(f"argument outside 0..{n - 1} in {which}{args}", no, source)
        (g if which == "g" else g0)[args] = out
    kind = header.get("kind", (None, "table"))[1]
    rule = RuleTable1D(n, g, g0, boundary)
    if kind == "table":
        return rule
    if kind == "marching":
        return _marching_from_composite(rule, header, source)
    raise FormatError(f"unknown kind {kind!r}", header["kind"][0], source)


def _marching_from_composite(rule: RuleTable1D, header, source):
    if "base_states" not in header:
        raise FormatError("marching rules need 'base_states = n'", None, source)
    no, val = header["base_states"]
    nb = int(val)
    if rule.n_states != 3 * nb * nb:
        raise FormatError(f"a marching rule over {nb} base states has {3 * nb * nb} states", no, source)
    report = validate(rule)
    if not report.ok:
        raise FormatError("composite table is incomplete: " + report.problems[0], None, source)
    # base entries are the composite's all-fresh neighborhoods (cur, 0, 0)
    lift = np.arange(nb) * nb * 3
    g = rule.g[np.ix_(lift, lift, lift)] // (3 * nb)
    g0 = rule.g0[np.ix_(lift, lift)] // (3 * nb)
    base = RuleTable1D(nb, g, g0, rule.boundary)
    if not validate(base).ok:
        raise FormatError("composite table does not encode a base rule", None, source)
    march = marching_transform(base)
    if not (np.array_equal(march.composite.g, rule.g) and np.array_equal(march.composite.g0, rule.g0)):
        raise FormatError("composite table is not the marching transform of its base", None, source)
    return march


def load_rule(path):
    path = Path(path)
    return parse_rule(path.read_text(), str(path))


def format_rule(rule, complete: bool = True) -> str:
    """Serialize a rule; ``complete=False`` writes only non-identity entries."""
    out = io.StringIO()
    out.write(f"format = {RULE_FORMAT}\n")
    if isinstance(rule, MarchingRule):
        table = rule.composite
        out.write(f"states = {table.n_states}\n")
        out.write(f"boundary = {table.boundary}\n")
        out.write("kind = marching\n")
        out.write(f"base_states = {rule.n_base}\n")
    else:
        table = rule
        out.write(f"states = {table.n_states}\n")
        out.write(f"boundary = {table.boundary}\n")
    if not complete:
        out.write("default: identity\n")
    n = table.n_states
    G, G0 = table.g, table.g0
    for r in range(n):
        for s in range(n):
            for t in range(n):
                v = int(G[r, s, t])
                if complete or v != s:
                    out.write(f"g: {r} {s} {t} -> {v}\n")
    for s in range(n):
        for t in range(n):
            v = int(G0[s, t])
            if complete or v != s:
                out.write(f"g0: {s} {t} -> {v}\n")
    return out.getvalue()


def save_rule(rule, path, complete: bool = True):
    Path(path).write_text(format_rule(rule, complete))


# --- schedules ------------------------------------------------------------


def parse_schedule(text: str, source: str = "<input>") -> Explicit:
    steps = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line == ALL:
            steps.append(ALL)
            continue
        try:
            steps.append({int(tok) for tok in line.split()})
        except ValueError:
            raise FormatError(f"site ids must be integers or '*', got {line!r}", no, source) from None
    return Explicit(steps)


def format_schedule(schedule: Explicit) -> str:
    lines = []
    for step in schedule.steps:
        lines.append(ALL if step == ALL else " ".join(str(x) for x in sorted(step)))
    return "\n".join(lines) + "\n"


# --- traces ---------------------------------------------------------------


def format_trace(traj: Trajectory) -> str:
    init = traj.initial
    out = io.StringIO()
    out.write(f"# {TRACE_FORMAT}\n")
    b = init.boundary if init.boundary is not None else "none"
    out.write(
        f"# states={traj.automaton.n_states} origin={init.origin} width={init.width} "
        f"steps={traj.steps} boundary={b}\n"
    )
    out.write("t\tsite\tstate\n")
    ids = traj.site_ids
    for i, x in enumerate(ids):
        out.write(f"0\t{x}\t{int(traj.frames[0, i])}\n")
    for t in range(1, traj.steps + 1):
        for i in np.flatnonzero(traj.changed[t - 1]):
            out.write(f"{t}\t{ids[i]}\t{int(traj.frames[t, i])}\n")
    return out.getvalue()


def save_trace(traj: Trajectory, path):
    Path(path).write_text(format_trace(traj))


def parse_trace(text: str, source: str = "<input>") -> tuple[np.ndarray, dict]:
    """Frames ``(T+1, width)`` and the header fields of a trace TSV."""
    meta: dict = {}
    rows = []
    seen_header = False
    for no, raw in enumerate(text.splitlines(), 1):
        if raw.startswith("#"):
            body = raw[1:].strip()
            if body.startswith("asynchist-trace"):
                if body != TRACE_FORMAT:
                    raise FormatError(f"unsupported trace format {body!r}", no, source)
                continue
            for tok in body.split():
                if "=" in tok:
                    k, _, v = tok.partition("=")
                    meta[k] = v
            continue
        if not raw.strip():
            continue
        parts = raw.split("\t")
        if not seen_header:
            if [p.strip() for p in parts] != ["t", "site", "state"]:
                raise FormatError("expected column header 't\\tsite\\tstate'", no, source)
            seen_header = True
            continue
        if len(parts) != 3:
            raise FormatError(f"expected 3 columns, got {len(parts)}", no, source)
        try:
            rows.append((int(parts[0]), int(parts[1]), int(parts[2]), no))
        except ValueError:
            raise FormatError(f"non-integer field in {raw!r}", no, source) from None
    for key in ("origin", "width", "steps"):
        if key not in meta:
            raise FormatError(f"trace header lacks {key}=", None, source)
    origin, width, steps = int(meta["origin"]), int(meta["width"]), int(meta["steps"])
    frames = np.full((steps + 1, width), -1, dtype=np.int64)
    last_t = 0
    for t, x, s, no in rows:
        if t < last_t:
            raise FormatError("rows must be sorted by time", no, source)
        if not 0 <= t <= steps or not 0 <= x - origin < width:
            raise FormatError(f"row (t={t}, site={x}) outside the declared window", no, source)
        if t > last_t:
            for k in range(last_t + 1, t + 1):
                frames[k] = frames[k - 1]
            last_t = t
        frames[t, x - origin] = s
    for k in range(last_t + 1, steps + 1):
        frames[k] = frames[k - 1]
    if (frames[0] < 0).any():
        raise FormatError("frame 0 is incomplete", None, source)
    meta["boundary_mode"] = None if meta.get("boundary", "none") == "none" else parse_boundary(meta["boundary"])
    return frames, meta


def load_trace(path, automaton) -> Trajectory:
    path = Path(path)
    frames, meta = parse_trace(path.read_text(), str(path))
    return Trajectory.from_frames(automaton, frames, int(meta["origin"]), meta["boundary_mode"])
