"""Automata, configurations and rule tables.

States are the integers ``0..n-1``.  One-dimensional rules are dense
lookup tables ``g[left, center, right]`` and ``g0[center, right]``; the
latter is only consulted at site 0 of a free-boundary half line.  Infinite
lattices are approximated by finite windows: whatever lies outside the
window is frozen according to the :class:`BoundaryMode`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence, Union

import numpy as np

#: Marker for a missing table entry (an incomplete rule file, say).
MISSING = -1


class DomainError(ValueError):
    """A state or site outside the legal range."""


class InvalidRule(ValueError):
    """Raised when an operation needs a total, in-range rule and gets another."""

    def __init__(self, report: "ValidationReport"):
        super().__init__("; ".join(report.problems[:5]))
        self.report = report


@dataclass(frozen=True)
class StateSpace:
    size: int

    def __post_init__(self):
        if self.size < 1:
            raise DomainError(f"state space needs at least one state, got {self.size}")

    def __contains__(self, s) -> bool:
        return 0 <= int(s) < self.size

    def check(self, s) -> int:
        if s not in self:
            raise DomainError(f"state {s} outside 0..{self.size - 1}")
        return int(s)


# --- boundary modes -------------------------------------------------------


@dataclass(frozen=True)
class FreeHalfLine:
    """Site 0 uses ``g0``; the cell right of the window is frozen at ``right``."""

    right: int = 0

    def __str__(self):
        return "free" if self.right == 0 else f"free:{self.right}"


@dataclass(frozen=True)
class Background:
    """Cells on both sides of the window are frozen at state ``q``."""

    q: int = 0

    def __str__(self):
        return f"background:{self.q}"


@dataclass(frozen=True)
class Cyclic:
    def __str__(self):
        return "cyclic"


BoundaryMode = Union[FreeHalfLine, Background, Cyclic]


def parse_boundary(text: str) -> BoundaryMode:
    text = text.strip()
    kind, _, arg = text.partition(":")
    try:
        if kind == "free":
            return FreeHalfLine(int(arg) if arg else 0)
        if kind == "background":
            return Background(int(arg) if arg else 0)
        if kind == "cyclic" and not arg:
            return Cyclic()
    except ValueError:
        pass
    raise ValueError(f"bad boundary {text!r}; expected free[:q], background:q or cyclic")


def _frozen_state(boundary: BoundaryMode) -> int | None:
    if isinstance(boundary, FreeHalfLine):
        return boundary.right
    if isinstance(boundary, Background):
        return boundary.q
    return None


# --- configurations -------------------------------------------------------


class Configuration:
    """A finite window of cells.

    For 1-D automata the window covers sites ``origin .. origin+width-1``.
    For network automata the cells follow the automaton's site order and
    ``origin`` is 0.  Instances are immutable.
    """

    __slots__ = ("cells", "origin", "boundary")

    def __init__(self, cells, origin: int = 0, boundary: BoundaryMode | None = Background(0)):
        arr = np.array(cells, dtype=np.int64).reshape(-1)
        arr.flags.writeable = False
        if isinstance(boundary, FreeHalfLine) and origin != 0:
            raise DomainError("a free half line starts at site 0")
        object.__setattr__(self, "cells", arr)
        object.__setattr__(self, "origin", int(origin))
        object.__setattr__(self, "boundary", boundary)

    def __setattr__(self, name, value):
        raise AttributeError("Configuration is immutable")

    @classmethod
    def from_string(cls, text: str, origin: int = 0, boundary: BoundaryMode | None = Background(0)):
        """``"00100"`` or ``"0 0 12 0"``; separators are spaces or commas."""
        text = text.strip()
        if any(c in text for c in " ,\t"):
            cells = [int(tok) for tok in text.replace(",", " ").split()]
        else:
            cells = [int(c) for c in text]
        return cls(cells, origin, boundary)

    @property
    def width(self) -> int:
        return len(self.cells)

    @property
    def sites(self) -> range:
        return range(self.origin, self.origin + self.width)

    def __len__(self):
        return self.width

    def __getitem__(self, site: int) -> int:
        i = site - self.origin
        if not 0 <= i < self.width:
            raise DomainError(f"site {site} outside window {self.origin}..{self.origin + self.width - 1}")
        return int(self.cells[i])

    def replace(self, cells) -> "Configuration":
        return Configuration(cells, self.origin, self.boundary)

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return (
            self.origin == other.origin
            and self.boundary == other.boundary
            and np.array_equal(self.cells, other.cells)
        )

    def __hash__(self):
        return hash((self.origin, self.boundary, self.cells.tobytes()))

    def __str__(self):
        if self.cells.size and self.cells.max() < 10:
            return "".join(str(int(c)) for c in self.cells)
        return " ".join(str(int(c)) for c in self.cells)

    def __repr__(self):
        return f"Configuration({str(self)!r}, origin={self.origin}, boundary={self.boundary})"


# --- validation -----------------------------------------------------------


@dataclass
class ValidationReport:
    problems: list[str] = field(default_factory=list)
    missing: list[tuple] = field(default_factory=list)
    out_of_range: list[tuple] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self):
        return self.ok


def _check_table(name: str, table: np.ndarray, n: int, report: ValidationReport):
    for idx in zip(*np.nonzero(table == MISSING)):
        t = tuple(int(i) for i in idx)
        report.missing.append((name, t))
        report.problems.append(f"{name}{t} is missing")
    bad = (table != MISSING) & ((table < 0) | (table >= n))
    for idx in zip(*np.nonzero(bad)):
        t = tuple(int(i) for i in idx)
        report.out_of_range.append((name, t, int(table[idx])))
        report.problems.append(f"{name}{t} -> {int(table[idx])} is outside 0..{n - 1}")


def validate(obj) -> ValidationReport:
    """Report totality and range problems of a rule or network automaton."""
    report = ValidationReport()
    if isinstance(obj, RuleTable1D):
        n = obj.states.size
        _check_table("g", obj.g, n, report)
        _check_table("g0", obj.g0, n, report)
        q = _frozen_state(obj.boundary)
        if q is not None and q not in obj.states:
            report.problems.append(f"boundary state {q} is outside 0..{n - 1}")
    elif isinstance(obj, NetworkAutomaton):
        n = obj.states.size
        for x in obj.sites:
            nb = obj.neighbors[x]
            if x not in nb:
                report.problems.append(f"site {x!r} is not in its own neighborhood")
            for y in nb:
                if y not in obj._index:
                    report.problems.append(f"neighbor {y!r} of {x!r} is not a site")
            table = obj.local_rule[x]
            if table.shape != (n,) * len(nb):
                report.problems.append(f"rule table of {x!r} has shape {table.shape}, expected {(n,) * len(nb)}")
                continue
            _check_table(f"f[{x!r}]", table, n, report)
    else:
        raise TypeError(f"cannot validate {type(obj).__name__}")
    return report


# --- 1-D rule tables ------------------------------------------------------


class RuleTable1D:
    """Radius-1 rule ``g`` with a free-edge rule ``g0`` and a default boundary.

    Tables may contain :data:`MISSING` entries or out-of-range outputs (for
    example while parsing a rule file); :func:`validate` reports them and
    every evaluating operation refuses such a rule.
    """

    def __init__(self, n_states: int, g, g0=None, boundary: BoundaryMode = Background(0), name: str = ""):
        self.states = StateSpace(n_states)
        n = n_states
        self.g = np.array(g, dtype=np.int64)
        if self.g.shape != (n, n, n):
            raise DomainError(f"g must have shape {(n, n, n)}, got {self.g.shape}")
        if g0 is None:
            g0 = np.broadcast_to(np.arange(n)[:, None], (n, n))
        self.g0 = np.array(g0, dtype=np.int64)
        if self.g0.shape != (n, n):
            raise DomainError(f"g0 must have shape {(n, n)}, got {self.g0.shape}")
        self.g.flags.writeable = False
        self.g0.flags.writeable = False
        self.boundary = boundary
        self.name = name
        self._valid: bool | None = None

    @property
    def n_states(self) -> int:
        return self.states.size

    @classmethod
    def from_function(cls, n_states: int, g: Callable, g0: Callable | None = None, boundary=Background(0), name=""):
        n = n_states
        G = np.empty((n, n, n), dtype=np.int64)
        for r, s, t in itertools.product(range(n), repeat=3):
            G[r, s, t] = g(r, s, t)
        G0 = None
        if g0 is not None:
            G0 = np.empty((n, n), dtype=np.int64)
            for s, t in itertools.product(range(n), repeat=2):
                G0[s, t] = g0(s, t)
        return cls(n, G, G0, boundary, name)

    def with_boundary(self, boundary: BoundaryMode) -> "RuleTable1D":
        return RuleTable1D(self.n_states, self.g, self.g0, boundary, self.name)

    def require_valid(self):
        if self._valid is None:
            report = validate(self)
            self._valid = report.ok
            if not report.ok:
                raise InvalidRule(report)
        elif not self._valid:
            raise InvalidRule(validate(self))

    def configuration(self, cells, origin: int = 0) -> Configuration:
        """A window carrying this rule's default boundary."""
        if isinstance(cells, str):
            return Configuration.from_string(cells, origin, self.boundary)
        return Configuration(cells, origin, self.boundary)

    def __eq__(self, other):
        if not isinstance(other, RuleTable1D):
            return NotImplemented
        return (
            self.n_states == other.n_states
            and self.boundary == other.boundary
            and np.array_equal(self.g, other.g)
            and np.array_equal(self.g0, other.g0)
        )

    __hash__ = None

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"<RuleTable1D{label} states={self.n_states} boundary={self.boundary}>"

    # automaton protocol

    def site_ids(self, config: Configuration) -> list:
        return list(config.sites)

    def index_of(self, config: Configuration, site) -> int:
        i = int(site) - config.origin
        if not 0 <= i < config.width:
            raise DomainError(f"site {site} outside window {config.origin}..{config.origin + config.width - 1}")
        return i

    def image(self, config: Configuration) -> np.ndarray:
        """The synchronous successor ``f(xi)`` as a bare cell array."""
        self.require_valid()
        c = config.cells
        if c.size == 0:
            return c.copy()
        if c.max() >= self.n_states or c.min() < 0:
            raise DomainError(f"configuration has states outside 0..{self.n_states - 1}")
        b = config.boundary
        if isinstance(b, Cyclic):
            return self.g[np.roll(c, 1), c, np.roll(c, -1)]
        q = _frozen_state(b)
        padded = np.concatenate(([q], c, [q]))
        out = self.g[padded[:-2], c, padded[2:]]
        if isinstance(b, FreeHalfLine):
            out[0] = self.g0[c[0], padded[2]]
        return out


def eval_local(rule: RuleTable1D, left, center, right) -> int:
    """Evaluate the rule at one site; ``left=None`` marks the free left edge."""
    rule.require_valid()
    n = rule.states
    center, right = n.check(center), n.check(right)
    if left is None:
        return int(rule.g0[center, right])
    return int(rule.g[n.check(left), center, right])


# --- general networks -----------------------------------------------------

Site = Hashable


class NetworkAutomaton:
    """A finite automaton given by per-site lookup tables.

    ``neighbors[x]`` is an ordered tuple that must contain ``x`` itself;
    ``local_rule[x]`` is an array indexed by the neighbor states in that
    order.
    """

    def __init__(
        self,
        n_states: int,
        sites: Sequence[Site],
        neighbors: Mapping[Site, Sequence[Site]],
        local_rule: Mapping[Site, np.ndarray],
    ):
        self.states = StateSpace(n_states)
        self.sites = list(sites)
        if len(set(self.sites)) != len(self.sites):
            raise DomainError("duplicate site ids")
        self._index = {x: i for i, x in enumerate(self.sites)}
        self.neighbors = {x: tuple(neighbors[x]) for x in self.sites}
        self.local_rule = {}
        for x in self.sites:
            t = np.array(local_rule[x], dtype=np.int64)
            t.flags.writeable = False
            self.local_rule[x] = t
        self._nb_idx = [np.array([self._index.get(y, -1) for y in self.neighbors[x]], dtype=np.int64) for x in self.sites]
        self._valid: bool | None = None

    @property
    def n_states(self) -> int:
        return self.states.size

    def require_valid(self):
        if self._valid is None:
            report = validate(self)
            self._valid = report.ok
            if not report.ok:
                raise InvalidRule(report)
        elif not self._valid:
            raise InvalidRule(validate(self))

    def configuration(self, states: Mapping[Site, int] | Sequence[int] | str) -> Configuration:
        if isinstance(states, Mapping):
            cells = [states[x] for x in self.sites]
        elif isinstance(states, str):
            return Configuration.from_string(states, 0, None)
        else:
            cells = list(states)
        if len(cells) != len(self.sites):
            raise DomainError(f"expected {len(self.sites)} cells, got {len(cells)}")
        return Configuration(cells, 0, None)

    def as_dict(self, config: Configuration) -> dict:
        return {x: int(s) for x, s in zip(self.sites, config.cells)}

    # automaton protocol

    def site_ids(self, config=None) -> list:
        return list(self.sites)

    def index_of(self, config, site) -> int:
        try:
            return self._index[site]
        except KeyError:
            raise DomainError(f"{site!r} is not a site of this network") from None

    def local(self, cells, i: int) -> int:
        """``f(xi)(x)`` for the site with index ``i``."""
        return int(self.local_rule[self.sites[i]][tuple(cells[self._nb_idx[i]])])

    def image(self, config: Configuration) -> np.ndarray:
        self.require_valid()
        c = config.cells
        if c.size != len(self.sites):
            raise DomainError(f"expected {len(self.sites)} cells, got {c.size}")
        if c.size and (c.max() >= self.n_states or c.min() < 0):
            raise DomainError(f"configuration has states outside 0..{self.n_states - 1}")
        return np.array([self.local(c, i) for i in range(c.size)], dtype=np.int64)


def network_from_rule(rule: RuleTable1D, width: int, boundary: BoundaryMode | None = None, origin: int = 0) -> NetworkAutomaton:
    """Unroll a 1-D rule on a finite window into per-site tables.

    Frozen outside cells are folded into the edge tables, so the network's
    sites are exactly the window's sites.
    """
    rule.require_valid()
    b = rule.boundary if boundary is None else boundary
    n = rule.n_states
    sites = list(range(origin, origin + width))
    q = _frozen_state(b)
    neighbors, tables = {}, {}
    for i, x in enumerate(sites):
        if isinstance(b, Cyclic):
            nb = (sites[(i - 1) % width], x, sites[(i + 1) % width])
            tab = _cyclic_table(rule.g, nb)
            neighbors[x], tables[x] = tuple(dict.fromkeys(nb)), tab
            continue
        has_left, has_right = i > 0, i < width - 1
        if i == 0 and isinstance(b, FreeHalfLine):
            base = rule.g0 if has_right else rule.g0[:, q]
            nb = (x, sites[i + 1]) if has_right else (x,)
        else:
            base = rule.g
            base = base if has_left else base[q]
            base = base if has_right else base[..., q]
            nb = ((sites[i - 1],) if has_left else ()) + (x,) + ((sites[i + 1],) if has_right else ())
        neighbors[x], tables[x] = nb, np.array(base)
    return NetworkAutomaton(n, sites, neighbors, tables)


def _cyclic_table(g: np.ndarray, nb: tuple) -> np.ndarray:
    # widths 1 and 2 make neighbor slots coincide; collapse them onto distinct sites
    distinct = tuple(dict.fromkeys(nb))
    if len(distinct) == 3:
        return np.array(g)
    n = g.shape[0]
    out = np.empty((n,) * len(distinct), dtype=np.int64)
    pos = [distinct.index(y) for y in nb]
    for states in itertools.product(range(n), repeat=len(distinct)):
        out[states] = g[tuple(states[p] for p in pos)]
    return out


# --- marching soldiers composite state ------------------------------------


@dataclass(frozen=True)
class MarchingState:
    cur: int
    prev: int
    age: int

    def __post_init__(self):
        if self.age not in (0, 1, 2):
            raise DomainError(f"age must be 0, 1 or 2, got {self.age}")

    def encode(self, n_base: int) -> int:
        if not (0 <= self.cur < n_base and 0 <= self.prev < n_base):
            raise DomainError(f"{self} has fields outside 0..{n_base - 1}")
        return (self.cur * n_base + self.prev) * 3 + self.age

    @classmethod
    def decode(cls, code: int, n_base: int) -> "MarchingState":
        if not 0 <= code < 3 * n_base * n_base:
            raise DomainError(f"composite state {code} outside 0..{3 * n_base * n_base - 1}")
        rest, age = divmod(int(code), 3)
        cur, prev = divmod(rest, n_base)
        return cls(cur, prev, age)


def encode_fields(cur, prev, age, n_base: int):
    """Vectorized :meth:`MarchingState.encode`."""
    return (np.asarray(cur) * n_base + np.asarray(prev)) * 3 + np.asarray(age)


def decode_fields(code, n_base: int):
    """Vectorized :meth:`MarchingState.decode`; returns ``(cur, prev, age)``."""
    code = np.asarray(code)
    rest, age = np.divmod(code, 3)
    cur, prev = np.divmod(rest, n_base)
    return cur, prev, age


# --- builtin rules --------------------------------------------------------


def _builtin(n, g, name, boundary=Background(0)):
    return RuleTable1D.from_function(n, g, lambda s, t: g(0, s, t), boundary, name)


def identity_rule(n: int = 2, boundary: BoundaryMode = Background(0)) -> RuleTable1D:
    return _builtin(n, lambda r, s, t: s, "identity", boundary)


def max_rule(n: int = 2, boundary: BoundaryMode = Background(0)) -> RuleTable1D:
    return _builtin(n, lambda r, s, t: max(r, s, t), "max", boundary)


def xor_rule(boundary: BoundaryMode = Background(0)) -> RuleTable1D:
    return _builtin(2, lambda r, s, t: r ^ t, "xor", boundary)


def shift_rule(n: int = 2, boundary: BoundaryMode = Background(0)) -> RuleTable1D:
    """Every cell copies its right neighbor."""
    return _builtin(n, lambda r, s, t: t, "shift", boundary)


BUILTINS: dict[str, Callable[..., RuleTable1D]] = {
    "identity": identity_rule,
    "max": max_rule,
    "xor": lambda n=2, boundary=Background(0): xor_rule(boundary),
    "shift": shift_rule,
}


def random_rule(
    rng: np.random.Generator,
    n_states: int,
    keep: float = 0.0,
    boundary: BoundaryMode = FreeHalfLine(),
) -> RuleTable1D:
    """A seeded random rule.

    Each table entry keeps the center state with probability ``keep`` and is
    uniform otherwise; ``keep`` near 1 gives mostly-quiescent rules, which
    are far more often commutative than uniform ones.
    """
    n = n_states
    center = np.broadcast_to(np.arange(n)[None, :, None], (n, n, n))
    g = np.where(rng.random((n, n, n)) < keep, center, rng.integers(0, n, (n, n, n)))
    center0 = np.broadcast_to(np.arange(n)[:, None], (n, n))
    g0 = np.where(rng.random((n, n)) < keep, center0, rng.integers(0, n, (n, n)))
    return RuleTable1D(n, g, g0, boundary, "random")


def iter_configurations(n_states: int, width: int) -> Iterable[tuple[int, ...]]:
    """All cell tuples of a window in lexicographic order."""
    return itertools.product(range(n_states), repeat=width)
