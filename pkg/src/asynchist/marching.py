"""The marching-soldiers embedding and the 1-D reconstruction.

Every cell carries ``(cur, prev, age)`` with ``age`` counting simulated
steps mod 3.  A cell may step only when no neighbor lags behind it; it
then reads each neighbor's ``cur`` (same age) or ``prev`` (one step ahead),
applies the base rule, and shifts its own ``cur`` into ``prev``.  The
result is commutative whatever the base rule is.

Composite states are packed into integers with
``code = (cur * n + prev) * 3 + age`` so that the generic trajectory engine
and the commutativity checks apply unchanged.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (
    Configuration,
    Cyclic,
    DomainError,
    FreeHalfLine,
    NetworkAutomaton,
    RuleTable1D,
    _frozen_state,
    decode_fields,
    encode_fields,
)
from .history import dedupe
from .trajectory import Bernoulli, Trajectory


def amod(b: int, m: int) -> int:
    """The representative of ``b`` mod ``m`` in ``(-m/2, m/2]``."""
    if m <= 0:
        raise ValueError(f"modulus must be positive, got {m}")
    r = b % m
    return r - m if 2 * r > m else r


def _lags(age_nb, age_self):
    # amod(age_nb - age_self, 3) < 0  <=>  (age_nb - age_self) % 3 == 2
    return (np.asarray(age_nb) - np.asarray(age_self)) % 3 == 2


class MarchingRule:
    """The commutative composite automaton built from a base automaton.

    ``composite`` is a plain :class:`RuleTable1D` (1-D bases) or
    :class:`NetworkAutomaton` (network bases) over the packed states.  For
    1-D windows the frozen outside cell is seen as ``(q, q, age)`` with the
    age of the adjacent edge cell, so a window edge never blocks.
    """

    def __init__(self, base, composite, message: np.ndarray | None = None):
        self.base = base
        self.composite = composite
        self.n_base = base.n_states
        self.message = message

    @property
    def n_states(self) -> int:
        return 3 * self.n_base * self.n_base

    @property
    def is_1d(self) -> bool:
        return isinstance(self.base, RuleTable1D)

    def __repr__(self):
        return f"<MarchingRule base={self.base!r}>"

    def site_ids(self, config):
        return self.composite.site_ids(config)

    def index_of(self, config, site):
        return self.composite.index_of(config, site)

    def image(self, config: Configuration) -> np.ndarray:
        if not self.is_1d:
            return self.composite.image(config)
        comp = self.composite
        c = config.cells
        if c.size == 0:
            return c.copy()
        if c.max() >= self.n_states or c.min() < 0:
            raise DomainError(f"configuration has states outside 0..{self.n_states - 1}")
        b = config.boundary
        if isinstance(b, Cyclic):
            return comp.g[np.roll(c, 1), c, np.roll(c, -1)]
        q = _frozen_state(b)
        age = c % 3
        left = encode_fields(q, q, age[0], self.n_base)
        right = encode_fields(q, q, age[-1], self.n_base)
        padded = np.concatenate(([left], c, [right]))
        out = comp.g[padded[:-2], c, padded[2:]]
        if isinstance(b, FreeHalfLine):
            out[0] = comp.g0[c[0], padded[2]]
        return out

    def check_initial(self, config: Configuration) -> list[str]:
        """Warnings for windows whose ages cannot be globally consistent."""
        try:
            age_offsets(self, config)
        except InconsistentAges as exc:
            return [f"{exc}; every cell can change only finitely often"]
        return []


def _eval_fields(base_eval, own, nbrs, n, message):
    """Vectorized composite transition.

    ``own`` and each entry of ``nbrs`` are ``(cur, prev, age)`` array
    triples; ``base_eval(sigmas)`` receives the list of inputs in
    neighborhood order with ``None`` standing for the own cell.
    """
    cur, prev, age = own
    blocked = np.zeros(np.broadcast(cur, *(f[2] for f in nbrs if f is not None)).shape, dtype=bool)
    sigmas = []
    for f in nbrs:
        if f is None:
            sigmas.append(cur)
            continue
        ncur, nprev, nage = f
        blocked = blocked | _lags(nage, age)
        shown = ncur if message is None else message[ncur]
        sigmas.append(np.where(nage == age, shown, nprev))
    newcur = base_eval(sigmas)
    newprev = cur if message is None else message[cur]
    stepped = encode_fields(newcur, newprev, (age + 1) % 3, n)
    return np.where(blocked, encode_fields(cur, prev, age, n), stepped)


def _check_message(base: RuleTable1D, message: np.ndarray):
    n = base.n_states
    if message.shape != (n,) or message.min() < 0 or message.max() >= n:
        raise ValueError("message must map every base state to a base state")
    m = message
    r, s, t = np.ix_(np.arange(n), np.arange(n), np.arange(n))
    if not np.array_equal(base.g[m[r], s, m[t]], base.g):
        raise ValueError("the base rule reads more than the message field of its neighbors")
    if not np.array_equal(base.g0[np.arange(n)[:, None], m[np.arange(n)][None, :]], base.g0):
        raise ValueError("the base free-edge rule reads more than the message field of its neighbor")


def marching_transform(base, message: Sequence[int] | None = None) -> MarchingRule:
    """Embed an arbitrary base automaton into a commutative one.

    ``message`` optionally maps each base state to the part of it that
    neighbors read; ``prev`` then stores only that part.  The base rule
    must not look beyond it.  By default ``prev`` holds the full state.
    """
    base.require_valid()
    n = base.n_states
    N = 3 * n * n
    msg = None if message is None else np.asarray(message, dtype=np.int64)
    if isinstance(base, RuleTable1D):
        if msg is not None:
            _check_message(base, msg)
        L, C, R = np.ix_(np.arange(N), np.arange(N), np.arange(N))
        own = decode_fields(C, n)
        g2 = _eval_fields(
            lambda s: base.g[s[0], s[1], s[2]],
            own,
            [decode_fields(L, n), None, decode_fields(R, n)],
            n,
            msg,
        )
        C0, R0 = np.ix_(np.arange(N), np.arange(N))
        g02 = _eval_fields(
            lambda s: base.g0[s[0], s[1]],
            decode_fields(C0, n),
            [None, decode_fields(R0, n)],
            n,
            msg,
        )
        g2 = np.broadcast_to(g2, (N, N, N))
        composite = RuleTable1D(N, g2, np.broadcast_to(g02, (N, N)), base.boundary, f"marching({base.name})")
        return MarchingRule(base, composite, msg)

    if isinstance(base, NetworkAutomaton):
        if msg is not None:
            raise ValueError("message fields are only supported for 1-D bases")
        tables = {}
        for x in base.sites:
            nb = base.neighbors[x]
            k = len(nb)
            grids = np.indices((N,) * k)
            p = nb.index(x)
            fields_ = [decode_fields(grids[j], n) for j in range(k)]
            nbrs = [None if j == p else fields_[j] for j in range(k)]
            table = base.local_rule[x]
            tables[x] = _eval_fields(lambda s, t=table: t[tuple(s)], fields_[p], nbrs, n, None)
        composite = NetworkAutomaton(N, base.sites, base.neighbors, tables)
        return MarchingRule(base, composite, None)

    raise TypeError(f"cannot transform {type(base).__name__}")


def lift_config(config: Configuration, n_base) -> Configuration:
    """``(x) -> (xi(x), 0, 0)``: prev and age start at zero.

    ``n_base`` is the base state count or the :class:`MarchingRule` itself.
    """
    n = n_base.n_base if isinstance(n_base, MarchingRule) else int(n_base)
    if config.width and config.cells.max() >= n:
        raise DomainError(f"base configuration has states outside 0..{n - 1}")
    return config.replace(encode_fields(config.cells, 0, 0, n))


def unpack(config: Configuration, n_base: int):
    """Per-cell ``(cur, prev, age)`` arrays."""
    return decode_fields(config.cells, n_base)


def project_cur(traj: Trajectory) -> np.ndarray:
    """The ``cur`` field of a synchronous composite trajectory as a (T+1, width) table."""
    rule = traj.automaton
    if not isinstance(rule, MarchingRule):
        raise TypeError("project_cur needs a trajectory of a MarchingRule")
    for t in range(traj.steps):
        if not np.array_equal(traj.frames[t + 1], rule.image(traj.frame(t))):
            raise ValueError(f"trajectory is not synchronous at step {t}; use reconstruct_1d")
    return decode_fields(traj.frames, rule.n_base)[0]


# --- age offsets ----------------------------------------------------------


class InconsistentAges(ValueError):
    pass


def _edges(rule: MarchingRule, config: Configuration):
    ids = rule.site_ids(config)
    if rule.is_1d:
        m = len(ids)
        edges = [(i, i + 1) for i in range(m - 1)]
        if isinstance(config.boundary, Cyclic) and m > 2:
            edges.append((m - 1, 0))
        return ids, edges
    base = rule.base
    return ids, [(base.index_of(None, x), base.index_of(None, y)) for x in base.sites for y in base.neighbors[x] if y != x]


def age_offsets(rule: MarchingRule, config: Configuration) -> np.ndarray:
    """Integer offsets ``delta`` with ``delta[j] - delta[i] = amod(age_j - age_i, 3)``.

    Offsets are zero at the first site of every connected component.
    Raises :class:`InconsistentAges` when some loop of neighbors carries a
    nonzero total age increment.
    """
    ids, edges = _edges(rule, config)
    age = decode_fields(config.cells, rule.n_base)[2]
    adj: dict[int, list[int]] = {i: [] for i in range(len(ids))}
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    delta = np.zeros(len(ids), dtype=np.int64)
    seen = np.zeros(len(ids), dtype=bool)
    for start in range(len(ids)):
        if seen[start]:
            continue
        seen[start] = True
        queue = deque([start])
        while queue:
            i = queue.popleft()
            for j in adj[i]:
                d = delta[i] + amod(int(age[j]) - int(age[i]), 3)
                if not seen[j]:
                    seen[j] = True
                    delta[j] = d
                    queue.append(j)
                elif delta[j] != d:
                    raise InconsistentAges(
                        f"ages around a loop through sites {ids[i]!r} and {ids[j]!r} do not sum to zero"
                    )
    return delta


# --- reconstruction -------------------------------------------------------


@dataclass
class ReconstructionResult:
    """Offsets, shifted ages and the reconstructed base trajectory.

    ``eta_bar`` maps ``(site, u)`` to a base state.  The ``zeta_cur`` and
    ``seed_prev`` fields keep the source values used to build it so a
    verification can tell a tampered entry from a genuine one.
    """

    site_ids: tuple
    delta: dict
    tau_bar: np.ndarray
    eta_bar: dict
    base: RuleTable1D
    boundary: object
    zeta_cur: dict = field(repr=False)
    seed_prev: dict = field(repr=False)

    def defined_levels(self, x) -> range:
        d = self.delta[x]
        return range(d - 1, d + len(self.zeta_cur[x]))

    def as_table(self, fill: int = -1) -> tuple[int, np.ndarray]:
        """Dense ``(u_min, table[u - u_min, i])`` view of ``eta_bar``."""
        us = [u for (_, u) in self.eta_bar]
        lo, hi = min(us), max(us)
        table = np.full((hi - lo + 1, len(self.site_ids)), fill, dtype=np.int64)
        pos = {x: i for i, x in enumerate(self.site_ids)}
        for (x, u), v in self.eta_bar.items():
            table[u - lo, pos[x]] = v
        return lo, table


def reconstruct_1d(traj: Trajectory) -> ReconstructionResult:
    """Recover a synchronous base trajectory from any composite trajectory."""
    rule = traj.automaton
    if not isinstance(rule, MarchingRule) or not rule.is_1d:
        raise TypeError("reconstruct_1d needs a trajectory of a 1-D MarchingRule")
    if rule.message is not None:
        raise ValueError("reconstruction needs full-state prev fields")
    n = rule.n_base
    delta = age_offsets(rule, traj.initial)  # raises on inconsistent cyclic windows
    ids = traj.site_ids
    tau_bar = traj.ages + delta[None, :]
    _, prev0, _ = decode_fields(traj.initial.cells, n)
    eta_bar, zeta_cur, seed_prev = {}, {}, {}
    for i, x in enumerate(ids):
        d = int(delta[i])
        zc = tuple(int(v) for v in decode_fields(np.array(dedupe(traj.frames[:, i]), dtype=np.int64), n)[0])
        zeta_cur[x] = zc
        seed_prev[x] = int(prev0[i])
        eta_bar[(x, d - 1)] = int(prev0[i])
        for k, v in enumerate(zc):
            eta_bar[(x, d + k)] = v
    return ReconstructionResult(
        tuple(ids),
        {x: int(delta[i]) for i, x in enumerate(ids)},
        tau_bar,
        eta_bar,
        rule.base,
        traj.initial.boundary,
        zeta_cur,
        seed_prev,
    )


@dataclass(frozen=True)
class ReconstructionFailure:
    kind: str  # "tampered", "undefined" or "relation"
    site: object
    u: int
    detail: str

    def __str__(self):
        return f"{self.kind} at (site={self.site!r}, u={self.u}): {self.detail}"


def verify_reconstruction(result: ReconstructionResult, base: RuleTable1D | None = None) -> ReconstructionFailure | None:
    """Check every defined point of ``eta_bar`` against the base rule.

    Each entry must match the trajectory data it was derived from, and for
    every effective update the new value must equal the base rule applied
    to the previous level of the site and its neighbors (``g0`` at site 0
    of a free half line, the frozen state beyond a window edge).
    """
    g = result.base if base is None else base
    eta = result.eta_bar
    ids = result.site_ids
    m = len(ids)

    expected_keys = set()
    for x in ids:
        d = result.delta[x]
        expected_keys.add((x, d - 1))
        if eta.get((x, d - 1)) != result.seed_prev[x]:
            return ReconstructionFailure("tampered", x, d - 1, f"seed is {eta.get((x, d - 1))}, prev field was {result.seed_prev[x]}")
        for k, v in enumerate(result.zeta_cur[x]):
            expected_keys.add((x, d + k))
            if eta.get((x, d + k)) != v:
                return ReconstructionFailure("tampered", x, d + k, f"entry is {eta.get((x, d + k))}, history says {v}")
    extra = set(eta) - expected_keys
    if extra:
        x, u = min(extra, key=lambda k: (ids.index(k[0]) if k[0] in ids else -1, k[1]))
        return ReconstructionFailure("tampered", x, u, "entry outside the defined levels")

    b = result.boundary
    q = _frozen_state(b)

    def at(j, u):
        if isinstance(b, Cyclic):
            j %= m
        elif not 0 <= j < m:
            return q
        return eta.get((ids[j], u))

    # a site ahead of the slowest one took its first steps before t=0, so its
    # initial cur must follow from the seeds; at the lowest level the seeds
    # are padding that nobody reads
    lowest = min(result.delta.values(), default=0)
    for i, x in enumerate(ids):
        d = result.delta[x]
        for k in range(0 if d > lowest else 1, len(result.zeta_cur[x])):
            u = d + k - 1
            c, r = at(i, u), at(i + 1, u)
            free_edge = i == 0 and isinstance(b, FreeHalfLine)
            l = None if free_edge else at(i - 1, u)
            missing = [name for name, v in (("left", l), ("center", c), ("right", r)) if v is None and not (name == "left" and free_edge)]
            if missing:
                if k == 0:
                    continue
                return ReconstructionFailure("undefined", x, u + 1, f"{', '.join(missing)} term undefined at level {u}")
            want = int(g.g0[c, r]) if free_edge else int(g.g[l, c, r])
            got = eta[(x, u + 1)]
            if got != want:
                args = f"g0({c}, {r})" if free_edge else f"g({l}, {c}, {r})"
                return ReconstructionFailure("relation", x, u + 1, f"value {got} but {args} = {want}")
    return None


# --- Poisson-clock benchmark ----------------------------------------------


def poisson_speedup(
    rule: MarchingRule,
    initial_base: Configuration,
    rounds: int = 20,
    p: float = 0.05,
    trials: int = 5,
    seed: int = 0,
    max_steps: int = 1_000_000,
) -> dict:
    """Measure the slowdown of the composite under near-Poisson update times.

    Each site is attempted with probability ``p`` per step, so ``p`` steps
    approximate one unit of continuous time with rate-1 clocks.  The factor
    is the mean continuous time until every site has made ``rounds``
    effective updates, divided by ``rounds`` (the synchronous cost).
    """
    initial = lift_config(initial_base, rule.n_base)
    times = []
    for trial in range(trials):
        masks = Bernoulli(p, seed + trial).masks(rule.site_ids(initial))
        cur, ages, steps = initial, np.zeros(initial.width, dtype=np.int64), 0
        while ages.min() < rounds and steps < max_steps:
            mask = next(masks)
            steps += 1
            if mask.any():
                img = rule.image(cur)
                moved = mask & (img != cur.cells)
                ages += moved
                cur = cur.replace(np.where(moved, img, cur.cells))
        times.append(steps * p)
    return {
        "rounds": rounds,
        "p": p,
        "trials": trials,
        "times": times,
        "factor": float(np.mean(times)) / rounds,
    }

