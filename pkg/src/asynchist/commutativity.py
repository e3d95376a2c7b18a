"""Commutativity and monotonicity checks with replayable witnesses."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .core import (
    Background,
    Configuration,
    FreeHalfLine,
    NetworkAutomaton,
    RuleTable1D,
    iter_configurations,
)
from .trajectory import Explicit, Trajectory, apply, free_mask

log = logging.getLogger(__name__)

LOCAL_COMMUTATIVITY = "local-commutativity"
MONOTONICITY = "monotonicity"

DEFAULT_BUDGET = 2**20


class BudgetExceeded(ValueError):
    pass


@dataclass(frozen=True)
class ViolationWitness:
    """A concrete failure of commutativity or monotonicity.

    For commutativity, ``tuple`` is the window content, ``sites`` the
    ordered pair ``(first, second)`` that was updated one after the other,
    and ``details`` holds the sequential and the simultaneous result.  For
    monotonicity, ``sites`` is ``(lost_site,)``, ``time`` the step, and
    ``details`` the free sets before and after.
    """

    kind: str
    tuple: tuple
    sites: tuple
    details: tuple
    origin: int = 0
    boundary: object = field(default=Background(0))
    time: int | None = None

    def window(self) -> Configuration:
        return Configuration(self.tuple, self.origin, self.boundary)

    def format(self) -> str:
        """Stable tab-separated block, one key per line."""
        lines = [
            "WITNESS",
            f"kind\t{self.kind}",
            f"tuple\t{' '.join(map(str, self.tuple))}",
            f"sites\t{' '.join(map(str, self.sites))}",
        ]
        if self.time is not None:
            lines.append(f"time\t{self.time}")
        if self.kind == LOCAL_COMMUTATIVITY:
            lines.append(f"sequential\t{' '.join(map(str, self.details[0]))}")
            lines.append(f"simultaneous\t{' '.join(map(str, self.details[1]))}")
        else:
            lines.append(f"free_before_not_updated\t{' '.join(map(str, self.details[0]))}")
            lines.append(f"free_after\t{' '.join(map(str, self.details[1]))}")
        return "\n".join(lines)


def check_local_commutativity_1d(rule: RuleTable1D) -> ViolationWitness | None:
    """Exhaustive local commutativity test of a radius-1 rule.

    For adjacent free sites ``x = 1, y = 2`` in a window ``r0 r1 r2 r3``
    both sequential orders must agree with the simultaneous update.
    Non-adjacent sites never read each other's cell and commute trivially.
    Under a free left boundary the pair (0, 1) is checked too, with ``g0``
    at site 0.  Returns ``None`` on success, otherwise the lexicographically
    first violation (interior tuples before boundary ones).
    """
    rule.require_valid()
    n = rule.n_states
    G, G0 = rule.g, rule.g0
    r0, r1, r2, r3 = np.ix_(*(np.arange(n),) * 4)
    a = G[r0, r1, r2]  # new value of x
    b = G[r1, r2, r3]  # new value of y
    premise = (a != r1) & (b != r2)
    x_first = G[a, r2, r3] == b
    y_first = G[r0, r1, b] == a
    bad = premise & ~(x_first & y_first)
    hits = np.argwhere(bad)
    if hits.size:
        t = tuple(int(v) for v in hits[0])
        av, bv = int(G[t[0], t[1], t[2]]), int(G[t[1], t[2], t[3]])
        simultaneous = (t[0], av, bv, t[3])
        if G[av, t[2], t[3]] != bv:
            sites, seq = (1, 2), (t[0], av, int(G[av, t[2], t[3]]), t[3])
        else:
            sites, seq = (2, 1), (t[0], int(G[t[0], t[1], bv]), bv, t[3])
        return ViolationWitness(LOCAL_COMMUTATIVITY, t, sites, (seq, simultaneous), 0, Background(0))

    if not isinstance(rule.boundary, FreeHalfLine):
        return None
    c0, c1, c2 = np.ix_(*(np.arange(n),) * 3)
    a = G0[c0, c1]
    b = G[c0, c1, c2]
    premise = (a != c0) & (b != c1)
    x_first = G[a, c1, c2] == b
    y_first = G0[c0, b] == a
    hits = np.argwhere(premise & ~(x_first & y_first))
    if not hits.size:
        return None
    t = tuple(int(v) for v in hits[0])
    av, bv = int(G0[t[0], t[1]]), int(G[t])
    simultaneous = (av, bv, t[2])
    if G[av, t[1], t[2]] != bv:
        sites, seq = (0, 1), (av, int(G[av, t[1], t[2]]), t[2])
    else:
        sites, seq = (1, 0), (int(G0[t[0], bv]), bv, t[2])
    return ViolationWitness(LOCAL_COMMUTATIVITY, t, sites, (seq, simultaneous), 0, rule.boundary)


def check_pairwise_network(
    automaton: NetworkAutomaton,
    mode: str = "exhaustive",
    *,
    count: int = 10_000,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
) -> ViolationWitness | None:
    """Check ``f(xi,{x},{y}) == f(xi,{x,y})`` for every ordered pair of free sites.

    ``mode="exhaustive"`` enumerates every configuration in lexicographic
    order, so the first witness found is the smallest one.
    ``mode="sampled"`` draws ``count`` uniform configurations with ``seed``.
    """
    automaton.require_valid()
    n, m = automaton.n_states, len(automaton.sites)
    total = n**m
    if mode == "exhaustive":
        if total > budget:
            raise BudgetExceeded(
                f"{n}^{m} = {total} configurations exceed the budget of {budget}; use sampled mode"
            )
        configs = iter_configurations(n, m)
    elif mode == "sampled":
        rng = np.random.Generator(np.random.PCG64(seed))
        configs = (tuple(row) for row in rng.integers(0, n, (count, m)))
        log.info("sampling %d of %d configurations (%.3g%% coverage at most)", count, total, 100 * min(1, count / total))
    else:
        raise ValueError(f"unknown mode {mode!r}")

    local = automaton.local
    sites = automaton.sites
    for cells in configs:
        xi = np.array(cells, dtype=np.int64)
        img = np.array([local(xi, i) for i in range(m)], dtype=np.int64)
        free = np.flatnonzero(img != xi)
        for x in free:
            after_x = xi.copy()
            after_x[x] = img[x]
            for y in free:
                if y == x:
                    continue
                seq = after_x.copy()
                seq[y] = local(after_x, y)
                sim = after_x.copy()
                sim[y] = img[y]
                if not np.array_equal(seq, sim):
                    return ViolationWitness(
                        LOCAL_COMMUTATIVITY,
                        tuple(int(v) for v in xi),
                        (sites[x], sites[y]),
                        (tuple(int(v) for v in seq), tuple(int(v) for v in sim)),
                        0,
                        None,
                    )
    return None


def check_pair(automaton, config: Configuration, x, y) -> ViolationWitness | None:
    """Compare ``f(xi,{x},{y})`` with ``f(xi,{x,y})`` for one configuration."""
    seq = apply(automaton, config, {x}, {y})
    sim = apply(automaton, config, {x, y})
    if seq == sim:
        return None
    return ViolationWitness(
        LOCAL_COMMUTATIVITY,
        tuple(int(v) for v in config.cells),
        (x, y),
        (tuple(int(v) for v in seq.cells), tuple(int(v) for v in sim.cells)),
        config.origin,
        config.boundary,
    )


def check_monotonicity(automaton, trajectories) -> ViolationWitness | None:
    """Check ``L(t) - U(t) <= L(t+1)`` at every step of every trajectory."""
    if isinstance(trajectories, Trajectory):
        trajectories = [trajectories]
    for traj in trajectories:
        ids = traj.site_ids
        free_prev = free_mask(automaton, traj.frame(0))
        for t in range(traj.steps):
            free_next = free_mask(automaton, traj.frame(t + 1))
            lost = free_prev & ~traj.changed[t] & ~free_next
            if lost.any():
                i = int(np.flatnonzero(lost)[0])
                kept = free_prev & ~traj.changed[t]
                return ViolationWitness(
                    MONOTONICITY,
                    tuple(int(v) for v in traj.frames[t]),
                    (ids[i],),
                    (
                        tuple(ids[j] for j in np.flatnonzero(kept)),
                        tuple(ids[j] for j in np.flatnonzero(free_next)),
                    ),
                    traj.initial.origin,
                    traj.initial.boundary,
                    time=t,
                )
            free_prev = free_next
    return None


def witness_to_schedules(witness: ViolationWitness) -> tuple[Configuration, Explicit, Explicit]:
    """Two explicit schedules that separate at t=2 on the witness window.

    Schedule A updates the pair one site at a time in the failing order;
    schedule B updates both at once and then idles.
    """
    if witness.kind != LOCAL_COMMUTATIVITY:
        raise ValueError("only commutativity witnesses translate to schedules")
    first, second = witness.sites
    window = witness.window()
    return window, Explicit([{first}, {second}]), Explicit([{first, second}, set()])


def certify(rule: RuleTable1D) -> bool:
    """True when the rule is locally commutative (hence commutative)."""
    return check_local_commutativity_1d(rule) is None
