"""Executable reduction gadgets.

``build_gprime`` adds a sweeping state ``n`` that clears the half line and
lets the base rule run in its wake as if started from all zeros.
``build_undec_rule`` adds walls ``n, n+1, n+2`` so that the history of the
cell left of a wall depends on whether the base rule ever writes 1 next to
it, and ``divergence_demo`` exhibits the two orders that expose this.

In both constructions the cases are tried in the listed order and the first
match wins.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .commutativity import check_local_commutativity_1d
from .core import Background, Configuration, FreeHalfLine, RuleTable1D
from .history import HistoryVerdict, compare_histories, extract_history
from .trajectory import Bernoulli, Explicit, Synchronous, Trajectory, simulate


class GadgetError(ValueError):
    pass


def build_gprime(g: RuleTable1D) -> RuleTable1D:
    """The sweep extension of a free-boundary rule over ``n`` states.

    Requires ``g(0,0,0) = 0`` and ``g0(1,s) = 1`` for every ``s``.
    """
    g.require_valid()
    n = g.n_states
    if g.g[0, 0, 0] != 0:
        raise GadgetError(f"g(0,0,0) must be 0, got {g.g[0, 0, 0]}")
    for s in range(n):
        if n > 1 and g.g0[1, s] != 1:
            raise GadgetError(f"g0(1,{s}) must be 1, got {g.g0[1, s]}")
    N = n + 1
    G0 = np.empty((N, N), dtype=np.int64)
    for r in range(N):
        for s in range(N):
            if r < n and s < n:
                G0[r, s] = g.g0[r, s]
            elif r == n:
                G0[r, s] = g.g0[0, 0]
            elif s == n:  # r < n
                G0[r, s] = g.g0[r, 0]
            else:
                G0[r, s] = r
    G = np.empty((N, N, N), dtype=np.int64)
    for r in range(N):
        for s in range(N):
            for t in range(N):
                if r < n and s < n and t < n:
                    G[r, s, t] = g.g[r, s, t]
                elif r == n:
                    G[r, s, t] = n
                elif s == n:  # r < n
                    G[r, s, t] = g.g[r, 0, 0]
                elif t == n:  # r, s < n
                    G[r, s, t] = g.g[r, s, 0]
                else:
                    G[r, s, t] = s
    b = g.boundary if isinstance(g.boundary, FreeHalfLine) else FreeHalfLine()
    return RuleTable1D(N, G, G0, b, f"gprime({g.name})")


def build_undec_rule(g: RuleTable1D) -> RuleTable1D:
    """The wall rule over ``n + 3`` states built from a commutative base.

    Cases, first match wins (``n`` is the base state count):

    1. ``(s, n, 0) -> n+1``
    2. ``(s, n, 1) -> n+2``
    3. ``(r, s, t) -> g0(s, t)`` when ``r >= n`` and ``s, t < n``
    4. ``(r, s, t) -> g(r, s, t)`` when ``r, s, t < n``
    5. ``(r, s, t) -> g(r, s, 0)`` when ``r, s < n`` and ``t >= n``
    6. ``(r, s, t) -> s`` otherwise
    """
    g.require_valid()
    witness = check_local_commutativity_1d(g)
    if witness is not None:
        raise GadgetError(f"base rule is not commutative: tuple {witness.tuple}, sites {witness.sites}")
    n = g.n_states
    N = n + 3
    G = np.empty((N, N, N), dtype=np.int64)
    for r in range(N):
        for s in range(N):
            for t in range(N):
                G[r, s, t] = _undec_case(g, n, r, s, t)
    # the rule lives on the whole line; g0 is never consulted
    G0 = np.broadcast_to(np.arange(N)[:, None], (N, N))
    return RuleTable1D(N, G, G0, Background(0), f"undec({g.name})")


def undec_case_index(n: int, r: int, s: int, t: int) -> int:
    """Which of the six cases of :func:`build_undec_rule` fires (1-based)."""
    if s == n and t == 0:
        return 1
    if s == n and t == 1:
        return 2
    if r >= n and s < n and t < n:
        return 3
    if r < n and s < n and t < n:
        return 4
    if r < n and s < n and t >= n:
        return 5
    return 6


def _undec_case(g: RuleTable1D, n: int, r: int, s: int, t: int) -> int:
    case = undec_case_index(n, r, s, t)
    if case == 1:
        return n + 1
    if case == 2:
        return n + 2
    if case == 3:
        return int(g.g0[s, t])
    if case == 4:
        return int(g.g[r, s, t])
    if case == 5:
        return int(g.g[r, s, 0])
    return s


@dataclass(frozen=True)
class Divergence:
    trajectory_a: Trajectory
    trajectory_b: Trajectory
    schedule_a: Explicit
    schedule_b: Explicit
    site: int
    history_a: tuple
    history_b: tuple
    verdict: HistoryVerdict


def divergence_demo(f: RuleTable1D, n_base: int, horizon: int = 50, width: int | None = None) -> Divergence:
    """Two update orders that give cell -1 different histories.

    The window spans sites ``-1 .. width-2`` with a single wall ``n`` at
    site -1.  Order A fires the wall first; order B lets the base rule run
    synchronously on the sites right of the wall until site 0 holds 1,
    then fires the wall.
    """
    n = n_base
    if f.n_states != n + 3:
        raise GadgetError(f"expected a rule over {n + 3} states, got {f.n_states}")
    width = horizon + 3 if width is None else width
    cells = [n] + [0] * (width - 1)
    initial = Configuration(cells, origin=-1, boundary=Background(0))
    right = set(range(0, width - 1))

    # find the first time the base run puts 1 at site 0
    cur, reached = initial, None
    for t in range(horizon):
        if cur[0] == 1:
            reached = t
            break
        cur = cur.replace(np.where(np.arange(width) > 0, f.image(cur), cur.cells))
    else:
        if cur[0] == 1:
            reached = horizon
    if reached is None:
        raise GadgetError(f"site 0 never reaches 1 within {horizon} steps")

    sched_a = Explicit([{-1}] + [right] * reached)
    sched_b = Explicit([right] * reached + [{-1}])
    steps = reached + 1
    ta = simulate(f, initial, sched_a, steps)
    tb = simulate(f, initial, sched_b, steps)
    verdict = compare_histories([ta, tb])
    return Divergence(
        ta,
        tb,
        sched_a,
        sched_b,
        -1,
        extract_history(ta, -1).values,
        extract_history(tb, -1).values,
        verdict,
    )


def search_divergence(f: RuleTable1D, initial: Configuration, steps: int, trials: int = 50, p: float = 0.5, seed: int = 0) -> HistoryVerdict:
    """Bounded random search for schedule-dependent histories."""
    schedules = [Synchronous()] + [Bernoulli(p, seed + k) for k in range(trials)]
    return compare_histories([simulate(f, initial, s, steps) for s in schedules])


def standard_base() -> RuleTable1D:
    """Two-state free-boundary base: ``g0(0,0)=1``, ``g0(1,s)=1``, identity elsewhere."""
    g = np.broadcast_to(np.arange(2)[None, :, None], (2, 2, 2)).copy()
    g0 = np.array([[1, 0], [1, 1]])
    return RuleTable1D(2, g, g0, FreeHalfLine(), "flip-edge")
