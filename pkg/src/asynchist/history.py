"""Per-site histories, invariant-history tests and domination."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .core import Configuration
from .trajectory import Synchronous, Trajectory, simulate


@dataclass(frozen=True)
class SiteHistory:
    site: object
    values: tuple

    def __len__(self):
        return len(self.values)

    def __getitem__(self, k):
        return self.values[k]


def dedupe(seq) -> tuple:
    """Drop every element equal to its predecessor."""
    seq = np.asarray(seq)
    if seq.size == 0:
        return ()
    keep = np.concatenate(([True], seq[1:] != seq[:-1]))
    return tuple(int(v) for v in seq[keep])


def extract_history(traj: Trajectory, x) -> SiteHistory:
    return SiteHistory(x, dedupe(traj.column(x)))


def histories(traj: Trajectory) -> dict:
    return {x: SiteHistory(x, dedupe(traj.frames[:, i])) for i, x in enumerate(traj.site_ids)}


@dataclass(frozen=True)
class HistoryWitness:
    site: object
    runs: tuple  # indices of the two disagreeing trajectories/schedules
    prefixes: tuple  # the two histories, truncated to their common length
    position: int  # first index where they differ


@dataclass(frozen=True)
class HistoryVerdict:
    consistent: bool
    witness: HistoryWitness | None = None
    trajectories: tuple = ()

    def __bool__(self):
        return self.consistent


def _first_difference(a: tuple, b: tuple) -> int | None:
    for k, (u, v) in enumerate(zip(a, b)):
        if u != v:
            return k
    return None


def compare_histories(trajectories: Sequence[Trajectory]) -> HistoryVerdict:
    """Pairwise common-prefix comparison of every site's history."""
    trajectories = tuple(trajectories)
    if len(trajectories) < 2:
        return HistoryVerdict(True, None, trajectories)
    sites = trajectories[0].site_ids
    for tr in trajectories[1:]:
        if tr.site_ids != sites or tr.initial != trajectories[0].initial:
            raise ValueError("trajectories must share the window and the initial configuration")
    hist = [histories(tr) for tr in trajectories]
    for x in sites:
        for i, j in combinations(range(len(trajectories)), 2):
            a, b = hist[i][x].values, hist[j][x].values
            k = _first_difference(a, b)
            if k is not None:
                m = min(len(a), len(b))
                return HistoryVerdict(False, HistoryWitness(x, (i, j), (a[:m], b[:m]), k), trajectories)
    return HistoryVerdict(True, None, trajectories)


def invariant_history_test(automaton, initial: Configuration, schedules, steps: int) -> HistoryVerdict:
    """Bounded-horizon evidence for invariant histories on ``initial``.

    Every schedule is simulated for ``steps`` steps; histories may have
    different lengths and are compared on their common prefix.  Fewer than
    two schedules, or ``steps == 0``, is vacuously consistent.
    """
    trajs = [simulate(automaton, initial, s, steps) for s in schedules]
    return compare_histories(trajs)


@dataclass(frozen=True)
class DominationFailure:
    condition: str  # "a" (ages) or "b" (states at equal ages)
    site: object
    times: tuple  # (t,) for "a", (t0, t1) for "b"
    values: tuple

    def __str__(self):
        if self.condition == "a":
            return f"age of {self.site!r} at t={self.times[0]}: {self.values[0]} > {self.values[1]}"
        return (
            f"site {self.site!r}: equal age at t0={self.times[0]}, t1={self.times[1]} "
            f"but states {self.values[0]} != {self.values[1]}"
        )


def check_domination(traj0: Trajectory, traj1: Trajectory, horizon: int) -> DominationFailure | None:
    """Does ``traj1`` dominate ``traj0`` until ``horizon``?

    Condition (b) is checked level by level: a site's state is constant
    while its age is, so comparing the state at the first time each age is
    reached covers every pair ``t0, t1 <= horizon``.
    """
    if traj0.initial != traj1.initial:
        raise ValueError("domination needs a common initial configuration")
    u = min(horizon, traj0.steps, traj1.steps)
    a0, a1 = traj0.ages[: u + 1], traj1.ages[: u + 1]
    over = a0 > a1
    if over.any():
        t, i = (int(v) for v in np.argwhere(over)[0])
        return DominationFailure("a", traj0.site_ids[i], (t,), (int(a0[t, i]), int(a1[t, i])))
    for i, x in enumerate(traj0.site_ids):
        first0 = _first_time_per_age(a0[:, i])
        first1 = _first_time_per_age(a1[:, i])
        for k in range(min(len(first0), len(first1))):
            s0, s1 = traj0.frames[first0[k], i], traj1.frames[first1[k], i]
            if s0 != s1:
                return DominationFailure("b", x, (int(first0[k]), int(first1[k])), (int(s0), int(s1)))
    return None


def _first_time_per_age(ages: np.ndarray) -> np.ndarray:
    # ages is nondecreasing in steps of 0 or 1, starting at 0
    return np.searchsorted(ages, np.arange(ages[-1] + 1), side="left")


def zeta_from_synchronous(automaton, initial: Configuration, steps: int) -> dict:
    """Canonical histories read off the synchronous trajectory.

    Entry ``k`` of a site's history is its state at the first time its
    effective age reaches ``k``.
    """
    traj = simulate(automaton, initial, Synchronous(), steps)
    out = {}
    for i, x in enumerate(traj.site_ids):
        first = _first_time_per_age(traj.ages[:, i])
        out[x] = SiteHistory(x, tuple(int(traj.frames[t, i]) for t in first))
    return out
