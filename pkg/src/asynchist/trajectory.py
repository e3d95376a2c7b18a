"""Asynchronous trajectories under update schedules.

A schedule proposes an *attempted* set of sites at each step.  Sites in
the attempted set that are free (whose update would change them) take
their new value simultaneously; the rest keep their state.  The realized
update set is therefore ``attempted & free``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

import numpy as np

from .core import Configuration, DomainError


# --- schedules ------------------------------------------------------------


@dataclass(frozen=True)
class Synchronous:
    def masks(self, site_ids: Sequence) -> Iterator[np.ndarray]:
        full = np.ones(len(site_ids), dtype=bool)
        while True:
            yield full


@dataclass(frozen=True)
class Bernoulli:
    """Each site is attempted independently with probability ``p``.

    Draws come from NumPy's PCG64 generator seeded with ``seed``, one
    ``random(width)`` call per step, so runs are reproducible.
    """

    p: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"probability must lie in [0, 1], got {self.p}")

    def masks(self, site_ids):
        rng = np.random.Generator(np.random.PCG64(self.seed))
        m = len(site_ids)
        while True:
            yield rng.random(m) < self.p


@dataclass(frozen=True)
class RoundRobin:
    """``k`` consecutive sites per step, cycling through the window."""

    k: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("round robin needs k >= 1")

    def masks(self, site_ids):
        m = len(site_ids)
        pos = 0
        while True:
            mask = np.zeros(m, dtype=bool)
            if m:
                mask[(pos + np.arange(min(self.k, m))) % m] = True
                pos = (pos + self.k) % m
            yield mask


ALL = "*"


@dataclass(frozen=True)
class Explicit:
    """A fixed list of attempted site sets; ``"*"`` stands for every site.

    Steps beyond the end of the list attempt nothing.
    """

    steps: tuple

    def __init__(self, steps):
        object.__setattr__(self, "steps", tuple(s if s == ALL else frozenset(s) for s in steps))

    def masks(self, site_ids):
        index = {x: i for i, x in enumerate(site_ids)}
        m = len(site_ids)
        for step in self.steps:
            mask = np.zeros(m, dtype=bool)
            if step == ALL:
                mask[:] = True
            else:
                for x in step:
                    if x not in index:
                        raise DomainError(f"scheduled site {x!r} is outside the window")
                    mask[index[x]] = True
            yield mask
        empty = np.zeros(m, dtype=bool)
        while True:
            yield empty


Schedule = Union[Synchronous, Bernoulli, RoundRobin, Explicit]


# --- trajectories ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Trajectory:
    """A space-time table ``frames[t, i]`` with its update bookkeeping.

    ``changed[t]`` marks the realized update set between ``t`` and ``t+1``;
    ``ages[t, i]`` is the effective age of site ``i`` at time ``t``.
    """

    automaton: object
    initial: Configuration
    frames: np.ndarray
    attempted: np.ndarray
    changed: np.ndarray
    ages: np.ndarray
    site_ids: tuple = field(default=())

    @property
    def steps(self) -> int:
        return self.frames.shape[0] - 1

    def frame(self, t: int) -> Configuration:
        return self.initial.replace(self.frames[t])

    def index_of(self, site) -> int:
        try:
            return self.site_ids.index(site)
        except ValueError:
            raise DomainError(f"{site!r} is not a site of this trajectory") from None

    @property
    def updates(self) -> list[frozenset]:
        """Realized update sets U(t) as site-id sets."""
        return [frozenset(self.site_ids[i] for i in np.flatnonzero(row)) for row in self.changed]

    @property
    def attempted_sets(self) -> list[frozenset]:
        return [frozenset(self.site_ids[i] for i in np.flatnonzero(row)) for row in self.attempted]

    def as_schedule(self) -> Explicit:
        """The realized update sets as an explicit schedule (replays bit-exactly)."""
        return Explicit(self.updates)

    def column(self, site) -> np.ndarray:
        return self.frames[:, self.index_of(site)]

    @classmethod
    def from_frames(cls, automaton, frames, origin: int = 0, boundary=None) -> "Trajectory":
        """Rebuild a trajectory from a raw space-time table.

        Every change must agree with the automaton; otherwise the table is
        not an asynchronous trajectory and ``ValueError`` is raised.
        """
        frames = np.array(frames, dtype=np.int64)
        if frames.ndim != 2 or frames.shape[0] < 1:
            raise ValueError("frames must be a non-empty (T+1, width) table")
        initial = Configuration(frames[0], origin, boundary)
        for t in range(frames.shape[0] - 1):
            img = automaton.image(initial.replace(frames[t]))
            moved = frames[t + 1] != frames[t]
            bad = np.flatnonzero(moved & (frames[t + 1] != img))
            if bad.size:
                raise ValueError(f"cell {bad[0]} at step {t} changes to a value the rule does not produce")
        changed = frames[1:] != frames[:-1]
        ages = np.zeros(frames.shape, dtype=np.int64)
        np.cumsum(changed, axis=0, out=ages[1:])
        return cls(automaton, initial, frames, changed.copy(), changed, ages, tuple(automaton.site_ids(initial)))


def free_mask(automaton, config: Configuration) -> np.ndarray:
    return automaton.image(config) != config.cells


def free_sites(automaton, config: Configuration) -> frozenset:
    """L(xi): the sites whose update would change their state."""
    ids = automaton.site_ids(config)
    return frozenset(ids[i] for i in np.flatnonzero(free_mask(automaton, config)))


def apply(automaton, config: Configuration, *sets) -> Configuration:
    """Update the given site sets one after the other, each simultaneously.

    ``apply(a, xi, E)`` is ``f(xi, E)``; ``apply(a, xi, E, F)`` is
    ``f(f(xi, E), F)``.
    """
    for E in sets:
        E = set(E)
        if not E:
            continue
        mask = np.zeros(config.width, dtype=bool)
        for x in E:
            mask[automaton.index_of(config, x)] = True
        img = automaton.image(config)
        config = config.replace(np.where(mask, img, config.cells))
    return config


def simulate(automaton, initial: Configuration, schedule: Schedule, steps: int) -> Trajectory:
    if steps < 0:
        raise ValueError("steps must be >= 0")
    check = getattr(automaton, "check_initial", None)
    if check is not None:
        for msg in check(initial):
            warnings.warn(msg, stacklevel=2)
    site_ids = automaton.site_ids(initial)
    m = initial.width
    frames = np.empty((steps + 1, m), dtype=np.int64)
    attempted = np.zeros((steps, m), dtype=bool)
    frames[0] = initial.cells
    masks = schedule.masks(site_ids)
    cur = initial
    for t in range(steps):
        mask = next(masks)
        attempted[t] = mask
        if mask.any():
            img = automaton.image(cur)
            nxt = np.where(mask, img, cur.cells)
            cur = cur.replace(nxt)
        frames[t + 1] = cur.cells
    changed = frames[1:] != frames[:-1]
    ages = np.zeros((steps + 1, m), dtype=np.int64)
    np.cumsum(changed, axis=0, out=ages[1:])
    return Trajectory(automaton, initial, frames, attempted, changed, ages, tuple(site_ids))


def run_final(automaton, initial: Configuration, schedule: Schedule, steps: int) -> tuple[Configuration, np.ndarray]:
    """Streaming variant of :func:`simulate`: keeps only the last frame and the ages."""
    masks = schedule.masks(automaton.site_ids(initial))
    cur = initial
    ages = np.zeros(initial.width, dtype=np.int64)
    for _ in range(steps):
        mask = next(masks)
        if mask.any():
            img = automaton.image(cur)
            moved = mask & (img != cur.cells)
            ages += moved
            cur = cur.replace(np.where(moved, img, cur.cells))
    return cur, ages


def effective_age(traj: Trajectory, x, t: int) -> int:
    if not 0 <= t <= traj.steps:
        raise DomainError(f"time {t} outside 0..{traj.steps}")
    return int(traj.ages[t, traj.index_of(x)])
