"""Exact resolution of the annihilation dynamics on a finite window.

``resolve`` runs the event-driven engine from :mod:`ballistic.kernels` and
wraps its arrays in a :class:`ResolutionResult`. In the discrete model every
time and position is a multiple of 1/2 and is exposed as a ``Fraction``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from . import kernels
from .model import (
    Configuration,
    ContractError,
    EndpointSemantics,
    InputError,
    ModelParams,
    RngStream,
    Velocity,
    extend,
    sample,
)


class EventKind(enum.IntEnum):
    PAIRWISE = kernels.PAIRWISE
    TRIPLE = kernels.TRIPLE
    ABSORB_LEFT = kernels.ABSORB_LEFT
    ABSORB_RIGHT = kernels.ABSORB_RIGHT


class FateKind(enum.IntEnum):
    SURVIVOR = kernels.SURVIVOR
    ANNIHILATED = kernels.ANNIHILATED
    ABSORBED = kernels.ABSORBED


class FirstFate(str, enum.Enum):
    """How a right-moving first particle ends."""

    STAY = "stay"          # single collision with a stationary particle
    LEFT = "left"          # single collision with a left-mover
    TRIPLE = "triple"
    ABSORBED = "absorbed"  # reached a true (non-frozen) right barrier
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class CollisionEvent:
    time: float | Fraction
    position: float | Fraction
    kind: EventKind
    participants: tuple[int, ...]  # 1-based particle ids, left to right

    @property
    def half_steps(self) -> int:
        """``2t`` for discrete events."""
        return int(2 * self.time)


@dataclass(frozen=True)
class Fate:
    kind: FateKind
    event: int | None


@dataclass(frozen=True)
class ResolutionResult:
    """Chronological events plus a fate for every particle.

    ``times``/``positions``/``kinds``/``ids`` are parallel arrays over events
    (``ids`` holds 1-based participant ids, zero-padded to width 3);
    ``fate_kind``/``fate_event`` are indexed by particle (id - 1).
    """

    config: Configuration
    times: np.ndarray
    positions: np.ndarray
    kinds: np.ndarray
    ids: np.ndarray
    fate_kind: np.ndarray
    fate_event: np.ndarray

    @property
    def window_length(self) -> float:
        return self.config.window_length

    @property
    def discrete(self) -> bool:
        return self.config.params.discrete

    def __len__(self) -> int:
        return int(self.times.size)

    def event(self, i: int) -> CollisionEvent:
        t, y = self.times[i], self.positions[i]
        if self.discrete:
            t, y = Fraction(float(t)), Fraction(float(y))
        else:
            t, y = float(t), float(y)
        row = self.ids[i]
        return CollisionEvent(t, y, EventKind(int(self.kinds[i])), tuple(int(k) for k in row if k))

    def __iter__(self) -> Iterator[CollisionEvent]:
        return (self.event(i) for i in range(len(self)))

    @property
    def events(self) -> list[CollisionEvent]:
        return list(self)

    def fate(self, pid: int) -> Fate:
        k = FateKind(int(self.fate_kind[pid - 1]))
        e = int(self.fate_event[pid - 1])
        return Fate(k, None if e < 0 else e)

    @property
    def time2(self) -> np.ndarray:
        """Event times doubled, as exact integers (discrete model)."""
        if not self.discrete:
            raise ContractError("time2 is defined for the discrete model only")
        return (2.0 * self.times).astype(np.int64)

    @property
    def survivors(self) -> np.ndarray:
        return np.flatnonzero(self.fate_kind == FateKind.SURVIVOR) + 1


def resolve(config: Configuration, *, corrupt: bool = False) -> ResolutionResult:
    """Run the dynamics of ``config`` to completion.

    ``corrupt`` is a negative-control hook: triples are mis-resolved as a
    stationary/left-mover pair while the right-mover carries on.
    """
    x = config.positions
    if x.size > 1 and not np.all(np.diff(x) > 0):
        raise InputError("positions must be strictly increasing")
    closed_l = config.left_end is EndpointSemantics.CLOSED
    closed_r = config.right_end is EndpointSemantics.CLOSED
    out = kernels.resolve_heap(x, config.velocities, float(config.left_pos), closed_l,
                               float(config.window_length), closed_r, bool(corrupt))
    return ResolutionResult(config, *out)


def hit_left_barrier(result: ResolutionResult) -> tuple[int, float | Fraction] | None:
    """First particle absorbed at the left endpoint, with its arrival time."""
    idx = np.flatnonzero(result.kinds == EventKind.ABSORB_LEFT)
    if idx.size == 0:
        return None
    ev = result.event(int(idx[0]))
    return ev.participants[0], ev.time


def certified(event: CollisionEvent, window_length: float, left_end: float | None = None) -> bool:
    """True when no particle beyond the window can alter ``event``.

    Outside influence enters from ``window_length`` moving left at unit
    speed (and from ``left_end`` moving right, for two-sided windows).
    """
    if not event.position + event.time < window_length:
        return False
    if left_end is not None and not event.time < event.position - left_end:
        return False
    return True


def first_particle_fate(result: ResolutionResult) -> FirstFate:
    cfg = result.config
    if len(cfg) == 0 or cfg.velocities[0] != Velocity.RIGHT:
        raise ContractError("first particle must exist and move right")
    e = int(result.fate_event[0])
    frozen = cfg.right_end is EndpointSemantics.FROZEN
    if e < 0:
        return FirstFate.UNDECIDED
    ev = result.event(e)
    if ev.kind == EventKind.ABSORB_RIGHT:
        return FirstFate.UNDECIDED if frozen else FirstFate.ABSORBED
    if frozen and not certified(ev, cfg.window_length):
        return FirstFate.UNDECIDED
    if ev.kind == EventKind.TRIPLE:
        return FirstFate.TRIPLE
    partner = ev.participants[1]
    if cfg.velocities[partner - 1] == Velocity.STAY:
        return FirstFate.STAY
    return FirstFate.LEFT


def count_qualifying(config: Configuration, max_reveals: int | None = None) -> tuple[int, bool]:
    """Qualifying indices of a configuration, revealing one particle at a time.

    Index ``i`` qualifies when, with everything after particle ``i`` frozen,
    the right-moving first particle is annihilated by the stationary particle
    ``i`` in a single collision. Each prefix is resolved from scratch. The
    count is final once the first particle is killed by a left-mover (nothing
    to its right can then reach it) or once its collision with a stationary
    particle is certified against the next unrevealed position.
    """
    n = len(config) if max_reveals is None else min(len(config), max_reveals)
    if len(config) == 0 or config.velocities[0] != Velocity.RIGHT:
        return 0, True
    count = 0
    for i in range(1, n + 1):
        res = resolve(config.prefix(i))
        e = int(res.fate_event[0])
        if e < 0:
            continue
        ev = res.event(e)
        if ev.kind == EventKind.TRIPLE:
            return count, True
        if ev.kind != EventKind.PAIRWISE:
            continue
        partner = ev.participants[1]
        if config.velocities[partner - 1] == Velocity.LEFT:
            return count, True
        if partner == i:
            count += 1
        if certified(ev, res.window_length):
            return count, True
    return count, False


def qualifying_indices(params: ModelParams, rng: RngStream, max_reveals: int) -> tuple[int, bool]:
    """Sample a half-line configuration and count its qualifying indices.

    Particles are drawn in doubling windows until the count is decided or
    ``max_reveals`` particles have been revealed.
    """
    if max_reveals < 1:
        raise ContractError("max_reveals must be at least 1")
    length = 64.0
    config = sample(params, length, rng)
    while True:
        count, decided = count_qualifying(config, max_reveals)
        if decided or len(config) >= max_reveals:
            return count, decided
        length *= 2
        new_end = length + 1 if params.discrete else length
        config = extend(config, new_end, rng)
