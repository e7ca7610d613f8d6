"""Reversal map and exhaustive exact enumeration of small discrete configurations.

A right-moving first particle has *qualifying index* ``i`` when, with every
particle after ``i`` frozen, it is annihilated by the stationary particle
``i`` in a single collision. Reversing the stretch ``[x_1, x_i]`` (positions
mirrored, velocities flipped) turns such a configuration into one where a
stationary first particle is shot down by the left-mover from position
``x_i``. Enumerating all ``3^n`` velocity sequences checks that this is a
weight-preserving bijection between pairs ``(omega, k)`` with at least ``k``
qualifying indices and configurations whose stationary first particle is
killed from within the first ``n`` particles.

All probabilities are exact ``Fraction`` values.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .model import Configuration, ContractError, ParameterError, ResourceError

ENUMERATION_LIMIT = 12


@dataclass(frozen=True)
class SmallConfig:
    """Discrete configuration with particles at 1..n."""

    velocities: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "velocities", tuple(int(v) for v in self.velocities))
        if any(v not in (-1, 0, 1) for v in self.velocities):
            raise ParameterError("velocities must be -1, 0 or 1")

    @property
    def n(self) -> int:
        return len(self.velocities)

    def __str__(self):
        return "".join("LSR"[v + 1] for v in self.velocities)

    @classmethod
    def parse(cls, text: str) -> "SmallConfig":
        return cls(tuple("LSR".index(c) - 1 for c in text.upper() if not c.isspace()))


@dataclass(frozen=True)
class ExactProbability:
    value: Fraction
    description: str = ""

    def __post_init__(self):
        if not 0 <= self.value <= 1:
            raise ContractError(f"probability out of range: {self.value}")

    def to_dict(self) -> dict:
        v = self.value
        return {"event": self.description, "value": f"{v.numerator}/{v.denominator}", "decimal": float(v)}


def _exact_p(p) -> Fraction:
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise ParameterError(f"p must lie in [0, 1], got {p}")
    return p


def _check_n(n: int) -> None:
    if n < 0:
        raise ParameterError("n must be nonnegative")
    if n > ENUMERATION_LIMIT:
        raise ResourceError(f"exhaustive enumeration is limited to n <= {ENUMERATION_LIMIT}")


def weight(vel: Sequence[int], p) -> Fraction:
    p = _exact_p(p)
    s = sum(1 for v in vel if v == 0)
    return p**s * ((1 - p) / 2) ** (len(vel) - s)


def _resolve_prefix(vel: Sequence[int], corrupt: bool):
    """Resolve particles at 1..len(vel) with a barrier at 0 and the rest frozen."""
    n = len(vel)
    x = np.arange(1, n + 1, dtype=np.float64)
    v = np.asarray(vel, dtype=np.int8)
    return kernels.resolve_heap(x, v, 0.0, False, float(n + 1), False, corrupt)


def _first_killer(vel: Sequence[int], corrupt: bool) -> int:
    """Id of the particle annihilating particle 1 in a single collision, else 0."""
    _, _, kinds, ids, _, fate_event = _resolve_prefix(vel, corrupt)
    e = fate_event[0]
    if e < 0 or kinds[e] != kernels.PAIRWISE:
        return 0
    return int(ids[e, 1])


def _qualifying(vel: Sequence[int], corrupt: bool) -> tuple[int, ...]:
    if not vel or vel[0] != 1:
        return ()
    return tuple(i for i in range(2, len(vel) + 1)
                 if vel[i - 1] == 0 and _first_killer(vel[:i], corrupt) == i)


def qualifying_indices(omega: SmallConfig | Configuration, *, corrupt: bool = False) -> tuple[int, ...]:
    """1-based qualifying indices among the revealed particles."""
    if isinstance(omega, SmallConfig):
        return _qualifying(omega.velocities, corrupt)
    if omega.velocities.size == 0 or omega.velocities[0] != 1:
        return ()
    from .dynamics import resolve

    out = []
    for i in range(2, len(omega) + 1):
        if omega.velocities[i - 1] != 0:
            continue
        res = resolve(omega.prefix(i), corrupt=corrupt)
        e = int(res.fate_event[0])
        if e >= 0 and res.kinds[e] == kernels.PAIRWISE and res.ids[e, 1] == i:
            out.append(i)
    return tuple(out)


def _reverse(vel: Sequence[int], i: int) -> tuple[int, ...]:
    return tuple(-v for v in reversed(vel[:i])) + tuple(vel[i:])


def rev(omega: SmallConfig | Configuration, k: int, *, corrupt: bool = False):
    """Reverse the stretch up to the ``k``-th qualifying index."""
    idx = qualifying_indices(omega, corrupt=corrupt)
    if not 1 <= k <= len(idx):
        raise ContractError(f"configuration has {len(idx)} qualifying indices, asked for k={k}")
    i = idx[k - 1]
    if isinstance(omega, SmallConfig):
        return SmallConfig(_reverse(omega.velocities, i))
    x = omega.positions.copy()
    v = omega.velocities.copy()
    a, b = x[0], x[i - 1]
    x[:i] = (a + b - x[:i])[::-1]
    v[:i] = -v[:i][::-1]
    return Configuration(omega.params, x, v, omega.window_length, omega.left_end, omega.right_end,
                         omega.left_pos, omega.seed, omega.stream)


def unrev(omega_star: SmallConfig, *, corrupt: bool = False) -> tuple[SmallConfig, int]:
    """Inverse of ``rev``: undo the reversal up to the particle that kills the
    stationary first particle, and recover ``k``."""
    vel = omega_star.velocities
    j = _first_killer(vel, corrupt) if vel and vel[0] == 0 else 0
    if j == 0:
        raise ContractError("first particle is not a stationary particle shot from the right")
    omega = _reverse(vel, j)
    idx = _qualifying(omega, corrupt)
    if j not in idx:
        raise ContractError("reversed configuration does not qualify at the partner index")
    return SmallConfig(omega), idx.index(j) + 1


def enumerate_probability(event: Callable[[SmallConfig], bool], n: int, p, description: str = "") -> ExactProbability:
    """Exact probability of ``event`` over all ``3^n`` velocity sequences."""
    _check_n(n)
    p = _exact_p(p)
    m = (1 - p) / 2
    by_stays = [0] * (n + 1)
    for vel in itertools.product((-1, 0, 1), repeat=n):
        if event(SmallConfig(vel)):
            by_stays[vel.count(0)] += 1
    total = sum(c * p**s * m ** (n - s) for s, c in enumerate(by_stays) if c)
    return ExactProbability(Fraction(total), description)


def exact_prefix_q(n: int, p, *, corrupt: bool = False) -> ExactProbability:
    """Probability that one of the first ``n`` particles reaches 0, with the rest frozen."""

    def hits(c: SmallConfig) -> bool:
        return c.n > 0 and bool(np.any(_resolve_prefix(c.velocities, corrupt)[2] == kernels.ABSORB_LEFT))

    return enumerate_probability(hits, n, p, f"some particle among the first {n} reaches 0")


@dataclass(frozen=True)
class _Structure:
    pairs: tuple[tuple[tuple[int, ...], int, tuple[int, ...]], ...]  # (omega, k, image)
    targets: frozenset          # configurations with a stationary first particle shot from within
    injective: bool
    surjective: bool
    into: bool
    roundtrip: bool


@lru_cache(maxsize=None)
def _structure(n: int, corrupt: bool) -> _Structure:
    pairs = []
    targets = set()
    for vel in itertools.product((-1, 0, 1), repeat=n):
        for k, i in enumerate(_qualifying(vel, corrupt), start=1):
            pairs.append((vel, k, _reverse(vel, i)))
        if vel and vel[0] == 0 and _first_killer(vel, corrupt):
            targets.add(vel)
    images = [img for _, _, img in pairs]
    roundtrip = True
    for vel, k, img in pairs:
        try:
            back = unrev(SmallConfig(img), corrupt=corrupt)
        except ContractError:
            roundtrip = False
            break
        if back != (SmallConfig(vel), k):
            roundtrip = False
            break
    return _Structure(
        pairs=tuple(pairs), targets=frozenset(targets),
        injective=len(set(images)) == len(images),
        surjective=targets <= set(images),
        into=set(images) <= targets,
        roundtrip=roundtrip,
    )


@dataclass(frozen=True)
class BijectionReport:
    n: int
    p: Fraction
    pairs: int
    targets: int
    injective: bool
    surjective: bool
    into: bool
    weight_preserving: bool
    roundtrip: bool
    qualifying_sum: Fraction     # sum over j <= n of P[j is a qualifying index]
    reversed_event: Fraction     # P[stationary first particle shot from within n]
    p_times_prefix_q: Fraction   # p * P[one of particles 2..n reaches particle 1]

    @property
    def passed(self) -> bool:
        return (self.injective and self.surjective and self.into and self.weight_preserving
                and self.roundtrip and self.qualifying_sum == self.reversed_event == self.p_times_prefix_q)

    def to_dict(self) -> dict:
        def frac(v: Fraction):
            return {"value": f"{v.numerator}/{v.denominator}", "decimal": float(v)}

        return {
            "name": "bijection", "n": self.n, "p": f"{self.p.numerator}/{self.p.denominator}",
            "pairs": self.pairs, "targets": self.targets, "injective": self.injective,
            "surjective": self.surjective, "into": self.into,
            "weight_preserving": self.weight_preserving, "roundtrip": self.roundtrip,
            "qualifying_sum": frac(self.qualifying_sum), "reversed_event": frac(self.reversed_event),
            "p_times_prefix_q": frac(self.p_times_prefix_q), "passed": self.passed,
        }


def check_flip_bijection(n: int, p, *, corrupt: bool = False) -> BijectionReport:
    """Exhaustively check the reversal bijection on ``n`` particles.

    Both sides are truncated at the same level (a pair ``(omega, k)`` with
    ``i_k = j`` maps to a configuration shot by particle ``j``), so the sums
    agree exactly with no truncation term.
    """
    _check_n(n)
    p = _exact_p(p)
    st = _structure(n, corrupt)
    w = {}

    def wt(vel):
        if vel not in w:
            w[vel] = weight(vel, p)
        return w[vel]

    preserving = all(wt(vel) == wt(img) for vel, _, img in st.pairs)
    lhs = sum((wt(vel) for vel, _, _ in st.pairs), Fraction(0))
    rhs = sum((wt(vel) for vel in st.targets), Fraction(0))
    pq = p * exact_prefix_q(n - 1, p, corrupt=corrupt).value if n >= 1 else Fraction(0)
    return BijectionReport(
        n=n, p=p, pairs=len(st.pairs), targets=len(st.targets), injective=st.injective,
        surjective=st.surjective, into=st.into, weight_preserving=preserving, roundtrip=st.roundtrip,
        qualifying_sum=lhs, reversed_event=rhs, p_times_prefix_q=pq,
    )
