"""Particles, configurations and seeded samplers.

Two initial laws are supported: a unit-rate Poisson process on the half-line
(``Model.CONTINUOUS``) and one particle per positive integer
(``Model.DISCRETE``). Each particle is independently stationary with
probability ``p`` and otherwise moves left or right at unit speed with equal
probability.

Configurations are windows: particles strictly inside ``(left_pos,
window_length]`` with explicit semantics at both ends. For the discrete model
the window length is the first unrevealed lattice site, so a window of
length ``n + 1`` holds particles ``1..n``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterator, NamedTuple

import numpy as np


class ParameterError(ValueError):
    """Raised for out-of-range model or policy parameters."""


class InputError(ValueError):
    """Raised for malformed configurations."""


class ContractError(ValueError):
    """Raised when an operation is called outside its precondition."""


class ResourceError(RuntimeError):
    """Raised when an exhaustive computation would exceed its size limit."""


class Velocity(enum.IntEnum):
    LEFT = -1
    STAY = 0
    RIGHT = 1

    def mirror(self) -> "Velocity":
        return Velocity(-int(self))


class Model(str, enum.Enum):
    CONTINUOUS = "continuous"
    DISCRETE = "discrete"


class EndpointSemantics(str, enum.Enum):
    """How an end of the window behaves.

    ``ABSORBING`` and ``FROZEN`` both absorb arriving particles and freeze a
    particle starting exactly on the endpoint; ``FROZEN`` additionally marks a
    truncation of a longer configuration, so events near it are provisional.
    ``CLOSED`` lets a particle starting on the endpoint take part normally.
    """

    ABSORBING = "absorbing"
    CLOSED = "closed"
    FROZEN = "frozen"


def _check_p(p) -> None:
    if not 0 <= p <= 1:
        raise ParameterError(f"p must lie in [0, 1], got {p}")


@dataclass(frozen=True)
class ModelParams:
    p: float | Fraction
    model: Model = Model.CONTINUOUS
    intensity: float = 1.0

    def __post_init__(self):
        _check_p(self.p)
        object.__setattr__(self, "model", Model(self.model))
        if self.intensity != 1.0:
            raise ParameterError("the Poisson intensity is fixed at 1")

    @property
    def discrete(self) -> bool:
        return self.model is Model.DISCRETE

    @property
    def stay_prob(self) -> float:
        return float(self.p)

    @property
    def move_prob(self) -> float:
        """Probability of each of Left and Right."""
        return (1.0 - float(self.p)) / 2.0


def parse_p(text: str) -> float | Fraction:
    """``"1/4"`` -> Fraction, ``"0.25"`` -> float."""
    text = text.strip()
    p = Fraction(text) if "/" in text else float(text)
    _check_p(p)
    return p


class RngStream:
    """Counter-based random stream identified by ``(seed, stream_id)``.

    Backed by numpy's Philox with the 128-bit key ``seed | stream_id << 64``,
    so every sample index gets its own independent stream and results never
    depend on how samples are spread across workers.
    """

    __slots__ = ("seed", "stream_id", "_gen")

    def __init__(self, seed: int, stream_id: int = 0):
        if not 0 <= seed < 2**64 or not 0 <= stream_id < 2**64:
            raise ParameterError("seed and stream_id must be unsigned 64-bit values")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._gen = None

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            self._gen = make_generator(self.seed, self.stream_id)
        return self._gen

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def make_generator(seed: int, stream_id: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed) | (int(stream_id) << 64)))


class Particle(NamedTuple):
    id: int
    position: float
    velocity: Velocity


@dataclass
class Configuration:
    """An ordered window of particles.

    Positions and velocities are stored as numpy arrays (float64 and int8);
    ``particles`` gives the per-particle view with 1-based ids.
    """

    params: ModelParams
    positions: np.ndarray
    velocities: np.ndarray
    window_length: float
    left_end: EndpointSemantics = EndpointSemantics.ABSORBING
    right_end: EndpointSemantics = EndpointSemantics.FROZEN
    left_pos: float = 0.0
    seed: int | None = None
    stream: int | None = None
    # generator position after the last draw, so extend() continues the stream
    _rng: RngStream | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.positions = np.ascontiguousarray(self.positions, dtype=np.float64)
        self.velocities = np.ascontiguousarray(self.velocities, dtype=np.int8)
        self.left_end = EndpointSemantics(self.left_end)
        self.right_end = EndpointSemantics(self.right_end)
        x = self.positions
        if x.shape != self.velocities.shape or x.ndim != 1:
            raise InputError("positions and velocities must be 1-d arrays of equal length")
        if x.size > 1 and not np.all(np.diff(x) > 0):
            raise InputError("positions must be strictly increasing")
        if x.size and not np.all(np.isin(self.velocities, (-1, 0, 1))):
            raise InputError("velocities must be -1, 0 or 1")
        if x.size:
            lo_ok = x[0] >= self.left_pos if self.left_end is EndpointSemantics.CLOSED else x[0] > self.left_pos
            if not lo_ok or x[-1] > self.window_length:
                raise InputError("positions must lie inside (left_pos, window_length]")
        if self.params.discrete and x.size and not np.all(x == np.round(x)):
            raise InputError("discrete positions must be integers")

    def __len__(self) -> int:
        return int(self.positions.size)

    @property
    def particles(self) -> list[Particle]:
        return [Particle(i + 1, float(x), Velocity(int(v)))
                for i, (x, v) in enumerate(zip(self.positions, self.velocities))]

    def __iter__(self) -> Iterator[Particle]:
        return iter(self.particles)

    def truncate(self, window_length: float) -> "Configuration":
        """View of the same configuration restricted to ``(left_pos, window_length]``."""
        keep = self.positions <= window_length
        if self.params.discrete:
            keep = self.positions < window_length
        return replace(self, positions=self.positions[keep], velocities=self.velocities[keep],
                       window_length=window_length, _rng=None)

    def prefix(self, k: int) -> "Configuration":
        """The first ``k`` particles, frozen at the position of particle ``k + 1``."""
        if k < len(self):
            end = float(self.positions[k])
        else:
            end = self.window_length
        return replace(self, positions=self.positions[:k], velocities=self.velocities[:k],
                       window_length=end, right_end=EndpointSemantics.FROZEN, _rng=None)


def from_arrays(positions, velocities, p=0.5, model=Model.DISCRETE, window_length=None,
                **kwargs) -> Configuration:
    """Build a configuration by hand (tests, CLI input).

    The default window ends one unit after the last particle, which for the
    discrete model is the next lattice site.
    """
    positions = np.asarray(positions, dtype=np.float64)
    if window_length is None:
        window_length = float(positions[-1]) + 1.0 if positions.size else 1.0
    return Configuration(ModelParams(p, Model(model)), positions, np.asarray(velocities, dtype=np.int8),
                         window_length, **kwargs)


# -- raw draws ---------------------------------------------------------------
# The estimators call these directly; the public samplers below wrap them, so
# both routes consume a stream identically.

def draw_velocities(gen: np.random.Generator, n: int, p: float) -> np.ndarray:
    # u < p -> Stay, p <= u < p + (1-p)/2 -> Left, else Right
    u = gen.random(n)
    above_stay = (u >= p).view(np.int8)
    right = (u >= p + (1.0 - p) / 2.0).view(np.int8)
    return 2 * right - above_stay


def draw_poisson(gen: np.random.Generator, start: float, stop: float) -> np.ndarray:
    """Unit-rate Poisson points on ``(start, stop]`` from cumulative exp(1) gaps."""
    span = stop - start
    chunks = []
    pos = start
    while True:
        m = int(span + 4.0 * math.sqrt(span) + 16)
        pts = pos + np.cumsum(gen.standard_exponential(m))
        if pts[-1] > stop:
            chunks.append(pts[pts <= stop])
            break
        chunks.append(pts)
        pos = pts[-1]
    return np.concatenate(chunks)


def draw_window(gen: np.random.Generator, p: float, discrete: bool, start: float, stop: float):
    """Particles with positions in the window increment ``(start, stop]``.

    For the discrete model ``start`` and ``stop`` count particles: sites
    ``start + 1 .. stop``.
    """
    if discrete:
        x = np.arange(int(start) + 1, int(stop) + 1, dtype=np.float64)
    else:
        x = draw_poisson(gen, start, stop)
    return x, draw_velocities(gen, x.size, p)


# -- public samplers ---------------------------------------------------------

def sample_velocities(params: ModelParams, n: int, rng: RngStream) -> np.ndarray:
    if n < 0:
        raise ParameterError("n must be non-negative")
    return draw_velocities(rng.generator, n, params.stay_prob)


def sample_continuous(params: ModelParams, window_length: float, rng: RngStream) -> Configuration:
    if window_length <= 0:
        raise ParameterError("window_length must be positive")
    x, v = draw_window(rng.generator, params.stay_prob, False, 0.0, float(window_length))
    return Configuration(replace(params, model=Model.CONTINUOUS), x, v, float(window_length),
                         seed=rng.seed, stream=rng.stream_id, _rng=rng)


def sample_discrete(params: ModelParams, n: int, rng: RngStream) -> Configuration:
    if n < 0:
        raise ParameterError("n must be non-negative")
    x, v = draw_window(rng.generator, params.stay_prob, True, 0, n)
    return Configuration(replace(params, model=Model.DISCRETE), x, v, float(n + 1),
                         seed=rng.seed, stream=rng.stream_id, _rng=rng)


def sample(params: ModelParams, length: float, rng: RngStream) -> Configuration:
    """Window of ``length`` units (continuous) or ``length`` sites (discrete)."""
    if params.discrete:
        return sample_discrete(params, int(length), rng)
    return sample_continuous(params, length, rng)


def extend(config: Configuration, new_window_length: float, rng: RngStream | None = None) -> Configuration:
    """Append particles on ``(window_length, new_window_length]``.

    Existing particles are untouched. The continuous continuation restarts the
    exponential gaps at the old boundary, which by memorylessness gives the
    same law as sampling the larger window directly.
    """
    if new_window_length <= config.window_length:
        raise ParameterError("extend needs a strictly larger window")
    rng = rng if rng is not None else config._rng
    if rng is None:
        raise ParameterError("no random stream attached to this configuration")
    p = config.params.stay_prob
    if config.params.discrete:
        if new_window_length != int(new_window_length):
            raise ParameterError("discrete windows end on a lattice site")
        x, v = draw_window(rng.generator, p, True, config.window_length - 1, new_window_length - 1)
    else:
        x, v = draw_window(rng.generator, p, False, config.window_length, new_window_length)
    return replace(config,
                   positions=np.concatenate([config.positions, x]),
                   velocities=np.concatenate([config.velocities, v]),
                   window_length=float(new_window_length), _rng=rng)


# -- text format -------------------------------------------------------------

def _fmt_pos(x: float, discrete: bool) -> str:
    return str(int(x)) if discrete else repr(float(x))


def to_text(config: Configuration) -> str:
    """Header ``model p window seed stream`` then one ``position velocity`` per line."""
    d = config.params.discrete
    seed = "-" if config.seed is None else str(config.seed)
    stream = "-" if config.stream is None else str(config.stream)
    lines = [f"{config.params.model.value} {config.params.p} {_fmt_pos(config.window_length, d)} {seed} {stream}"]
    lines += [f"{_fmt_pos(x, d)} {int(v)}" for x, v in zip(config.positions, config.velocities)]
    return "\n".join(lines) + "\n"


def from_text(text: str) -> Configuration:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 5:
        raise InputError("expected header: model p window seed stream")
    model, p, window, seed, stream = rows[0]
    try:
        data = np.array([[float(a), int(b)] for a, b in rows[1:]], dtype=np.float64).reshape(-1, 2)
    except ValueError as exc:
        raise InputError(f"bad particle line: {exc}") from None
    return Configuration(ModelParams(parse_p(p), Model(model)), data[:, 0], data[:, 1].astype(np.int8),
                         float(window), seed=None if seed == "-" else int(seed),
                         stream=None if stream == "-" else int(stream))
