import random
from fractions import Fraction

import numpy as np
import pytest

from ballistic import kernels as K
from ballistic.dynamics import (
    CollisionEvent,
    EventKind,
    FateKind,
    FirstFate,
    certified,
    count_qualifying,
    first_particle_fate,
    hit_left_barrier,
    qualifying_indices,
    resolve,
)
from ballistic.model import (
    ContractError,
    EndpointSemantics,
    InputError,
    ModelParams,
    RngStream,
    extend,
    from_arrays,
    sample,
)
from oracles import earliest_pair, engine_fates, halfstep

R, S, L = 1, 0, -1


def disc(vel):
    return from_arrays(list(range(1, len(vel) + 1)), vel, model="discrete")


def test_pair_then_nothing():
    res = resolve(disc([R, S]))
    (ev,) = res.events
    assert ev.kind is EventKind.PAIRWISE and ev.position == 2 and ev.half_steps == 2
    assert ev.participants == (1, 2)
    assert res.survivors.size == 0


def test_triple():
    res = resolve(disc([R, S, L]))
    (ev,) = res.events
    assert ev.kind is EventKind.TRIPLE and ev.position == 2 and ev.half_steps == 2
    assert all(res.fate(i).kind is FateKind.ANNIHILATED for i in (1, 2, 3))


def test_closed_left_end_particle_at_zero():
    cfg = from_arrays([0.0, 1.0, 10.0], [R, S, L], model="continuous", window_length=11.0,
                      left_end=EndpointSemantics.CLOSED)
    ev = resolve(cfg).events
    assert (ev[0].kind, ev[0].position, ev[0].time) == (EventKind.PAIRWISE, 1.0, 1.0)
    assert (ev[1].kind, ev[1].participants, ev[1].time) == (EventKind.ABSORB_LEFT, (3,), 10.0)


def test_left_mover_shoots_stationary_then_next_reaches_zero():
    res = resolve(disc([S, L, L]))
    assert res.events[0].participants == (1, 2) and res.events[0].half_steps == 2
    assert res.time2.tolist() == [2, 6]
    assert hit_left_barrier(res) == (3, Fraction(3))


def test_hit_left_barrier_examples():
    assert hit_left_barrier(resolve(disc([L]))) == (1, Fraction(1))
    assert hit_left_barrier(resolve(disc([R, S]))) is None


def test_malformed_positions():
    cfg = from_arrays([1.0, 2.0], [R, L], model="continuous")
    cfg.positions[1] = 0.5
    with pytest.raises(InputError):
        resolve(cfg)


def test_certified_examples():
    assert certified(CollisionEvent(1.0, 1.0, EventKind.PAIRWISE, (1, 2)), 10)
    assert not certified(CollisionEvent(5.0, 6.0, EventKind.PAIRWISE, (1, 2)), 10)
    # two-sided windows also bound influence from the left end
    assert not certified(CollisionEvent(3.0, -1.0, EventKind.PAIRWISE, (1, 2)), 10, left_end=-4)


def test_first_particle_fate_examples():
    assert first_particle_fate(resolve(disc([R, S, L]))) is FirstFate.TRIPLE
    assert first_particle_fate(resolve(disc([R, L]))) is FirstFate.LEFT
    # window of three sites: event (t=1, y=2), 2 + 1 < 4
    assert first_particle_fate(resolve(disc([R, S, S]))) is FirstFate.STAY
    # (t=1, y=2) against frontier 3 is not certified
    assert first_particle_fate(resolve(disc([R, S]))) is FirstFate.UNDECIDED
    assert first_particle_fate(resolve(disc([R]))) is FirstFate.UNDECIDED
    closed = from_arrays([1], [R], model="discrete", right_end=EndpointSemantics.CLOSED)
    assert first_particle_fate(resolve(closed)) is FirstFate.ABSORBED
    with pytest.raises(ContractError):
        first_particle_fate(resolve(disc([S, L])))


def test_count_qualifying_examples():
    assert count_qualifying(disc([S, R, S])) == (0, True)
    assert count_qualifying(disc([L])) == (0, True)
    assert count_qualifying(disc([R, S, L, S])) == (1, True)
    assert count_qualifying(disc([R, R, L, S, L, S])) == (2, False)
    assert count_qualifying(disc([R, R, L, S, L, S]), max_reveals=4) == (1, False)


def test_qualifying_indices_sampler():
    params = ModelParams(0.3, "discrete")
    count, decided = qualifying_indices(params, RngStream(4, 0), 10_000)
    assert count >= 0 and isinstance(decided, bool)
    with pytest.raises(ContractError):
        qualifying_indices(params, RngStream(4, 0), 0)


def test_time2_only_discrete():
    res = resolve(from_arrays([1.0, 2.5], [R, S], model="continuous"))
    with pytest.raises(ContractError):
        res.time2


def _random_discrete(rng, n):
    return [rng.choice((R, S, L)) for _ in range(n)]


def test_discrete_matches_halfstep_and_earliest_pair_oracles():
    rng = random.Random(2024)
    for _ in range(1000):
        n = rng.randint(1, 50)
        vel = _random_discrete(rng, n)
        pos = list(range(1, n + 1))
        got = engine_fates(resolve(disc(vel)), doubled=True)
        assert got == halfstep(vel, pos, n + 1), vel
        ep = {k: (v[0], None if v[1] is None else int(2 * v[1]), v[2])
              for k, v in earliest_pair(vel, pos, 0, n + 1).items()}
        assert got == ep, vel


def test_continuous_matches_earliest_pair_oracle():
    # dyadic positions are exact in binary, so exact ties (triples included) occur
    rng = random.Random(7)
    for _ in range(1000):
        n = rng.randint(1, 50)
        pos = sorted({Fraction(rng.randint(1, 8 * n), 8) for _ in range(n)})
        vel = _random_discrete(rng, len(pos))
        w = pos[-1] + Fraction(rng.randint(1, 8), 8)
        cfg = from_arrays([float(x) for x in pos], vel, model="continuous", window_length=float(w))
        assert engine_fates(resolve(cfg)) == earliest_pair(vel, pos, 0, w), (vel, pos)


_REC = {K.REC_PAIR: FateKind.ANNIHILATED, K.REC_TRIPLE: FateKind.ANNIHILATED,
        K.REC_ABSORB_LEFT: FateKind.ABSORBED, K.REC_ABSORB_RIGHT: FateKind.ABSORBED,
        K.REC_SURVIVOR: FateKind.SURVIVOR}


@pytest.mark.parametrize("model", ["continuous", "discrete"])
def test_scan_matches_heap_fates(model):
    params = ModelParams(0.3, model)
    for seed in range(300):
        cfg = sample(params, 40, RngStream(seed, 1))
        if not len(cfg):
            continue
        res = resolve(cfg)
        *_, kinds, partners = K.scan_halfline(cfg.positions, cfg.velocities, 0, len(cfg),
                                              cfg.window_length, K.STOP_NONE, True)
        for i in range(len(cfg)):
            assert _REC[int(kinds[i])] == res.fate_kind[i]
            e = int(res.fate_event[i])
            if kinds[i] == K.REC_PAIR:
                ids = {int(k) for k in res.ids[e] if k}
                assert ids == {i + 1, int(partners[i]) + 1}
            if kinds[i] == K.REC_TRIPLE:
                assert res.kinds[e] == EventKind.TRIPLE
        hit = hit_left_barrier(res)
        h = K.scan_halfline(cfg.positions, cfg.velocities, 0, len(cfg), cfg.window_length, K.STOP_NONE, False)[0]
        assert (hit is None and h < 0) or (hit[0] == h + 1)


@pytest.mark.parametrize("model", ["continuous", "discrete"])
def test_certified_events_stable_under_extension(model):
    params = ModelParams(0.35, model)
    for seed in range(200):
        rng = RngStream(seed, 3)
        small = sample(params, 30, rng)
        big = extend(small, 61 if params.discrete else 60.0)
        a = {(e.time, e.position, e.kind, e.participants) for e in resolve(small)
             if e.kind != EventKind.ABSORB_RIGHT and certified(e, small.window_length)}
        b = {(e.time, e.position, e.kind, e.participants) for e in resolve(big)
             if e.kind != EventKind.ABSORB_RIGHT and certified(e, small.window_length)}
        assert a == b


def test_watch_and_stop_time():
    x = np.array([1.0, 2.0, 3.0, 4.0])
    v = np.array([S, L, R, L], dtype=np.int8)
    # watching the stationary particle: stop right after it dies at t=1
    x = np.array([1.0, 2.0, 3.0, 4.0, 6.0])
    v = np.array([S, L, R, L, L], dtype=np.int8)
    ev_t, *_ = K.resolve_heap(x, v, 0.0, False, 7.0, False, False, 0, np.inf)
    assert ev_t.tolist() == [0.5, 1.0]
    ev_t, *_ = K.resolve_heap(x, v, 0.0, False, 7.0, False, False, -1, np.inf)
    assert ev_t.tolist() == [0.5, 1.0, 6.0]
    ev_t, *_ = K.resolve_heap(x, v, 0.0, False, 7.0, False, False, -1, 0.75)
    assert ev_t.tolist() == [0.5]
