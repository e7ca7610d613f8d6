import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from ballistic.model import (
    Configuration,
    ContractError,
    EndpointSemantics,
    InputError,
    Model,
    ModelParams,
    ParameterError,
    RngStream,
    Velocity,
    draw_window,
    extend,
    from_arrays,
    from_text,
    make_generator,
    parse_p,
    sample,
    to_text,
)


def test_params_validation():
    with pytest.raises(ParameterError):
        ModelParams(1.5)
    with pytest.raises(ParameterError):
        ModelParams(-0.1)
    with pytest.raises(ParameterError):
        ModelParams(0.3, intensity=2.0)
    assert ModelParams(0.3, "discrete").discrete
    assert ModelParams(Fraction(1, 4)).move_prob == pytest.approx(0.375)


def test_parse_p():
    assert parse_p("1/4") == Fraction(1, 4)
    assert parse_p("0.3") == 0.3
    with pytest.raises(ParameterError):
        parse_p("5/4")


def test_velocity_mirror():
    assert Velocity.RIGHT.mirror() is Velocity.LEFT
    assert Velocity.STAY.mirror() is Velocity.STAY


def test_rng_stream_reproducible_and_independent():
    a = make_generator(5, 1).random(4)
    b = make_generator(5, 1).random(4)
    c = make_generator(5, 2).random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    with pytest.raises(ParameterError):
        RngStream(-1)


def test_continuous_sample_in_window():
    cfg = sample(ModelParams(0.3), 100.0, RngStream(1))
    assert np.all(cfg.positions > 0) and np.all(cfg.positions <= 100.0)
    assert np.all(np.diff(cfg.positions) > 0)
    assert cfg.window_length == 100.0


def test_discrete_sample_sites():
    cfg = sample(ModelParams(0.3, "discrete"), 10, RngStream(1))
    assert cfg.positions.tolist() == list(range(1, 11))
    assert cfg.window_length == 11


def test_poisson_counts_and_gaps():
    gen = make_generator(11, 0)
    counts = [draw_window(gen, 0.5, False, 0.0, 50.0)[0].size for _ in range(2000)]
    # mean 50, sd sqrt(50)/sqrt(2000)
    assert abs(np.mean(counts) - 50) < 5 * math.sqrt(50 / 2000)
    x, _ = draw_window(make_generator(12, 0), 0.5, False, 0.0, 20000.0)
    gaps = np.diff(np.concatenate(([0.0], x)))
    assert stats.kstest(gaps, "expon").pvalue > 1e-3


@pytest.mark.parametrize("p", [0.0, 0.2, 0.5, 1.0])
def test_velocity_frequencies(p):
    _, v = draw_window(make_generator(3, 0), p, True, 0, 100_000)
    n = v.size
    for val, prob in ((0, p), (-1, (1 - p) / 2), (1, (1 - p) / 2)):
        freq = np.count_nonzero(v == val) / n
        assert abs(freq - prob) <= 5 * math.sqrt(prob * (1 - prob) / n) + 1e-12


def test_extend_matches_window_growth_law():
    # same stream: extending 0..L to 0..2L reuses the first L untouched
    params = ModelParams(0.3)
    rng = RngStream(9, 4)
    cfg = sample(params, 32.0, rng)
    big = extend(cfg, 64.0)
    assert np.array_equal(big.positions[: len(cfg)], cfg.positions)
    assert np.all(big.positions[len(cfg):] > 32.0)
    with pytest.raises(ParameterError):
        extend(big, 10.0)


def test_extend_discrete():
    cfg = sample(ModelParams(0.3, "discrete"), 8, RngStream(1))
    big = extend(cfg, 17)
    assert big.positions.tolist() == list(range(1, 17))


def test_configuration_validation():
    with pytest.raises(InputError):
        from_arrays([2, 1], [0, 0])
    with pytest.raises(InputError):
        from_arrays([1, 2], [0, 2])
    with pytest.raises(InputError):
        from_arrays([1.5], [0], model="discrete")
    with pytest.raises(InputError):
        from_arrays([0.0], [1], model="continuous")
    cfg = from_arrays([0.0, 1.0], [1, 0], left_end=EndpointSemantics.CLOSED)
    assert len(cfg) == 2


def test_particles_view_and_prefix():
    cfg = from_arrays([1, 2, 3], [1, 0, -1])
    assert [p.id for p in cfg.particles] == [1, 2, 3]
    assert cfg.particles[1].velocity is Velocity.STAY
    pre = cfg.prefix(2)
    assert len(pre) == 2 and pre.window_length == 3.0
    assert pre.right_end is EndpointSemantics.FROZEN


def test_text_roundtrip():
    for model in Model:
        cfg = sample(ModelParams(Fraction(1, 4), model), 20, RngStream(2, 3))
        back = from_text(to_text(cfg))
        assert np.array_equal(back.positions, cfg.positions)
        assert np.array_equal(back.velocities, cfg.velocities)
        assert back.window_length == cfg.window_length
        assert back.seed == 2 and back.stream == 3
    with pytest.raises(InputError):
        from_text("nonsense")


def test_errors_are_value_errors():
    assert issubclass(ContractError, ValueError)
    assert isinstance(Configuration, type)
