import math
from fractions import Fraction

import pytest

from ballistic import reversal as Rv
from ballistic.estimators import (
    Censoring,
    EstimatorReport,
    WindowPolicy,
    estimate,
    estimate_q,
    estimate_quick,
    estimate_r,
    estimate_s_sum,
    estimate_theta,
    lemma1_check,
    lemma2_residual,
    lemma4_check,
    theta_relation,
    verify_conditionals,
)
from ballistic.model import ContractError, ModelParams, ParameterError

SMALL = WindowPolicy(16, 1024)
MODELS = ["continuous", "discrete"]


@pytest.mark.parametrize("model", MODELS)
@pytest.mark.parametrize("target", ["q", "r", "s-sum"])
@pytest.mark.parametrize("p", [0.0, 0.2, 0.4, 1.0])
def test_engines_agree(model, target, p):
    params = ModelParams(p, model)
    a = estimate(target, params, WindowPolicy(8, 256), 300, 5, engine="scan")
    b = estimate(target, params, WindowPolicy(8, 256), 300, 5, engine="heap")
    assert a == b


@pytest.mark.parametrize("model", MODELS)
@pytest.mark.parametrize("p", [0.0, 0.3, 0.5, 1.0])
def test_survival_engines_agree(model, p):
    params = ModelParams(p, model)
    a = estimate("theta", params, WindowPolicy(8, 256), 300, 5, engine="scan")
    b = estimate("theta", params, WindowPolicy(8, 256), 300, 5, engine="heap")
    assert a == b


@pytest.mark.parametrize("model", MODELS)
def test_trivial_endpoints(model):
    one = ModelParams(1.0, model)
    zero = ModelParams(0.0, model)
    for rep in (estimate_q(one, SMALL, 200), estimate_r(one, SMALL, 200), estimate_s_sum(one, SMALL, 200)):
        assert rep.estimate == 0.0 and rep.n_undecided == 0
    th = estimate_theta(one, SMALL, 200)
    assert th.estimate == 1.0 and th.n_undecided == 0
    assert estimate_r(zero, SMALL, 500).estimate == 0.0
    assert estimate_s_sum(zero, SMALL, 500).estimate == 0.0
    # no decided survivor at p=0; undecided samples count as survivors under HIT
    th = estimate_theta(zero, SMALL, 300)
    assert th.estimate == th.undecided_fraction


@pytest.mark.parametrize("model", MODELS)
@pytest.mark.parametrize("target", ["q", "r", "theta"])
def test_censoring_brackets(model, target):
    miss, hit = estimate(target, ModelParams(0.35, model), SMALL, 2000, 3)
    assert miss.censoring is Censoring.MISS and hit.censoring is Censoring.HIT
    assert miss.estimate <= hit.estimate
    assert hit.estimate - miss.estimate == pytest.approx(miss.undecided_fraction)
    lo, hi = miss.bounds()
    assert (lo, hi) == pytest.approx(hit.bounds())


def test_reproducible_across_worker_counts():
    params = ModelParams(0.3)
    a = estimate_q(params, SMALL, 400, 9, workers=1)
    b = estimate_q(params, SMALL, 400, 9, workers=3)
    assert a == b


def test_decided_hits_monotone_in_cap():
    params = ModelParams(0.3, "discrete")
    prev = -1.0
    for cap in (16, 64, 256, 1024):
        rep = estimate_q(params, WindowPolicy(16, cap), 1000, 4)
        assert rep.estimate >= prev
        prev = rep.estimate


@pytest.mark.parametrize("n,p", [(6, Fraction(1, 5)), (8, Fraction(1, 4)), (5, Fraction(1, 2))])
def test_fixed_window_matches_exact_enumeration(n, p):
    rep = estimate_q(ModelParams(float(p), "discrete"), WindowPolicy(n, n), 20_000, 1)
    exact = float(Rv.exact_prefix_q(n, p).value)
    se = math.sqrt(exact * (1 - exact) / rep.n_samples)
    assert abs(rep.estimate - exact) <= 3 * se


def test_subcritical_survival_small():
    rep = estimate_theta(ModelParams(0.1), WindowPolicy(64, 4096), 4000, 2, engine="scan")
    assert rep.estimate <= 0.001 + 3 * rep.stderr + 1.0 / rep.n_samples


def test_theta_relation_at_p04():
    params = ModelParams(0.4)
    policy = WindowPolicy(64, 1024)
    th = estimate_theta(params, policy, 4000, 1)
    q = estimate_q(params, policy, 20_000, 2)
    assert theta_relation(params, th, q).passed


def _report(target, p, est, se=0.0, model="continuous", und=0, censoring=Censoring.MISS):
    return EstimatorReport(target, model, p, est, se, (est, est), 100, und, censoring, (64, 64, 64))


def test_recursion_residual_exact_inputs():
    for p, q in ((0.0, 1.0), (1.0, 0.0)):
        params = ModelParams(p)
        rep = lemma2_residual(params, _report("q", p, q), _report("r", p, 0.0))
        assert rep.residual == 0.0 and rep.passed
    with pytest.raises(ContractError):
        lemma2_residual(ModelParams(0.3), _report("q", 0.4, 0.5), _report("r", 0.3, 0.1))


def test_shot_bound_trivial_and_contract():
    for p in (0.0, 1.0):
        a, b = lemma4_check(ModelParams(p), _report("r", p, 0.0), _report("q", p, 1.0 - p),
                            _report("quick", p, 0.0))
        assert a.rhs == 0.0 and b.rhs == 0.0 and a.passed and b.passed
    with pytest.raises(ContractError):
        lemma4_check(ModelParams(0.3, "discrete"), _report("r", 0.3, 0.1, model="discrete"),
                     _report("q", 0.3, 0.8, model="discrete"), _report("quick", 0.3, 0.0, model="discrete"))
    with pytest.raises(ContractError):
        estimate_quick(ModelParams(0.3, "discrete"), SMALL, 10)


def test_quick_event_inside_r_event():
    rep = estimate_quick(ModelParams(0.3), SMALL, 3000, 4)
    assert rep.extra["inclusion_violations"] == 0
    assert rep.estimate > 0


def test_identity_checks_moderate_budget():
    params = ModelParams(0.3)
    q = estimate_q(params, SMALL, 20_000, 1)
    r = estimate_r(params, SMALL, 20_000, 2)
    s = estimate_s_sum(params, SMALL, 20_000, 3)
    quick = estimate_quick(params, SMALL, 20_000, 4)
    assert lemma2_residual(params, q, r).passed
    assert lemma1_check(params, s, q).passed
    assert all(rep.passed for rep in lemma4_check(params, r, q, quick))
    assert r.estimate >= (1 - 0.3) * 0.3 * q.estimate / 4 - 3 * r.stderr


@pytest.mark.parametrize("model", MODELS)
def test_conditionals(model):
    a, b, c = verify_conditionals(ModelParams(0.3, model), SMALL, 10_000, 7)
    assert a.sigma_distance == 0.0 and a.lhs == 1.0
    assert b.passed and c.passed
    if model == "continuous":
        assert c.extra["triple"] == 0


def test_report_json_fields():
    rep = estimate_q(ModelParams(0.3), SMALL, 100, 1)
    assert list(rep.to_dict()) == ["target", "model", "p", "estimate", "stderr", "ci95", "samples",
                                   "undecided", "policy"]
    assert rep.flagged == (rep.undecided_fraction > 0.01)


def test_parameter_errors():
    with pytest.raises(ParameterError):
        WindowPolicy(0, 10)
    with pytest.raises(ParameterError):
        WindowPolicy(64, 32)
    with pytest.raises(ParameterError):
        estimate_q(ModelParams(0.3), SMALL, 0)
    with pytest.raises(ParameterError):
        estimate("nope", ModelParams(0.3), SMALL, 10)
    with pytest.raises(ContractError):
        estimate("psi", ModelParams(0.3), SMALL, 10)
