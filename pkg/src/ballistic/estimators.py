"""Monte Carlo estimation of hitting and survival probabilities.

Every sample ``i`` draws from its own stream ``(seed, i)`` and grows its
window by doubling until the target event is decided or the cap is reached.
Hits of the left barrier are final as soon as they happen in a window (the
hitting particle's journey only depends on particles to its left). Misses are
never final: a long enough run of left-movers beyond any window could still
arrive, so samples without a hit at the cap are reported as undecided and
counted according to the censoring policy.

Targets
    ``q``      some particle reaches 0 in the half-line process
    ``r``      the first particle moves right, dies in a single collision with
               a stationary particle, and some particle reaches 0
    ``s-sum``  expected number of qualifying indices
    ``theta``  a stationary particle at the origin survives (``psi`` for the
               discrete model); simulated on two-sided windows
    ``quick``  the four-part sufficient event for ``r`` used in the lower bound
               on ``r`` (continuous model only)
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.stats import binomtest

from . import kernels as K
from .dynamics import (
    EventKind,
    FirstFate,
    count_qualifying,
    first_particle_fate,
    hit_left_barrier,
    resolve,
)
from .model import (
    ContractError,
    ModelParams,
    ParameterError,
    RngStream,
    draw_window,
    extend,
    make_generator,
    sample,
)


class Censoring(str, enum.Enum):
    MISS = "miss"  # undecided samples count as "event did not occur"
    HIT = "hit"


@dataclass(frozen=True)
class WindowPolicy:
    """Window growth: start at ``initial_length``, double up to ``cap``.

    Lengths are in expected particles (ordinate units for the continuous
    model, lattice sites for the discrete one).
    """

    initial_length: float = 64.0
    cap: float = 2.0**20

    def __post_init__(self):
        if self.initial_length <= 0:
            raise ParameterError("initial window must be positive")
        if self.cap < self.initial_length:
            raise ParameterError("window cap is smaller than the initial window")


@dataclass(frozen=True)
class EstimatorReport:
    target: str
    model: str
    p: float
    estimate: float
    stderr: float
    ci95: tuple[float, float]
    n_samples: int
    n_undecided: int
    censoring: Censoring
    window_stats: tuple[float, float, float]  # initial, max reached, cap
    proportion: bool = True
    extra: dict = field(default_factory=dict)

    @property
    def undecided_fraction(self) -> float:
        return self.n_undecided / self.n_samples

    @property
    def flagged(self) -> bool:
        """More than 1% of samples undecided at the cap."""
        return self.undecided_fraction > 0.01

    def bounds(self) -> tuple[float, float]:
        """Range of the estimate over every completion of the undecided samples."""
        u = self.undecided_fraction
        if not self.proportion:
            return self.estimate, math.inf if self.n_undecided else self.estimate
        if self.censoring is Censoring.MISS:
            return self.estimate, self.estimate + u
        return self.estimate - u, self.estimate

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "model": self.model,
            "p": float(self.p),
            "estimate": self.estimate,
            "stderr": self.stderr,
            "ci95": list(self.ci95),
            "samples": self.n_samples,
            "undecided": self.n_undecided,
            "policy": self.censoring.value,
        }


@dataclass(frozen=True)
class IdentityReport:
    name: str
    model: str
    p: float
    lhs: float
    lhs_stderr: float
    rhs: float
    rhs_stderr: float
    residual: float
    stderr: float
    sigma_distance: float
    censoring_slack: float
    passed: bool
    criterion: str
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["p"] = float(self.p)
        return d


# -- per-sample drivers --------------------------------------------------------
# Module-level so they can be shipped to worker processes.

_HALFLINE_MODES = {"q": K.STOP_HIT, "r": K.STOP_R, "s": K.STOP_FIRST, "cond": K.STOP_NONE}


def _done(need, v1, hit, ff, fd):
    if need == "q":
        return hit >= 0
    if need == "r":
        return fd and (ff != K.FIRST_STAY or hit >= 0)
    if need == "s":
        return fd
    # cond: a right-moving first particle needs its fate, others need a hit
    return fd if v1 == 1 else hit >= 0


def _halfline_block(p, discrete, initial, cap, seed, lo, hi, need):
    n = hi - lo
    out = {
        "v1": np.zeros(n, np.int8),
        "hit": np.zeros(n, np.bool_),
        "first_fate": np.zeros(n, np.int8),
        "first_decided": np.zeros(n, np.bool_),
        "count": np.zeros(n, np.int64),
        "decided": np.zeros(n, np.bool_),
        "window": np.zeros(n, np.float64),
    }
    mode = _HALFLINE_MODES[need]
    frozen_law = p == 1.0  # nothing ever moves: the unseen tail is inert
    for k in range(n):
        gen = make_generator(seed, lo + k)
        length = initial
        x, v = draw_window(gen, p, discrete, 0, length)
        while True:
            hit, ff, fd, cnt = -1, K.FIRST_NOT_RIGHT, False, 0
            done = False
            if x.size:
                frontier = length + 1 if discrete else length
                hit, _, ff, fd, cnt, _, _ = K.scan_halfline(x, v, 0, x.size, frontier, mode, False)
                done = _done(need, v[0], hit, ff, fd) or frozen_law
            if done or length >= cap:
                break
            new = min(2 * length, cap)
            x2, v2 = draw_window(gen, p, discrete, length, new)
            x, v = np.concatenate((x, x2)), np.concatenate((v, v2))
            length = new
        out["v1"][k] = v[0] if x.size else 0
        out["hit"][k] = hit >= 0
        out["first_fate"][k] = ff
        out["first_decided"][k] = fd
        out["count"][k] = cnt
        out["decided"][k] = done
        out["window"][k] = length
    return out


_FIRST_CODES = {FirstFate.STAY: K.FIRST_STAY, FirstFate.LEFT: K.FIRST_LEFT,
                FirstFate.TRIPLE: K.FIRST_TRIPLE, FirstFate.UNDECIDED: K.FIRST_ESCAPING}


def _halfline_block_heap(p, discrete, initial, cap, seed, lo, hi, need):
    """Same contract as ``_halfline_block`` using full window resolutions."""
    n = hi - lo
    out = {key: np.zeros(n, dt) for key, dt in
           (("v1", np.int8), ("hit", np.bool_), ("first_fate", np.int8), ("first_decided", np.bool_),
            ("count", np.int64), ("decided", np.bool_), ("window", np.float64))}
    params = ModelParams(p, "discrete" if discrete else "continuous")
    for k in range(n):
        rng = RngStream(seed, lo + k)
        length = initial
        config = sample(params, length, rng)
        while True:
            hit, ff, fd, cnt, done = False, K.FIRST_NOT_RIGHT, False, 0, False
            if len(config):
                res = resolve(config)
                hit = hit_left_barrier(res) is not None
                v1 = int(config.velocities[0])
                if v1 == 1:
                    fate = first_particle_fate(res)
                    ff, fd = _FIRST_CODES[fate], fate is not FirstFate.UNDECIDED
                else:
                    fd = True
                if need == "s":
                    cnt, fd = count_qualifying(config)
                done = _done(need, v1, 0 if hit else -1, ff, fd) or p == 1.0
            if done or length >= cap:
                break
            length = min(2 * length, cap)
            config = extend(config, length + 1 if discrete else length, rng)
        out["v1"][k] = config.velocities[0] if len(config) else 0
        out["hit"][k] = hit
        out["first_fate"][k] = ff
        out["first_decided"][k] = fd
        out["count"][k] = cnt
        out["decided"][k] = done
        out["window"][k] = length
    return out


def _quick_block(p, discrete, initial, cap, seed, lo, hi):
    n = hi - lo
    joint = np.zeros(n, np.bool_)
    decided = np.zeros(n, np.bool_)
    violation = np.zeros(n, np.bool_)
    window = np.zeros(n, np.float64)
    for k in range(n):
        gen = make_generator(seed, lo + k)
        length = initial
        x, v = draw_window(gen, p, False, 0, length)
        while True:
            done = ok = False
            if x.size >= 3:
                pre = v[0] == 1 and v[1] == 0 and x[2] > 2 * x[1] - x[0]
                if not pre:
                    done = True
                else:
                    hit = K.scan_halfline(x, v, 2, x.size, length, K.STOP_HIT, False)[0]
                    ok = done = hit >= 0
            if done or length >= cap:
                break
            new = min(2 * length, cap)
            x2, v2 = draw_window(gen, p, False, length, new)
            x, v = np.concatenate((x, x2)), np.concatenate((v, v2))
            length = new
        if ok:
            hit, _, ff, fd, _, _, _ = K.scan_halfline(x, v, 0, x.size, length, K.STOP_NONE, False)
            violation[k] = not (hit >= 0 and fd and ff == K.FIRST_STAY)
        joint[k] = ok
        decided[k] = done
        window[k] = length
    return {"joint": joint, "decided": decided, "violation": violation, "window": window}


def _two_sided(xl, vl, xr, vr):
    x = np.concatenate((-xl[::-1], np.zeros(1), xr))
    v = np.concatenate((-vl[::-1], np.zeros(1, np.int8), vr)).astype(np.int8)
    return x, v


def _theta_block(p, discrete, initial, cap, seed, lo, hi):
    n = hi - lo
    died = np.zeros(n, np.bool_)
    decided = np.zeros(n, np.bool_)
    window = np.zeros(n, np.float64)
    for k in range(n):
        gen = make_generator(seed, lo + k)
        length = initial
        xr, vr = draw_window(gen, p, discrete, 0, length)
        xl, vl = draw_window(gen, p, discrete, 0, length)
        while True:
            if p == 1.0:
                dead, done = False, True
            else:
                x, v = _two_sided(xl, vl, xr, vr)
                o = xl.size
                w = length + 1 if discrete else length
                ev_t, ev_y, _, _, fk, fe = K.resolve_heap(x, v, -w, False, w, False, False, o, w)
                dead = fk[o] == K.ANNIHILATED and ev_t[fe[o]] + abs(ev_y[fe[o]]) < w
                done = dead
            if done or length >= cap:
                break
            new = min(2 * length, cap)
            x2, v2 = draw_window(gen, p, discrete, length, new)
            xr, vr = np.concatenate((xr, x2)), np.concatenate((vr, v2))
            x2, v2 = draw_window(gen, p, discrete, length, new)
            xl, vl = np.concatenate((xl, x2)), np.concatenate((vl, v2))
            length = new
        died[k] = dead
        decided[k] = done
        window[k] = length
    return {"died": died, "decided": decided, "window": window}


def _theta_block_scan(p, discrete, initial, cap, seed, lo, hi):
    """Same draws as ``_theta_block``; the origin dies exactly when either
    side's half-line process first reaches it."""
    n = hi - lo
    died = np.zeros(n, np.bool_)
    decided = np.zeros(n, np.bool_)
    window = np.zeros(n, np.float64)
    for k in range(n):
        gen = make_generator(seed, lo + k)
        length = initial
        xr, vr = draw_window(gen, p, discrete, 0, length)
        xl, vl = draw_window(gen, p, discrete, 0, length)
        while True:
            if p == 1.0:
                dead, done = False, True
            else:
                w = length + 1 if discrete else length
                dead = (K.scan_halfline(xr, vr, 0, xr.size, w, K.STOP_HIT, False)[0] >= 0
                        or K.scan_halfline(xl, vl, 0, xl.size, w, K.STOP_HIT, False)[0] >= 0)
                done = dead
            if done or length >= cap:
                break
            new = min(2 * length, cap)
            x2, v2 = draw_window(gen, p, discrete, length, new)
            xr, vr = np.concatenate((xr, x2)), np.concatenate((vr, v2))
            x2, v2 = draw_window(gen, p, discrete, length, new)
            xl, vl = np.concatenate((xl, x2)), np.concatenate((vl, v2))
            length = new
        died[k] = dead
        decided[k] = done
        window[k] = length
    return {"died": died, "decided": decided, "window": window}


def _run(fn, head, n, workers, extra=()):
    """Run ``fn(*head, lo, hi, *extra)`` over sample blocks, concatenated in order."""
    if workers is None or workers <= 1 or n < 2 * workers:
        return fn(*head, 0, n, *extra)
    nblocks = workers * 4
    edges = np.linspace(0, n, nblocks + 1).astype(int)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futs = [pool.submit(fn, *head, int(a), int(b), *extra) for a, b in zip(edges[:-1], edges[1:]) if b > a]
        parts = [f.result() for f in futs]
    return {key: np.concatenate([part[key] for part in parts]) for key in parts[0]}


# -- reports ------------------------------------------------------------------

def _check(n, seed):
    if n < 1:
        raise ParameterError("need at least one sample")
    if not 0 <= seed < 2**64:
        raise ParameterError("seed must be an unsigned 64-bit value")


def _proportion(target, params, event, decided, censoring, policy, window):
    n = event.size
    und = int(np.count_nonzero(~decided))
    censoring = Censoring(censoring)
    k = int(np.count_nonzero(event))
    if censoring is Censoring.HIT:
        k += und
    est = k / n
    ci = binomtest(k, n).proportion_ci(confidence_level=0.95, method="wilson")
    return EstimatorReport(
        target=target, model=params.model.value, p=params.p, estimate=est,
        stderr=math.sqrt(est * (1 - est) / n), ci95=(max(0.0, float(ci.low)), min(1.0, float(ci.high))),
        n_samples=n, n_undecided=und, censoring=censoring,
        window_stats=(policy.initial_length, float(window.max()), policy.cap),
    )


def _halfline(params, policy, n, seed, need, workers, engine):
    _check(n, seed)
    fn = {"scan": _halfline_block, "heap": _halfline_block_heap}[engine]
    args = (params.stay_prob, params.discrete, float(policy.initial_length), float(policy.cap), seed)
    return _run(fn, args, n, workers, (need,))


_TARGETS = ("q", "r", "s-sum", "theta", "psi", "quick")


def _raw(target, params, policy, n, seed, workers, engine):
    """Simulate once; returns (event or counts, decided, window, extra)."""
    _check(n, seed)
    args = (params.stay_prob, params.discrete, float(policy.initial_length), float(policy.cap), seed)
    if target in ("theta", "psi"):
        if target == "psi" and not params.discrete:
            raise ContractError("psi is the survival probability of the discrete model")
        fn = {"heap": _theta_block, "scan": _theta_block_scan}[engine or "heap"]
        out = _run(fn, args, n, workers)
        return ~out["died"] & out["decided"], out["decided"], out["window"], {}
    if target == "quick":
        if params.discrete:
            raise ContractError("the quick event is defined for the continuous model")
        out = _run(_quick_block, args, n, workers)
        return out["joint"], out["decided"], out["window"], {
            "inclusion_violations": int(np.count_nonzero(out["violation"]))}
    need = {"q": "q", "r": "r", "s-sum": "s"}.get(target)
    if need is None:
        raise ParameterError(f"unknown target {target!r}; expected one of {', '.join(_TARGETS)}")
    fn = {"scan": _halfline_block, "heap": _halfline_block_heap}[engine or "scan"]
    out = _run(fn, args, n, workers, (need,))
    if target == "q":
        value = out["hit"]
    elif target == "r":
        value = out["hit"] & out["first_decided"] & (out["first_fate"] == K.FIRST_STAY)
    else:
        value = out["count"]
    return value, out["decided"], out["window"], {}


def _mean_report(params, counts, decided, censoring, policy, window):
    c = counts.astype(np.float64)
    n = c.size
    mean = float(c.mean())
    se = float(c.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return EstimatorReport(
        target="s-sum", model=params.model.value, p=params.p, estimate=mean, stderr=se,
        ci95=(max(0.0, mean - 1.96 * se), mean + 1.96 * se), n_samples=n,
        n_undecided=int(np.count_nonzero(~decided)), censoring=Censoring(censoring),
        window_stats=(policy.initial_length, float(window.max()), policy.cap), proportion=False,
    )


def estimate(target: str, params: ModelParams, policy: WindowPolicy = WindowPolicy(), n: int = 10_000,
             seed: int = 0, *, censoring=(Censoring.MISS, Censoring.HIT), workers: int = 1,
             engine: str | None = None) -> list[EstimatorReport]:
    """Run ``target`` once and report it under each censoring policy given.

    ``engine`` picks the simulation route: ``"scan"`` (streaming half-line
    pass, default for half-line targets) or ``"heap"`` (full event-driven
    resolution of each window, default for survival). Both consume the random
    streams identically and give the same outcomes sample by sample.
    """
    if isinstance(censoring, (str, Censoring)):
        censoring = (censoring,)
    value, decided, window, extra = _raw(target, params, policy, n, seed, workers, engine)
    if target == "theta" and params.discrete:
        target = "psi"
    reports = []
    for c in censoring:
        if target == "s-sum":
            rep = _mean_report(params, value, decided, c, policy, window)
        else:
            rep = _proportion(target, params, value, decided, c, policy, window)
        if extra:
            rep = replace(rep, extra=extra)
        reports.append(rep)
    return reports


def estimate_q(params: ModelParams, policy: WindowPolicy = WindowPolicy(), n: int = 10_000, seed: int = 0, *,
               censoring: Censoring | str = Censoring.MISS, workers: int = 1,
               engine: str = "scan") -> EstimatorReport:
    """Probability that some particle reaches the absorbing barrier at 0."""
    return estimate("q", params, policy, n, seed, censoring=censoring, workers=workers, engine=engine)[0]


def estimate_r(params: ModelParams, policy: WindowPolicy = WindowPolicy(), n: int = 10_000, seed: int = 0, *,
               censoring: Censoring | str = Censoring.MISS, workers: int = 1,
               engine: str = "scan") -> EstimatorReport:
    """Probability that the first particle moves right, is annihilated by a
    stationary particle in a single collision, and some particle reaches 0."""
    return estimate("r", params, policy, n, seed, censoring=censoring, workers=workers, engine=engine)[0]


def estimate_s_sum(params: ModelParams, policy: WindowPolicy = WindowPolicy(), n: int = 10_000, seed: int = 0, *,
                   censoring: Censoring | str = Censoring.MISS, workers: int = 1,
                   engine: str = "scan") -> EstimatorReport:
    """Mean number of qualifying indices; undecided samples contribute their
    count so far, so the mean is a lower estimate whatever the policy."""
    return estimate("s-sum", params, policy, n, seed, censoring=censoring, workers=workers, engine=engine)[0]


def estimate_theta(params: ModelParams, policy: WindowPolicy = WindowPolicy(), n: int = 10_000, seed: int = 0, *,
                   censoring: Censoring | str = Censoring.HIT, workers: int = 1,
                   engine: str = "heap") -> EstimatorReport:
    """Survival probability of a stationary particle at the origin.

    Survival is never decided; with the default ``HIT`` policy the estimate is
    the fraction still alive at the cap, an upper estimate. ``engine="heap"``
    resolves the two-sided window around the origin; ``engine="scan"`` runs
    the two half-lines separately on the same draws (identical outcomes,
    linear time).
    """
    return estimate("theta", params, policy, n, seed, censoring=censoring, workers=workers, engine=engine)[0]


def estimate_quick(params: ModelParams, policy: WindowPolicy = WindowPolicy(), n: int = 10_000, seed: int = 0, *,
                   censoring: Censoring | str = Censoring.MISS, workers: int = 1) -> EstimatorReport:
    """Probability of: first particle right-moving, second stationary, third
    beyond the reflection point ``2 x2 - x1``, and a particle from beyond that
    point reaching it. ``extra["inclusion_violations"]`` counts samples in
    this event but outside the event defining ``r`` (always 0)."""
    return estimate("quick", params, policy, n, seed, censoring=censoring, workers=workers)[0]


# -- identities -----------------------------------------------------------------

def _same(params, *reports):
    for rep in reports:
        if float(rep.p) != float(params.p) or rep.model != params.model.value:
            raise ContractError(f"report for {rep.model} p={rep.p} does not match {params}")


def _identity(name, params, lhs, lhs_se, rhs, rhs_se, slack, criterion="two-sided", k=3.0, extra=None):
    res = lhs - rhs
    se = math.hypot(lhs_se, rhs_se)
    dist = abs(res) / se if se > 0 else (0.0 if res == 0 else math.inf)
    if criterion == "two-sided":
        passed = abs(res) <= k * se + slack
        text = f"|lhs - rhs| <= {k:g} sigma + slack"
    elif criterion == "strict":
        passed = abs(res) <= k * se
        text = f"|lhs - rhs| <= {k:g} sigma"
    else:  # lhs >= rhs
        passed = res >= -k * se - slack
        text = f"lhs >= rhs - {k:g} sigma - slack"
    return IdentityReport(name=name, model=params.model.value, p=params.p, lhs=lhs, lhs_stderr=lhs_se,
                          rhs=rhs, rhs_stderr=rhs_se, residual=res, stderr=se, sigma_distance=dist,
                          censoring_slack=slack, passed=bool(passed), criterion=text, extra=extra or {})


def lemma2_residual(params: ModelParams, q_report: EstimatorReport, r_report: EstimatorReport) -> IdentityReport:
    """Residual of ``q = (1-p)/2 (1+q) + r (1-q) + p q^3``.

    Standard error by the delta method (q and r come from independent runs);
    the slack bounds how far the residual can move over all completions of
    the undecided samples.
    """
    _same(params, q_report, r_report)
    p = float(params.p)
    q, r = q_report.estimate, r_report.estimate
    rhs = (1 - p) / 2 * (1 + q) + r * (1 - q) + p * q**3
    dq = 1 - (1 - p) / 2 + r - 3 * p * q**2
    dr = -(1 - q)
    se = math.hypot(dq * q_report.stderr, dr * r_report.stderr)
    (q_lo, q_hi), (r_lo, r_hi) = q_report.bounds(), r_report.bounds()
    sup_dq = max(abs(1 - (1 - p) / 2 + rr - 3 * p * qq**2) for qq in (q_lo, q_hi) for rr in (r_lo, r_hi))
    slack = sup_dq * (q_hi - q_lo) + (1 - q_lo) * (r_hi - r_lo)
    rep = _identity("lemma2", params, q, se, rhs, 0.0, slack,
                    extra={"q": q, "r": r, "q_undecided": q_report.n_undecided,
                           "r_undecided": r_report.n_undecided})
    return rep


def lemma1_check(params: ModelParams, s_report: EstimatorReport, q_report: EstimatorReport) -> IdentityReport:
    """Mean qualifying count against ``p q``."""
    _same(params, s_report, q_report)
    p = float(params.p)
    q_lo, q_hi = q_report.bounds()
    return _identity("lemma1", params, s_report.estimate, s_report.stderr, p * q_report.estimate,
                     p * q_report.stderr, p * (q_hi - q_lo), criterion="strict",
                     extra={"s_undecided": s_report.n_undecided, "q_undecided": q_report.n_undecided})


def theta_relation(params: ModelParams, theta_report: EstimatorReport, q_report: EstimatorReport) -> IdentityReport:
    """Direct two-sided survival against ``(1 - q)^2``."""
    _same(params, theta_report, q_report)
    q = q_report.estimate
    q_lo, q_hi = q_report.bounds()
    t_lo, t_hi = theta_report.bounds()
    rhs = (1 - q) ** 2
    slack = (t_hi - t_lo) + (1 - q_lo) ** 2 - (1 - q_hi) ** 2
    name = "psi-relation" if params.discrete else "theta-relation"
    return _identity(name, params, theta_report.estimate, theta_report.stderr, rhs,
                     2 * (1 - q) * q_report.stderr, slack,
                     extra={"theta_undecided": theta_report.n_undecided, "q_undecided": q_report.n_undecided})


def lemma4_check(params: ModelParams, r_report: EstimatorReport, q_report: EstimatorReport,
                 quick_report: EstimatorReport) -> list[IdentityReport]:
    """(a) ``r >= (1-p) p q / 4``; (b) the quick event has probability
    ``(1-p)/2 * p * 1/2 * q``."""
    if params.discrete:
        raise ContractError("the lower bound on r is stated for the continuous model")
    _same(params, r_report, q_report, quick_report)
    p = float(params.p)
    q = q_report.estimate
    q_lo, q_hi = q_report.bounds()
    c = (1 - p) * p / 4
    r_lo, r_hi = r_report.bounds()
    a = _identity("lemma4-bound", params, r_report.estimate, r_report.stderr, c * q, c * q_report.stderr,
                  c * (q_hi - q_lo), criterion="one-sided")
    k_lo, k_hi = quick_report.bounds()
    b = _identity("lemma4-product", params, quick_report.estimate, quick_report.stderr, c * q,
                  c * q_report.stderr, (k_hi - k_lo) + c * (q_hi - q_lo),
                  extra=dict(quick_report.extra))
    return [a, b]


def verify_conditionals(params: ModelParams, policy: WindowPolicy = WindowPolicy(), n: int = 10_000,
                        seed: int = 0, *, workers: int = 1) -> list[IdentityReport]:
    """Conditioning on the first particle's velocity.

    (a) a left-moving first particle always reaches 0; (b) given a stationary
    first particle, a hit has probability ``q^2`` (``q`` from an independent
    run); (c) a right-moving first particle is eventually annihilated, so the
    three collision types add up to ``(1-p)/2``.
    """
    out = _halfline(params, policy, n, seed, "cond", workers, "scan")
    qrep = estimate_q(params, policy, n, (seed + 1) % 2**64, workers=workers)
    v1, hit, dec = out["v1"], out["hit"], out["decided"]
    p = float(params.p)
    reports = []

    left = v1 == -1
    nl = int(left.sum())
    lhs = float(hit[left].mean()) if nl else 1.0
    reports.append(_identity("conditional-left", params, lhs, 0.0, 1.0, 0.0, 0.0, extra={"n": nl}))

    stay = v1 == 0
    ns = int(stay.sum())
    if ns:
        lhs = float(hit[stay].mean())
        lhs_se = math.sqrt(lhs * (1 - lhs) / ns)
        und = float((~dec[stay]).mean())
    else:
        lhs, lhs_se, und = 0.0, 0.0, 0.0
    q = qrep.estimate
    q_lo, q_hi = qrep.bounds()
    reports.append(_identity("conditional-stay", params, lhs, lhs_se, q * q, 2 * q * qrep.stderr,
                             und + q_hi**2 - q_lo**2, extra={"n": ns}))

    right = v1 == 1
    ff = out["first_fate"]
    killed = right & out["first_decided"] & np.isin(ff, (K.FIRST_STAY, K.FIRST_LEFT, K.FIRST_TRIPLE))
    lhs = float(killed.mean())
    slack = float((right & ~out["first_decided"]).mean())
    split = {name: int(np.count_nonzero(right & out["first_decided"] & (ff == code)))
             for name, code in (("stay", K.FIRST_STAY), ("left", K.FIRST_LEFT), ("triple", K.FIRST_TRIPLE))}
    reports.append(_identity("collision-split", params, lhs, math.sqrt(lhs * (1 - lhs) / n), (1 - p) / 2, 0.0,
                             slack, extra=split))
    return reports
