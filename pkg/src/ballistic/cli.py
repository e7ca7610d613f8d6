"""Command-line interface.

Every data-producing command can write a run manifest (argv, parameters,
seed, version, wall time and the SHA-256 of the output bytes); ``replay``
re-runs a manifest and checks the output is byte-identical.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
import time
from decimal import Decimal, InvalidOperation
from fractions import Fraction

from . import __version__
from . import bounds as B
from .dynamics import EventKind, resolve
from .estimators import (
    Censoring,
    WindowPolicy,
    estimate,
    lemma1_check,
    lemma2_residual,
    lemma4_check,
    verify_conditionals,
)
from .model import (
    Configuration,
    EndpointSemantics,
    Model,
    ModelParams,
    ParameterError,
    ResourceError,
    RngStream,
    from_text,
    parse_p,
    sample,
    to_text,
)
from . import reversal as R

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SUITES = ("lemma1", "lemma2", "lemma4", "conditionals", "bijection", "cubics")
FIGURE_COLUMNS = ("p", "theta_upper", "psi_upper", "theta_mc", "theta_mc_stderr", "psi_mc",
                  "psi_mc_stderr", "undecided_frac")


class UsageError(Exception):
    pass


# -- parsing helpers ---------------------------------------------------------

def p_grid(text: str) -> list[Decimal]:
    """``start:stop:step`` (inclusive, exact decimal steps) or a comma list."""
    try:
        if ":" in text:
            start, stop, step = (Decimal(t) for t in text.split(":"))
            if step <= 0 or stop < start:
                raise ParameterError(f"bad grid {text!r}")
            count = int((stop - start) / step + Decimal("1e-9"))
            grid = [start + i * step for i in range(count + 1)]
        else:
            grid = [Decimal(t) for t in text.split(",") if t.strip()]
    except InvalidOperation:
        raise ParameterError(f"bad grid {text!r}") from None
    if not grid:
        raise ParameterError("empty grid")
    for p in grid:
        if not 0 <= p <= 1:
            raise ParameterError(f"grid value {p} outside [0, 1]")
    return grid


def _p_list(text: str) -> list:
    return [parse_p(t) for t in text.split(",") if t.strip()]


def _fraction_list(text: str) -> list[Fraction]:
    return [Fraction(t.strip()) for t in text.split(",") if t.strip()]


def _window(text: str) -> float:
    text = text.strip()
    value = float(2 ** int(text[3:])) if text.startswith("2**") else float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("window lengths must be positive")
    return value


def _fmt_exact(v: float, discrete: bool) -> str:
    """Discrete times and positions are multiples of 1/2: print them as such."""
    if discrete:
        f = Fraction(float(v)).limit_denominator(2)
        return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"
    return repr(float(v))


def _num(v: float) -> str:
    return repr(float(v))


def read_config(path: str) -> dict[str, str]:
    """Flat ``key = value`` file; keys mirror long flag names."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.lstrip("-").replace("-", "_")] = value
    return out


# -- subcommands ---------------------------------------------------------------

def cmd_sample(args) -> tuple[str, int]:
    params = ModelParams(args.p, args.model)
    config = sample(params, args.length, RngStream(args.seed, args.stream))
    return to_text(config), EXIT_OK


def cmd_resolve(args) -> tuple[str, int]:
    if args.input == "-":
        text = sys.stdin.read()
    else:
        with open(args.input, encoding="utf-8") as fh:
            text = fh.read()
    config = from_text(text)
    config = Configuration(config.params, config.positions, config.velocities, config.window_length,
                           left_end=EndpointSemantics(args.left), right_end=EndpointSemantics(args.right),
                           seed=config.seed, stream=config.stream)
    res = resolve(config, corrupt=args.corrupt_resolver)
    d = config.params.discrete
    lines = ["time,position,kind,ids"]
    for i in range(len(res)):
        ids = " ".join(str(int(k)) for k in res.ids[i] if k)
        kind = EventKind(int(res.kinds[i])).name.lower().replace("_", "-")
        lines.append(f"{_fmt_exact(res.times[i], d)},{_fmt_exact(res.positions[i], d)},{kind},{ids}")
    return "\n".join(lines) + "\n", EXIT_OK


def cmd_estimate(args) -> tuple[str, int]:
    model = args.model or ("discrete" if args.target == "psi" else "continuous")
    if args.target == "psi" and model != "discrete":
        raise UsageError("--target psi is the discrete model's survival probability")
    params = ModelParams(args.p, model)
    policy = WindowPolicy(args.window_init, args.window_cap)
    censoring = (Censoring.MISS, Censoring.HIT) if args.censoring == "both" else (Censoring(args.censoring),)
    target = "theta" if args.target == "psi" else args.target
    reports = estimate(target, params, policy, args.samples, args.seed, censoring=censoring,
                       workers=args.threads, engine=args.engine)
    return "".join(json.dumps(r.to_dict()) + "\n" for r in reports), EXIT_OK


def _qualifying_sum(n, p):
    total = Fraction(0)
    for vel, _, _ in R._structure(n, False).pairs:
        total += R.weight(vel, p)
    return R.ExactProbability(total, f"expected number of qualifying indices among the first {n}")


def cmd_enumerate(args) -> tuple[str, int]:
    p = Fraction(args.p)
    n = args.n
    if args.event == "prefix-q":
        res = R.exact_prefix_q(n, p)
    elif args.event == "qualifying-sum":
        res = _qualifying_sum(n, p)
        if res.value > 1:
            raise ParameterError("expected count exceeds 1; not a probability")
    elif args.event == "stay-shot":
        rep = R.check_flip_bijection(n, p)
        res = R.ExactProbability(rep.reversed_event, f"stationary first particle shot from within {n}")
    else:
        res = R.enumerate_probability(lambda c: True, n, p, "all configurations")
    d = res.to_dict()
    d.update({"n": n, "p": f"{p.numerator}/{p.denominator}"})
    return json.dumps(d) + "\n", EXIT_OK


def _cubic_reports(seed: int) -> list[dict]:
    rng = random.Random(seed)
    pairs = [(Fraction(rng.randint(-50, 50), rng.randint(1, 50)), Fraction(rng.randint(0, 60), 60))
             for _ in range(1000)]
    f_ok = all(B.cubic_f(x, p) == B.cubic_f_factored(x, p) for x, p in pairs)
    g_ok = all(B.cubic_g(x, p) == B.cubic_g_factored(x, p) for x, p in pairs)
    grid = [i / 1000 for i in range(1, 1001)]
    root_f = max(abs(B.cubic_f(B.q_hat_lower(p), p)) for p in grid if p > B.LOWER_DISC)
    root_g = max(abs(B.cubic_g(B.q_lower(p), p)) for p in grid if p > B.LOWER_CONT)
    psi_id = max(abs(B.psi_upper(p) - (1 - B.q_hat_lower(p)) ** 2) for p in grid)
    theta_id = max(abs(B.theta_upper(p) - (1 - B.q_lower(p)) ** 2) for p in grid)
    c = B.thresholds()
    rows = [
        ("cubic-f-factorisation", f_ok, {"pairs": len(pairs)}),
        ("cubic-g-factorisation", g_ok, {"pairs": len(pairs)}),
        ("cubic-f-root", root_f <= 1e-10, {"max_abs": root_f}),
        ("cubic-g-root", root_g <= 1e-10, {"max_abs": root_g}),
        ("psi-upper-identity", psi_id <= 1e-12, {"max_abs": psi_id}),
        ("theta-upper-identity", theta_id <= 1e-12, {"max_abs": theta_id}),
        ("thresholds", abs(B.psi_upper(0.2)) <= 1e-12 and abs(B.theta_upper(c.lower_cont)) <= 1e-12
         and abs(c.lower_cont - 0.21699) <= 5e-6 and abs(B.theta_upper(1) - 1) <= 1e-12
         and abs(B.psi_upper(1) - 1) <= 1e-12, {"lower_cont": c.lower_cont}),
        ("constant-ordering", c.lower_cont < c.conjectured_cont < c.upper_cont
         and c.lower_disc < c.conjectured_disc < c.upper_disc, {}),
    ]
    return [{"suite": "cubics", "name": name, "passed": bool(ok), **extra} for name, ok, extra in rows]


def run_suites(suites, p_values, models, n, seed, policy, workers, n_max, bijection_p, corrupt=False):
    """Yield one JSON-ready dict per check; never stops at a failure."""
    seeds = iter(range(seed, seed + 10_000))
    for suite in suites:
        if suite == "cubics":
            yield from _cubic_reports(seed)
            continue
        if suite == "bijection":
            for p in bijection_p:
                for k in range(1, n_max + 1):
                    d = R.check_flip_bijection(k, p, corrupt=corrupt).to_dict()
                    yield {"suite": "bijection", **d}
            continue
        for model in models:
            if suite == "lemma4" and model == "discrete":
                continue
            for p in p_values:
                params = ModelParams(p, model)

                def run(target):
                    return estimate(target, params, policy, n, next(seeds), censoring=Censoring.MISS,
                                    workers=workers)[0]

                if suite == "lemma1":
                    reps = [lemma1_check(params, run("s-sum"), run("q"))]
                elif suite == "lemma2":
                    reps = [lemma2_residual(params, run("q"), run("r"))]
                elif suite == "lemma4":
                    reps = lemma4_check(params, run("r"), run("q"), run("quick"))
                else:
                    reps = verify_conditionals(params, policy, n, next(seeds), workers=workers)
                for rep in reps:
                    yield {"suite": suite, **rep.to_dict()}


def cmd_verify(args) -> tuple[str, int]:
    suites = SUITES if args.suite == "all" else (args.suite,)
    models = ("continuous", "discrete") if args.model == "both" else (args.model,)
    policy = WindowPolicy(args.window_init, args.window_cap)
    lines, failed = [], False
    for row in run_suites(suites, args.p, models, args.samples, args.seed, policy, args.threads,
                          args.n_max, args.bijection_p, corrupt=args.corrupt_resolver):
        failed |= not row["passed"]
        lines.append(json.dumps(row, default=float))
    return "\n".join(lines) + "\n", EXIT_FAIL if failed else EXIT_OK


def cmd_bounds(args) -> tuple[str, int]:
    lines = ["p,psi_upper,theta_upper,q_hat_lower,q_lower"]
    for p in args.p_grid:
        b = B.bound_point(p)
        lines.append(f"{p},{_num(b.psi_upper)},{_num(b.theta_upper)},{_num(b.q_hat_lower)},{_num(b.q_lower)}")
    return "\n".join(lines) + "\n", EXIT_OK


def figure_rows(grid, mc_samples, seed, policy, workers):
    for i, p in enumerate(grid):
        row = {"p": str(p), "theta_upper": _num(B.theta_upper(p)), "psi_upper": _num(B.psi_upper(p))}
        if mc_samples:
            # survival censored as "still alive": an upper estimate, the hard side of the comparison
            th = estimate("theta", ModelParams(float(p)), policy, mc_samples, seed + 2 * i,
                          censoring=Censoring.HIT, workers=workers, engine="scan")[0]
            ps = estimate("theta", ModelParams(float(p), "discrete"), policy, mc_samples, seed + 2 * i + 1,
                          censoring=Censoring.HIT, workers=workers, engine="scan")[0]
            row.update(theta_mc=_num(th.estimate), theta_mc_stderr=_num(th.stderr), psi_mc=_num(ps.estimate),
                       psi_mc_stderr=_num(ps.stderr),
                       undecided_frac=_num((th.n_undecided + ps.n_undecided) / (2 * mc_samples)))
        yield row


def cmd_figure(args) -> tuple[str, int]:
    policy = WindowPolicy(args.window_init, args.window_cap)
    lines = [",".join(FIGURE_COLUMNS)]
    for row in figure_rows(args.p_grid, args.mc_samples, args.seed, policy, args.threads):
        lines.append(",".join(row.get(c, "") for c in FIGURE_COLUMNS))
    sidecar = args.constants or (args.out + ".constants.json" if args.out != "-" else None)
    if sidecar:
        c = B.thresholds()
        with open(sidecar, "w", encoding="utf-8", newline="\n") as fh:
            json.dump({**c.__dict__, "mc_samples": args.mc_samples, "window_cap": args.window_cap,
                       "censoring": "hit"}, fh, indent=2)
            fh.write("\n")
    return "\n".join(lines) + "\n", EXIT_OK


# -- parser ------------------------------------------------------------------

def _common_mc(sp, cap_default=2.0**20):
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--window-init", type=_window, default=64.0)
    sp.add_argument("--window-cap", type=_window, default=cap_default)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ballistic", description="Three-speed ballistic annihilation toolkit.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--config", help="key = value file; flags override it")
    ap.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--out", default="-", help="output file (default stdout)")
    ap.add_argument("--manifest", help="write a run manifest here (default <out>.manifest.json)")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sample", help="draw a configuration")
    sp.add_argument("--model", choices=[m.value for m in Model], default="continuous")
    sp.add_argument("--p", type=parse_p, required=True)
    sp.add_argument("--length", type=float, default=64.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--stream", type=int, default=0)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("resolve", help="resolve a configuration file to its event list")
    sp.add_argument("input", help="configuration text file, or - for stdin")
    sp.add_argument("--left", choices=["absorbing", "closed"], default="absorbing")
    sp.add_argument("--right", choices=["frozen", "closed", "absorbing"], default="frozen")
    sp.add_argument("--corrupt-resolver", action="store_true", help=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_resolve)

    sp = sub.add_parser("estimate", help="Monte Carlo estimate of a hitting or survival probability")
    sp.add_argument("--target", choices=["q", "r", "s-sum", "theta", "psi"], required=True)
    sp.add_argument("--model", choices=[m.value for m in Model])
    sp.add_argument("--p", type=parse_p, required=True)
    _common_mc(sp)
    sp.add_argument("--censoring", choices=["miss", "hit", "both"], default="both")
    sp.add_argument("--engine", choices=["scan", "heap"])
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("enumerate", help="exact probabilities over all small discrete configurations")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", required=True, help="rational, e.g. 1/4")
    sp.add_argument("--event", choices=["prefix-q", "qualifying-sum", "stay-shot", "total"], default="prefix-q")
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("verify", help="run identity suites; exit 1 if any check fails")
    sp.add_argument("suite", choices=[*SUITES, "all"])
    sp.add_argument("--p", type=_p_list, default=_p_list("0.1,0.4"))
    sp.add_argument("--model", choices=["continuous", "discrete", "both"], default="both")
    _common_mc(sp, cap_default=2.0**14)
    sp.set_defaults(samples=20_000)
    sp.add_argument("--n-max", type=int, default=8)
    sp.add_argument("--bijection-p", type=_fraction_list, default=_fraction_list("1/5,1/4,1/2"))
    sp.add_argument("--corrupt-resolver", action="store_true", help=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("bounds", help="closed-form bound curves as CSV")
    sp.add_argument("--p-grid", type=p_grid, default=p_grid("0:1:0.01"))
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("figure", help="bound curves with optional Monte Carlo survival estimates")
    sp.add_argument("--p-grid", type=p_grid, default=p_grid("0:0.5:0.01"))
    sp.add_argument("--mc-samples", type=int, default=0, help="0 disables the Monte Carlo columns")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--window-init", type=_window, default=64.0)
    sp.add_argument("--window-cap", type=_window, default=2.0**14)
    sp.add_argument("--constants", help="sidecar JSON with reference constants")
    sp.set_defaults(func=cmd_figure)

    sp = sub.add_parser("replay", help="re-run a manifest and compare output checksums")
    sp.add_argument("manifest_file")
    sp.set_defaults(func=None)
    return ap


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    cfg = read_config(known.config)
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    used = set()
    for target in [parser, *sub.choices.values()]:
        dests = {a.dest for a in target._actions}
        hits = {k: v for k, v in cfg.items() if k in dests and k not in ("config", "command", "func")}
        target.set_defaults(**hits)
        used |= hits.keys()
    unknown = set(cfg) - used
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")


def _jsonable(v):
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (Fraction, Decimal)):
        return str(v)
    if isinstance(v, (str, int, float, bool)) or v is None:
        return v
    return str(v)


def execute(argv: list[str]) -> tuple[argparse.Namespace, str, int]:
    parser = build_parser()
    _apply_config(parser, argv)
    args = parser.parse_args(argv)
    if args.threads < 1:
        raise UsageError("--threads must be at least 1")
    if args.func is None:
        return args, *replay(args.manifest_file)
    text, code = args.func(args)
    return args, text, code


def replay(path: str) -> tuple[str, int]:
    with open(path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    argv = [a for a in manifest["argv"]]
    # drop output/manifest destinations so the replay leaves files alone
    clean, skip = [], False
    for a in argv:
        if skip:
            skip = False
            continue
        if a in ("--out", "--manifest", "--constants"):
            skip = True
            continue
        if a.startswith(("--out=", "--manifest=", "--constants=")):
            continue
        clean.append(a)
    _, text, _ = execute(clean)
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    same = digest == manifest["sha256"]
    out = {"manifest": path, "expected": manifest["sha256"], "actual": digest, "identical": same}
    return json.dumps(out) + "\n", EXIT_OK if same else EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    start = time.perf_counter()
    try:
        args, text, code = execute(argv)
    except SystemExit as exc:  # argparse usage errors and --help
        return int(exc.code or 0) if exc.code in (0, None) else EXIT_USAGE
    except (UsageError, ParameterError, ValueError, ResourceError, OSError) as exc:
        print(f"ballistic: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    data = text.encode("utf-8")
    if args.out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(args.out, "wb") as fh:
            fh.write(data)
    manifest_path = args.manifest or (args.out + ".manifest.json" if args.out != "-" else None)
    if manifest_path and args.command != "replay":
        params = {k: _jsonable(v) for k, v in vars(args).items() if k not in ("func",)}
        manifest = {
            "subcommand": args.command, "argv": argv, "params": params, "seed": getattr(args, "seed", None),
            "version": __version__, "wall_time": round(time.perf_counter() - start, 6),
            "sha256": hashlib.sha256(data).hexdigest(),
        }
        with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
