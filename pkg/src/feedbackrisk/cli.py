"""Command-line runner: one subcommand per experiment, seeded and byte-deterministic.

    feedbackrisk nonid --betas 0,1,5 --sigma 0.5 --n 200000 --seed 7
    feedbackrisk crowding --cs 1,0.25 --mode analytic --out curve.csv
    feedbackrisk coverage --trials 500 --seed 11

Exit status is 0 on success, 2 on argument errors and 1 on runtime errors.
List-valued flags starting with a minus sign need the ``--flag=-1,0`` form.
"""

from __future__ import annotations

import argparse
import io
import json
import sys

import numpy as np

from ._util import dumps_json, fmt17
from .core import Linear, Proportional
from .diagnostics import (
    crossing_alpha,
    crowding_curve,
    default_alpha_grid,
    impact_perturbation,
    inversion_threshold,
    nonid_demo,
)
from .elasticity import estimate_elasticity, prop1_check
from .env import ConcaveImpactEnv, CrowdingEnv, LinearFeedbackEnv
from .risk import closed_form_deployment_risk
from .estimation import (
    CoverageConfig,
    InstrumentedPolicy,
    bound_report,
    coverage_experiment,
    generate_instrumented_data,
    misspecified_fit,
    ols_fit,
    plugin_deployment_risk,
    plugin_error_bound,
)
from .streams import MASK64, SeedSpec

ART = "[artifact default]"


class ArgumentError(ValueError):
    pass


def _floats(text: str) -> list:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _u64(text) -> int:
    value = int(text)
    if not 0 <= value <= MASK64:
        raise argparse.ArgumentTypeError(f"seed must be a 64-bit unsigned integer, got {text}")
    return value


def _count(text) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive count, got {text}")
    return value


# -- subcommands ---------------------------------------------------------------

def _cmd_nonid(args, seed):
    rep = nonid_demo(args.betas, args.sigma, args.n, seed, threads=args.threads)
    if args.format == "csv":
        lines = ["beta,deployment_risk,std_error,closed_form"]
        for b, r, s, c in zip(rep.betas, rep.deployment_risks, rep.std_errors, rep.closed_form):
            lines.append(",".join(fmt17(x) for x in (b, r, s, c)))
        return "\n".join(lines) + "\n"
    return dumps_json(rep.to_dict())


def _cmd_inversion(args, seed):
    threshold = inversion_threshold(args.c_prime)
    a_star = crossing_alpha(args.c_prime, args.gamma)
    record = {
        "c_prime": args.c_prime,
        "gamma": args.gamma,
        "sigma": args.sigma,
        "threshold": threshold,
        "crossing_alpha": a_star,
        "risk_at_crossing": closed_form_deployment_risk(1.0, a_star, args.gamma, args.sigma),
    }
    if args.format == "csv":
        return ",".join(record) + "\n" + ",".join(fmt17(v) for v in record.values()) + "\n"
    return dumps_json(record)


def _cmd_crowding(args, seed):
    curve = crowding_curve(
        args.cs, default_alpha_grid(args.alpha_max, args.alpha_step), args.gamma, args.sigma,
        args.mode, args.n, seed, threads=args.threads,
    )
    return dumps_json(curve.to_dict()) if args.format == "json" else curve.to_csv()


def _make_env(args):
    if args.env == "linear":
        return LinearFeedbackEnv(args.beta, args.sigma)
    if args.env == "crowding":
        return CrowdingEnv(args.gamma, args.sigma)
    return ConcaveImpactEnv(args.eta, args.sigma)


def _record_out(record: dict, fmt: str) -> str:
    if fmt == "csv":
        return ",".join(record) + "\n" + ",".join(fmt17(v) for v in record.values()) + "\n"
    return dumps_json(record)


def _cmd_elasticity(args, seed):
    est = estimate_elasticity(_make_env(args), args.h, args.a, args.a_prime, args.n, seed)
    return _record_out(est.to_dict(), args.format)


def _cmd_smallfeedback(args, seed):
    rep = prop1_check(LinearFeedbackEnv(args.beta, args.sigma), Linear(args.c), Proportional(args.alpha), args.n, seed)
    return _record_out(rep.to_dict(), args.format)


def _cmd_impact(args, seed):
    rep = impact_perturbation(Linear(args.c), Proportional(args.alpha), args.sigma, args.linear_beta, args.eta, args.n, seed)
    if args.format == "csv":
        return _record_out(
            {"linear_risk": rep.linear_risk.value, "linear_std_error": rep.linear_risk.std_error,
             "concave_risk": rep.concave_risk.value, "concave_std_error": rep.concave_risk.std_error,
             "delta": rep.delta},
            "csv",
        )
    return dumps_json(rep.to_dict())


def _cmd_estimate(args, seed):
    theta = np.asarray(args.theta, dtype=np.float64)
    w = np.append(theta, args.beta)
    Z, Y = generate_instrumented_data(theta, args.beta, args.sigma, args.L, args.a_max, args.n, seed.derive("data"))
    fit = ols_fit(Z, Y)
    bounds = bound_report(Z, args.sigma, args.lam, args.delta)
    policy = InstrumentedPolicy(theta, args.L, args.a_max, args.alpha)
    outer = seed.derive("plugin")
    risk_hat = plugin_deployment_risk(policy.forecaster, policy.features, fit.w_hat, args.sigma,
                                      args.n_outer, outer, L=args.L, history_dim=theta.size)
    oracle = plugin_deployment_risk(policy.forecaster, policy.features, w, args.sigma,
                                    args.n_outer, outer, L=args.L, history_dim=theta.size)
    B = policy.B(args.beta)
    record = {
        "w_true": w.tolist(),
        "w_hat": fit.w_hat.tolist(),
        "param_err": float(np.linalg.norm(fit.w_hat - w)),
        "gram_min_eigenvalue": fit.gram_min_eigenvalue,
        "residual_variance": fit.residual_variance,
        "bounds": bounds.to_dict(),
        "plugin": {
            "risk_hat": risk_hat,
            "oracle_risk": oracle,
            "B": B,
            "error_bound": plugin_error_bound(B, bounds.epsilon_n),
            "within_bound": abs(risk_hat - oracle) <= plugin_error_bound(B, bounds.epsilon_n),
        },
    }
    if args.eta is not None:
        mis = misspecified_fit(theta, args.eta, args.sigma, args.L, args.a_max, args.n, seed.derive("misspecified"))
        record["misspecified"] = {"eta": args.eta, "w_hat": mis.w_hat.tolist(), "rho_hat": mis.rho_hat}
    if args.format == "csv":
        flat = {
            "param_err": record["param_err"],
            "param_bound": bounds.param_bound,
            "epsilon_n": bounds.epsilon_n,
            "design_event": int(bounds.design_event_holds),
            "risk_hat": risk_hat,
            "oracle_risk": oracle,
            "plugin_bound": record["plugin"]["error_bound"],
        }
        for j, v in enumerate(fit.w_hat):
            flat[f"w_hat_{j}"] = v
        return _record_out(flat, "csv")
    return dumps_json(record)


def _cmd_coverage(args, seed):
    p = args.p
    w_true = args.w_true if args.w_true is not None else [1.0] * (p - 1) + [0.5]
    cfg = CoverageConfig(
        p=p, n=args.n, sigma=args.sigma, L=args.L, a_max=args.a_max, lam=args.lam,
        delta=args.delta, trials=args.trials, w_true=tuple(w_true), alpha=args.alpha,
        n_outer=args.n_outer,
    )
    result = coverage_experiment(cfg, seed, threads=args.threads)
    return result.to_csv() if args.format == "csv" else dumps_json(result.summary())


# -- parser --------------------------------------------------------------------

def _common(sp, default_format):
    sp.add_argument("--seed", type=_u64, default=0, help="64-bit master seed (default 0)")
    sp.add_argument("--out", default=None, help="output path (default: standard output)")
    sp.add_argument("--format", choices=("csv", "json"), default=default_format)
    sp.add_argument("--threads", type=int, default=1, help="worker threads, 0 = auto; output is unaffected")
    sp.add_argument("--config", default=None, help="JSON file whose keys match the flag names")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="feedbackrisk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("nonid", help="passive law invariance vs deployment risk across beta")
    sp.add_argument("--betas", type=_floats, default=[0.0, 0.5, 1.0], help=f"default 0,0.5,1 {ART}")
    sp.add_argument("--sigma", type=float, default=0.5)
    sp.add_argument("--n", type=_count, default=200_000, help=f"default 200000 {ART}")
    _common(sp, "json")
    sp.set_defaults(handler=_cmd_nonid)

    sp = sub.add_parser("inversion", help="ranking-inversion threshold and crossing intensity")
    sp.add_argument("--c-prime", dest="c_prime", type=float, default=0.25)
    sp.add_argument("--gamma", type=float, default=1.35)
    sp.add_argument("--sigma", type=float, default=0.5)
    _common(sp, "json")
    sp.set_defaults(handler=_cmd_inversion)

    sp = sub.add_parser("crowding", help="deployment risk over adoption intensity")
    sp.add_argument("--cs", type=_floats, default=[1.0, 0.25])
    sp.add_argument("--gamma", type=float, default=1.35)
    sp.add_argument("--sigma", type=float, default=0.5)
    sp.add_argument("--alpha-max", dest="alpha_max", type=float, default=1.0, help=f"default 1 {ART}")
    sp.add_argument("--alpha-step", dest="alpha_step", type=float, default=0.05, help=f"default 0.05 {ART}")
    sp.add_argument("--mode", choices=("analytic", "montecarlo"), default="analytic")
    sp.add_argument("--n", type=_count, default=200_000, help=f"Monte Carlo draws per point, default 200000 {ART}")
    _common(sp, "csv")
    sp.set_defaults(handler=_cmd_crowding)

    sp = sub.add_parser("elasticity", help="W1 elasticity between two actions at a fixed history")
    sp.add_argument("--env", choices=("linear", "crowding", "concave"), default="linear", help=f"{ART}")
    sp.add_argument("--beta", type=float, default=0.7, help=f"linear env, default 0.7 {ART}")
    sp.add_argument("--gamma", type=float, default=1.35, help="crowding env")
    sp.add_argument("--eta", type=float, default=1.0, help=f"concave env, default 1 {ART}")
    sp.add_argument("--sigma", type=float, default=0.5)
    sp.add_argument("--h", type=float, default=0.0, help=f"{ART}")
    sp.add_argument("--a", type=float, default=0.0, help=f"{ART}")
    sp.add_argument("--a-prime", dest="a_prime", type=float, default=1.0, help=f"{ART}")
    sp.add_argument("--n", type=_count, default=100_000, help=f"draws per arm, default 100000 {ART}")
    _common(sp, "json")
    sp.set_defaults(handler=_cmd_elasticity)

    sp = sub.add_parser("smallfeedback", help="absolute-loss feedback gap vs the small-feedback bound")
    sp.add_argument("--beta", type=float, default=0.5, help=f"{ART}")
    sp.add_argument("--sigma", type=float, default=0.5)
    sp.add_argument("--c", type=float, default=1.0, help=f"{ART}")
    sp.add_argument("--alpha", type=float, default=1.0, help=f"{ART}")
    sp.add_argument("--n", type=_count, default=100_000, help=f"{ART}")
    _common(sp, "json")
    sp.set_defaults(handler=_cmd_smallfeedback)

    sp = sub.add_parser("impact", help="linear vs square-root impact deployment risk")
    sp.add_argument("--c", type=float, default=1.0, help=f"{ART}")
    sp.add_argument("--alpha", type=float, default=1.0, help=f"{ART}")
    sp.add_argument("--sigma", type=float, default=0.5)
    sp.add_argument("--linear-beta", dest="linear_beta", type=float, default=-1.0, help=f"{ART}")
    sp.add_argument("--eta", type=float, default=1.0, help=f"{ART}")
    sp.add_argument("--n", type=_count, default=200_000, help=f"{ART}")
    _common(sp, "json")
    sp.set_defaults(handler=_cmd_impact)

    sp = sub.add_parser("estimate", help="one randomized-action OLS fit with its error bounds")
    sp.add_argument("--theta", type=_floats, default=[1.0], help=f"{ART}")
    sp.add_argument("--beta", type=float, default=0.5, help=f"{ART}")
    sp.add_argument("--sigma", type=float, default=1.0, help=f"{ART}")
    sp.add_argument("--L", dest="L", type=float, default=2.0, help=f"{ART}")
    sp.add_argument("--a-max", dest="a_max", type=float, default=1.0, help=f"{ART}")
    sp.add_argument("--n", type=_count, default=10_000, help=f"{ART}")
    sp.add_argument("--lambda", dest="lam", type=float, default=0.25, help=f"{ART}")
    sp.add_argument("--delta", type=float, default=0.05, help=f"{ART}")
    sp.add_argument("--alpha", type=float, default=1.0, help=f"policy intensity {ART}")
    sp.add_argument("--n-outer", dest="n_outer", type=_count, default=10_000, help=f"{ART}")
    sp.add_argument("--eta", type=float, default=None, help="also fit square-root impact data with this scale")
    _common(sp, "json")
    sp.set_defaults(handler=_cmd_estimate)

    sp = sub.add_parser("coverage", help="repeated fits: how often the finite-sample bounds hold")
    sp.add_argument("--p", type=int, default=2, help=f"{ART}")
    sp.add_argument("--n", type=_count, default=10_000, help=f"{ART}")
    sp.add_argument("--sigma", type=float, default=1.0, help=f"{ART}")
    sp.add_argument("--L", dest="L", type=float, default=2.0, help=f"{ART}")
    sp.add_argument("--a-max", dest="a_max", type=float, default=1.0, help=f"{ART}")
    sp.add_argument("--lambda", dest="lam", type=float, default=0.25, help=f"{ART}")
    sp.add_argument("--delta", type=float, default=0.05, help=f"{ART}")
    sp.add_argument("--trials", type=int, default=500, help=f"{ART}")
    sp.add_argument("--w-true", dest="w_true", type=_floats, default=None,
                    help=f"default 1,...,1,0.5 {ART}")
    sp.add_argument("--alpha", type=float, default=1.0, help=f"policy intensity {ART}")
    sp.add_argument("--n-outer", dest="n_outer", type=_count, default=10_000, help=f"{ART}")
    _common(sp, "json")
    sp.set_defaults(handler=_cmd_coverage)
    return parser


def _apply_config(parser, argv):
    """Re-parse with defaults taken from ``--config``; explicit flags still win."""
    args = parser.parse_args(argv)
    if not args.config:
        return args
    with open(args.config) as fh:
        config = json.load(fh)
    if not isinstance(config, dict):
        raise ArgumentError("config file must hold a JSON object")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in sub._actions}
    by_flag = {opt.lstrip("-"): a for a in sub._actions for opt in a.option_strings}
    defaults = {}
    for key, value in config.items():
        action = by_flag.get(key) or known.get(key.replace("-", "_"))
        if action is None or action.dest in ("help", "config"):
            raise ArgumentError(f"unknown config key {key!r} for {args.command}")
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        defaults[action.dest] = action.type(value) if action.type and isinstance(value, str) else value
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (ArgumentError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"feedbackrisk: error: {exc}", file=sys.stderr)
        return 2

    seed = SeedSpec(args.seed)
    try:
        text = args.handler(args, seed)
    except (ValueError, TypeError) as exc:
        print(f"feedbackrisk {args.command}: invalid arguments: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"feedbackrisk {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1

    if args.out:
        with io.open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
