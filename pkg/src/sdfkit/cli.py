"""Command-line front end.

Exit status 0 on success, 1 on a domain failure (arbitrage where it is not
allowed, infeasibility, non-convergence), 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ArbitrageDetected, InputError, IoFailure, SchemaError, SdfError
from .ftap import ftap_verdict, sdf_solution_space
from .ito import (
    bessel_counterexamples,
    load_model,
    martingale_test,
    risk_premium_star,
    sdf_compose,
    sdf_star_paths,
    simulate,
    wealth_paths,
)
from .ito.bessel import reciprocal_bessel_mean
from .ito.model import ItoModelSpec
from .ito.paths import density_paths
from .market import load_claim, load_market
from .pricing import constant_rate, covariance_decomposition, indifference_price, price_bounds, replication_check
from .report import FORMATS, Report, digest, emit_report
from .utility import optimize, parse_utility, verify_sdf_martingale

DEFAULT_STEPS = 4


class _UsageError(Exception):
    def __init__(self, usage: str, message: str):
        super().__init__(message)
        self.usage = usage


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(self.format_usage(), message)


def _vector(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _utility(text: str):
    try:
        return parse_utility(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", metavar="DIR", help="write <command>.<ext> (and JSON) here instead of stdout")
    common.add_argument("--format", choices=FORMATS, default="json")

    utility = argparse.ArgumentParser(add_help=False)
    utility.add_argument("--utility", type=_utility, default=parse_utility("log"),
                         help="log | power:gamma=G | exp:alpha=A (default log)")
    utility.add_argument("--x", type=float, default=1.0, help="initial capital (default 1)")

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--paths", type=_positive_int, required=True)
    mc.add_argument("--steps", type=_positive_int, default=DEFAULT_STEPS)
    mc.add_argument("--seed", type=int, required=True)
    mc.add_argument("--workers", type=_positive_int, default=1)

    p = _Parser(prog="sdfkit", description="Pricing-kernel (SDF) toolkit.")
    p.add_argument("--version", action="version", version=f"sdfkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("analyze", parents=[common], help="no-arbitrage / SDF / risk-neutral verdicts")
    s.add_argument("market")
    s = sub.add_parser("optimize", parents=[common, utility], help="expected-utility optimum and its SDF")
    s.add_argument("market")
    s = sub.add_parser("price", parents=[common, utility], help="indifference price of a claim")
    s.add_argument("market")
    s.add_argument("claim")
    s = sub.add_parser("bounds", parents=[common], help="arbitrage-free price interval of a claim")
    s.add_argument("market")
    s.add_argument("claim")
    s = sub.add_parser("simulate", parents=[common, mc], help="simulate a model and test SDF martingales")
    s.add_argument("model")
    s.add_argument("--portfolio", type=_vector, help="constant proportions, comma-separated")
    s.add_argument("--kappa", type=_vector, help="kernel vector, comma-separated")
    s = sub.add_parser("decompose", parents=[common, mc], help="compose Y* with a kernel density")
    s.add_argument("model")
    s.add_argument("--kappa", type=_vector, required=True)
    s = sub.add_parser("bessel", parents=[common, mc], help="Bessel(3) counterexamples")
    s.add_argument("--kind", type=int, choices=(1, 2), required=True)
    s.add_argument("--T", type=float, default=1.0)
    return p


# -- command bodies ----------------------------------------------------------

def _vec(a):
    return None if a is None else np.asarray(a, dtype=float).tolist()


def cmd_analyze(args):
    market = load_market(args.market)
    rep = ftap_verdict(market)
    out = {
        "verdict": {"no_arbitrage": rep.no_arbitrage, "sdf_exists": rep.sdf_exists,
                    "risk_neutral_exists": rep.rn_exists},
        "sdf": _vec(rep.sdf.y_T) if rep.sdf else None,
        "risk_neutral": _vec(rep.risk_neutral.q) if rep.risk_neutral else None,
        "certificate": None,
        "sdf_space": None,
    }
    if rep.certificate is not None:
        out["certificate"] = {"theta": _vec(rep.certificate.theta), "payoff": _vec(rep.certificate.payoff)}
    if rep.no_arbitrage:
        space = sdf_solution_space(market)
        out["sdf_space"] = {"dimension": space.dimension, "rank": space.rank,
                            "particular": _vec(space.particular.y_T), "basis": _vec(space.basis)}
    return out, None


def cmd_optimize(args):
    market = load_market(args.market)
    sol = optimize(market, args.utility, args.x)
    check = verify_sdf_martingale(market, sol)
    return {
        "utility": args.utility.label(),
        "x": sol.x,
        "theta_star": _vec(sol.theta_star),
        "wealth_star": _vec(sol.wealth_star),
        "expected_utility": sol.objective,
        "sdf": _vec(sol.sdf.y_T),
        "iterations": sol.iterations,
        "grad_norm": sol.grad_norm,
        "sdf_pricing_max_error": check.max_deviation,
    }, None


def _interval(iv):
    return {"lower": iv.lower, "upper": iv.upper, "lower_attained": iv.lower_attained,
            "upper_attained": iv.upper_attained}


def _replication(rep):
    return {"replicable": rep.replicable, "x": rep.x, "theta": _vec(rep.theta), "residual": rep.residual}


def cmd_price(args):
    market = load_market(args.market)
    claim = load_claim(args.claim, market)
    h0 = indifference_price(market, args.utility, args.x, claim, verify=True)
    sol = optimize(market, args.utility, args.x)
    try:
        constant_rate(market)
    except InputError:
        decomposition = None
    else:
        d = covariance_decomposition(market, sol.sdf, claim)
        decomposition = {"rn_term": d.rn_term, "cov_term": d.cov_term, "total": d.total}
    return {
        "claim": claim.name,
        "utility": args.utility.label(),
        "x": args.x,
        "price": h0,
        "replication": _replication(replication_check(market, claim)),
        "bounds": _interval(price_bounds(market, claim)),
        "decomposition": decomposition,
    }, None


def cmd_bounds(args):
    market = load_market(args.market)
    claim = load_claim(args.claim, market)
    return {"claim": claim.name, "bounds": _interval(price_bounds(market, claim)),
            "replication": _replication(replication_check(market, claim))}, None


def _tests(named, times, idx):
    """Run martingale tests; returns (results dict, CSV rows)."""
    results, rows = {}, []
    for name, values, initial in named:
        t = martingale_test(values[:, idx], initial, times)
        results[name] = t.to_dict()
        for k in range(len(times)):
            rows.append((times[k], name, t.means[k], t.std_errors[k], t.n_paths))
    return results, rows


def _model_summary(model: ItoModelSpec):
    return model.to_dict()


def cmd_simulate(args):
    model = load_model(args.model)
    ens = simulate(model, args.steps, args.paths, args.seed, args.workers)
    idx = ens.checkpoint_indices()
    times = ens.time_grid[idx]
    out = {"model": _model_summary(model), "steps": args.steps, "paths": args.paths, "seed": args.seed}

    if model.kind != "constant_coefficients":
        if args.portfolio is not None or args.kappa is not None:
            raise SchemaError("--portfolio and --kappa need a constant-coefficient model")
        S = ens.S[:, :, 0]
        # Under P the Bessel market has Y = 1/S; its reciprocal needs no change of measure.
        Y = 1.0 / S if model.kind == "bessel3" else np.ones_like(S)
        named = [("Y*S0", Y, 1.0), ("Y*S1", Y * S, float(model.s0[0]))]
        out["tests"], rows = _tests(named, times, idx)
        return out, rows

    rp = risk_premium_star(model, args.kappa)
    Y = sdf_star_paths(ens, rp)
    growth = model.baseline_s0 / ens.beta  # S^0_t
    named = [("Y*S0", Y * growth, model.baseline_s0)]
    named += [(f"Y*S{i + 1}", Y * ens.S[:, :, i], float(model.s0[i])) for i in range(model.d)]
    out["lambda_star"] = _vec(rp.lambda_star)
    out["pi_star"] = _vec(rp.pi_star)
    out["pathwise_identity_max_error"] = float(np.max(np.abs(Y * wealth_paths(ens, rp.pi_star) - 1.0)))
    if args.portfolio is not None:
        named.append(("Y*X_pi", Y * wealth_paths(ens, args.portfolio), 1.0))
        out["portfolio"] = _vec(args.portfolio)
    if args.kappa is not None:
        Yk = sdf_compose(ens, rp)
        named.append(("Y_kappa*S0", Yk * growth, model.baseline_s0))
        named += [(f"Y_kappa*S{i + 1}", Yk * ens.S[:, :, i], float(model.s0[i])) for i in range(model.d)]
        out["kappa"] = _vec(args.kappa)
    out["tests"], rows = _tests(named, times, idx)
    return out, rows


def cmd_decompose(args):
    model = load_model(args.model)
    rp = risk_premium_star(model, args.kappa)
    lam, kap = rp.lambda_star, rp.kappa
    total = lam + kap
    ens = simulate(model, args.steps, args.paths, args.seed, args.workers)
    idx = ens.checkpoint_indices()
    Yk = sdf_compose(ens, rp)
    named = [("N_kappa", density_paths(ens, kap), 1.0)]
    named += [(f"Y_kappa*S{i + 1}", Yk * ens.S[:, :, i], float(model.s0[i])) for i in range(model.d)]
    tests, rows = _tests(named, ens.time_grid[idx], idx)
    return {
        "model": _model_summary(model),
        "steps": args.steps, "paths": args.paths, "seed": args.seed,
        "lambda_star": _vec(lam),
        "kernel_basis": _vec(rp.kernel_basis),
        "kappa": _vec(kap),
        "inner_product": float(lam @ kap),
        "pythagoras_residual": float(total @ total - lam @ lam - kap @ kap),
        "tests": tests,
    }, rows


def cmd_bessel(args):
    rep = bessel_counterexamples(args.T, args.paths, args.seed, args.steps, args.workers)
    out = {"kind": args.kind, "T": args.T, "steps": args.steps, "paths": args.paths, "seed": args.seed,
           "oracle_reciprocal_mean": reciprocal_bessel_mean(args.T)}
    if args.kind == 1:
        t = rep.discount_test
        out["pathwise_product_max_error"] = rep.max_pathwise_error
        out["discount_test"] = t.to_dict()
        out["terminal_z_vs_oracle"] = float((t.means[-1] - rep.oracle_mean) / t.std_errors[-1])
        rows = [(t.times[k], "Y*S0", t.means[k], t.std_errors[k], t.n_paths) for k in range(len(t.times))]
    else:
        out["terminal_mean"] = rep.terminal_mean
        out["terminal_std_error"] = rep.terminal_se
        out["price_gap"] = rep.price_gap
        out["oracle_gap"] = rep.oracle_gap
        out["gap_z_vs_oracle"] = float((rep.price_gap - rep.oracle_gap) / rep.terminal_se)
        out["gap_z_vs_zero"] = float(rep.price_gap / rep.terminal_se)
        rows = [(args.T, "S1", rep.terminal_mean, rep.terminal_se, rep.n_paths)]
    return out, rows


COMMANDS = {
    "analyze": (cmd_analyze, ("market",)),
    "optimize": (cmd_optimize, ("market",)),
    "price": (cmd_price, ("market", "claim")),
    "bounds": (cmd_bounds, ("market", "claim")),
    "simulate": (cmd_simulate, ("model",)),
    "decompose": (cmd_decompose, ("model",)),
    "bessel": (cmd_bessel, ()),
}

_NON_PARAMS = {"command", "out", "format", "workers"}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        stderr.write(exc.usage)
        stderr.write(f"error[E_USAGE]: {exc}\n")
        return 2
    func, file_args = COMMANDS[args.command]
    start = time.perf_counter()
    try:
        blobs = []
        for name in file_args:
            try:
                blobs.append(Path(getattr(args, name)).read_bytes())
            except OSError as exc:
                raise IoFailure(f"cannot read {name} file: {exc}") from None
        params = {k: (v.label() if hasattr(v, "label") else _vec(v) if isinstance(v, np.ndarray) else v)
                  for k, v in sorted(vars(args).items()) if k not in _NON_PARAMS and k not in file_args}
        blobs.append(json.dumps(params, sort_keys=True).encode())
        results, rows = func(args)
        report = Report(
            command=[args.command] + argv[1:],
            input_digest=digest(blobs),
            results=results,
            tool_version=__version__,
            wall_clock=time.perf_counter() - start,
            path_stats=rows,
        )
        emit_report(report, args.format, args.out, stdout)
    except SdfError as exc:
        stderr.write(f"error[{exc.code}]: {exc}\n")
        if isinstance(exc, ArbitrageDetected) and getattr(exc, "certificate", None) is not None:
            stderr.write(f"certificate theta: {_vec(exc.certificate.theta)}\n")
        return exc.exit_status
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
