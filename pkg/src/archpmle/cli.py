"""Command-line interface: ``archpmle {simulate,fit,check,weights,mc}``.

Exit codes: 0 success, 2 configuration error, 3 simulation overflow,
4 non-convergence (results still written), 5 singular Hessian.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
import warnings

import numpy as np

from archpmle.estimator import FitOptions, fit
from archpmle.exceptions import ArchError, SimulationOverflowError, SingularHessian
from archpmle.inference import sandwich
from archpmle.modelfile import ModelFileError, fmt, load_model, parse_model, read_series, write_atomic, write_csv
from archpmle.montecarlo import MCConfig, run_mc
from archpmle.process import SimConfig, scan_rho, simulate
from archpmle.weights import weights, weights_all

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_OVERFLOW = 3
EXIT_NONCONVERGED = 4
EXIT_SINGULAR = 5


class ConfigError(Exception):
    pass


def _json_value(v):
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    if isinstance(v, np.ndarray):
        return _json_value(v.tolist())
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    return v


def _dump_json(path, obj) -> None:
    write_atomic(path, json.dumps(_json_value(obj), indent=2) + "\n")


def _rho_grid(text: str) -> np.ndarray:
    try:
        lo, hi, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise ConfigError(f"--rho-grid must be LO:HI:STEP, got {text!r}") from None
    if not step > 0 or hi < lo:
        raise ConfigError("--rho-grid needs STEP > 0 and HI >= LO")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    grid = np.round(lo + step * np.arange(count), 12)
    if grid[0] <= 0 or grid[-1] >= 1:
        raise ConfigError("--rho-grid must lie inside (0, 1)")
    return grid


# ---------------------------------------------------------------------------
# commands


def cmd_simulate(args) -> int:
    model = load_model(args.model)
    cfg = SimConfig(
        model.theta, args.T, model.gamma, args.seed, args.nw, args.burn, allow_nonstationary=args.allow_nonstationary
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        series = simulate(cfg)
    write_csv(args.out, ["t", "y"], [series.y])
    return EXIT_OK


def cmd_fit(args) -> int:
    model = load_model(args.model)
    y = read_series(args.data)
    spec = model.spec
    if y.shape[0] < spec.r + 2:
        raise ConfigError(f"need at least r + 2 = {spec.r + 2} observations, got {y.shape[0]}")
    if spec.r:
        # surfaces PositivityError for models whose weights turn negative
        weights(spec, model.theta.zeta, max(y.shape[0] - 1, 1))
    opts = FitOptions(n_starts=args.starts, seed=args.seed, max_iter=args.max_iter)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = fit(y, spec, model.bounds, opts)
    names = res.theta.names
    out = {
        "family": spec.family.value,
        "names": names,
        "theta_hat": res.theta_hat,
        "qll": res.qll_min,
        "n_obs": res.n_obs,
        "level": args.level,
        "std_errors": None,
        "ci": None,
        "covariance": None,
        "diagnostics": {
            "converged": res.converged,
            "message": res.message,
            "iterations": res.iterations,
            "projected_grad_norm": res.projected_grad_norm,
            "boundary_flags": res.boundary_flags,
            "clt_safe": None,
            "condition_number": None,
            "hessian_eigenvalues": np.linalg.eigvalsh(0.5 * (res.hessian + res.hessian.T)),
        },
    }
    code = EXIT_OK if res.converged else EXIT_NONCONVERGED
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            inf = sandwich(res, level=args.level)
    except SingularHessian as exc:
        out["diagnostics"]["error"] = str(exc)
        _dump_json(args.out, out)
        if code == EXIT_NONCONVERGED:
            print(f"warning: optimizer did not converge ({res.message}); {exc}", file=sys.stderr)
            return code
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    out.update(std_errors=inf.std_errors, ci=inf.ci, covariance=inf.covariance)
    out["diagnostics"].update(clt_safe=inf.clt_safe, condition_number=inf.condition_number)
    _dump_json(args.out, out)
    if code == EXIT_NONCONVERGED:
        print(f"warning: optimizer did not converge ({res.message})", file=sys.stderr)
    return code


def cmd_check(args) -> int:
    grid = _rho_grid(args.rho_grid)
    model = load_model(args.model)
    rows = scan_rho(model.spec, model.theta.zeta, model.gamma, grid, args.nw)
    buf = io.StringIO()
    buf.write("rho\tmoment_factor\tweight_sum\tvalue\ttail_bound\tverdict\n")
    for c in rows:
        buf.write("\t".join([fmt(c.rho), fmt(c.moment_factor), fmt(c.weight_sum), fmt(c.value), fmt(c.tail_bound), c.verdict]))
        buf.write("\n")
    sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_weights(args) -> int:
    model = load_model(args.model)
    spec = model.spec
    if args.n < 1:
        raise ConfigError("--n must be at least 1")
    if spec.r == 0:
        psi, jac, hess = np.zeros(args.n), np.zeros((args.n, 0)), np.zeros((args.n, 0, 0))
    else:
        psi, jac, hess = weights_all(spec, model.theta.zeta, args.n, args.derivs, check_positive=False)
    names = spec.param_names()
    header = ["j", "psi"]
    cols = [psi]
    if args.derivs >= 1:
        header += [f"dpsi/d{nm}" for nm in names]
        cols += [jac[:, i] for i in range(len(names))]
    if args.derivs >= 2:
        for i in range(len(names)):
            for k in range(i, len(names)):
                header.append(f"d2psi/d{names[i]}d{names[k]}")
                cols.append(hess[:, i, k])
    write_csv(args.out, header, cols)
    return EXIT_OK


def _mc_config(path) -> tuple[MCConfig, int]:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or "model" not in doc:
        raise ConfigError("model: missing")
    try:
        model = parse_model(doc["model"])
    except ModelFileError as exc:
        raise ModelFileError(f"model.{exc.path}", str(exc).split(": ", 1)[-1]) from None
    for key in ("T", "R"):
        if key not in doc:
            raise ConfigError(f"{key}: missing")
    T = doc["T"] if isinstance(doc["T"], list) else [doc["T"]]
    if not all(isinstance(t, int) and not isinstance(t, bool) for t in T):
        raise ConfigError("T: expected integers")
    if not isinstance(doc["R"], int) or isinstance(doc["R"], bool):
        raise ConfigError("R: expected an integer")
    fit_doc = doc.get("fit", {})
    if not isinstance(fit_doc, dict):
        raise ConfigError("fit: expected an object")
    try:
        opts = FitOptions(**fit_doc)
    except TypeError as exc:
        raise ConfigError(f"fit: {exc}") from None
    workers = doc.get("workers", 1)
    cfg = MCConfig(
        theta0=model.theta,
        T_list=T,
        R=doc["R"],
        gamma=model.gamma,
        burn_in=int(doc.get("burn_in", 2_000)),
        seed=int(doc.get("seed", 0)),
        level=float(doc.get("level", 0.95)),
        bounds=model.bounds,
        n_weights=int(doc.get("n_weights", 10_000)),
        fit_options=opts,
    )
    return cfg, int(workers)


def cmd_mc(args) -> int:
    cfg, workers = _mc_config(args.config)
    if args.workers is not None:
        workers = args.workers
    if workers < 1:
        raise ConfigError("workers must be at least 1")
    report = run_mc(cfg, workers=workers)
    _dump_json(args.out, report.to_dict())
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="archpmle", description="ARCH(infinity) simulation and quasi-likelihood estimation.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate a path to CSV")
    s.add_argument("--model", required=True)
    s.add_argument("--T", type=int, required=True)
    s.add_argument("--burn", type=int, default=None, help="burn-in length (default min(10*nw, 100000))")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--nw", type=int, default=10_000, help="number of weights in the recursion")
    s.add_argument("--allow-nonstationary", action="store_true")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("fit", help="estimate a model from CSV data")
    f.add_argument("--model", required=True)
    f.add_argument("--data", required=True)
    f.add_argument("--level", type=float, default=0.95)
    f.add_argument("--starts", type=int, default=5, help="number of optimizer starts")
    f.add_argument("--seed", type=int, default=0, help="seed for start jitter")
    f.add_argument("--max-iter", type=int, default=500)
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_fit)

    c = sub.add_parser("check", help="moment condition over a rho grid (TSV to stdout)")
    c.add_argument("--model", required=True)
    c.add_argument("--rho-grid", default="0.5:0.99:0.01")
    c.add_argument("--nw", type=int, default=1_000_000)
    c.set_defaults(func=cmd_check)

    w = sub.add_parser("weights", help="weights and derivatives to CSV")
    w.add_argument("--model", required=True)
    w.add_argument("--n", type=int, required=True)
    w.add_argument("--derivs", type=int, choices=(0, 1, 2), default=0)
    w.add_argument("--out", required=True)
    w.set_defaults(func=cmd_weights)

    m = sub.add_parser("mc", help="Monte Carlo study to JSON")
    m.add_argument("--config", required=True)
    m.add_argument("--workers", type=int, default=None)
    m.add_argument("--out", required=True)
    m.set_defaults(func=cmd_mc)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SimulationOverflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW
    except SingularHessian as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except (ConfigError, ArchError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
