"""Batch entry points for simulation, estimation, benchmarks and networks.

Commands
--------
simulate
    Draw an i.i.d. sample from an elliptical stable model and write it as
    a headerless CSV matrix.
estimate
    Two-stage simulated-quantile fit of a CSV panel, written as JSON with
    standard errors and a summary table on stdout.
sparse
    Penalised fit at a fixed penalty level.
tune
    Penalised fit with the level chosen on a grid.
benchmark
    Replicated synthetic designs reduced to coverage and accuracy tables.
network
    Pairwise dominance graph of a fitted returns panel, written as DOT
    and JSON.

Configuration file
------------------
``--config`` names a JSON file whose top-level groups mirror the library
configuration objects:

* ``model``: alpha, xi, omega (simulate)
* ``n``: sample size (simulate)
* ``seed``: root seed shared by every stage unless ``--seed`` overrides it
* ``estimation``: MmsqConfig fields, optionally nested ``optimizer``
  settings, plus ``eta_mc_size``
* ``penalty``: lambda and a (sparse, benchmark, network)
* ``tune``: method, k_folds, grid (tune, benchmark)
* ``risk``: RiskConfig fields (network)
* ``design``: inline Design fields (simulate, benchmark)

Command line flags override the matching file entries.  Every run is a
pure function of the serialized run configuration: rerunning a command
with the same inputs produces byte-identical output files.

Exit codes: 0 success, 2 validation failure, 3 numeric failure, 4 I/O
failure.
"""

import argparse
import csv
import dataclasses
import json
import logging
import sys

import numpy as np

from .directions import build_direction_set
from .errors import DomainError, NumericError
from .estimation import (
    EstimationResult,
    MmsqConfig,
    OptimizerSettings,
    estimate,
    natural_vector,
    parameter_names,
)
from .metrics import Design, coverage_table, get_design, metric_table, run_experiment
from .risk import PortfolioModel, RiskConfig, build_network, network_to_dot, read_returns_panel
from .sparse import ScadParams, oracle_covariance, sparse_estimate, tune_lambda
from .stable import EsdParams, RngStream, init_esd, sample_esd

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Resolved invocation: command, paths, seed and every effective option.

    The serialized form is embedded in JSON outputs so any result file
    names the exact configuration that produced it.
    """

    command: str
    input_path: str | None
    output_path: str | None
    seed: int | None
    workers: int
    options: dict

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "input": self.input_path,
            "output": self.output_path,
            "seed": self.seed,
            "workers": self.workers,
            "options": self.options,
        }


def _load_config(path) -> dict:
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DomainError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise DomainError(f"config file {path} must hold a JSON object")
    return payload


def _read_matrix(path) -> np.ndarray:
    """Headerless numeric CSV matrix, the raw simulation format."""
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as exc:
                raise DomainError(
                    f"{path}: line {lineno} is not numeric: {exc}"
                ) from exc
            if len(rows[-1]) != len(rows[0]):
                raise DomainError(
                    f"{path}: line {lineno} has {len(rows[-1])} columns, "
                    f"expected {len(rows[0])}"
                )
    if not rows:
        raise DomainError(f"{path}: no data rows")
    return np.asarray(rows, dtype=float)


def _format_matrix(data: np.ndarray) -> str:
    lines = [",".join(format(v, ".17g") for v in row) for row in np.atleast_2d(data)]
    return "\n".join(lines) + "\n"


def _dump_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _model_params(cfg: dict) -> EsdParams:
    group = cfg.get("model")
    if not isinstance(group, dict):
        raise DomainError("config must provide a 'model' object or --design")
    for field in ("alpha", "xi", "omega"):
        if field not in group:
            raise DomainError(f"model config is missing the field {field!r}")
    return EsdParams.from_dict(group)


def _mmsq_config(cfg: dict, seed: int | None) -> tuple:
    """(MmsqConfig, eta_mc_size) from the 'estimation' group plus overrides."""
    group = dict(cfg.get("estimation", {}))
    eta_mc_size = int(group.pop("eta_mc_size", 200_000))
    opt = OptimizerSettings(**group.pop("optimizer", {}))
    if seed is not None:
        group["seed"] = seed
    elif "seed" not in group and "seed" in cfg:
        group["seed"] = cfg["seed"]
    try:
        config = MmsqConfig(optimizer=opt, **group)
    except TypeError as exc:
        raise DomainError(f"invalid estimation config: {exc}") from exc
    return config, eta_mc_size


def _risk_config(cfg: dict, args) -> RiskConfig:
    group = dict(cfg.get("risk", {}))
    if args.tau is not None:
        group["tau"] = args.tau
    if args.mc_size is not None:
        group["mc_size"] = args.mc_size
    if args.seed is not None:
        group["seed"] = args.seed
    elif "seed" not in group and "seed" in cfg:
        group["seed"] = cfg["seed"]
    try:
        return RiskConfig(**group)
    except TypeError as exc:
        raise DomainError(f"invalid risk config: {exc}") from exc


def _penalty(cfg: dict, override: float | None) -> ScadParams | None:
    group = dict(cfg.get("penalty", {}))
    if override is not None:
        group["lambda"] = override
    if not group:
        return None
    if "lambda" not in group:
        raise DomainError("penalty config is missing the field 'lambda'")
    return ScadParams(lambda_=float(group["lambda"]), a=float(group.get("a", 3.7)))


def _grid(cfg: dict, override: str | None) -> list | None:
    spec = override
    if spec is None:
        spec = cfg.get("tune", {}).get("grid")
    if spec is None:
        return None
    if isinstance(spec, str):
        try:
            values = [float(v) for v in spec.split(",") if v.strip()]
        except ValueError as exc:
            raise DomainError(f"invalid --grid value: {exc}") from exc
    else:
        values = [float(v) for v in spec]
    if not values:
        raise DomainError("penalty grid is empty")
    a = float(cfg.get("penalty", {}).get("a", 3.7))
    return [ScadParams(lambda_=v, a=a) for v in values]


def _resolve_design(cfg: dict, args) -> Design:
    overrides = {}
    if args.replications is not None:
        overrides["replications"] = args.replications
    if args.design is not None:
        return get_design(args.design, **overrides)
    group = cfg.get("design")
    if not isinstance(group, dict):
        raise DomainError("benchmark needs --design or a 'design' config object")
    fields = dict(group)
    fields.update(overrides)
    try:
        return Design(**fields)
    except TypeError as exc:
        raise DomainError(f"invalid design config: {exc}") from exc


def _write_output(path, text: str):
    if path is None:
        raise DomainError("this command requires --output")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    logger.info("wrote %s", path)


def _print_fit_table(theta: EsdParams, std_errors=None):
    names = parameter_names(theta.dim)
    values = natural_vector(theta)
    header = f"{'parameter':<12s} {'estimate':>14s}"
    if std_errors is not None:
        header += f" {'std. error':>14s}"
    print(header)
    for i, name in enumerate(names):
        line = f"{name:<12s} {values[i]:>14.8f}"
        if std_errors is not None:
            se = std_errors[i]
            line += f" {se:>14.8f}" if np.isfinite(se) else f" {'--':>14s}"
        print(line)


def cmd_simulate(run: RunConfig, cfg: dict, args) -> int:
    if args.design is not None:
        design = get_design(args.design)
        params, n = design.truth, design.n
    else:
        params = _model_params(cfg)
        n = cfg.get("n")
    if "n" in cfg:
        n = cfg["n"]
    if n is None:
        raise DomainError("config must provide the sample size 'n'")
    n = int(n)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    seed = run.seed if run.seed is not None else int(cfg.get("seed", 0))
    data = sample_esd(params, n, RngStream(seed, 0))
    _write_output(run.output_path, _format_matrix(data))
    print(f"simulated {n} x {params.dim} sample with seed {seed}")
    return 0


def _fit_payload(run: RunConfig, result: EstimationResult) -> dict:
    return {"run_config": run.to_dict(), "result": result.to_dict()}


def cmd_estimate(run: RunConfig, cfg: dict, args) -> int:
    data = _read_matrix(run.input_path)
    config, eta_mc_size = _mmsq_config(cfg, run.seed)
    result = estimate(data, config, eta_mc_size=eta_mc_size)
    if not result.converged:
        logger.warning("optimizer did not meet its tolerances; results kept")
    _write_output(run.output_path, _dump_json(_fit_payload(run, result)))
    _print_fit_table(result.theta, result.std_errors)
    return 0


def cmd_sparse(run: RunConfig, cfg: dict, args) -> int:
    data = _read_matrix(run.input_path)
    config, eta_mc_size = _mmsq_config(cfg, run.seed)
    penalty = _penalty(cfg, args.penalty_lambda)
    if penalty is None:
        raise DomainError("sparse needs --lambda or a 'penalty' config object")
    warm = estimate(data, config, eta_mc_size=eta_mc_size, with_covariance=False)
    result = sparse_estimate(data, config, penalty, warm=warm, eta_mc_size=eta_mc_size)
    if not result.converged:
        logger.warning("column sweeps did not converge; results kept")
    payload = {"run_config": run.to_dict(), "result": result.to_dict()}
    _write_output(run.output_path, _dump_json(payload))
    _print_fit_table(result.theta)
    active = ", ".join(f"({i + 1},{j + 1})" for i, j in result.active_set) or "none"
    print(f"penalty level {penalty.lambda_:.6g}; active pairs: {active}")
    return 0


def cmd_tune(run: RunConfig, cfg: dict, args) -> int:
    data = _read_matrix(run.input_path)
    config, eta_mc_size = _mmsq_config(cfg, run.seed)
    group = cfg.get("tune", {})
    lam_star, result = tune_lambda(
        data,
        config,
        p_grid=_grid(cfg, args.grid),
        method=group.get("method", "validation"),
        k_folds=int(group.get("k_folds", 5)),
        eta_mc_size=eta_mc_size,
    )
    payload = {
        "run_config": run.to_dict(),
        "lambda_star": lam_star,
        "result": result.to_dict(),
    }
    _write_output(run.output_path, _dump_json(payload))
    _print_fit_table(result.theta)
    print(f"selected penalty level {lam_star:.6g}")
    return 0


def cmd_benchmark(run: RunConfig, cfg: dict, args) -> int:
    design = _resolve_design(cfg, args)
    config, eta_mc_size = _mmsq_config(cfg, run.seed)
    group = cfg.get("tune", {})
    summary = run_experiment(
        design,
        config,
        workers=run.workers,
        penalty=_penalty(cfg, args.penalty_lambda),
        p_grid=_grid(cfg, args.grid),
        tune_method=group.get("method", "validation"),
        k_folds=int(group.get("k_folds", 5)),
        eta_mc_size=eta_mc_size,
    )
    prefix = run.output_path
    if prefix is None:
        raise DomainError("this command requires --output")
    _write_output(f"{prefix}_coverage.csv", coverage_table(summary))
    _write_output(f"{prefix}_metrics.csv", metric_table({design.estimator: summary}))
    done = design.replications - summary.failures
    print(
        f"design {design.name}: {done}/{design.replications} replications "
        f"succeeded; tables at {prefix}_coverage.csv, {prefix}_metrics.csv"
    )
    return 0


def cmd_network(run: RunConfig, cfg: dict, args) -> int:
    labels, data = read_returns_panel(run.input_path)
    if data.shape[1] < 2:
        raise DomainError("a dominance network needs at least 2 columns")
    config, eta_mc_size = _mmsq_config(cfg, run.seed)
    rcfg = _risk_config(cfg, args)
    warm = estimate(data, config, eta_mc_size=eta_mc_size)
    penalty = _penalty(cfg, args.penalty_lambda)
    if penalty is None:
        params = warm.theta
        cov, names = warm.covariance, tuple(parameter_names(data.shape[1]))
    else:
        fit = sparse_estimate(data, config, penalty, warm=warm, eta_mc_size=eta_mc_size)
        cov, names = oracle_covariance(
            fit.theta,
            fit.active_set,
            build_direction_set(init_esd(data)),
            config,
            n=data.shape[0],
            eta_mc_size=eta_mc_size,
        )
        params = fit.theta
    model = PortfolioModel(params, labels, cov, param_names=tuple(names))
    net = build_network(model, rcfg, workers=run.workers)
    prefix = run.output_path
    if prefix is None:
        raise DomainError("this command requires --output")
    payload = {
        "run_config": run.to_dict(),
        "model": {"theta": params.to_dict(), "param_names": list(names)},
        "network": net.to_dict(),
    }
    _write_output(f"{prefix}.json", _dump_json(payload))
    _write_output(f"{prefix}.dot", network_to_dot(net))
    print(
        f"network over {len(labels)} institutions: {net.total_edges} edges "
        f"(fraction {net.edge_fraction:.3f})"
    )
    return 0


_COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "sparse": cmd_sparse,
    "tune": cmd_tune,
    "benchmark": cmd_benchmark,
    "network": cmd_network,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stablequant",
        description="Quantile-based estimation for elliptical stable models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_, *, input_=False, design=False, lam=False, grid=False,
            workers=False, risk=False, replications=False):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", default=None, help="JSON configuration file")
        p.add_argument("--output", default=None, required=True,
                       help="output file (or prefix for multi-file commands)")
        p.add_argument("--seed", type=int, default=None,
                       help="root seed overriding the config file")
        if input_:
            p.add_argument("--input", required=True, help="input CSV file")
        if design:
            p.add_argument("--design", default=None,
                           help="named design: dim2, dim5, dim12 or dim27")
        if lam:
            p.add_argument("--lambda", dest="penalty_lambda", type=float,
                           default=None, help="penalty level")
        if grid:
            p.add_argument("--grid", default=None,
                           help="comma-separated penalty levels")
        if workers:
            p.add_argument("--workers", type=int, default=1,
                           help="worker process count")
        if risk:
            p.add_argument("--tau", type=float, default=None,
                           help="tail probability level")
            p.add_argument("--mc-size", dest="mc_size", type=int, default=None,
                           help="Monte Carlo sample size")
        if replications:
            p.add_argument("--replications", type=int, default=None,
                           help="replication count override")
        return p

    add("simulate", "draw a synthetic sample", design=True)
    add("estimate", "fit the plain model to a CSV panel", input_=True)
    add("sparse", "penalised fit at a fixed level", input_=True, lam=True)
    add("tune", "penalised fit with a tuned level", input_=True, grid=True)
    add("benchmark", "replicated synthetic designs", design=True, lam=True,
        grid=True, workers=True, replications=True)
    add("network", "dominance network of a returns panel", input_=True,
        lam=True, workers=True, risk=True)
    return parser


def main(argv=None) -> int:
    if not logging.getLogger().handlers:
        logging.basicConfig(
            level=logging.INFO, format="%(levelname)s %(name)s: %(message)s"
        )
    args = build_parser().parse_args(argv)
    options = {
        k: v
        for k, v in vars(args).items()
        if k not in {"command", "input", "output", "seed"} and v is not None
    }
    try:
        cfg = _load_config(args.config)
        run = RunConfig(
            command=args.command,
            input_path=getattr(args, "input", None),
            output_path=args.output,
            seed=args.seed,
            workers=getattr(args, "workers", 1),
            options={"flags": options, "config": cfg},
        )
        return _COMMANDS[args.command](run, cfg, args)
    except DomainError as exc:
        logger.error("validation failure: %s", exc)
        return 2
    except NumericError as exc:
        logger.error("numeric failure: %s", exc)
        return 3
    except OSError as exc:
        logger.error("i/o failure: %s", exc)
        return 4


if __name__ == "__main__":
    sys.exit(main())
