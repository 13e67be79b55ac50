"""
rou-lab command line.

    rou-lab calibrate            --config run.ini --out DIR
    rou-lab simulate-rosenblatt  --config run.ini --out DIR [--seed N]
    rou-lab simulate-rou         --config run.ini --out DIR [--seed N]
    rou-lab estimate             --path rou_path.csv --config run.ini --out DIR
    rou-lab montecarlo           --config run.ini --out DIR [--experiment KIND] [--workers N]
    rou-lab classify             --basis sin:1 --out DIR

Exit codes: 0 success, 1 invalid input, 2 runtime or estimator failure.
Every run writes manifest.json next to its outputs; an existing manifest, like
any other output, is only replaced under --force.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .artifacts import (
    read_two_column_csv,
    sha256_of,
    write_csv_atomic,
    write_json_atomic,
)
from .config import DEFAULT_WORKERS, RunConfig, load_config
from .errors import OutputExistsError, RouLabError, ValidationError, exit_code_for
from .estimators import EstimateResult, EstimatorKind, estimate
from .kernel import KernelConstants, calibrate_constants, load_constants, save_constants
from .model import (
    Assumption,
    DriftSpec,
    SamplePath,
    burn_in_steps,
    classify_assumption,
    parse_basis,
    simulate_rou,
)
from .montecarlo import ExperimentKind, run_experiment
from .rosenblatt import generate_brownian, rosenblatt_path_fast, write_path_csv

logger = logging.getLogger("rou_lab")

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(message)s"
MANIFEST_NAME = "manifest.json"


def configure_logging(output_dir: Path | None, quiet: bool = False) -> None:
    """File log in ``output_dir`` at INFO, plus stderr (WARNING when ``quiet``)."""
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()
    logger.setLevel(logging.INFO)
    formatter = logging.Formatter(LOG_FORMAT)
    stream = logging.StreamHandler(sys.stderr)
    stream.setLevel(logging.WARNING if quiet else logging.INFO)
    stream.setFormatter(formatter)
    logger.addHandler(stream)
    if output_dir is not None:
        output_dir.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(output_dir / "rou_lab.log", encoding="utf-8")
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)


# ─────────────────────────────────────────────
# argument parsing
# ─────────────────────────────────────────────


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with 1, the validation code, instead of argparse's 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI file with [model], [grid], [experiment]")
    common.add_argument("--out", type=Path, default=Path("rou_lab_out"), help="output directory")
    common.add_argument("--seed", type=int, help="override [experiment] base_seed")
    common.add_argument(
        "--workers", type=int, default=DEFAULT_WORKERS,
        help="replicate worker threads (default: $ROU_LAB_WORKERS or 1)",
    )
    common.add_argument("--force", action="store_true", help="overwrite existing outputs")
    common.add_argument("--quiet", action="store_true", help="only warnings and errors on stderr")
    common.add_argument("--calibration", type=Path, help="reuse kernel constants from this JSON file")

    parser = _Parser(prog="rou-lab", description="Rosenblatt OU simulation and drift estimation")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("calibrate", parents=[common], help="calibrate c_H' and d(H) on the lattice")
    sub.add_parser("simulate-rosenblatt", parents=[common], help="write one Rosenblatt path")
    sub.add_parser("simulate-rou", parents=[common], help="write one ROU path")

    p_est = sub.add_parser("estimate", parents=[common], help="estimate the drift from a path CSV")
    p_est.add_argument("--path", type=Path, required=True, help="CSV with header t,x")
    p_est.add_argument("--estimator", choices=["auto", *(k.value for k in EstimatorKind)])

    p_mc = sub.add_parser("montecarlo", parents=[common], help="run a replicated experiment")
    p_mc.add_argument("--experiment", choices=[k.value for k in ExperimentKind])

    p_cls = sub.add_parser("classify", parents=[common], help="classify a basis as A1 or A1*")
    p_cls.add_argument("--basis", help="comma list of const, sin:k, cos:k")
    return parser


# ─────────────────────────────────────────────
# helpers
# ─────────────────────────────────────────────


class Run:
    """State shared by one subcommand: resolved config, output dir, manifest."""

    def __init__(self, args: argparse.Namespace, config: RunConfig):
        self.args = args
        self.config = config
        self.out: Path = args.out
        self.outputs: list[str] = []
        self.calibration: dict[str, str] | None = None

    def target(self, name: str) -> Path:
        path = self.out / name
        if path.exists() and not self.args.force:
            raise OutputExistsError(f"{path} exists; pass --force to overwrite")
        self.outputs.append(name)
        return path

    def constants(self) -> KernelConstants:
        if self.args.calibration is not None:
            consts = load_constants(self.args.calibration)
            self.calibration = {
                "file": str(self.args.calibration),
                "sha256": sha256_of(self.args.calibration),
            }
            consts.check_hurst(self.config.hurst())
            return consts
        consts = calibrate_constants(self.config.hurst(), self.config.points_per_unit)
        path = save_constants(consts, self.target("constants.json"), force=self.args.force)
        self.calibration = {"file": path.name, "sha256": sha256_of(path)}
        return consts

    def write_manifest(self, extra: dict[str, Any] | None = None) -> None:
        manifest = {
            "subcommand": self.args.command,
            "version": __version__,
            "config": self.config.to_dict(),
            "config_file": str(self.args.config) if self.args.config else None,
            "workers": self.args.workers,
            "calibration": self.calibration,
            "outputs": self.outputs,
        }
        if extra:
            manifest.update(extra)
        write_json_atomic(self.out / MANIFEST_NAME, manifest, force=self.args.force)


def _check_outputs_free(run: Run, names: Sequence[str]) -> None:
    if run.args.force:
        return
    for name in names:
        if (run.out / name).exists():
            raise OutputExistsError(f"{run.out / name} exists; pass --force to overwrite")


def _path_from_csv(file: Path) -> SamplePath:
    t, x = read_two_column_csv(file)
    if t[0] != 0.0:
        raise ValidationError(f"{file}: the path must start at t = 0")
    steps = np.diff(t)
    if np.any(steps <= 0.0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise ValidationError(f"{file}: times must lie on a uniform grid")
    return SamplePath(times=np.arange(t.size) * steps[0], values=x)


# ─────────────────────────────────────────────
# subcommands
# ─────────────────────────────────────────────


def cmd_calibrate(run: Run) -> int:
    consts = run.constants()
    print(
        f"H={consts.H} points_per_unit={consts.points_per_unit} "
        f"c_Hprime={consts.c_Hprime:.17g} d_H={consts.d_H:.17g} "
        f"neighbor_weight={consts.neighbor_weight:.17g}"
    )
    run.write_manifest()
    return 0


def cmd_simulate_rosenblatt(run: Run) -> int:
    cfg = run.config
    _check_outputs_free(run, ["rosenblatt_path.csv"])
    lattice = generate_brownian(cfg.n_points, 1.0 / cfg.points_per_unit, cfg.base_seed)
    consts = run.constants()
    path = rosenblatt_path_fast(lattice, cfg.hurst(), consts)
    write_path_csv(path, run.target("rosenblatt_path.csv"), force=run.args.force)
    run.write_manifest({"seed": cfg.base_seed})
    return 0


def cmd_simulate_rou(run: Run) -> int:
    cfg = run.config
    _check_outputs_free(run, ["rou_path.csv"])
    params = cfg.model_params()
    delta = 1.0 / cfg.points_per_unit
    if cfg.horizon < 1:
        raise ValidationError(f"horizon must be a positive integer, got {cfg.horizon!r}")
    b = burn_in_steps(cfg.resolved_burn_in(), delta)
    lattice = generate_brownian(b + cfg.horizon * cfg.points_per_unit + 1, delta, cfg.base_seed)
    consts = run.constants()
    noise = rosenblatt_path_fast(lattice, params.hurst, consts)
    X = simulate_rou(params, noise, x0=cfg.x0, burn_in=b * delta, noise_scale=cfg.noise_scale)
    write_csv_atomic(
        run.target("rou_path.csv"), ["t", "x"], zip(X.times, X.values), force=run.args.force
    )
    run.write_manifest({"seed": cfg.base_seed})
    return 0


def cmd_estimate(run: Run) -> int:
    cfg = run.config
    _check_outputs_free(run, ["estimate.csv"])
    params = cfg.model_params()
    X = _path_from_csv(run.args.path)
    exp = cfg.experiment_config()
    kind = exp.estimator
    result = estimate(kind, X, params.drift.basis, params.hurst, exp.resolved_phi_extra)
    header = EstimateResult.csv_header(params.drift.p)
    write_csv_atomic(
        run.target("estimate.csv"), header, [result.to_csv_row(0, cfg.base_seed)], force=run.args.force
    )
    names = [*(f"mu_hat_{i + 1}" for i in range(params.drift.p)), "alpha_hat"]
    print(", ".join(f"{name}={value:.10g}" for name, value in zip(names, result.theta_hat)))
    run.write_manifest({"path_file": str(run.args.path), "path_sha256": sha256_of(run.args.path)})
    return 0


def cmd_montecarlo(run: Run) -> int:
    cfg = run.config
    _check_outputs_free(run, ["replicates.csv", "summary.json"])
    kind = cfg.experiment_kind()
    exp = cfg.experiment_config()
    consts = run.constants()
    report = run_experiment(kind, exp, consts, workers=run.args.workers)
    write_csv_atomic(run.target("replicates.csv"), report.header, report.rows, force=run.args.force)
    write_json_atomic(run.target("summary.json"), report.to_summary(), force=run.args.force)
    excluded = report.excluded_counts
    if excluded:
        logger.warning(f"Excluded replicates: {excluded}")
    run.write_manifest()
    return 0


def cmd_classify(run: Run) -> int:
    cfg = run.config
    basis = parse_basis(run.args.basis) if run.args.basis else parse_basis(cfg.basis)
    mu = cfg.mu if len(cfg.mu) == len(basis) else (1.0,) * len(basis)
    result = classify_assumption(DriftSpec(basis, mu))
    print(result.describe())
    extra = {
        "basis": [phi.name for phi in basis],
        "assumption": result.assumption.value,
        "suggested_phi": result.suggested_phi.name if result.assumption is Assumption.A1 else None,
    }
    run.write_manifest(extra)
    return 0


COMMANDS = {
    "calibrate": cmd_calibrate,
    "simulate-rosenblatt": cmd_simulate_rosenblatt,
    "simulate-rou": cmd_simulate_rou,
    "estimate": cmd_estimate,
    "montecarlo": cmd_montecarlo,
    "classify": cmd_classify,
}


def dispatch(argv: Sequence[str]) -> int:
    """Parse ``argv``, run the subcommand, and return the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.workers < 1:
            raise ValidationError(f"--workers must be >= 1, got {args.workers}")
        configure_logging(args.out, args.quiet)
        config = load_config(args.config).with_overrides(
            base_seed=args.seed,
            kind=getattr(args, "experiment", None),
            estimator=getattr(args, "estimator", None),
        )
        logger.info(f"rou-lab {__version__}: {args.command} -> {args.out}")
        run = Run(args, config)
        _check_outputs_free(run, [MANIFEST_NAME])
        return COMMANDS[args.command](run)
    except RouLabError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    except Exception as exc:
        logger.exception(f"Unexpected failure in {args.command}")
        print(f"error: {exc}", file=sys.stderr)
        return exit_code_for(exc)


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
