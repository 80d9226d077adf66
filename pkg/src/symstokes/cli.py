"""``solver`` command line: run, census and verify."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .discretization import BoundaryData, write_matrix_market
from .domain import read_domain
from .driver import METHODS, Problem, SolverSettings, solve_driver, write_summary, write_vtk
from .scenarios import NAMES, ScenarioSpec, build
from .smoothers import BOUNDARY_KINDS, SmootherConfig

log = logging.getLogger("symstokes")

OUTPUT_ENV = "SYMSTOKES_OUTPUT_DIR"
EXIT_OK, EXIT_USAGE, EXIT_NOT_CONVERGED = 0, 1, 2


class ConfigError(ValueError):
    pass


_KEYS = {
    "scenario", "domain", "method", "cycle", "levels", "boundary_smoother", "sweeps",
    "band_width", "omega", "gamma", "eta", "tol", "maxit", "output_dir", "emit", "check_symmetry",
}
_SCENARIO_KEYS = {"name", "resolution", "size", "ubar", "obstacle", "seed"}
_EMIT_KEYS = {"csv", "vtk", "matrix"}


@dataclass
class RunConfig:
    scenario: ScenarioSpec | None = None
    domain: str | None = None
    method: str = "mg-sqmr"
    cycle: str = "V"
    levels: int = 4
    boundary_smoother: str = "multiplicative"
    sweeps: int = 1
    band_width: int = 1
    omega: float = 1.0
    gamma: float = 1e-3
    eta: float = 1e-3
    tol: float = 1e-8
    maxit: int = 100
    output_dir: str | None = None
    emit: dict = field(default_factory=lambda: {"csv": True, "vtk": False, "matrix": False})
    check_symmetry: bool = False

    @classmethod
    def from_dict(cls, data: dict, base: Path | None = None) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - _KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kw = dict(data)
        if ("scenario" in kw) == ("domain" in kw):
            raise ConfigError("give exactly one of 'scenario' or 'domain'")
        if "scenario" in kw:
            kw["scenario"] = _scenario(kw["scenario"])
        else:
            path = Path(kw["domain"])
            kw["domain"] = str(path if path.is_absolute() or base is None else base / path)
        emit = {"csv": True, "vtk": False, "matrix": False}
        extra = set(kw.get("emit", {})) - _EMIT_KEYS
        if extra:
            raise ConfigError(f"unknown emit flags: {sorted(extra)}")
        emit.update(kw.get("emit", {}))
        kw["emit"] = emit
        try:
            cfg = cls(**kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(data, path.parent)

    def validate(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}")
        if self.cycle not in ("V", "W"):
            raise ConfigError("cycle must be 'V' or 'W'")
        if self.boundary_smoother not in BOUNDARY_KINDS:
            raise ConfigError(f"boundary_smoother must be one of {BOUNDARY_KINDS}")
        for name in ("levels", "sweeps", "band_width", "maxit"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigError(f"{name} must be a positive integer")
        for name in ("omega", "gamma", "eta", "tol"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool) or not value > 0:
                raise ConfigError(f"{name} must be a positive number")

    def settings(self) -> SolverSettings:
        smoother = SmootherConfig(self.boundary_smoother, self.sweeps, self.band_width, self.omega)
        return SolverSettings(self.cycle, self.levels, smoother, self.gamma, self.tol, self.maxit, self.check_symmetry)

    def problem(self) -> Problem:
        if self.scenario is not None:
            grid, bc = build(self.scenario)
        else:
            try:
                grid = read_domain(self.domain)
            except OSError as exc:
                raise ConfigError(f"cannot read domain {self.domain}: {exc.strerror}") from None
            bc = BoundaryData.zeros(grid)
        return Problem(grid, bc, self.eta)

    def out_dir(self) -> Path:
        return Path(self.output_dir or os.environ.get(OUTPUT_ENV, "output"))


def _scenario(data) -> ScenarioSpec:
    if isinstance(data, str):
        data = {"name": data}
    if not isinstance(data, dict):
        raise ConfigError("scenario must be a name or an object")
    unknown = set(data) - _SCENARIO_KEYS
    if unknown:
        raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
    if data.get("name") not in NAMES:
        raise ConfigError(f"scenario name must be one of {NAMES}")
    kw = dict(data)
    for key in ("resolution", "size"):
        if isinstance(kw.get(key), list):
            kw[key] = tuple(kw[key])
    try:
        return ScenarioSpec(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def cmd_run(args) -> int:
    cfg = RunConfig.from_file(args.config)
    try:
        problem = cfg.problem()
        out = cfg.out_dir()
        out.mkdir(parents=True, exist_ok=True)
        run = solve_driver(problem, cfg.method, cfg.settings())
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    history = run.result.history
    if cfg.emit["csv"]:
        history.write_csv(out / f"history_{cfg.method}.csv")
    if cfg.emit["vtk"]:
        write_vtk(run.fields, out / "fields.vtk")
    if cfg.emit["matrix"]:
        from .discretization import StokesOperator

        op = StokesOperator(problem.grid, problem.dofs, cfg.eta, 0.0)
        write_matrix_market(out / "operator.mtx", op.matrix, "unpenalized Stokes operator")
    write_summary(
        out / "summary.txt",
        {
            "method": cfg.method,
            "status": run.status,
            "iterations": history.n_iterations,
            "final_residual": repr(history.final),
            "div_inf": repr(run.divergence),
            "unknowns": problem.dofs.n,
            "seconds": f"{run.seconds:.3f}",
        },
    )
    print(f"{cfg.method}: {run.status} after {history.n_iterations} iterations, "
          f"residual {history.final:.3e}, |Bu|inf {run.divergence:.3e}, {run.seconds:.2f} s")
    return EXIT_OK if run.result.converged else EXIT_NOT_CONVERGED


def cmd_census(args) -> int:
    cfg = RunConfig.from_file(args.config)
    try:
        total, boundary = cfg.problem().census(cfg.band_width)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    pct = 100.0 * boundary / total if total else 0.0
    print(f"{total} {boundary} {pct:.2f}%")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_suite

    checks = run_suite(args.max_n, skip_reverse=args.skip_reverse)
    for check in checks:
        print(check.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_NOT_CONVERGED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="solver", description="Symmetric multigrid Stokes solver")
    parser.add_argument("--threads", type=int, default=None, help="numba worker threads")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="solve a configured problem")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("census", help="print total and boundary DOF counts")
    p.add_argument("config")
    p.set_defaults(func=cmd_census)
    p = sub.add_parser("verify", help="run the dense symmetry suite")
    p.add_argument("--max-n", type=int, default=5000, help="largest system to materialize")
    p.add_argument("--skip-reverse", action="store_true", help="debug: omit reverse DGS sweeps")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads is not None:
        import numba

        if args.threads < 1:
            print("error: --threads must be positive", file=sys.stderr)
            return EXIT_USAGE
        numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
