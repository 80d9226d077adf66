"""Problem setup, solver dispatch and field output."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .discretization import BoundaryData, StokesOperator, assemble_rhs
from .domain import ACTIVE, DIRICHLET_VALUE, CellGrid, DofMap, classify_dofs, partition_band
from .krylov import sqmr_solve
from .multigrid import MgHierarchy, SolveResult, mg_solve
from .smoothers import SmootherConfig

log = logging.getLogger(__name__)

METHODS = ("mg", "mg-sqmr", "sqmr")


@dataclass
class Problem:
    grid: CellGrid
    bc: BoundaryData
    eta: float = 1e-3
    dofs: DofMap = field(init=False)
    b: np.ndarray = field(init=False)

    def __post_init__(self):
        self.dofs = classify_dofs(self.grid)
        self.b = assemble_rhs(self.grid, self.dofs, self.bc, self.eta)

    def census(self, band_width: int = 1) -> tuple[int, int]:
        banded = partition_band(self.grid, self.dofs, band_width)
        return banded.n, int(banded.band.sum())


@dataclass
class SolverSettings:
    cycle: str = "V"
    levels: int = 4
    smoother: SmootherConfig = field(default_factory=SmootherConfig)
    gamma: float = 1e-3
    tol: float = 1e-8
    maxit: int = 100
    check_symmetry: bool = False


@dataclass
class Fields:
    """Face velocities (Dirichlet values filled in, inactive faces zero) and cell pressures."""

    velocity: tuple
    pressure: np.ndarray
    h: float

    def cell_velocity(self) -> np.ndarray:
        comps = []
        for axis, u in enumerate(self.velocity):
            lo = [slice(None)] * u.ndim
            hi = [slice(None)] * u.ndim
            lo[axis] = slice(0, -1)
            hi[axis] = slice(1, None)
            comps.append(0.5 * (u[tuple(lo)] + u[tuple(hi)]))
        return np.stack(comps, axis=-1)


@dataclass
class DriverResult:
    method: str
    result: SolveResult
    fields: Fields
    divergence: float
    seconds: float

    @property
    def status(self) -> str:
        return self.result.status


def unpack(problem: Problem, x: np.ndarray) -> Fields:
    dofs = problem.dofs
    velocity = []
    for axis in range(problem.grid.dim):
        status = dofs.face_status[axis]
        u = np.zeros(status.shape)
        dirichlet = status == DIRICHLET_VALUE
        u[dirichlet] = np.asarray(problem.bc.dirichlet[axis])[dirichlet]
        active = status == ACTIVE
        u[active] = x[dofs.face_index[axis][active]]
        velocity.append(u)
    pressure = np.zeros(problem.grid.extents)
    inside = dofs.cell_index >= 0
    pressure[inside] = x[dofs.cell_index[inside]]
    if inside.any():
        pressure[inside] -= pressure[inside].mean()
    return Fields(tuple(velocity), pressure, problem.grid.h)


def continuity_residual(problem: Problem, x: np.ndarray, op: StokesOperator) -> float:
    """``max |B u - g|`` over pressure rows, Dirichlet fluxes included."""
    r = (problem.b - op.matrix @ x)[op.dofs.pressure_slice]
    return float(np.abs(r).max()) if r.size else 0.0


def _assert_symmetric(hierarchy: MgHierarchy, kind: str) -> None:
    from .verify import MATERIALIZE_CAP, SYMMETRY_TOL, materialize, symmetry_defect

    if hierarchy.n > MATERIALIZE_CAP:
        log.warning("symmetry check skipped: %d DOFs exceed the dense cap", hierarchy.n)
        return
    defect = symmetry_defect(materialize(hierarchy.as_preconditioner(kind), hierarchy.n))
    if defect >= SYMMETRY_TOL:
        raise AssertionError(f"preconditioner symmetry defect {defect:.3e}")
    log.info("preconditioner symmetry defect %.3e", defect)


def solve_driver(problem: Problem, method: str, settings: SolverSettings | None = None) -> DriverResult:
    """Run one of ``mg`` (on L~), ``mg-sqmr`` (SQMR on L, cycle on L~) or ``sqmr``."""
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    s = settings or SolverSettings()
    start = time.perf_counter()
    if method == "sqmr":
        op = StokesOperator(problem.grid, problem.dofs, problem.eta, 0.0)
        result = sqmr_solve(op.matrix, problem.b, None, s.tol, s.maxit)
    else:
        hierarchy = MgHierarchy(problem.grid, problem.eta, s.gamma, s.levels, s.smoother)
        op = hierarchy.finest.with_gamma(0.0)
        if s.check_symmetry:
            _assert_symmetric(hierarchy, s.cycle)
        if method == "mg":
            result = mg_solve(hierarchy, problem.b, s.tol, s.maxit, s.cycle)
        else:
            result = sqmr_solve(op.matrix, problem.b, hierarchy.as_preconditioner(s.cycle), s.tol, s.maxit)
    seconds = time.perf_counter() - start
    # padding keeps the active numbering, so the unpadded problem reads x directly
    div = continuity_residual(problem, result.x, op)
    return DriverResult(method, result, unpack(problem, result.x), div, seconds)


def write_vtk(fields: Fields, path, title: str = "stokes") -> None:
    """Legacy ASCII structured-points file with cell-centered pressure and velocity."""
    p = fields.pressure
    dim = p.ndim
    points = [e + 1 for e in p.shape] + [1] * (3 - dim)
    vel = fields.cell_velocity()
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        "DIMENSIONS " + " ".join(map(str, points)),
        "ORIGIN 0 0 0",
        "SPACING " + " ".join([repr(float(fields.h))] * 3),
        f"CELL_DATA {p.size}",
        "SCALARS pressure double 1",
        "LOOKUP_TABLE default",
    ]
    # VTK orders cells with x varying fastest
    lines += [repr(float(v)) for v in np.ravel(p, order="F")]
    lines.append("VECTORS velocity double")
    comps = [np.ravel(vel[..., a], order="F") for a in range(dim)]
    comps += [np.zeros(p.size)] * (3 - dim)
    for row in zip(*comps):
        lines.append(" ".join(repr(float(c)) for c in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_summary(path, items: dict) -> None:
    Path(path).write_text("".join(f"{k}={v}\n" for k, v in items.items()))


def read_summary(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        if line.strip():
            key, _, value = line.partition("=")
            out[key] = value
    return out
