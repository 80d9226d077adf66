"""Geometric multigrid hierarchy and V/W cycles on the penalized operator."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from .discretization import StokesOperator
from .domain import CellGrid, classify_dofs, coarsen_grid, pad_grid, partition_band
from .history import ResidualHistory
from .smoothers import IntegratedSmoother, SmootherConfig
from .transfer import TransferPair

log = logging.getLogger(__name__)

COARSE_CAP = 20000


@dataclass(frozen=True)
class CycleConfig:
    kind: str = "V"
    levels: int = 4
    smoother: SmootherConfig = SmootherConfig()

    def __post_init__(self):
        if self.kind not in ("V", "W"):
            raise ValueError(f"cycle kind must be 'V' or 'W', got {self.kind!r}")
        if self.levels < 1:
            raise ValueError(f"need at least one level, got {self.levels}")


@dataclass
class Level:
    grid: CellGrid
    op: StokesOperator
    transfer: TransferPair | None = None
    smoother: IntegratedSmoother | None = None


def alignment_padding(extents, levels: int):
    """Cells to add before/after each axis so every coarsening is aligned.

    Boundary layers at the low end grow to ``2**(levels-1)`` cells, and every
    extent becomes a multiple of ``2**(levels-1)``.
    """
    block = 2 ** (levels - 1)
    before = [block - 1] * len(extents)
    after = []
    for e, b in zip(extents, before):
        a = (-(e + b)) % block
        while a < b:
            a += block
        after.append(a)
    return tuple(before), tuple(after)


class MgHierarchy:
    """Levels finest to coarsest, each with its own re-discretized operator."""

    def __init__(
        self,
        grid: CellGrid,
        eta: float = 1e-3,
        gamma: float = 1e-3,
        levels: int = 4,
        smoother: SmootherConfig | None = None,
        align: bool = True,
        coarse_cap: int = COARSE_CAP,
    ):
        if levels < 1:
            raise ValueError(f"need at least one level, got {levels}")
        if gamma <= 0:
            raise ValueError("multigrid operator needs a positive penalty gamma")
        self.eta = eta
        self.gamma = gamma
        self.smoother_config = smoother or SmootherConfig()
        if any(e <= 2 ** (levels - 1) for e in grid.extents):
            raise ValueError(
                f"{levels} levels coarsen {grid.extents} below 2 cells per axis; use fewer levels"
            )
        if align and levels > 1:
            self.pad_before, self.pad_after = alignment_padding(grid.extents, levels)
        else:
            self.pad_before = self.pad_after = (0,) * grid.dim
        fine = pad_grid(grid, self.pad_before, self.pad_after)

        grids = [fine]
        for k in range(1, levels):
            if any(e < 4 for e in grids[-1].extents):
                raise ValueError(
                    f"{levels} levels coarsen {grid.extents} below 2 cells per axis; use fewer levels"
                )
            grids.append(coarsen_grid(grids[-1]))

        self.levels: list[Level] = []
        for k, g in enumerate(grids):
            dofs = classify_dofs(g)
            if k < levels - 1:
                dofs = partition_band(g, dofs, self.smoother_config.band_width)
            op = StokesOperator(g, dofs, eta, gamma)
            self.levels.append(Level(g, op))
        for fine_level, coarse_level in zip(self.levels, self.levels[1:]):
            fine_level.transfer = TransferPair(fine_level.op.dofs, coarse_level.op.dofs)
            fine_level.smoother = IntegratedSmoother(fine_level.op, self.smoother_config)

        coarse = self.levels[-1].op
        if coarse.n > coarse_cap:
            raise ValueError(
                f"coarsest level has {coarse.n} DOFs (cap {coarse_cap}); add multigrid levels"
            )
        self._coarse_lu = spla.splu(coarse.matrix.tocsc()) if coarse.n else None
        log.debug("hierarchy: %s", [(lv.grid.extents, lv.op.n) for lv in self.levels])

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    @property
    def n(self) -> int:
        return self.levels[0].op.n

    @property
    def finest(self) -> StokesOperator:
        return self.levels[0].op

    def coarse_solve(self, b):
        if self._coarse_lu is None:
            return np.zeros(0)
        return self._coarse_lu.solve(b)

    def cycle(self, b: np.ndarray, kind: str = "V") -> np.ndarray:
        """One cycle from a zero initial guess; a linear, symmetric map of ``b``."""
        b = np.asarray(b, dtype=np.float64)
        if b.shape != (self.n,):
            raise ValueError(f"right-hand side has length {b.shape}, expected {self.n}")
        if kind not in ("V", "W"):
            raise ValueError(f"cycle kind must be 'V' or 'W', got {kind!r}")
        return self._cycle(0, b, kind)

    def _cycle(self, k: int, b: np.ndarray, kind: str) -> np.ndarray:
        if k == self.n_levels - 1:
            return self.coarse_solve(b)
        level = self.levels[k]
        op, transfer = level.op, level.transfer
        x = level.smoother.smooth(np.zeros_like(b), b)
        rc = transfer.restrict(b - op.matrix @ x)
        ec = self._cycle(k + 1, rc, kind)
        if kind == "W" and k + 1 < self.n_levels - 1:
            coarse_op = self.levels[k + 1].op
            ec = ec + self._cycle(k + 1, rc - coarse_op.matrix @ ec, kind)
        x += transfer.prolong(ec)
        return level.smoother.smooth(x, b)

    def as_preconditioner(self, kind: str = "V"):
        return lambda s: self.cycle(s, kind)


def build_hierarchy(grid, eta=1e-3, gamma=1e-3, levels=4, smoother=None, **kwargs) -> MgHierarchy:
    return MgHierarchy(grid, eta, gamma, levels, smoother, **kwargs)


def cycle(hierarchy: MgHierarchy, b, config: CycleConfig | None = None):
    kind = config.kind if config else "V"
    return hierarchy.cycle(b, kind)


@dataclass
class SolveResult:
    x: np.ndarray
    history: ResidualHistory
    status: str

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def mg_solve(
    hierarchy: MgHierarchy,
    b: np.ndarray,
    tol: float = 1e-8,
    maxit: int = 100,
    kind: str = "V",
    x0: np.ndarray | None = None,
    divergence_limit: float = 1e8,
) -> SolveResult:
    """Stationary multigrid iteration ``x <- x + cycle(b - L~ x)``."""
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    op = hierarchy.finest
    b = np.asarray(b, dtype=np.float64)
    x = np.zeros(op.n) if x0 is None else np.array(x0, dtype=np.float64)
    history = ResidualHistory()
    bnorm = np.linalg.norm(b)
    r = b - op.matrix @ x
    rel = np.linalg.norm(r) / bnorm if bnorm > 0 else np.linalg.norm(r)
    history.record(0, rel)
    if rel < tol or bnorm == 0.0:
        return SolveResult(x, history, "converged")
    for it in range(1, maxit + 1):
        x += hierarchy.cycle(r, kind)
        r = b - op.matrix @ x
        rel = np.linalg.norm(r) / bnorm
        history.record(it, rel)
        if rel < tol:
            return SolveResult(x, history, "converged")
        if not np.isfinite(rel) or rel > divergence_limit:
            return SolveResult(x, history, "diverged")
    return SolveResult(x, history, "max-iterations")
