"""Symmetric relaxation for the staggered Stokes system.

* distributive Gauss-Seidel: a forward sweep on ``L M y = b`` followed by the
  exact reverse sweep on the left-transformed ``M^T L x = M^T b``;
* Vanka: one local saddle-point solve per pressure cell and its active
  faces, either multiplicatively (forward then reverse) or additively;
* the integrated step: Vanka on the boundary band, distributive sweeps on
  the rest, Vanka on the band again.

With a zero initial guess each of these maps ``b`` to ``x`` through a
symmetric matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import _kernels
from .discretization import StokesOperator, check_diagonal, restrict_to_subset
from .domain import CellLabel, partition_band

BOUNDARY_KINDS = ("multiplicative", "additive", "direct")


@dataclass(frozen=True)
class SmootherConfig:
    boundary: str = "multiplicative"
    sweeps: int = 1
    band_width: int = 1
    omega: float = 1.0
    # debug: drop the reverse distributive sweep to break symmetry on purpose
    skip_reverse: bool = False

    def __post_init__(self):
        if self.boundary not in BOUNDARY_KINDS:
            raise ValueError(f"boundary smoother must be one of {BOUNDARY_KINDS}, got {self.boundary!r}")
        if self.sweeps < 1:
            raise ValueError(f"boundary sweep count must be >= 1, got {self.sweeps}")
        if self.band_width < 1:
            raise ValueError(f"band width must be >= 1, got {self.band_width}")
        if not 0.0 < self.omega <= 1.0:
            raise ValueError(f"damping must lie in (0, 1], got {self.omega}")


def _csr_arrays(mat):
    return mat.indptr, mat.indices, mat.data


def _prepare(x, b, n):
    x = np.array(x, dtype=np.float64, copy=True)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if x.shape != (n,) or b.shape != (n,):
        raise ValueError(f"vectors must have length {n}")
    return x, b


class DistributiveGaussSeidel:
    """Distributive Gauss-Seidel restricted to a subset of active DOFs.

    The distribution matrix is cut down to the subset's rows and columns, so
    only DOFs in the subset change.  Traversal is ascending DOF index.
    """

    def __init__(self, op: StokesOperator, subset=None):
        self.op = op
        n = op.n
        self.subset = np.arange(n, dtype=np.int64) if subset is None else np.asarray(subset, dtype=np.int64)
        self.subset = np.unique(self.subset)
        self.M = restrict_to_subset(op.distributive_matrix, self.subset, n)
        self.d = np.asarray(op.matrix.multiply(self.M.T).sum(axis=1)).ravel()
        check_diagonal(self.d, self.subset)

    def forward(self, x, b):
        x, b = _prepare(x, b, self.op.n)
        _kernels.dgs_forward(*_csr_arrays(self.op.matrix), *_csr_arrays(self.M), self.d, self.subset, x, b)
        return x

    def reverse(self, x, b):
        x, b = _prepare(x, b, self.op.n)
        _kernels.dgs_reverse_left(*_csr_arrays(self.op.matrix), *_csr_arrays(self.M), self.d, self.subset, x, b)
        return x

    def symmetric(self, x, b, sweeps: int = 1, skip_reverse: bool = False):
        for _ in range(sweeps):
            x = self.forward(x, b)
            if not skip_reverse:
                x = self.reverse(x, b)
        return x


def dgs_forward(op, x, b, subset=None):
    return DistributiveGaussSeidel(op, subset).forward(x, b)


def dgs_reverse_left(op, x, b, subset=None):
    return DistributiveGaussSeidel(op, subset).reverse(x, b)


def symmetric_dgs(op, x, b, subset=None, sweeps: int = 1):
    return DistributiveGaussSeidel(op, subset).symmetric(x, b, sweeps)


class VankaSmoother:
    """Overlapping cell blocks (pressure plus active faces) with cached inverses.

    ``cells`` is a boolean mask over the grid; one block is built for every
    masked Interior cell.  Blocks are ordered colour-major (cell-coordinate
    parity, 2**dim colours), ascending cell index within a colour.
    """

    def __init__(self, op: StokesOperator, cells: np.ndarray | None = None):
        self.op = op
        dofs = op.dofs
        dim = dofs.dim
        labels = op.grid.labels
        mask = labels == CellLabel.INTERIOR
        if cells is not None:
            mask &= cells
        coords = np.nonzero(mask)
        ncell = coords[0].size
        width = 2 * dim + 1
        blocks = np.full((ncell, width), -1, dtype=np.int64)
        for a in range(dim):
            fidx = dofs.face_index[a]
            lo = fidx[coords]
            hi_coords = list(coords)
            hi_coords[a] = coords[a] + 1
            hi = fidx[tuple(hi_coords)]
            blocks[:, 2 * a] = lo
            blocks[:, 2 * a + 1] = hi
        blocks[:, -1] = dofs.cell_index[coords]
        # compact each row: active DOFs first, faces before the pressure
        sizes = (blocks >= 0).sum(axis=1)
        keyed = np.where(blocks >= 0, np.arange(width), width + np.arange(width))
        perm = np.argsort(keyed, axis=1, kind="stable")
        blocks = np.take_along_axis(blocks, perm, axis=1)
        color = np.zeros(ncell, dtype=np.int64)
        for a in range(dim):
            color += (coords[a] % 2) << a
        self.order = np.argsort(color, kind="stable").astype(np.int64)
        self.color = color
        self.cells = np.stack(coords, axis=1) if ncell else np.zeros((0, dim), dtype=np.int64)
        self.blocks = blocks
        self.sizes = sizes.astype(np.int64)
        local = _kernels.extract_blocks(*_csr_arrays(op.matrix), blocks, self.sizes)
        if ncell:
            flat = local.reshape(ncell, -1)
            uniq, classes = np.unique(flat, axis=0, return_inverse=True)
            self.local_classes = uniq.reshape(-1, width, width)
            self.classes = classes.ravel().astype(np.int64)
        else:
            self.local_classes = np.zeros((0, width, width))
            self.classes = np.zeros(0, dtype=np.int64)
        self.inverses = np.empty_like(self.local_classes)
        for k, mat in enumerate(self.local_classes):
            if np.linalg.cond(mat) > 1e14:
                raise ValueError(f"singular Vanka block (class {k}); is the penalty gamma > 0?")
            inv = np.linalg.inv(mat)
            self.inverses[k] = 0.5 * (inv + inv.T)
        self.dofs = np.unique(blocks[blocks >= 0])

    @property
    def n_blocks(self) -> int:
        return self.blocks.shape[0]

    @property
    def n_classes(self) -> int:
        return self.local_classes.shape[0]

    def block_dofs(self, k: int) -> np.ndarray:
        return self.blocks[k, : self.sizes[k]]

    def sweep(self, x, b, reverse: bool = False):
        x, b = _prepare(x, b, self.op.n)
        order = self.order[::-1].copy() if reverse else self.order
        _kernels.vanka_sweep(
            *_csr_arrays(self.op.matrix), self.blocks, self.sizes, self.classes, self.inverses, order, x, b
        )
        return x

    def multiplicative(self, x, b, sweeps: int = 1):
        for _ in range(sweeps):
            x = self.sweep(x, b)
            x = self.sweep(x, b, reverse=True)
        return x

    def additive(self, x, b, omega: float = 1.0, sweeps: int = 1):
        x, b = _prepare(x, b, self.op.n)
        for _ in range(sweeps):
            r = b - self.op.matrix @ x
            delta = np.zeros_like(x)
            _kernels.vanka_additive_correction(self.blocks, self.sizes, self.classes, self.inverses, r, delta)
            x += omega * delta
        return x


def vanka_setup(op: StokesOperator, band_cells: np.ndarray | None = None) -> VankaSmoother:
    return VankaSmoother(op, band_cells)


def vanka_multiplicative_symmetric(smoother: VankaSmoother, x, b, sweeps: int = 1):
    return smoother.multiplicative(x, b, sweeps)


def vanka_additive(smoother: VankaSmoother, x, b, omega: float = 1.0):
    return smoother.additive(x, b, omega)


class DirectBand:
    """Exact solve of the band block ``L~[V1, V1]`` against the current residual."""

    def __init__(self, op: StokesOperator, subset):
        self.op = op
        self.subset = np.asarray(subset, dtype=np.int64)
        if self.subset.size:
            block = op.matrix[self.subset][:, self.subset].tocsc()
            self.lu = spla.splu(block)
        else:
            self.lu = None

    def apply(self, x, b):
        x, b = _prepare(x, b, self.op.n)
        if self.lu is not None:
            r = b - self.op.matrix @ x
            x[self.subset] += self.lu.solve(r[self.subset])
        return x


class IntegratedSmoother:
    """Band smoother, one symmetric distributive pass on the interior, band again."""

    def __init__(self, op: StokesOperator, config: SmootherConfig | None = None):
        self.op = op
        self.config = config or SmootherConfig()
        dofs = op.dofs if op.dofs.band is not None else partition_band(op.grid, op.dofs, self.config.band_width)
        self.dofs = dofs
        self.v1 = dofs.v1
        self.v2 = dofs.v2
        self.dgs = DistributiveGaussSeidel(op, self.v2)
        self.vanka = VankaSmoother(op, dofs.band_cells)
        self.direct = DirectBand(op, self.v1) if self.config.boundary == "direct" else None

    def boundary(self, x, b):
        cfg = self.config
        if not self.v1.size:
            return x
        if cfg.boundary == "multiplicative":
            return self.vanka.multiplicative(x, b, cfg.sweeps)
        if cfg.boundary == "additive":
            return self.vanka.additive(x, b, cfg.omega, cfg.sweeps)
        return self.direct.apply(x, b)

    def smooth(self, x, b):
        x = self.boundary(x, b)
        if self.v2.size:
            x = self.dgs.symmetric(x, b, skip_reverse=self.config.skip_reverse)
        return self.boundary(x, b)

    __call__ = smooth


def smooth(op, x, b, config: SmootherConfig | None = None):
    return IntegratedSmoother(op, config).smooth(x, b)
