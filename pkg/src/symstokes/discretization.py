"""Staggered finite-difference Stokes operator and right-hand sides.

The system over active DOFs is::

    L = [[A, B^T],      A = -eta * Laplacian (5/7-point, per velocity component)
         [B, -gamma I]] B = -div, B^T = grad

Dirichlet faces are eliminated into the right-hand side, legs into inactive
faces are dropped (zero Neumann flux).  The stencil is assembled once per
level into CSR; products and sweeps all read from that table.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.io
import scipy.sparse as sp

from .domain import ACTIVE, DIRICHLET_VALUE, INACTIVE, CellGrid, DofMap, _shift, classify_dofs

DENSE_CAP = 5000


@dataclass
class BoundaryData:
    """Dirichlet face values and body force, both stored on full face grids."""

    dirichlet: tuple
    force: tuple | None = None

    @classmethod
    def zeros(cls, grid: CellGrid) -> "BoundaryData":
        return cls(tuple(np.zeros(_face_shape(grid.extents, a)) for a in range(grid.dim)))

    def padded(self, before, after) -> "BoundaryData":
        pad = list(zip(before, after))
        dirichlet = tuple(np.pad(g, pad) for g in self.dirichlet)
        force = None if self.force is None else tuple(np.pad(f, pad) for f in self.force)
        return BoundaryData(dirichlet, force)


def _face_shape(extents, axis):
    shape = list(extents)
    shape[axis] += 1
    return tuple(shape)


def face_cell_indices(cell_index: np.ndarray, axis: int) -> tuple[np.ndarray, np.ndarray]:
    """Active index (or -1) of the low and high cell of each face normal to ``axis``."""
    pad = [(0, 0)] * cell_index.ndim
    pad[axis] = (1, 1)
    padded = np.pad(cell_index, pad, constant_values=-1)
    n = padded.shape[axis]
    lo = [slice(None)] * cell_index.ndim
    hi = [slice(None)] * cell_index.ndim
    lo[axis] = slice(0, n - 1)
    hi[axis] = slice(1, n)
    return padded[tuple(lo)], padded[tuple(hi)]


def _assemble(dofs: DofMap, h: float, eta: float, gamma: float, bc: BoundaryData | None):
    rows, cols, vals = [], [], []
    rhs = np.zeros(dofs.n)
    visc = eta / h**2
    dim = dofs.dim

    for a in range(dim):
        status = dofs.face_status[a]
        index = dofs.face_index[a]
        active = status == ACTIVE
        me = index[active]
        diag = np.zeros(me.size)
        for b in range(dim):
            for s in (-1, 1):
                nb_status = _shift(status, b, s, INACTIVE)[active]
                nb_index = _shift(index, b, s, -1)[active]
                diag += np.where(nb_status != INACTIVE, visc, 0.0)
                link = nb_status == ACTIVE
                rows.append(me[link])
                cols.append(nb_index[link])
                vals.append(np.full(link.sum(), -visc))
                if bc is not None:
                    wall = nb_status == DIRICHLET_VALUE
                    g = _shift(bc.dirichlet[a], b, s, 0.0)[active]
                    np.add.at(rhs, me[wall], visc * g[wall])
        rows.append(me)
        cols.append(me)
        vals.append(diag)
        if bc is not None and bc.force is not None:
            rhs[me] += bc.force[a][active]

        # continuity: B[c, f] = -1/h for the high face of c, +1/h for its low face
        lo_cell, hi_cell = face_cell_indices(dofs.cell_index, a)
        for cell, coef in ((lo_cell, -1.0 / h), (hi_cell, 1.0 / h)):
            link = active & (cell >= 0)
            c, f = cell[link], index[link]
            rows += [c, f]
            cols += [f, c]
            vals += [np.full(c.size, coef)] * 2
            if bc is not None:
                wall = (status == DIRICHLET_VALUE) & (cell >= 0)
                np.add.at(rhs, cell[wall], -coef * bc.dirichlet[a][wall])

    p = dofs.cell_index[dofs.cell_index >= 0]
    if gamma != 0.0:
        rows.append(p)
        cols.append(p)
        vals.append(np.full(p.size, -gamma))

    rows = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    cols = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    vals = np.concatenate(vals) if vals else np.zeros(0)
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(dofs.n, dofs.n)).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return mat, rhs


class StokesOperator:
    """Discrete Stokes operator ``L`` (gamma = 0) or penalized ``L~`` at one level."""

    def __init__(self, grid: CellGrid, dofs: DofMap | None = None, eta: float = 1e-3, gamma: float = 0.0):
        if gamma < 0:
            raise ValueError(f"penalty must be non-negative, got {gamma}")
        self.grid = grid
        self.dofs = classify_dofs(grid) if dofs is None else dofs
        self.eta = float(eta)
        self.gamma = float(gamma)
        self.h = grid.h
        self.matrix, _ = _assemble(self.dofs, grid.h, self.eta, self.gamma, None)

    @property
    def n(self) -> int:
        return self.dofs.n

    @property
    def shape(self):
        return (self.n, self.n)

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise ValueError(f"vector length {x.shape} does not match operator size {self.n}")
        return self.matrix @ x

    __call__ = apply

    def residual(self, x, b):
        return b - self.apply(x)

    def with_gamma(self, gamma: float) -> "StokesOperator":
        return StokesOperator(self.grid, self.dofs, self.eta, gamma)

    @cached_property
    def divergence(self) -> sp.csr_matrix:
        """The ``B`` block (pressure rows, velocity columns), gamma-independent."""
        ps = self.dofs.pressure_slice
        return self.matrix[ps, : self.dofs.n_vel].tocsr()

    @cached_property
    def distributive_matrix(self) -> sp.csc_matrix:
        """``M = [[I, -B^T], [0, eta B B^T]]`` over all active DOFs."""
        B = self.divergence
        nv = self.dofs.n_vel
        top = sp.hstack([sp.identity(nv, format="csr"), -B.T])
        bottom = sp.hstack([sp.csr_matrix((B.shape[0], nv)), self.eta * (B @ B.T)])
        M = sp.vstack([top, bottom]).tocsc()
        M.sum_duplicates()
        M.sort_indices()
        return M

    def distributive_column(self, j: int) -> sp.csc_matrix:
        if not 0 <= j < self.n:
            raise IndexError(f"DOF {j} out of range [0, {self.n})")
        return self.distributive_matrix[:, j]

    def distributive_diagonal(self, subset: np.ndarray | None = None) -> np.ndarray:
        """``d_j = L[j, :] . M[:, j]``.

        With ``subset`` given, ``M`` is first restricted to rows and columns in
        the subset (the form used when relaxing only that subset); entries
        outside the subset are returned as 0.
        """
        M = restrict_to_subset(self.distributive_matrix, subset, self.n)
        return np.asarray(self.matrix.multiply(M.T).sum(axis=1)).ravel()


def restrict_to_subset(M: sp.spmatrix, subset, n: int) -> sp.csc_matrix:
    if subset is None:
        return sp.csc_matrix(M)
    keep = np.zeros(n)
    keep[np.asarray(subset, dtype=np.int64)] = 1.0
    D = sp.diags(keep)
    out = (D @ M @ D).tocsc()
    out.eliminate_zeros()
    out.sort_indices()
    return out


def check_diagonal(d: np.ndarray, subset) -> None:
    subset = np.asarray(subset, dtype=np.int64)
    bad = subset[d[subset] == 0.0]
    if bad.size:
        raise ValueError(f"zero distributive diagonal at DOFs {bad[:10].tolist()}; relaxation undefined")


def assemble_rhs(grid: CellGrid, dofs: DofMap, bc: BoundaryData, eta: float = 1e-3) -> np.ndarray:
    """Body force plus Dirichlet contributions to momentum and continuity rows."""
    for a, g in enumerate(bc.dirichlet):
        g = np.asarray(g, dtype=np.float64)
        if g.shape != dofs.face_status[a].shape:
            raise ValueError(f"Dirichlet data for axis {a} has shape {g.shape}, expected {dofs.face_status[a].shape}")
        if not np.all(np.isfinite(g)):
            raise ValueError("boundary values must be finite")
        stray = (g != 0.0) & (dofs.face_status[a] != DIRICHLET_VALUE)
        if stray.any():
            where = tuple(int(v) for v in np.argwhere(stray)[0])
            raise ValueError(f"boundary value given on non-Dirichlet face {where} of axis {a}")
    _, rhs = _assemble(dofs, grid.h, eta, 0.0, bc)
    return rhs


def assemble_dense(op, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense matrix with entries ``<e_i, L e_j>``."""
    n = op.n
    if n > cap:
        raise ValueError(f"system has {n} DOFs, above the dense cap of {cap}")
    out = np.empty((n, n))
    e = np.zeros(n)
    for j in range(n):
        e[j] = 1.0
        out[:, j] = op.apply(e)
        e[j] = 0.0
    return out


def write_matrix_market(path, matrix, comment: str = "") -> None:
    scipy.io.mmwrite(str(path), sp.coo_matrix(matrix), comment=comment)
