"""Dense materialization and structure checks for operators and smoothers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .discretization import StokesOperator
from .multigrid import MgHierarchy
from .scenarios import cavity
from .smoothers import BOUNDARY_KINDS, DistributiveGaussSeidel, IntegratedSmoother, SmootherConfig, VankaSmoother

MATERIALIZE_CAP = 5000
SYMMETRY_TOL = 1e-10


def materialize(linear_map, n: int, cap: int = MATERIALIZE_CAP) -> np.ndarray:
    """Column ``j`` is ``linear_map(e_j)``."""
    if n > cap:
        raise ValueError(f"cannot materialize {n} columns (cap {cap})")
    out = np.empty((n, n))
    e = np.zeros(n)
    for j in range(n):
        e[j] = 1.0
        out[:, j] = linear_map(e)
        e[j] = 0.0
    return out


def symmetry_defect(A) -> float:
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"need a square matrix, got shape {A.shape}")
    return np.linalg.norm(A - A.T) / max(np.linalg.norm(A), np.finfo(float).tiny)


def inertia(A) -> tuple[int, int, int]:
    """(positive, negative, zero) eigenvalue counts from an LDL^T factorization."""
    A = 0.5 * (A + A.T)
    _, D, _ = scipy.linalg.ldl(A)
    eig = []
    k = 0
    n = D.shape[0]
    while k < n:
        if k + 1 < n and D[k + 1, k] != 0.0:
            eig.extend(np.linalg.eigvalsh(D[k : k + 2, k : k + 2]))
            k += 2
        else:
            eig.append(D[k, k])
            k += 1
    eig = np.asarray(eig)
    scale = np.abs(eig).max() if eig.size else 1.0
    zero = np.abs(eig) <= 1e-13 * scale
    return int((eig > 0)[~zero].sum()), int((eig < 0)[~zero].sum()), int(zero.sum())


def _full_stencil_rows(op: StokesOperator) -> np.ndarray:
    """Rows whose stencil lost no leg to a boundary."""
    nnz = np.diff(op.matrix.indptr)
    dim = op.dofs.dim
    nv = op.dofs.n_vel
    full = np.zeros(op.n, dtype=bool)
    # velocity: self + 2d neighbours + 2 pressures; pressure: 2d faces (+ self when penalized)
    full[:nv] = nnz[:nv] == 2 * dim + 3
    diag_self = 1 if op.gamma != 0 else 0
    full[nv:] = nnz[nv:] == 2 * dim + diag_self
    visc = op.eta / op.h**2
    full[:nv] &= np.isclose(op.matrix.diagonal()[:nv], 2 * dim * visc)
    return full


def commutativity_report(op: StokesOperator, tol: float = 1e-12, deep_only: bool = True):
    """Velocity-row entries of ``L M`` in pressure columns that exceed ``tol``.

    With ``deep_only`` only columns whose distribution support consists of
    full-stencil DOFs are examined; those entries vanish when the discrete
    Laplacian and gradient commute.  Returns ``(row, column, value)`` tuples.
    """
    dofs = op.dofs
    nv = dofs.n_vel
    M = op.distributive_matrix
    LM = (op.matrix @ M).tocsc()
    full = _full_stencil_rows(op)
    out = []
    for j in range(nv, op.n):
        if deep_only:
            support = M.indices[M.indptr[j] : M.indptr[j + 1]]
            if not full[support].all():
                continue
        rows = LM.indices[LM.indptr[j] : LM.indptr[j + 1]]
        vals = LM.data[LM.indptr[j] : LM.indptr[j + 1]]
        for i, v in zip(rows, vals):
            if i < nv and abs(v) > tol:
                out.append((int(i), j, float(v)))
    return out


@dataclass
class Check:
    name: str
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value < self.tol)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name:<56s} {self.value:10.3e}  (< {self.tol:.0e})"


def _cavity_operator(resolution, gamma=1e-3, eta=1e-3):
    grid, _ = cavity(resolution)
    return grid, StokesOperator(grid, None, eta, gamma)


def smoother_checks(resolution, sweeps=(1, 2, 3), skip_reverse: bool = False, cap: int = MATERIALIZE_CAP):
    """Symmetry defects of every smoother on the cavity at ``resolution``."""
    grid, op = _cavity_operator(resolution)
    n = op.n
    tag = "x".join(map(str, resolution))
    checks = []
    dgs = DistributiveGaussSeidel(op)
    C = materialize(lambda b: dgs.symmetric(np.zeros(n), b, skip_reverse=skip_reverse), n, cap)
    checks.append(Check(f"{tag} symmetric DGS", symmetry_defect(C), SYMMETRY_TOL))
    integrated = IntegratedSmoother(op, SmootherConfig())
    vankas = {"band": VankaSmoother(op, integrated.dofs.band_cells), "all cells": VankaSmoother(op)}
    for nu in sweeps:
        for where, vanka in vankas.items():
            C = materialize(lambda b: vanka.additive(np.zeros(n), b, 1.0, nu), n, cap)
            checks.append(Check(f"{tag} additive Vanka ({where}) nu={nu}", symmetry_defect(C), SYMMETRY_TOL))
            C = materialize(lambda b: vanka.multiplicative(np.zeros(n), b, nu), n, cap)
            checks.append(Check(f"{tag} multiplicative Vanka ({where}) nu={nu}", symmetry_defect(C), SYMMETRY_TOL))
        for kind in BOUNDARY_KINDS:
            sm = IntegratedSmoother(op, SmootherConfig(kind, nu, skip_reverse=skip_reverse))
            C = materialize(lambda b: sm.smooth(np.zeros(n), b), n, cap)
            checks.append(Check(f"{tag} integrated ({kind}) nu={nu}", symmetry_defect(C), SYMMETRY_TOL))
    return checks


def cycle_checks(resolution, levels=(2, 3), sweeps=(1, 2, 3), skip_reverse=False, cap: int = MATERIALIZE_CAP):
    """Symmetry of V-cycles for every boundary smoother and sweep count, plus W-cycles."""
    grid, _ = cavity(resolution)
    tag = "x".join(map(str, resolution))
    runs = [("V", kind, nu) for kind in BOUNDARY_KINDS for nu in sweeps] + [("W", "multiplicative", 1)]
    checks = []
    for n_levels in levels:
        for cycle_kind, kind, nu in runs:
            cfg = SmootherConfig(kind, nu, skip_reverse=skip_reverse)
            hier = MgHierarchy(grid, 1e-3, 1e-3, n_levels, cfg)
            C = materialize(lambda b: hier.cycle(b, cycle_kind), hier.n, cap)
            name = f"{tag} {cycle_kind}-cycle {n_levels} levels ({kind}) nu={nu}"
            checks.append(Check(name, symmetry_defect(C), SYMMETRY_TOL))
    return checks


def run_suite(max_n: int = MATERIALIZE_CAP, skip_reverse: bool = False, sweeps=(1, 2, 3)):
    checks = []
    for res in ((8, 8), (12, 12), (16, 16), (6, 6, 6)):
        _, op = _cavity_operator(res)
        if op.n > max_n:
            continue
        checks += smoother_checks(res, sweeps, skip_reverse, cap=max_n)
    for res in ((16, 16), (6, 6, 6)):
        _, op = _cavity_operator(res)
        if op.n > max_n:
            continue
        checks += cycle_checks(res, sweeps=sweeps, skip_reverse=skip_reverse, cap=max_n)
    _, op = _cavity_operator((12, 12))
    deep = commutativity_report(op)
    checks.append(Check("12x12 commutativity violations (deep columns)", float(len(deep)), 0.5))
    return checks
