"""Grid transfers between consecutive levels.

Prolongation interpolates velocities (bi/trilinearly, using face-center
coordinates) and copies pressures from the enclosing coarse cell.
Restriction is ``P^T / c`` with ``c = 2**dim`` applied to the very same
sparse table, so ``P = c R^T`` holds bit for bit.  Stencil legs that land on a
non-active coarse DOF are dropped without renormalizing.
"""

from __future__ import annotations

import itertools

import numpy as np
import scipy.sparse as sp

from .domain import DofMap


def _axis_weights(fine_idx: np.ndarray, normal: bool):
    """Coarse index candidates and weights along one axis.

    ``normal`` axes carry face positions (fine face ``i`` sits at ``i h``);
    tangential axes carry cell-center positions.
    """
    if normal:
        base = fine_idx // 2
        odd = (fine_idx % 2) == 1
        first = (base, np.where(odd, 0.5, 1.0))
        second = (base + 1, np.where(odd, 0.5, 0.0))
    else:
        base = fine_idx // 2
        odd = (fine_idx % 2) == 1
        first = (base, np.full(fine_idx.shape, 0.75))
        second = (np.where(odd, base + 1, base - 1), np.full(fine_idx.shape, 0.25))
    return first, second


def _lookup(index: np.ndarray, coords):
    ok = np.ones(coords[0].shape, dtype=bool)
    for c, n in zip(coords, index.shape):
        ok &= (c >= 0) & (c < n)
    out = np.full(coords[0].shape, -1, dtype=np.int64)
    safe = tuple(np.where(ok, c, 0) for c in coords)
    out[ok] = index[safe][ok]
    return out


class TransferPair:
    """Prolongation table between a fine and the next coarser DOF map."""

    def __init__(self, fine: DofMap, coarse: DofMap):
        self.fine = fine
        self.coarse = coarse
        self.dim = fine.dim
        self.c = float(2**self.dim)
        self.P = self._build()

    def _build(self) -> sp.csr_matrix:
        rows, cols, vals = [], [], []
        for a in range(self.dim):
            fidx = self.fine.face_index[a]
            pos = np.nonzero(fidx >= 0)
            me = fidx[pos]
            per_axis = [_axis_weights(pos[b], b == a) for b in range(self.dim)]
            for choice in itertools.product((0, 1), repeat=self.dim):
                coords = [per_axis[b][k][0] for b, k in enumerate(choice)]
                weight = np.ones(me.shape)
                for b, k in enumerate(choice):
                    weight = weight * per_axis[b][k][1]
                target = _lookup(self.coarse.face_index[a], coords)
                keep = (target >= 0) & (weight != 0.0)
                rows.append(me[keep])
                cols.append(target[keep])
                vals.append(weight[keep])
        pos = np.nonzero(self.fine.cell_index >= 0)
        me = self.fine.cell_index[pos]
        target = _lookup(self.coarse.cell_index, [p // 2 for p in pos])
        keep = target >= 0
        rows.append(me[keep])
        cols.append(target[keep])
        vals.append(np.ones(keep.sum()))
        P = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.fine.n, self.coarse.n),
        ).tocsr()
        P.sort_indices()
        return P

    def prolong(self, xc: np.ndarray) -> np.ndarray:
        xc = np.asarray(xc, dtype=np.float64)
        if xc.shape != (self.coarse.n,):
            raise ValueError(f"coarse vector has length {xc.shape}, expected {self.coarse.n}")
        return self.P @ xc

    def restrict(self, rf: np.ndarray) -> np.ndarray:
        rf = np.asarray(rf, dtype=np.float64)
        if rf.shape != (self.fine.n,):
            raise ValueError(f"fine vector has length {rf.shape}, expected {self.fine.n}")
        # c is a power of two, so the division is exact
        return (self.P.T @ rf) / self.c

    @property
    def R(self) -> sp.csr_matrix:
        return (self.P.T / self.c).tocsr()
