"""Compiled inner loops for the sequential sweeps.

All kernels update ``x`` in place and read the operator as raw CSR arrays
(``indptr``, ``indices``, ``data``).
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _row_residual(indptr, indices, data, x, b, i):
    acc = b[i]
    for t in range(indptr[i], indptr[i + 1]):
        acc -= data[t] * x[indices[t]]
    return acc


@njit(cache=True)
def dgs_forward(indptr, indices, data, mptr, midx, mval, d, order, x, b):
    for j in order:
        r = _row_residual(indptr, indices, data, x, b, j)
        s = r / d[j]
        for t in range(mptr[j], mptr[j + 1]):
            x[midx[t]] += s * mval[t]


@njit(cache=True)
def dgs_reverse_left(indptr, indices, data, mptr, midx, mval, d, order, x, b):
    for n in range(order.size - 1, -1, -1):
        j = order[n]
        r = 0.0
        for t in range(mptr[j], mptr[j + 1]):
            r += mval[t] * _row_residual(indptr, indices, data, x, b, midx[t])
        x[j] += r / d[j]


@njit(cache=True)
def extract_blocks(indptr, indices, data, blocks, sizes):
    """Dense principal sub-blocks; unused slots carry an identity pad."""
    nb, m = blocks.shape
    out = np.zeros((nb, m, m))
    for k in range(nb):
        size = sizes[k]
        for a in range(size):
            i = blocks[k, a]
            for t in range(indptr[i], indptr[i + 1]):
                col = indices[t]
                for c in range(size):
                    if blocks[k, c] == col:
                        out[k, a, c] += data[t]
                        break
        for a in range(size, m):
            out[k, a, a] = 1.0
    return out


@njit(cache=True)
def vanka_sweep(indptr, indices, data, blocks, sizes, classes, inverses, order, x, b):
    m = blocks.shape[1]
    r = np.zeros(m)
    for k in order:
        size = sizes[k]
        for a in range(size):
            r[a] = _row_residual(indptr, indices, data, x, b, blocks[k, a])
        inv = inverses[classes[k]]
        for a in range(size):
            acc = 0.0
            for c in range(size):
                acc += inv[a, c] * r[c]
            x[blocks[k, a]] += acc


@njit(cache=True)
def vanka_additive_correction(blocks, sizes, classes, inverses, r, out):
    for k in range(blocks.shape[0]):
        size = sizes[k]
        inv = inverses[classes[k]]
        for a in range(size):
            acc = 0.0
            for c in range(size):
                acc += inv[a, c] * r[blocks[k, c]]
            out[blocks[k, a]] += acc
