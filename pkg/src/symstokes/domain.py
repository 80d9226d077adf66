"""Cell-labelled domains, degree-of-freedom classification and coarsening.

A domain is a uniform grid of cells, each labelled Dirichlet, Interior or
Exterior.  Velocities live on faces (MAC staggering), pressures at cell
centers.  Label arrays are indexed ``labels[i, j(, k)]`` with ``i`` along x.
Cells outside the array are treated as Exterior.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path

import numpy as np


class CellLabel(IntEnum):
    EXTERIOR = 0
    INTERIOR = 1
    DIRICHLET = 2


# face status codes
INACTIVE = 0
ACTIVE = 1
DIRICHLET_VALUE = 2

@dataclass(frozen=True, eq=False)
class CellGrid:
    """Uniform cell grid with spacing ``h`` and one label per cell."""

    labels: np.ndarray
    h: float

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int8)
        if labels.ndim not in (2, 3):
            raise ValueError(f"grid must be 2D or 3D, got {labels.ndim} dimensions")
        if min(labels.shape) < 1:
            raise ValueError(f"extents must be positive, got {labels.shape}")
        if not self.h > 0:
            raise ValueError(f"grid spacing must be positive, got {self.h}")
        if labels.size and (labels.min() < 0 or labels.max() > 2):
            raise ValueError("labels must be Dirichlet, Interior or Exterior")
        labels = labels.copy()
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.labels.ndim

    @property
    def extents(self) -> tuple[int, ...]:
        return tuple(self.labels.shape)

    def __eq__(self, other):
        if not isinstance(other, CellGrid):
            return NotImplemented
        return self.h == other.h and np.array_equal(self.labels, other.labels)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class DofMap:
    """Status and numbering of every face velocity and cell pressure.

    ``face_status[a]`` has the face-grid shape of axis ``a`` (extent + 1 along
    ``a``) and holds INACTIVE / ACTIVE / DIRICHLET_VALUE.  ``face_index[a]`` and
    ``cell_index`` hold global active indices or -1.  Velocities are numbered
    first (component by component, C-order over the face grid), then
    pressures.  ``band`` is a boolean mask over active DOFs (True = boundary
    set V1) or None before :func:`partition_band` ran.
    """

    face_status: tuple
    face_index: tuple
    cell_index: np.ndarray
    n_velocity: tuple
    n_pressure: int
    band: np.ndarray | None = None
    band_cells: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.cell_index.ndim

    @property
    def n(self) -> int:
        return sum(self.n_velocity) + self.n_pressure

    @property
    def n_vel(self) -> int:
        return sum(self.n_velocity)

    @property
    def velocity_slices(self) -> tuple[slice, ...]:
        out, start = [], 0
        for count in self.n_velocity:
            out.append(slice(start, start + count))
            start += count
        return tuple(out)

    @property
    def pressure_slice(self) -> slice:
        return slice(self.n_vel, self.n)

    @property
    def v1(self) -> np.ndarray:
        """Sorted active indices of the boundary set."""
        return np.flatnonzero(self._band_or_raise())

    @property
    def v2(self) -> np.ndarray:
        return np.flatnonzero(~self._band_or_raise())

    def _band_or_raise(self):
        if self.band is None:
            raise ValueError("band partition not computed; call partition_band first")
        return self.band


def _shift(arr: np.ndarray, axis: int, offset: int, fill) -> np.ndarray:
    """``out[p] = arr[p + offset * e_axis]`` with ``fill`` outside the array."""
    out = np.full_like(arr, fill)
    n = arr.shape[axis]
    if abs(offset) >= n:
        return out
    dst = [slice(None)] * arr.ndim
    src = [slice(None)] * arr.ndim
    if offset >= 0:
        dst[axis] = slice(0, n - offset)
        src[axis] = slice(offset, n)
    else:
        dst[axis] = slice(-offset, n)
        src[axis] = slice(0, n + offset)
    out[tuple(dst)] = arr[tuple(src)]
    return out


def face_neighbor_cells(labels: np.ndarray, axis: int) -> tuple[np.ndarray, np.ndarray]:
    """Labels of the low and high cells of every face normal to ``axis``."""
    pad = [(0, 0)] * labels.ndim
    pad[axis] = (1, 1)
    padded = np.pad(labels, pad, constant_values=CellLabel.EXTERIOR)
    n = padded.shape[axis]
    lo = [slice(None)] * labels.ndim
    hi = [slice(None)] * labels.ndim
    lo[axis] = slice(0, n - 1)
    hi[axis] = slice(1, n)
    return padded[tuple(lo)], padded[tuple(hi)]


def classify_dofs(grid: CellGrid) -> DofMap:
    labels = grid.labels
    statuses, indices, counts = [], [], []
    offset = 0
    for axis in range(grid.dim):
        lo, hi = face_neighbor_cells(labels, axis)
        status = np.full(lo.shape, INACTIVE, dtype=np.int8)
        status[(lo == CellLabel.INTERIOR) | (hi == CellLabel.INTERIOR)] = ACTIVE
        status[(lo == CellLabel.DIRICHLET) | (hi == CellLabel.DIRICHLET)] = DIRICHLET_VALUE
        index = np.full(lo.shape, -1, dtype=np.int64)
        active = status == ACTIVE
        count = int(active.sum())
        index[active] = np.arange(offset, offset + count)
        offset += count
        statuses.append(status)
        indices.append(index)
        counts.append(count)
    cell_index = np.full(labels.shape, -1, dtype=np.int64)
    interior = labels == CellLabel.INTERIOR
    n_p = int(interior.sum())
    cell_index[interior] = np.arange(offset, offset + n_p)
    for arr in (*statuses, *indices, cell_index):
        arr.flags.writeable = False
    return DofMap(tuple(statuses), tuple(indices), cell_index, tuple(counts), n_p)


def coarsen_grid(grid: CellGrid) -> CellGrid:
    """Halve every extent; Dirichlet dominates Interior dominates Exterior."""
    if any(e < 2 for e in grid.extents):
        raise ValueError(f"cannot coarsen extents {grid.extents}")
    labels = grid.labels
    pad = [(0, e % 2) for e in labels.shape]
    if any(p for _, p in pad):
        labels = np.pad(labels, pad, constant_values=CellLabel.EXTERIOR)
    shape = []
    for e in labels.shape:
        shape += [e // 2, 2]
    blocks = labels.reshape(shape)
    # label codes are ordered by precedence, so the max is the coarse label
    coarse = blocks.max(axis=tuple(range(1, 2 * grid.dim, 2)))
    return CellGrid(coarse, 2.0 * grid.h)


def chebyshev_dilate(mask: np.ndarray, width: int) -> np.ndarray:
    out = mask.copy()
    for axis in range(mask.ndim):
        step = out.copy()
        for off in range(1, width + 1):
            step |= _shift(out, axis, off, True) | _shift(out, axis, -off, True)
        out = step
    return out


def partition_band(grid: CellGrid, dofs: DofMap, width: int = 1) -> DofMap:
    """Mark DOFs of cells within Chebyshev distance ``width`` of a non-Interior cell.

    Cells beyond the array edge count as Exterior.
    """
    if width < 1:
        raise ValueError(f"band width must be >= 1, got {width}")
    non_interior = grid.labels != CellLabel.INTERIOR
    band_cells = chebyshev_dilate(non_interior, width)
    band = np.zeros(dofs.n, dtype=bool)
    idx = dofs.cell_index[band_cells]
    band[idx[idx >= 0]] = True
    for axis in range(grid.dim):
        lo, hi = face_neighbor_cells(band_cells.astype(np.int8), axis)
        touched = (lo == 1) | (hi == 1)
        idx = dofs.face_index[axis][touched]
        band[idx[idx >= 0]] = True
    band.flags.writeable = False
    band_cells.flags.writeable = False
    return dataclasses.replace(dofs, band=band, band_cells=band_cells)


def pad_grid(grid: CellGrid, before, after) -> CellGrid:
    """Extend the grid without changing the active system.

    New cells copy the label of the nearest original cell when that label is
    Dirichlet or Exterior; Interior borders are extended with Exterior cells,
    which keeps the Neumann faces they already had.
    """
    before = _per_axis(before, grid.dim)
    after = _per_axis(after, grid.dim)
    labels = np.asarray(grid.labels)
    if not any(before) and not any(after):
        return grid
    edged = np.pad(labels, list(zip(before, after)), mode="edge")
    inside = np.zeros(edged.shape, dtype=bool)
    inside[tuple(slice(b, b + e) for b, e in zip(before, labels.shape))] = True
    edged[(~inside) & (edged == CellLabel.INTERIOR)] = CellLabel.EXTERIOR
    return CellGrid(edged, grid.h)


def _per_axis(value, dim):
    if np.isscalar(value):
        return (int(value),) * dim
    value = tuple(int(v) for v in value)
    if len(value) != dim:
        raise ValueError(f"expected {dim} values, got {value}")
    return value


def write_domain(grid: CellGrid, path) -> None:
    """Write the plain-text domain format.

    Header ``dim nx ny [nz] h``; then one line per x-row (fixed y, z), y
    varying fastest across lines, with one ``D``/``I``/``E`` character per cell.
    """
    chars = np.array(["E", "I", "D"])
    lines = [" ".join([str(grid.dim), *map(str, grid.extents), repr(float(grid.h))])]
    # transpose so x varies fastest within a line
    arr = np.transpose(grid.labels)
    for row in arr.reshape(-1, grid.extents[0]):
        lines.append("".join(chars[row]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_domain(path) -> CellGrid:
    text = Path(path).read_text().split()
    if not text:
        raise ValueError(f"{path}: empty domain file")
    dim = int(text[0])
    if dim not in (2, 3):
        raise ValueError(f"{path}: dim must be 2 or 3")
    extents = tuple(int(t) for t in text[1 : 1 + dim])
    h = float(text[1 + dim])
    body = "".join(text[2 + dim :])
    if len(body) != int(np.prod(extents)):
        raise ValueError(f"{path}: expected {int(np.prod(extents))} cells, found {len(body)}")
    lookup = {"E": 0, "I": 1, "D": 2}
    try:
        codes = np.array([lookup[c] for c in body], dtype=np.int8)
    except KeyError as exc:
        raise ValueError(f"{path}: unknown cell label {exc.args[0]!r}") from None
    labels = np.transpose(codes.reshape(extents[::-1]))
    return CellGrid(labels, h)
