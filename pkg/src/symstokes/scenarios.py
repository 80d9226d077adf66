"""Benchmark domains: driven cavity, channel flows with obstacles, porous slab.

Every builder returns a :class:`CellGrid` whose active region is ringed by
one layer of boundary cells, plus the matching :class:`BoundaryData`.  The
vertical direction is the last axis.  Physical coordinates of interior cell
``(i, j, ...)`` are ``((i - 0.5) h, (j - 0.5) h, ...)``; cells whose center
falls inside a solid obstacle become Dirichlet cells with zero velocity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .discretization import BoundaryData
from .domain import CellGrid, CellLabel

NAMES = ("cavity2d", "cavity3d", "cylinder2d", "cylinder3d", "hollow_square2d", "brancher2d", "brancher3d", "porous3d")

_DEFAULTS = {
    "cavity2d": dict(resolution=(64, 64), size=(1.0, 1.0), ubar=1.0),
    "cavity3d": dict(resolution=(16, 16, 16), size=(1.0, 1.0, 1.0), ubar=1.0),
    "cylinder2d": dict(
        resolution=(220, 41), size=(2.2, 0.41), ubar=0.3, obstacle=dict(center=(0.2, 0.2), radius=0.05)
    ),
    "cylinder3d": dict(
        resolution=(51, 16, 16), size=(1.275, 0.41, 0.41), ubar=0.45, obstacle=dict(center=(0.5, 0.2), radius=0.05)
    ),
    "hollow_square2d": dict(
        resolution=(256, 256),
        size=(1.0, 1.0),
        ubar=1.0,
        obstacle=dict(center=(0.5, 0.5), half_width=0.25, thickness=0.03, gap=0.04),
    ),
    "brancher2d": dict(
        resolution=(256, 256), size=(1.0, 1.0), ubar=1.0, obstacle=dict(x0=0.75, slots=4, slot_width=0.04)
    ),
    "brancher3d": dict(
        resolution=(32, 32, 32), size=(1.0, 1.0, 1.0), ubar=1.0, obstacle=dict(x0=0.75, slots=3, slot_width=0.08)
    ),
    "porous3d": dict(
        resolution=(32, 32, 32), size=(1.0, 1.0, 1.0), ubar=1.0, obstacle=dict(x0=0.4, x1=0.6, porosity=0.5)
    ),
}


@dataclass
class ScenarioSpec:
    name: str
    resolution: tuple | None = None
    size: tuple | None = None
    ubar: float | None = None
    obstacle: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.name not in _DEFAULTS:
            raise ValueError(f"unknown scenario {self.name!r}; choose from {', '.join(NAMES)}")
        defaults = _DEFAULTS[self.name]
        dim = len(defaults["resolution"])
        if self.resolution is None:
            self.resolution = defaults["resolution"]
        elif np.isscalar(self.resolution):
            self.resolution = (int(self.resolution),) * dim
        self.resolution = tuple(int(r) for r in self.resolution)
        if len(self.resolution) != dim:
            raise ValueError(f"{self.name} needs {dim} resolution values, got {self.resolution}")
        if min(self.resolution) < 8:
            raise ValueError(f"resolution must be at least 8 per axis, got {self.resolution}")
        self.size = tuple(float(s) for s in (self.size or defaults["size"]))
        if self.ubar is None:
            self.ubar = defaults["ubar"]
        self.obstacle = {**defaults.get("obstacle", {}), **(self.obstacle or {})}
        if not self.name.startswith("cavity"):
            # the cross-section fixes the spacing, so every transverse axis must agree on it
            h = self.h
            for n, extent in zip(self.resolution[2:], self.size[2:]):
                if not np.isclose(n * h, extent, rtol=1e-9, atol=0.0):
                    raise ValueError(
                        f"resolution {self.resolution} does not give square cells on a cross-section of {self.size[1:]}"
                    )

    @property
    def dim(self) -> int:
        return len(self.resolution)

    @property
    def h(self) -> float:
        """Cell width.

        Cavities take it from the x axis.  Channel geometries take it from the
        cross-section so that the inflow profile spans the walls exactly; their
        streamwise length is then ``resolution[0] * h``.
        """
        axis = 0 if self.name.startswith("cavity") else 1
        return self.size[axis] / self.resolution[axis]


def inflow_profile(spec: ScenarioSpec, y, z=None):
    """Parabolic (2D) or biquadratic (3D) channel inflow velocity."""
    ubar = spec.ubar
    H = spec.size[1]
    y = np.asarray(y, dtype=np.float64)
    if np.any((y < 0) | (y > H)):
        raise ValueError(f"y outside [0, {H}]")
    if spec.dim == 2:
        return 4.0 * ubar * y * (H - y) / H**2
    if z is None:
        raise ValueError("3D inflow profile needs a z coordinate")
    Hz = spec.size[2]
    z = np.asarray(z, dtype=np.float64)
    if np.any((z < 0) | (z > Hz)):
        raise ValueError(f"z outside [0, {Hz}]")
    return 16.0 * ubar * y * z * (H - y) * (Hz - z) / (H**2 * Hz**2)


def _cell_centers(spec: ScenarioSpec, shape):
    """Physical center coordinates of every cell of the ringed grid."""
    h = spec.h
    axes = [(np.arange(n) - 0.5) * h for n in shape]
    return np.meshgrid(*axes, indexing="ij")


def _boxed(spec: ScenarioSpec) -> np.ndarray:
    shape = tuple(r + 2 for r in spec.resolution)
    labels = np.full(shape, CellLabel.DIRICHLET, dtype=np.int8)
    labels[tuple(slice(1, -1) for _ in shape)] = CellLabel.INTERIOR
    return labels


def cavity(resolution, h: float | None = None, ubar: float = 1.0) -> tuple[CellGrid, BoundaryData]:
    """Lid-driven box of ``resolution`` Interior cells ringed by Dirichlet cells.

    Unlike :func:`build` this accepts any resolution of at least one cell,
    which the dense verification patches rely on.
    """
    resolution = tuple(int(r) for r in resolution)
    if len(resolution) not in (2, 3) or min(resolution) < 1:
        raise ValueError(f"bad cavity resolution {resolution}")
    h = 1.0 / resolution[0] if h is None else h
    shape = tuple(r + 2 for r in resolution)
    labels = np.full(shape, CellLabel.DIRICHLET, dtype=np.int8)
    labels[tuple(slice(1, -1) for _ in shape)] = CellLabel.INTERIOR
    bc = BoundaryData.zeros(CellGrid(labels, h))
    # lid: x-velocity on the u faces of the top boundary layer
    top = [slice(None)] * len(shape)
    top[-1] = -1
    bc.dirichlet[0][tuple(top)] = ubar
    return CellGrid(labels, h), bc


def _channel(spec: ScenarioSpec):
    """Walls on every side but x: Dirichlet inflow column, Exterior outflow column."""
    labels = _boxed(spec)
    inner = tuple(slice(1, -1) for _ in labels.shape[1:])
    labels[(-1, *inner)] = CellLabel.EXTERIOR
    bc = BoundaryData.zeros(CellGrid(labels, spec.h))
    centers = _cell_centers(spec, labels.shape)
    # u faces between the inflow column and the first interior column
    ys = centers[1][1][inner]
    if spec.dim == 2:
        values = inflow_profile(spec, ys)
    else:
        values = inflow_profile(spec, ys, centers[2][1][inner])
    bc.dirichlet[0][(1, *inner)] = values
    bc.dirichlet[0][(0, *inner)] = values
    return labels, bc, centers


def _check_inside(spec, *coords):
    for c, extent in zip(coords, spec.size):
        if not 0.0 <= c <= extent:
            raise ValueError(f"obstacle of {spec.name} lies outside the domain")


def _solid(labels, mask):
    interior = labels == CellLabel.INTERIOR
    labels[mask & interior] = CellLabel.DIRICHLET


def build(spec: ScenarioSpec) -> tuple[CellGrid, BoundaryData]:
    name = spec.name
    if name.startswith("cavity"):
        return cavity(spec.resolution, spec.h, spec.ubar)

    labels, bc, centers = _channel(spec)
    ob = spec.obstacle
    if name.startswith("cylinder"):
        cx, cy = ob["center"]
        _check_inside(spec, cx, cy)
        r = ob["radius"]
        _solid(labels, (centers[0] - cx) ** 2 + (centers[1] - cy) ** 2 < r**2)
    elif name == "hollow_square2d":
        cx, cy = ob["center"]
        hw, t, gap = ob["half_width"], ob["thickness"], ob["gap"]
        _check_inside(spec, cx - hw, cy - hw)
        _check_inside(spec, cx + hw, cy + hw)
        x, y = centers
        outer = (np.abs(x - cx) < hw) & (np.abs(y - cy) < hw)
        inner = (np.abs(x - cx) < hw - t) & (np.abs(y - cy) < hw - t)
        opening = (x < cx) & (np.abs(y - cy) < gap / 2)
        _solid(labels, outer & ~inner & ~opening)
    elif name in ("brancher2d", "brancher3d"):
        x0, k, w = ob["x0"], int(ob["slots"]), ob["slot_width"]
        _check_inside(spec, x0)
        x = centers[0]
        walls = np.ones(labels.shape, dtype=bool)
        for axis in range(1, spec.dim):
            extent = spec.size[axis]
            coord = centers[axis]
            open_ = np.zeros(labels.shape, dtype=bool)
            for s in range(k):
                mid = (s + 0.5) * extent / k
                open_ |= np.abs(coord - mid) < w / 2
            walls &= ~open_
        _solid(labels, (x > x0) & walls)
    elif name == "porous3d":
        x0, x1, porosity = ob["x0"], ob["x1"], ob["porosity"]
        _check_inside(spec, x0)
        _check_inside(spec, x1)
        rng = np.random.default_rng(spec.seed)
        solid = rng.random(labels.shape) >= porosity
        _solid(labels, (centers[0] > x0) & (centers[0] < x1) & solid)
    else:
        raise ValueError(f"unknown scenario {name!r}")
    return CellGrid(labels, spec.h), bc
