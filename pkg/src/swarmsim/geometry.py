"""Grid-based Voronoi tessellation, density fields, and the locational cost."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InputError


@dataclass(frozen=True)
class Grid:
    """Uniform discretization of the rectangular workspace."""

    bounds: tuple[float, float, float, float] = (-0.6, 0.6, -0.6, 0.6)
    resolution: int = 128

    def __post_init__(self):
        bl, br, bb, bt = self.bounds
        if not (bl < br and bb < bt):
            raise ConfigError("grid bounds must satisfy left<right, bottom<top")
        if self.resolution < 16:
            raise ConfigError("grid resolution must be >= 16")

    @property
    def cell_area(self) -> float:
        bl, br, bb, bt = self.bounds
        return (br - bl) / self.resolution * (bt - bb) / self.resolution

    def cell_centers(self) -> np.ndarray:
        """(res*res, 2) array of cell-center coordinates, row-major by y then x."""
        bl, br, bb, bt = self.bounds
        res = self.resolution
        xs = bl + (np.arange(res) + 0.5) * (br - bl) / res
        ys = bb + (np.arange(res) + 0.5) * (bt - bb) / res
        gx, gy = np.meshgrid(xs, ys)
        return np.column_stack([gx.ravel(), gy.ravel()])


@dataclass
class DensityRef:
    id: int
    position: tuple[float, float]
    weight: float = 1.0


@dataclass
class DensityField:
    """Strictly positive Gaussian-mixture importance density over the workspace.

    With no reference points the field is uniform at `floor`.
    """

    refs: list[DensityRef] = field(default_factory=list)
    sigma: float = 0.12
    floor: float = 1e-3

    def __post_init__(self):
        if not (self.floor > 0):
            raise ConfigError("density floor must be strictly positive")
        if not (self.sigma > 0):
            raise ConfigError("density sigma must be strictly positive")


def density_at(field: DensityField, q: np.ndarray, t: float = 0.0) -> np.ndarray:
    """Evaluate the density at one or many points; shape-preserving."""
    q = np.asarray(q, dtype=float)
    pts = q.reshape(-1, 2)
    out = np.full(pts.shape[0], field.floor)
    inv = 1.0 / (2.0 * field.sigma ** 2)
    for ref in field.refs:
        d2 = np.sum((pts - np.asarray(ref.position)) ** 2, axis=1)
        out += ref.weight * np.exp(-d2 * inv)
    return out[0] if q.ndim == 1 else out.reshape(q.shape[:-1])


@dataclass
class Tessellation:
    assignment: np.ndarray      # (res*res,) owning agent per cell
    masses: np.ndarray          # (N,) density mass per agent
    centroids: np.ndarray       # (N, 2) density-weighted cell centroids
    empty: np.ndarray           # (N,) bool, True where a cell had zero mass


def tessellate(x: np.ndarray, grid: Grid, fld: DensityField, t: float = 0.0) -> Tessellation:
    """Assign every grid cell to its nearest agent (ties -> lowest index) and
    integrate per-cell mass and centroid by the midpoint rule."""
    x = np.asarray(x, dtype=float).reshape(-1, 2)
    n = x.shape[0]
    if n < 1:
        raise InputError("need at least one agent")
    centers = grid.cell_centers()
    d2 = np.sum((centers[:, None, :] - x[None, :, :]) ** 2, axis=2)
    owner = np.argmin(d2, axis=1)
    phi = density_at(fld, centers, t) * grid.cell_area
    masses = np.bincount(owner, weights=phi, minlength=n)
    cx = np.bincount(owner, weights=phi * centers[:, 0], minlength=n)
    cy = np.bincount(owner, weights=phi * centers[:, 1], minlength=n)
    empty = masses <= 0.0
    safe = np.where(empty, 1.0, masses)
    centroids = np.column_stack([cx / safe, cy / safe])
    centroids[empty] = x[empty]
    return Tessellation(owner, masses, centroids, empty)


def locational_cost(x: np.ndarray, tess: Tessellation, grid: Grid,
                    fld: DensityField, t: float = 0.0) -> float:
    """Grid quadrature of sum_i int_{V_i} ||q - x_i||^2 phi(q,t) dq."""
    x = np.asarray(x, dtype=float).reshape(-1, 2)
    centers = grid.cell_centers()
    phi = density_at(fld, centers, t) * grid.cell_area
    d2 = np.sum((centers - x[tess.assignment]) ** 2, axis=1)
    return float(np.sum(d2 * phi))


def delaunay_neighbors(tess: Tessellation, grid: Grid) -> set[tuple[int, int]]:
    """Edges {i, j} between agents whose cells are 4-adjacent on the grid."""
    res = grid.resolution
    a = tess.assignment.reshape(res, res)
    edges: set[tuple[int, int]] = set()
    for u, v in ((a[:, :-1], a[:, 1:]), (a[:-1, :], a[1:, :])):
        diff = u != v
        pairs = np.column_stack([u[diff], v[diff]])
        for i, j in np.unique(np.sort(pairs, axis=1), axis=0):
            edges.add((int(i), int(j)))
    return edges
