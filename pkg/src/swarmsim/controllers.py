"""Reference multi-agent control laws: rendezvous, formation, coverage.

All controllers emit single-integrator velocity commands of shape (N, 2),
to be clamped or safety-filtered downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .errors import ConfigError, InputError
from .geometry import DensityField, Grid, Tessellation


@dataclass(frozen=True)
class Topology:
    """Undirected communication graph over agent indices 0..n-1."""

    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        norm = set()
        for i, j in self.edges:
            if i == j:
                raise ConfigError("self-loops are not allowed")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ConfigError(f"edge ({i},{j}) out of range for n={self.n}")
            norm.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(norm))

    @staticmethod
    def cycle(n: int) -> "Topology":
        return Topology(n, frozenset((i, (i + 1) % n) for i in range(n)))

    @staticmethod
    def complete(n: int) -> "Topology":
        return Topology(n, frozenset((i, j) for i in range(n) for j in range(i + 1, n)))

    def neighbors(self, i: int) -> list[int]:
        out = []
        for a, b in self.edges:
            if a == i:
                out.append(b)
            elif b == i:
                out.append(a)
        return sorted(out)


def consensus(x: np.ndarray, g: Topology) -> np.ndarray:
    """Local interaction rule u_i = sum_{j in N_i} (x_j - x_i)."""
    x = np.asarray(x, dtype=float).reshape(-1, 2)
    if x.shape[0] != g.n:
        raise InputError(f"state has {x.shape[0]} agents, topology expects {g.n}")
    u = np.zeros_like(x)
    for i, j in sorted(g.edges):
        d = x[j] - x[i]
        u[i] += d
        u[j] -= d
    return u


@dataclass(frozen=True)
class FormationSpec:
    topology: Topology
    distances: dict[tuple[int, int], float]   # edge -> desired distance d_ij
    gain: float = 1.0

    def __post_init__(self):
        if not (self.gain > 0):
            raise ConfigError("formation gain must be positive")
        norm = {}
        for (i, j), d in self.distances.items():
            if not (d > 0):
                raise ConfigError(f"desired distance for edge ({i},{j}) must be positive")
            norm[(min(i, j), max(i, j))] = float(d)
        for e in self.topology.edges:
            if e not in norm:
                raise ConfigError(f"missing desired distance for edge {e}")
        object.__setattr__(self, "distances", norm)

    @staticmethod
    def from_positions(topology: Topology, positions: np.ndarray, gain: float = 1.0) -> "FormationSpec":
        """Desired distances taken from a template configuration."""
        p = np.asarray(positions, dtype=float).reshape(-1, 2)
        d = {e: float(np.linalg.norm(p[e[0]] - p[e[1]])) for e in topology.edges}
        return FormationSpec(topology, d, gain)


def formation(x: np.ndarray, spec: FormationSpec) -> np.ndarray:
    """Negated edge-tension gradient:
    u_i = sum_{j in N_i} gain * (||x_i - x_j||^2 - d_ij^2) * (x_j - x_i)."""
    x = np.asarray(x, dtype=float).reshape(-1, 2)
    if x.shape[0] != spec.topology.n:
        raise InputError("state/spec size mismatch")
    u = np.zeros_like(x)
    for (i, j) in sorted(spec.topology.edges):
        diff = x[j] - x[i]
        err = float(diff @ diff) - spec.distances[(i, j)] ** 2
        u[i] += spec.gain * err * diff
        u[j] -= spec.gain * err * diff
    return u


def edge_tension(x: np.ndarray, spec: FormationSpec) -> float:
    """Scalar tension w(x) = 1/2 sum_i sum_{j in N_i} (gain/4)(||x_i-x_j||^2 - d_ij^2)^2."""
    x = np.asarray(x, dtype=float).reshape(-1, 2)
    w = 0.0
    for (i, j) in sorted(spec.topology.edges):
        diff = x[j] - x[i]
        err = float(diff @ diff) - spec.distances[(i, j)] ** 2
        w += 2.0 * (spec.gain / 4.0) * err * err  # both (i,j) and (j,i) terms
    return 0.5 * w


@dataclass(frozen=True)
class CoverageParams:
    kappa: float = 1.0
    mode: str = "lloyd"       # lloyd | tvd_d1
    resolution: int = 128

    def __post_init__(self):
        if not (self.kappa > 0):
            raise ConfigError("kappa must be positive")
        if self.mode not in ("lloyd", "tvd_d1"):
            raise ConfigError(f"unknown coverage mode {self.mode!r}")
        if self.resolution < 16:
            raise ConfigError("coverage grid resolution must be >= 16")


def delaunay_topology(tess: Tessellation, grid: Grid, n: int) -> Topology:
    return Topology(n, frozenset(geometry.delaunay_neighbors(tess, grid)))


@dataclass
class CoverageResult:
    u: np.ndarray
    tess: Tessellation
    degenerate: np.ndarray    # bool per agent: empty-mass cell, command zeroed


def coverage(x: np.ndarray, fld: DensityField, params: CoverageParams,
             t: float, grid: Grid,
             prev_centroids: np.ndarray | None = None,
             control_period: float = 0.05,
             fd_step: float = 1e-4) -> CoverageResult:
    """Coverage control over the grid tessellation.

    lloyd mode: u_i = kappa * (c_i - x_i).
    tvd_d1 mode: adds the centroid time-derivative (forward difference against
    prev_centroids over one control period) and a Delaunay neighbor-coupling
    term using centroid Jacobians estimated by central differences.
    """
    x = np.asarray(x, dtype=float).reshape(-1, 2)
    n = x.shape[0]
    tess = geometry.tessellate(x, grid, fld, t)
    c = tess.centroids
    u = params.kappa * (c - x)
    if params.mode == "tvd_d1":
        dc_dt = np.zeros_like(c)
        if prev_centroids is not None:
            dc_dt = (c - np.asarray(prev_centroids).reshape(-1, 2)) / control_period
        base = params.kappa * (c - x) + dc_dt
        u = base.copy()
        topo = delaunay_topology(tess, grid, n)
        # dc_i/dx_j by central differences on agent j's position
        for j in range(n):
            touched = [i for i in range(n)
                       if i == j or (min(i, j), max(i, j)) in topo.edges]
            for axis in range(2):
                xp = x.copy()
                xp[j, axis] += fd_step
                cp = geometry.tessellate(xp, grid, fld, t).centroids
                xm = x.copy()
                xm[j, axis] -= fd_step
                cm = geometry.tessellate(xm, grid, fld, t).centroids
                jac_col = (cp - cm) / (2.0 * fd_step)   # (n, 2): dc_i / dx_j[axis]
                for i in touched:
                    if i == j:
                        continue
                    u[i] += jac_col[i] * base[j, axis]
    u[tess.empty] = 0.0
    return CoverageResult(u, tess, tess.empty.copy())


class CoverageController:
    """Stateful coverage controller; remembers centroids for the
    time-derivative term in tvd_d1 mode."""

    def __init__(self, fld: DensityField, params: CoverageParams,
                 bounds: tuple[float, float, float, float],
                 control_period: float = 0.05):
        self.field = fld
        self.params = params
        self.grid = Grid(bounds, params.resolution)
        self.control_period = control_period
        self._prev_centroids: np.ndarray | None = None
        self.last: CoverageResult | None = None

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        res = coverage(x, self.field, self.params, t, self.grid,
                       prev_centroids=self._prev_centroids,
                       control_period=self.control_period)
        self._prev_centroids = res.tess.centroids.copy()
        self.last = res
        return res.u
