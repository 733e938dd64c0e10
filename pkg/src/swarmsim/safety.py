"""Safety barrier certificates and the minimally invasive QP filter.

Pairwise inter-robot constraints, workspace-boundary constraints, and a
velocity box are assembled into a stacked linear system A u <= b; user
commands are projected onto this polytope by the QP solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import qp
from .errors import ConfigError, InputError


@dataclass(frozen=True)
class SafetyParams:
    d_s: float = 0.08          # minimum safety distance (m)
    gamma: float = 1.0         # class-K gain (1/s)
    alpha: float = 0.1         # per-component velocity bound (m/s)
    bounds: tuple[float, float, float, float] = (-0.6, 0.6, -0.6, 0.6)  # (left, right, bottom, top)

    def __post_init__(self):
        bl, br, bb, bt = self.bounds
        if not (self.d_s > 0 and self.gamma > 0 and self.alpha > 0):
            raise ConfigError("d_s, gamma, alpha must be positive")
        if not (bl < br and bb < bt):
            raise ConfigError("workspace bounds must satisfy left<right, bottom<top")
        if not (br - bl > 2 * self.d_s and bt - bb > 2 * self.d_s):
            raise ConfigError("workspace must be wider than 2*d_s on each axis")


@dataclass
class ConstraintSet:
    A: np.ndarray                     # (rows, 2N)
    b: np.ndarray                     # (rows,)
    box: float                        # per-component bound alpha
    row_labels: list[tuple]           # ("pair", i, j) or ("wall", i, axis)
    n_robots: int


def h_pair(x_i, x_j, d_s: float) -> float:
    """Pairwise barrier value ||x_i - x_j||^2 - d_s^2 (m^2)."""
    dx = float(x_i[0] - x_j[0])
    dy = float(x_i[1] - x_j[1])
    return dx * dx + dy * dy - d_s * d_s


def h_walls(x_i, params: SafetyParams) -> tuple[float, float]:
    """Boundary barrier values for the two workspace axes."""
    bl, br, bb, bt = params.bounds
    return ((br - x_i[0]) * (x_i[0] - bl), (bt - x_i[1]) * (x_i[1] - bb))


def pairwise_row(x: np.ndarray, i: int, j: int, params: SafetyParams):
    """Single pairwise constraint row over the stacked 2N command vector.

    Robot i's slot holds -2(x_i - x_j), robot j's +2(x_i - x_j);
    b = gamma * h_pair.
    """
    n = x.shape[0]
    if i == j:
        raise InputError("pairwise constraint requires i != j")
    if not (0 <= i < n and 0 <= j < n):
        raise InputError("robot index out of range")
    row = np.zeros(2 * n)
    diff = x[i] - x[j]
    row[2 * i:2 * i + 2] = -2.0 * diff
    row[2 * j:2 * j + 2] = 2.0 * diff
    return row, params.gamma * h_pair(x[i], x[j], params.d_s)


def boundary_rows(x_i, i: int, params: SafetyParams, n: int):
    """Two boundary rows (x axis, y axis) for robot i and their b entries."""
    if not (0 <= i < n):
        raise InputError("robot index out of range")
    bl, br, bb, bt = params.bounds
    rows = np.zeros((2, 2 * n))
    rows[0, 2 * i] = 2.0 * x_i[0] - br - bl
    rows[1, 2 * i + 1] = 2.0 * x_i[1] - bt - bb
    h1, h2 = h_walls(x_i, params)
    return rows, np.array([params.gamma * h1, params.gamma * h2])


def prune_radius(params: SafetyParams) -> float:
    """Distance beyond which a pairwise row is satisfied by every box point.

    For |u_k| <= alpha, ||u_i - u_j|| <= 2*sqrt(2)*alpha, so the row's
    left-hand side is at most 4*sqrt(2)*d*alpha; the row cannot bind once
    gamma*(d^2 - d_s^2) exceeds that, i.e. for d beyond the positive root of
    d^2 - (4*sqrt(2)*alpha/gamma)*d - d_s^2.
    """
    c = 4.0 * math.sqrt(2.0) * params.alpha / params.gamma
    return 0.5 * (c + math.sqrt(c * c + 4.0 * params.d_s ** 2))


def assemble(x: np.ndarray, params: SafetyParams, prune: bool = False) -> ConstraintSet:
    """Stack all pairwise and boundary rows for the current state.

    With prune=True, pairwise rows that provably cannot bind inside the
    velocity box are omitted (they are satisfied by every feasible u).
    """
    x = np.asarray(x, dtype=float).reshape(-1, 2)
    n = x.shape[0]
    if n < 1:
        raise InputError("need at least one robot")
    bl, br, bb, bt = params.bounds
    ii, jj = np.triu_indices(n, k=1)
    if prune and ii.size:
        d2 = np.sum((x[ii] - x[jj]) ** 2, axis=1)
        keep = d2 <= prune_radius(params) ** 2
        ii, jj = ii[keep], jj[keep]
    p = ii.size
    A = np.zeros((p + 2 * n, 2 * n))
    b = np.empty(p + 2 * n)
    labels: list[tuple] = []
    if p:
        diff = x[ii] - x[jj]
        rows = np.arange(p)
        A[rows, 2 * ii] = -2.0 * diff[:, 0]
        A[rows, 2 * ii + 1] = -2.0 * diff[:, 1]
        A[rows, 2 * jj] = 2.0 * diff[:, 0]
        A[rows, 2 * jj + 1] = 2.0 * diff[:, 1]
        b[:p] = params.gamma * (np.sum(diff ** 2, axis=1) - params.d_s ** 2)
    labels.extend(("pair", int(i), int(j)) for i, j in zip(ii, jj))
    r = np.arange(n)
    A[p + 2 * r, 2 * r] = 2.0 * x[:, 0] - br - bl
    A[p + 2 * r + 1, 2 * r + 1] = 2.0 * x[:, 1] - bt - bb
    b[p + 2 * r] = params.gamma * (br - x[:, 0]) * (x[:, 0] - bl)
    b[p + 2 * r + 1] = params.gamma * (bt - x[:, 1]) * (x[:, 1] - bb)
    for i in range(n):
        labels.append(("wall", i, "x"))
        labels.append(("wall", i, "y"))
    return ConstraintSet(A, b, params.alpha, labels, n)


@dataclass
class FilterResult:
    u_star: np.ndarray             # (N, 2)
    solution: qp.QPSolution
    unsafe_rows: list[tuple]       # labels of rows found with h < 0 at call time

    @property
    def violation(self) -> bool:
        return bool(self.unsafe_rows)


def filter(u_hat: np.ndarray, x: np.ndarray, params: SafetyParams,
           prune: bool = False,
           warm_multipliers: np.ndarray | None = None) -> FilterResult:
    """Project the commanded velocities onto the certificate polytope.

    If the state is already unsafe (some h < 0), the offending rows' right
    hand sides are relaxed to 0 so that u = 0 stays feasible; the event is
    flagged on the result.
    """
    x = np.asarray(x, dtype=float).reshape(-1, 2)
    u_hat = np.asarray(u_hat, dtype=float).reshape(-1, 2)
    if u_hat.shape != x.shape:
        raise InputError(f"command shape {u_hat.shape} != state shape {x.shape}")
    if not np.all(np.isfinite(u_hat)):
        raise InputError("non-finite command")
    cs = assemble(x, params, prune=prune)
    unsafe = np.nonzero(cs.b < 0)[0]
    b = cs.b
    if unsafe.size:
        b = np.maximum(b, 0.0)
    problem = qp.QPProblem(u_hat.ravel(), cs.A, b, params.alpha)
    sol = qp.solve(problem, warm_multipliers=warm_multipliers)
    return FilterResult(sol.u_star.reshape(-1, 2), sol,
                        [cs.row_labels[k] for k in unsafe])


class SafetyFilter:
    """Stateful wrapper owned by one simulation loop; warm-starts multipliers
    across consecutive calls keyed by row label."""

    def __init__(self, params: SafetyParams, prune: bool = True):
        self.params = params
        self.prune = prune
        self._warm: dict[tuple, float] = {}

    def __call__(self, u_hat: np.ndarray, x: np.ndarray) -> FilterResult:
        x = np.asarray(x, dtype=float).reshape(-1, 2)
        u_hat = np.asarray(u_hat, dtype=float).reshape(-1, 2)
        if u_hat.shape != x.shape:
            raise InputError(f"command shape {u_hat.shape} != state shape {x.shape}")
        if not np.all(np.isfinite(u_hat)):
            raise InputError("non-finite command")
        cs = assemble(x, self.params, prune=self.prune)
        unsafe = np.nonzero(cs.b < 0)[0]
        b = np.maximum(cs.b, 0.0) if unsafe.size else cs.b
        warm = np.array([self._warm.get(lbl, 0.0) for lbl in cs.row_labels])
        problem = qp.QPProblem(u_hat.ravel(), cs.A, b, self.params.alpha)
        sol = qp.solve(problem, warm_multipliers=warm)
        self._warm = {lbl: m for lbl, m in zip(cs.row_labels, sol.multipliers) if m > 0}
        return FilterResult(sol.u_star.reshape(-1, 2), sol,
                            [cs.row_labels[k] for k in unsafe])
