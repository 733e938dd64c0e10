"""Dense strictly-convex QP: Euclidean projection onto a polytope with box bounds.

Minimizes sum ||u_i - u_hat_i||^2 subject to A u <= b and |u_k| <= box,
via Hildreth-style dual coordinate ascent over the inequality rows, with the
box handled by a clamped (Dykstra) projection pass inside each sweep.  The
Hessian is 2*I, so every dual update is closed-form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

DEFAULT_TOLERANCE = 1e-8
DEFAULT_MAX_SWEEPS = 10_000


@dataclass
class QPProblem:
    u_hat: np.ndarray          # (n,) target command vector
    A: np.ndarray              # (m, n) inequality rows, A u <= b
    b: np.ndarray              # (m,)
    box: float                 # per-component bound, |u_k| <= box
    tolerance: float = DEFAULT_TOLERANCE
    max_iterations: int = DEFAULT_MAX_SWEEPS

    def __post_init__(self):
        self.u_hat = np.asarray(self.u_hat, dtype=float).ravel()
        self.A = np.asarray(self.A, dtype=float).reshape(-1, self.u_hat.size)
        self.b = np.asarray(self.b, dtype=float).ravel()
        if self.A.shape[0] != self.b.size:
            raise InputError(
                f"A has {self.A.shape[0]} rows but b has {self.b.size} entries"
            )
        if not (self.box > 0):
            raise InputError("box bound must be positive")
        if not (self.tolerance > 0):
            raise InputError("tolerance must be positive")


@dataclass
class QPSolution:
    u_star: np.ndarray
    status: str                # optimal | max_iter | infeasible_relaxed
    iterations: int
    max_violation: float
    multipliers: np.ndarray = field(default_factory=lambda: np.zeros(0))
    box_offsets: np.ndarray = field(default_factory=lambda: np.zeros(0))


def _sweep(A, b, sq, rows, u, lam, nu, box):
    """One Gauss-Seidel pass over the given rows, then the box pass.

    Returns the largest dual change seen during the pass.
    """
    delta_max = 0.0
    for k in rows:
        r = float(A[k] @ u - b[k])
        step = max(-lam[k], 2.0 * r / sq[k])
        if step != 0.0:
            lam[k] += step
            u -= (0.5 * step) * A[k]
            delta_max = max(delta_max, abs(step))
    # Dykstra pass for the box: z is the unconstrained coordinate value,
    # nu the accumulated correction (net box multiplier).
    z = u + nu
    np.clip(z, -box, box, out=u)
    nu_new = z - u
    d = float(np.max(np.abs(nu_new - nu))) if nu.size else 0.0
    nu[:] = nu_new
    return max(delta_max, d)


def solve(p: QPProblem, warm_multipliers: np.ndarray | None = None) -> QPSolution:
    """Project u_hat onto the feasible polytope intersected with the box.

    Deterministic for identical inputs.  Rows with zero norm are skipped; a
    skipped row with b < 0 marks the problem relaxed-infeasible (the caller is
    expected to have sanitized such rows).
    """
    m, n = p.A.shape
    sq = np.einsum("ij,ij->i", p.A, p.A)
    live = sq > 0.0
    relaxed = bool(np.any(~live & (p.b < 0)))

    lam = np.zeros(m)
    if warm_multipliers is not None:
        w = np.asarray(warm_multipliers, dtype=float).ravel()
        if w.size != m:
            raise InputError("warm multipliers length mismatch")
        lam = np.maximum(w, 0.0)
    nu = np.zeros(n)
    u = p.u_hat - 0.5 * (p.A.T @ lam)
    # fold the warm box correction in via one initial box pass
    z = u + nu
    u = np.clip(z, -p.box, p.box)
    nu = z - u

    # Working-set strategy: sweep only over rows that have been seen violated
    # or carry a positive multiplier; grow the set until all rows check out.
    sweeps = 0
    sqs = np.where(live, sq, 1.0)
    active = set(np.nonzero(lam > 0)[0].tolist())
    for _outer in range(m + 2):
        resid = p.A @ u - p.b
        viol = np.nonzero(live & (resid > p.tolerance))[0]
        active.update(viol.tolist())
        if viol.size == 0 and sweeps > 0:
            break
        if viol.size == 0 and len(active) == 0:
            sweeps = 1  # nothing to do beyond the box clamp
            break
        rows = sorted(active)
        while sweeps < p.max_iterations:
            sweeps += 1
            delta = _sweep(p.A, p.b, sqs, rows, u, lam, nu, p.box)
            if delta <= p.tolerance:
                break
        else:
            break

    resid = p.A @ u - p.b
    max_violation = float(max(np.max(resid, initial=0.0),
                              np.max(np.abs(u) - p.box, initial=0.0), 0.0))
    if relaxed:
        status = "infeasible_relaxed"
    elif sweeps >= p.max_iterations and max_violation > p.tolerance * 10:
        status = "max_iter"
    else:
        status = "optimal"
    return QPSolution(u, status, sweeps, max_violation, lam, nu)


def kkt_residual(p: QPProblem, u: np.ndarray, multipliers: np.ndarray) -> float:
    """Max of stationarity, primal-feasibility, and complementarity residuals.

    Box constraints are accounted for implicitly: at a bound the stationarity
    residual may have the sign that pushes outward.
    """
    u = np.asarray(u, dtype=float).ravel()
    lam = np.asarray(multipliers, dtype=float).ravel()
    if np.any(lam < 0):
        raise InputError("multipliers must be nonnegative")
    resid = p.A @ u - p.b
    primal = max(float(np.max(resid, initial=0.0)),
                 float(np.max(np.abs(u) - p.box, initial=0.0)), 0.0)
    comp = float(np.max(np.abs(lam * resid), initial=0.0))
    r = 2.0 * (u - p.u_hat) + p.A.T @ lam
    tol = p.tolerance
    stat = 0.0
    for k in range(u.size):
        if u[k] >= p.box - tol:
            stat = max(stat, max(0.0, r[k]))       # r_k = -mu_upper <= 0
        elif u[k] <= -p.box + tol:
            stat = max(stat, max(0.0, -r[k]))      # r_k = mu_lower >= 0
        else:
            stat = max(stat, abs(r[k]))
    return max(primal, comp, stat)
