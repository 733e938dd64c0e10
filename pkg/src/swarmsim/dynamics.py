"""Robot motion models and abstraction-level mappings.

Single-integrator and unicycle kinematics, the near-identity diffeomorphism
between them, and a simple go-to-goal position controller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InputError

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    wrapped = math.fmod(theta + math.pi, TWO_PI)
    if wrapped <= 0.0:
        wrapped += TWO_PI
    return wrapped - math.pi


def _check_finite(*values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise InputError(f"non-finite value: {v!r}")


@dataclass(frozen=True)
class Pose:
    """Planar pose: position in meters, heading in radians, wrapped to (-pi, pi]."""

    x: float
    y: float
    theta: float

    def __post_init__(self):
        _check_finite(self.x, self.y, self.theta)
        object.__setattr__(self, "theta", wrap_angle(self.theta))


@dataclass(frozen=True)
class SIVelocity:
    """Single-integrator velocity command (m/s)."""

    vx: float
    vy: float

    def __post_init__(self):
        _check_finite(self.vx, self.vy)


@dataclass(frozen=True)
class UniVelocity:
    """Unicycle command: linear speed v (m/s) and turn rate omega (rad/s)."""

    v: float
    omega: float

    def __post_init__(self):
        _check_finite(self.v, self.omega)


@dataclass(frozen=True)
class AbstractionParams:
    """Parameters for the unicycle <-> single-integrator mapping.

    l is the look-ahead offset of the controlled point ahead of the axle.
    """

    l: float = 0.05
    wheel_base: float = 0.03
    wheel_radius: float = 0.005

    def __post_init__(self):
        if not (self.l > 0 and self.wheel_base > 0 and self.wheel_radius > 0):
            raise InputError("abstraction parameters must be strictly positive")


def si_step(pose: Pose, u: SIVelocity, dt: float) -> Pose:
    """Explicit-Euler step of the single integrator; heading is unchanged."""
    if not (dt > 0):
        raise InputError(f"dt must be positive, got {dt}")
    return Pose(pose.x + u.vx * dt, pose.y + u.vy * dt, pose.theta)


def uni_step(pose: Pose, cmd: UniVelocity, dt: float) -> Pose:
    """Explicit-Euler step of the unicycle model."""
    if not (dt > 0):
        raise InputError(f"dt must be positive, got {dt}")
    return Pose(
        pose.x + cmd.v * math.cos(pose.theta) * dt,
        pose.y + cmd.v * math.sin(pose.theta) * dt,
        wrap_angle(pose.theta + cmd.omega * dt),
    )


def si_to_uni(u: SIVelocity, pose: Pose, params: AbstractionParams) -> UniVelocity:
    """Map a single-integrator velocity of the off-axis point to unicycle commands.

    The near-identity diffeomorphism: v = cos(th)*vx + sin(th)*vy,
    omega = (-sin(th)*vx + cos(th)*vy) / l.
    """
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    return UniVelocity(c * u.vx + s * u.vy, (-s * u.vx + c * u.vy) / params.l)


def uni_to_si_point(pose: Pose, params: AbstractionParams) -> tuple[float, float]:
    """Position of the projected point the diffeomorphism controls."""
    return (
        pose.x + params.l * math.cos(pose.theta),
        pose.y + params.l * math.sin(pose.theta),
    )


@dataclass(frozen=True)
class GoToGoalGains:
    k_v: float = 1.0
    k_w: float = 2.0
    v_max: float = 0.1
    w_max: float = 4.0
    arrival_tol: float = 0.005

    def __post_init__(self):
        if not (self.k_v > 0 and self.k_w > 0):
            raise InputError("go-to-goal gains must be positive")


def go_to_goal(pose: Pose, goal: tuple[float, float], gains: GoToGoalGains = GoToGoalGains()) -> UniVelocity:
    """Proportional go-to-goal controller for the unicycle.

    v scales with distance and the cosine of the bearing error, omega with the
    bearing error itself; both are saturated.  Returns (0, 0) on arrival.
    """
    dx, dy = goal[0] - pose.x, goal[1] - pose.y
    dist = math.hypot(dx, dy)
    if dist < gains.arrival_tol:
        return UniVelocity(0.0, 0.0)
    bearing_err = wrap_angle(math.atan2(dy, dx) - pose.theta)
    v = gains.k_v * dist * math.cos(bearing_err)
    w = gains.k_w * bearing_err
    v = max(-gains.v_max, min(gains.v_max, v))
    w = max(-gains.w_max, min(gains.w_max, w))
    return UniVelocity(v, w)
