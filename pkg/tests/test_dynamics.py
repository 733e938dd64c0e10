import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from swarmsim.dynamics import (
    AbstractionParams, GoToGoalGains, Pose, SIVelocity, UniVelocity,
    go_to_goal, si_step, si_to_uni, uni_step, uni_to_si_point, wrap_angle,
)
from swarmsim.errors import InputError

PARAMS = AbstractionParams(l=0.05)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def test_si_step_examples():
    p = si_step(Pose(0, 0, 0), SIVelocity(1, 0), 0.1)
    assert (p.x, p.y, p.theta) == (pytest.approx(0.1), 0.0, 0.0)
    q = si_step(Pose(0.3, -0.2, 1.0), SIVelocity(0, 0), 0.5)
    assert (q.x, q.y, q.theta) == (0.3, -0.2, 1.0)
    r = si_step(Pose(0, 0, 0), SIVelocity(0.1, 0.1), 1.0)
    assert (r.x, r.y) == (pytest.approx(0.1), pytest.approx(0.1))


def test_si_step_rejects_bad_input():
    with pytest.raises(InputError):
        si_step(Pose(0, 0, 0), SIVelocity(1, 0), 0.0)
    with pytest.raises(InputError):
        SIVelocity(float("nan"), 0)
    with pytest.raises(InputError):
        Pose(float("inf"), 0, 0)


def test_uni_step_examples():
    p = uni_step(Pose(0, 0, 0), UniVelocity(1, 0), 0.1)
    assert (p.x, p.y) == (pytest.approx(0.1), pytest.approx(0.0))
    q = uni_step(Pose(0, 0, math.pi / 2), UniVelocity(1, 0), 0.1)
    assert q.x == pytest.approx(0.0, abs=1e-15)
    assert q.y == pytest.approx(0.1)
    r = uni_step(Pose(0, 0, 0), UniVelocity(0, math.pi), 1.0)
    assert r.theta == pytest.approx(math.pi)


def test_si_to_uni_examples():
    c = si_to_uni(SIVelocity(0.5, 0), Pose(0, 0, 0), PARAMS)
    assert (c.v, c.omega) == (pytest.approx(0.5), pytest.approx(0.0))
    c = si_to_uni(SIVelocity(0, 0.1), Pose(0, 0, 0), PARAMS)
    assert (c.v, c.omega) == (pytest.approx(0.0), pytest.approx(2.0))
    c = si_to_uni(SIVelocity(0, 0.5), Pose(0, 0, math.pi / 2), PARAMS)
    assert c.v == pytest.approx(0.5)
    assert c.omega == pytest.approx(0.0, abs=1e-14)


def test_si_to_uni_rejects_bad_l():
    with pytest.raises(InputError):
        AbstractionParams(l=0.0)


def test_uni_to_si_point_examples():
    assert uni_to_si_point(Pose(0, 0, 0), PARAMS) == (pytest.approx(0.05), pytest.approx(0.0))
    px, py = uni_to_si_point(Pose(1, 1, math.pi / 2), PARAMS)
    assert (px, py) == (pytest.approx(1.0), pytest.approx(1.05))
    px, py = uni_to_si_point(Pose(0, 0, 1.3), AbstractionParams(l=1e-12))
    assert (px, py) == (pytest.approx(0.0, abs=1e-9), pytest.approx(0.0, abs=1e-9))


def test_go_to_goal_examples():
    gains = GoToGoalGains()
    c = go_to_goal(Pose(0, 0, 0), (1, 0), gains)
    assert c.v > 0 and c.omega == 0
    assert go_to_goal(Pose(0, 0, 0), (0, 0), gains) == UniVelocity(0, 0)
    c = go_to_goal(Pose(0, 0, 0), (0, 1), gains)
    assert c.omega == pytest.approx(min(gains.w_max, gains.k_w * math.pi / 2))
    assert c.v == pytest.approx(0.0, abs=1e-12)


@given(finite, finite, st.floats(-100, 100), finite, finite,
       st.floats(1e-4, 1.0))
def test_theta_stays_wrapped(x, y, th, v, w, dt):
    p = uni_step(Pose(x, y, th), UniVelocity(v, w), dt)
    assert -math.pi < p.theta <= math.pi


@given(finite, finite, st.floats(-3, 3), finite, finite,
       st.floats(0.1, 5.0), st.floats(1e-3, 0.1))
def test_si_step_linear_in_u(x, y, th, vx, vy, a, dt):
    p0 = Pose(x, y, th)
    p1 = si_step(p0, SIVelocity(vx, vy), dt)
    p2 = si_step(p0, SIVelocity(a * vx, a * vy), dt)
    assert p2.x - p0.x == pytest.approx(a * (p1.x - p0.x), abs=1e-12)
    assert p2.y - p0.y == pytest.approx(a * (p1.y - p0.y), abs=1e-12)


@given(st.floats(-3, 3), st.floats(-0.2, 0.2), st.floats(-0.2, 0.2))
def test_diffeomorphism_first_order_consistency(th, vx, vy):
    # projected point moves in the direction of u after si_to_uni + uni_step
    speed = math.hypot(vx, vy)
    if speed < 1e-3:
        return
    dt = 1e-4
    pose = Pose(0.1, -0.2, th)
    cmd = si_to_uni(SIVelocity(vx, vy), pose, PARAMS)
    before = uni_to_si_point(pose, PARAMS)
    after = uni_to_si_point(uni_step(pose, cmd, dt), PARAMS)
    dx, dy = after[0] - before[0], after[1] - before[1]
    angle = abs(wrap_angle(math.atan2(dy, dx) - math.atan2(vy, vx)))
    assert angle < 1e-3
