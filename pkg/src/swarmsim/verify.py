"""Simulation-based controller verification.

Runs a submitted controller, filter OFF, against a scenario suite; computes
safety scores and diagnostics and decides whether the controller may bypass
the online filter.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import sim
from .config import BYPASS_THRESHOLD, ExperimentConfig
from .errors import InputError
from .safety import SafetyParams


@dataclass
class Scenario:
    name: str
    config: ExperimentConfig
    initial_positions: np.ndarray | None = None


@dataclass
class VerificationReport:
    per_scenario: dict[str, float]
    aggregate: float                  # minimum across scenarios
    mean_collision_velocity: float
    mean_contact_duration: float
    decision: str                     # bypass_allowed | wrap_required
    diagnostics: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "per_scenario": self.per_scenario,
            "aggregate": self.aggregate,
            "mean_collision_velocity": self.mean_collision_velocity,
            "mean_contact_duration": self.mean_contact_duration,
            "decision": self.decision,
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def summary(self) -> str:
        lines = [f"aggregate safety score: {self.aggregate:.6f}  -> {self.decision}"]
        for name, s in self.per_scenario.items():
            lines.append(f"  {name}: S = {s:.6f}")
        lines.append(f"  mean collision velocity: {self.mean_collision_velocity:.4f} m/s")
        lines.append(f"  mean contact duration:   {self.mean_contact_duration:.4f} s")
        lines.extend("  " + d for d in self.diagnostics)
        return "\n".join(lines)


def default_suite(robots: int = 6, duration: float = 30.0,
                  params: SafetyParams | None = None) -> list[Scenario]:
    """Five scenarios stressing inter-robot and wall collision modes:
    two random spreads, a clustered start, a near-wall start, and an
    antagonistic crossing start."""
    params = params or SafetyParams()
    base = ExperimentConfig(robots=robots, duration=duration, safety=params,
                            filter=False)
    bl, br, bb, bt = params.bounds
    scenarios = [
        Scenario("spread_seed1", replace(base, seed=1)),
        Scenario("spread_seed2", replace(base, seed=2)),
    ]
    rng = np.random.default_rng(3)
    center = np.array([(bl + br) / 2, (bb + bt) / 2])
    cluster = center + sim.spawn_positions(
        robots, SafetyParams(params.d_s, params.gamma, params.alpha,
                             (-3 * params.d_s, 3 * params.d_s,
                              -3 * params.d_s, 3 * params.d_s)),
        rng, min_sep=1.2 * params.d_s, margin=0.0)
    scenarios.append(Scenario("clustered", replace(base, seed=3), cluster))
    wall_y = np.linspace(bb + 2 * params.d_s, bt - 2 * params.d_s, robots)
    near_wall = np.column_stack([np.full(robots, br - 1.2 * params.d_s), wall_y])
    scenarios.append(Scenario("near_wall", replace(base, seed=4), near_wall))
    ang = np.linspace(0, 2 * np.pi, robots, endpoint=False)
    ring = center + 0.35 * min(br - bl, bt - bb) * np.column_stack(
        [np.cos(ang), np.sin(ang)])
    scenarios.append(Scenario("crossing", replace(base, seed=5), ring))
    return scenarios


def verify(controller_factory, suite: list[Scenario],
           threshold: float = BYPASS_THRESHOLD) -> VerificationReport:
    """Score a controller over the suite with the filter off.

    controller_factory(scenario) must return a fresh controller callable for
    each scenario so that stateful controllers do not leak across runs.
    """
    if not suite:
        raise InputError("verification suite must not be empty")
    per: dict[str, float] = {}
    velocities: list[float] = []
    durations: list[float] = []
    diagnostics: list[str] = []
    for sc in suite:
        cfg = replace(sc.config, filter=False)
        try:
            controller = controller_factory(sc)
            trace = sim.run(cfg, controller, initial_positions=sc.initial_positions)
        except Exception as exc:  # noqa: BLE001 - user code boundary
            per[sc.name] = 0.0
            diagnostics.append(f"{sc.name}: controller failed: {exc!r}")
            continue
        if trace.error:
            per[sc.name] = 0.0
            diagnostics.append(f"{sc.name}: {trace.error}")
            continue
        report = sim.safety_score(trace, cfg.safety)
        per[sc.name] = report.score
        if report.n_events:
            velocities.append(report.mean_collision_velocity)
            durations.append(report.mean_contact_duration)
            diagnostics.append(
                f"{sc.name}: {report.n_events} contact event(s), "
                f"{report.n_contact_ticks} contact tick(s)")
    aggregate = min(per.values())
    decision = "bypass_allowed" if aggregate >= threshold else "wrap_required"
    return VerificationReport(
        per_scenario=per,
        aggregate=aggregate,
        mean_collision_velocity=float(np.mean(velocities)) if velocities else 0.0,
        mean_contact_duration=float(np.mean(durations)) if durations else 0.0,
        decision=decision,
        diagnostics=diagnostics,
    )
