"""Deterministic fixed-step simulation engine.

Integrates single-integrator dynamics under the safety filter (or a plain
box clamp), runs two-phase collision detection with positional
non-penetration resolution, and records a full per-tick trace from which a
safety score is computed.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .config import ExperimentConfig
from .errors import InputError
from .safety import SafetyFilter, SafetyParams

WALLS = ("left", "right", "bottom", "top")
# inward-pointing wall normals, indexed like WALLS
_WALL_NORMALS = {
    "left": np.array([1.0, 0.0]),
    "right": np.array([-1.0, 0.0]),
    "bottom": np.array([0.0, 1.0]),
    "top": np.array([0.0, -1.0]),
}


@dataclass
class World:
    positions: np.ndarray            # (N, 2)
    thetas: np.ndarray               # (N,)
    radii: np.ndarray                # (N,)
    params: SafetyParams
    dt: float
    rng_seed: int = 0
    t: float = 0.0

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 2)
        n = self.positions.shape[0]
        self.thetas = np.asarray(self.thetas, dtype=float).reshape(n)
        self.radii = np.asarray(self.radii, dtype=float).reshape(n)
        if not (self.dt > 0):
            raise InputError("dt must be positive")
        if np.any(self.radii <= 0):
            raise InputError("robot radii must be positive")

    @property
    def n(self) -> int:
        return self.positions.shape[0]


@dataclass
class Contact:
    kind: str                        # "pair" | "wall"
    i: int
    other: int | str                 # robot index or wall name
    depth: float
    normal: np.ndarray               # unit vector pushing robot i out of contact

    @property
    def key(self) -> tuple:
        if self.kind == "pair":
            return ("pair", min(self.i, int(self.other)), max(self.i, int(self.other)))
        return ("wall", self.i, self.other)


@dataclass
class ContactEvent:
    t: float
    key: tuple
    normal_speed: float              # approach speed along the normal at impact
    duration: float
    commanded: np.ndarray            # u_hat of the involved robot(s) at impact


@dataclass
class TickRecord:
    tick: int
    t: float
    x: np.ndarray
    u_hat: np.ndarray
    u_star: np.ndarray
    status: str                      # ok | rejected | unsafe_state | error
    contact_speeds: list[tuple[tuple, float]] = field(default_factory=list)


@dataclass
class Trace:
    config: dict
    records: list[TickRecord] = field(default_factory=list)
    contact_ticks: list[tuple[int, tuple, float]] = field(default_factory=list)
    error: str | None = None

    @property
    def n_robots(self) -> int:
        return int(self.config.get("robots", 0)) or (
            self.records[0].x.shape[0] if self.records else 0)

    def contact_events(self) -> list[ContactEvent]:
        """Merge consecutive contact ticks of the same pair/wall into events."""
        dt = float(self.config.get("dt", 0.0))
        open_events: dict[tuple, ContactEvent] = {}
        last_tick: dict[tuple, int] = {}
        done: list[ContactEvent] = []
        for tick, key, speed in self.contact_ticks:
            ev = open_events.get(key)
            if ev is not None and tick == last_tick[key] + 1:
                ev.duration += dt
            else:
                if ev is not None:
                    done.append(ev)
                rec = self.records[tick]
                idx = [key[1], key[2]] if key[0] == "pair" else [key[1]]
                open_events[key] = ContactEvent(
                    t=rec.t, key=key, normal_speed=speed, duration=dt,
                    commanded=rec.u_hat[idx].copy())
            last_tick[key] = tick
        done.extend(open_events.values())
        done.sort(key=lambda e: (e.t, e.key))
        return done

    def to_jsonl(self, path: str) -> None:
        with open(path, "w") as f:
            f.write(json.dumps({"config": self.config}) + "\n")
            for r in self.records:
                f.write(json.dumps({
                    "tick": r.tick, "t": round(r.t, 9), "status": r.status,
                    "x": r.x.tolist(), "u_hat": r.u_hat.tolist(),
                    "u_star": r.u_star.tolist(),
                }) + "\n")

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["t", "id", "x", "y", "theta",
                        "ux_hat", "uy_hat", "ux_star", "uy_star"])
            for r in self.records:
                for i in range(r.x.shape[0]):
                    w.writerow([r.t, i, r.x[i, 0], r.x[i, 1], 0.0,
                                r.u_hat[i, 0], r.u_hat[i, 1],
                                r.u_star[i, 0], r.u_star[i, 1]])

    def contacts_to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["t", "kind", "i", "other", "normal_speed", "duration"])
            for ev in self.contact_events():
                w.writerow([ev.t, ev.key[0], ev.key[1], ev.key[2],
                            ev.normal_speed, ev.duration])


def detect_collisions(world: World) -> list[Contact]:
    """Two-phase detection: uniform spatial hash broad phase, exact
    circle-circle / circle-wall narrow phase."""
    x, r = world.positions, world.radii
    n = world.n
    bl, br, bb, bt = world.params.bounds
    cell = max(2.0 * float(np.max(r, initial=0.01)), 1e-6)
    buckets: dict[tuple[int, int], list[int]] = {}
    for i in range(n):
        key = (int(math.floor(x[i, 0] / cell)), int(math.floor(x[i, 1] / cell)))
        buckets.setdefault(key, []).append(i)
    candidates: set[tuple[int, int]] = set()
    for (cx, cy), members in buckets.items():
        near: list[int] = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                near.extend(buckets.get((cx + dx, cy + dy), ()))
        for i in members:
            for j in near:
                if j > i:
                    candidates.add((i, j))
    contacts: list[Contact] = []
    for i, j in sorted(candidates):
        diff = x[i] - x[j]
        dist = float(np.linalg.norm(diff))
        min_dist = float(r[i] + r[j])
        if dist < min_dist:
            normal = diff / dist if dist > 0 else np.array([1.0, 0.0])
            contacts.append(Contact("pair", i, j, min_dist - dist, normal))
    for i in range(n):
        gaps = {
            "left": x[i, 0] - bl, "right": br - x[i, 0],
            "bottom": x[i, 1] - bb, "top": bt - x[i, 1],
        }
        for wall in WALLS:
            if gaps[wall] < r[i]:
                contacts.append(Contact("wall", i, wall,
                                        float(r[i] - gaps[wall]),
                                        _WALL_NORMALS[wall].copy()))
    return contacts


def resolve_nonpenetration(world: World, contacts: list[Contact],
                           max_passes: int = 8, tol: float = 1e-9) -> bool:
    """Gauss-Seidel positional resolution: split pair penetration evenly,
    push wall penetration fully inward.  Returns True when resolved."""
    if not contacts:
        return True
    for _ in range(max_passes):
        current = detect_collisions(world)
        if not current or max(c.depth for c in current) < tol:
            return True
        for c in current:
            if c.kind == "pair":
                shift = 0.5 * c.depth * c.normal
                world.positions[c.i] += shift
                world.positions[int(c.other)] -= shift
            else:
                world.positions[c.i] += c.depth * c.normal
    current = detect_collisions(world)
    return not current or max(c.depth for c in current) < tol


def _contact_speeds(world: World, contacts: list[Contact],
                    u: np.ndarray) -> list[tuple[tuple, float]]:
    out = []
    for c in contacts:
        if c.kind == "pair":
            rel = u[c.i] - u[int(c.other)]
            speed = max(0.0, -float(rel @ c.normal))
        else:
            speed = max(0.0, -float(u[c.i] @ c.normal))
        out.append((c.key, speed))
    return out


def step(world: World, u_hat: np.ndarray, use_filter: bool,
         sfilter: SafetyFilter | None = None,
         u_star: np.ndarray | None = None) -> TickRecord:
    """Advance one tick: filter (or clamp) the command, integrate, run the
    collision pipeline.  A precomputed u_star (held over a control period)
    skips the in-tick filter."""
    u_hat = np.asarray(u_hat, dtype=float).reshape(world.n, 2)
    tick = int(round(world.t / world.dt))
    if not np.all(np.isfinite(u_hat)):
        return TickRecord(tick, world.t, world.positions.copy(),
                          np.zeros_like(world.positions),
                          np.zeros_like(world.positions), "rejected")
    status = "ok"
    if u_star is None:
        if use_filter:
            f = sfilter if sfilter is not None else SafetyFilter(world.params)
            res = f(u_hat, world.positions)
            u_star = res.u_star
            if res.violation:
                status = "unsafe_state"
        else:
            u_star = np.clip(u_hat, -world.params.alpha, world.params.alpha)
    else:
        u_star = np.asarray(u_star, dtype=float).reshape(world.n, 2)
    world.positions = world.positions + u_star * world.dt
    contacts = detect_collisions(world)
    speeds = _contact_speeds(world, contacts, u_star)
    if contacts:
        resolve_nonpenetration(world, contacts)
    world.t = round(world.t + world.dt, 12)
    return TickRecord(tick, round(tick * world.dt, 12),
                      world.positions.copy(), u_hat.copy(), u_star.copy(),
                      status, speeds)


@dataclass
class SafetyReport:
    score: float
    n_contact_ticks: int
    n_events: int
    mean_collision_velocity: float
    mean_contact_duration: float


def safety_score(trace: Trace, params: SafetyParams) -> SafetyReport:
    """S = 1 - (sum of per-contact-tick normal speeds) / (N * ticks * alpha),
    clamped to [0, 1].  Unity when collision-free; zero when every robot is in
    contact at every tick at the maximum speed."""
    if not trace.records:
        raise InputError("cannot score an empty trace")
    n = trace.records[0].x.shape[0]
    ticks = len(trace.records)
    total = sum(speed for _, _, speed in trace.contact_ticks)
    score = 1.0 - total / (n * ticks * params.alpha)
    score = min(1.0, max(0.0, score))
    events = trace.contact_events()
    mean_v = float(np.mean([e.normal_speed for e in events])) if events else 0.0
    mean_d = float(np.mean([e.duration for e in events])) if events else 0.0
    return SafetyReport(score, len(trace.contact_ticks), len(events), mean_v, mean_d)


def spawn_positions(n: int, params: SafetyParams, rng: np.random.Generator,
                    min_sep: float | None = None, margin: float | None = None) -> np.ndarray:
    """Rejection-sample n positions inside the workspace with pairwise
    separation at least min_sep (default 1.5 * d_s)."""
    bl, br, bb, bt = params.bounds
    if min_sep is None:
        min_sep = 1.5 * params.d_s
    if margin is None:
        margin = params.d_s
    pts: list[np.ndarray] = []
    attempts = 0
    while len(pts) < n:
        attempts += 1
        if attempts > 100_000:
            raise InputError("could not place robots with requested separation")
        p = np.array([rng.uniform(bl + margin, br - margin),
                      rng.uniform(bb + margin, bt - margin)])
        if all(np.linalg.norm(p - q) >= min_sep for q in pts):
            pts.append(p)
    return np.array(pts)


Controller = Callable[[float, np.ndarray], np.ndarray]


def run(config: ExperimentConfig, controller: Controller,
        initial_positions: np.ndarray | None = None) -> Trace:
    """Run a full experiment: seeded spawn, controller every control period,
    filtered (or clamped) commands held across the period's ticks."""
    rng = np.random.default_rng(config.seed)
    if initial_positions is None:
        initial_positions = spawn_positions(config.robots, config.safety, rng)
    else:
        initial_positions = np.asarray(initial_positions, dtype=float).reshape(-1, 2)
        if initial_positions.shape[0] != config.robots:
            raise InputError("initial positions do not match robot count")
    world = World(initial_positions.copy(),
                  np.zeros(config.robots),
                  np.full(config.robots, config.robot_radius),
                  config.safety, config.dt, config.seed)
    trace = Trace(config.to_dict())
    sfilter = SafetyFilter(config.safety)
    u_hat = np.zeros((config.robots, 2))
    u_star = np.zeros((config.robots, 2))
    status = "ok"
    for tick in range(config.n_ticks):
        if tick % config.control_period_ticks == 0:
            try:
                u_hat = np.asarray(controller(world.t, world.positions.copy()),
                                   dtype=float).reshape(config.robots, 2)
            except Exception as exc:  # noqa: BLE001 - user code boundary
                trace.error = f"controller raised: {exc!r}"
                break
            if not np.all(np.isfinite(u_hat)):
                trace.error = "controller returned non-finite command"
                break
            if config.filter:
                res = sfilter(u_hat, world.positions)
                u_star = res.u_star
                status = "unsafe_state" if res.violation else "ok"
            else:
                u_star = np.clip(u_hat, -config.safety.alpha, config.safety.alpha)
                status = "ok"
        rec = step(world, u_hat, use_filter=False, u_star=u_star)
        rec.status = status
        trace.records.append(rec)
        for key, speed in rec.contact_speeds:
            trace.contact_ticks.append((tick, key, speed))
    return trace
