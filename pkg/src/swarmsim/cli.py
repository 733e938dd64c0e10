"""Experiment runner: demos, controller verification, interactive serving,
trace export and summary plots."""

from __future__ import annotations

import argparse
import importlib
import json
import os
import sys
from dataclasses import replace

import numpy as np

from . import controllers, geometry, sim, verify
from .config import ExperimentConfig
from .errors import ConfigError, InputError
from .safety import SafetyParams

ERROR_PREFIX = "swarmsim-error:"
ENV_PREFIX = "SWARMSIM_"


def square_corners(params: SafetyParams, frac: float = 0.5) -> np.ndarray:
    """Four corner positions at the given fraction of the workspace half-extent,
    with a tiny deterministic offset to break the swap symmetry."""
    bl, br, bb, bt = params.bounds
    hx, hy = frac * (br - bl) / 2, frac * (bt - bb) / 2
    cx, cy = (bl + br) / 2, (bb + bt) / 2
    corners = np.array([[cx - hx, cy - hy], [cx + hx, cy - hy],
                        [cx + hx, cy + hy], [cx - hx, cy + hy]])
    # offsets chosen so opposite corners are NOT exactly antipodal: the swap
    # demo would otherwise start every pair perfectly head-on
    corners += 1e-3 * np.array([[1, 0], [0, 1], [1, 0], [0, 1]])
    return corners


def si_go_to_goal(goals: np.ndarray, gain: float = 1.0,
                  alpha: float = 0.1) -> sim.Controller:
    """Single-integrator go-to-goal: u = gain * (g - x), box-clamped."""
    goals = np.asarray(goals, dtype=float)

    def controller(t: float, x: np.ndarray) -> np.ndarray:
        return np.clip(gain * (goals - x), -alpha, alpha)

    return controller


def hexagon_formation_spec(radius: float = 0.25, gain: float = 1.0):
    """Rigid 6-agent spec: hexagon cycle braced by the 0-2, 2-4, 4-0 diagonals."""
    ang = np.linspace(0, 2 * np.pi, 6, endpoint=False)
    template = radius * np.column_stack([np.cos(ang), np.sin(ang)])
    edges = frozenset({(i, (i + 1) % 6) for i in range(6)} | {(0, 2), (2, 4), (0, 4)})
    topo = controllers.Topology(6, edges)
    return controllers.FormationSpec.from_positions(topo, template, gain), template


def make_controller(name: str, config: ExperimentConfig,
                    initial_positions: np.ndarray | None) -> sim.Controller:
    opts = config.controller_opts
    if name == "consensus":
        graph = opts.get("graph", "cycle")
        topo = (controllers.Topology.cycle(config.robots) if graph == "cycle"
                else controllers.Topology.complete(config.robots))
        return lambda t, x: controllers.consensus(x, topo)
    if name == "formation":
        spec, _ = hexagon_formation_spec(opts.get("radius", 0.25),
                                         opts.get("gain", 1.0))
        if config.robots != spec.topology.n:
            raise ConfigError("formation demo requires 6 robots")
        return lambda t, x: controllers.formation(x, spec)
    if name == "coverage":
        refs = [geometry.DensityRef(i, tuple(p), w) for i, (p, w) in
                enumerate(opts.get("refs", [((0.3, 0.3), 5.0), ((-0.3, -0.2), 5.0)]))]
        fld = geometry.DensityField(refs=refs)
        cparams = controllers.CoverageParams(
            kappa=opts.get("kappa", 1.0), mode=opts.get("mode", "lloyd"),
            resolution=opts.get("resolution", 64))
        return controllers.CoverageController(
            fld, cparams, config.safety.bounds,
            control_period=config.dt * config.control_period_ticks)
    if name == "swap":
        if initial_positions is None:
            raise ConfigError("swap controller needs initial positions")
        goals = np.roll(initial_positions, 2, axis=0)  # diagonal opposite corner
        return si_go_to_goal(goals, alpha=config.safety.alpha)
    if name == "external":
        target = opts.get("target")
        if not target or ":" not in target:
            raise ConfigError("external controller needs opts.target 'module:callable'")
        mod_name, attr = target.split(":", 1)
        factory = getattr(importlib.import_module(mod_name), attr)
        return factory(config)
    raise ConfigError(f"unknown controller {name!r}")


def plot_trace(trace: sim.Trace, path: str) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xs = np.array([r.x for r in trace.records])  # (T, N, 2)
    fig, ax = plt.subplots(figsize=(6, 6))
    bounds = trace.config["safety"]["bounds"]
    bl, br, bb, bt = bounds
    ax.plot([bl, br, br, bl, bl], [bb, bb, bt, bt, bb], "k-", lw=1)
    for i in range(xs.shape[1]):
        ax.plot(xs[:, i, 0], xs[:, i, 1], "-", lw=1)
        ax.plot(xs[0, i, 0], xs[0, i, 1], "*", ms=10)
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)


def summarize(trace: sim.Trace, config: ExperimentConfig) -> dict:
    xs = np.array([r.x for r in trace.records])
    final = xs[-1]
    n = final.shape[0]
    dists = [float(np.linalg.norm(final[i] - final[j]))
             for i in range(n) for j in range(i + 1, n)]
    min_dist = float("inf")
    for snap in xs:
        for i in range(n):
            for j in range(i + 1, n):
                min_dist = min(min_dist, float(np.linalg.norm(snap[i] - snap[j])))
    report = sim.safety_score(trace, config.safety)
    return {
        "ticks": len(trace.records),
        "final_max_pairwise_distance": max(dists) if dists else 0.0,
        "min_pairwise_distance": min_dist if dists else None,
        "safety_score": report.score,
        "contact_events": report.n_events,
    }


def _write_outputs(trace: sim.Trace, config: ExperimentConfig,
                   out_dir: str, summary: dict) -> None:
    os.makedirs(out_dir, exist_ok=True)
    trace.to_jsonl(os.path.join(out_dir, "trace.jsonl"))
    trace.to_csv(os.path.join(out_dir, "trace.csv"))
    trace.contacts_to_csv(os.path.join(out_dir, "contacts.csv"))
    with open(os.path.join(out_dir, "summary.json"), "w") as f:
        json.dump(summary, f, indent=2)
    plot_trace(trace, os.path.join(out_dir, "trajectories.png"))


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config:
        config = ExperimentConfig.load(args.config)
    else:
        config = ExperimentConfig()
    env_seed = os.environ.get(ENV_PREFIX + "SEED")
    if env_seed is not None:
        config = replace(config, seed=int(env_seed))
    for attr in ("seed", "duration", "robots"):
        v = getattr(args, attr, None)
        if v is not None:
            config = replace(config, **{attr: v})
    if getattr(args, "filter", None) is not None:
        config = replace(config, filter=args.filter == "on")
    return config


def cmd_demo(args: argparse.Namespace) -> int:
    config = _load_config(args)
    name = args.name
    if name == "swap":
        config = replace(config, robots=4)
    elif name in ("consensus", "formation") and args.robots is None:
        config = replace(config, robots=6)
    config = replace(config, controller=name)
    if args.graph:
        config.controller_opts["graph"] = args.graph
    rng = np.random.default_rng(config.seed)
    if name == "swap":
        initial = square_corners(config.safety)
    elif name == "formation":
        _, template = hexagon_formation_spec()
        initial = template + rng.normal(scale=0.02, size=template.shape)
    else:
        initial = sim.spawn_positions(config.robots, config.safety, rng)
    controller = make_controller(name, config, initial)
    trace = sim.run(config, controller, initial_positions=initial)
    if trace.error:
        print(f"{ERROR_PREFIX} {trace.error}")
        return 1
    summary = summarize(trace, config)
    out_dir = args.out or config.out_dir or f"out_{name}"
    _write_outputs(trace, config, out_dir, summary)
    print(json.dumps(summary, indent=2))
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    config = _load_config(args)
    rng = np.random.default_rng(config.seed)
    initial = sim.spawn_positions(config.robots, config.safety, rng)
    controller = make_controller(config.controller, config, initial)
    trace = sim.run(config, controller, initial_positions=initial)
    if trace.error:
        print(f"{ERROR_PREFIX} {trace.error}")
        return 1
    summary = summarize(trace, config)
    out_dir = args.out or config.out_dir or "out_run"
    _write_outputs(trace, config, out_dir, summary)
    print(json.dumps(summary, indent=2))
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    config = _load_config(args)
    suite = verify.default_suite(robots=config.robots or 6,
                                 duration=args.duration or 30.0,
                                 params=config.safety)

    def factory(scenario):
        cfg = scenario.config
        initial = scenario.initial_positions
        if initial is None:
            rng = np.random.default_rng(cfg.seed)
            initial = sim.spawn_positions(cfg.robots, cfg.safety, rng)
        cfg = replace(cfg, controller=args.controller,
                      controller_opts=dict(config.controller_opts))
        return make_controller(args.controller, cfg, initial)

    report = verify.verify(factory, suite)
    print(report.summary())
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "verification.json"), "w") as f:
            f.write(report.to_json())
    return 0 if report.decision == "bypass_allowed" else 2


def cmd_serve(args: argparse.Namespace) -> int:
    from .server import SimServer

    config = _load_config(args)
    server = SimServer(config, host=args.host, port=args.port,
                       broadcast_hz=args.rate, time_scale=args.time_scale)
    try:
        server.start()
    except OSError as exc:
        print(f"{ERROR_PREFIX} cannot bind {args.host}:{args.port}: {exc}")
        return 1
    print(f"serving on {server.host}:{server.port} "
          f"({config.robots} robots, broadcast {args.rate} Hz)")
    sys.stdout.flush()
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="swarmsim")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--filter", choices=["on", "off"])
        sp.add_argument("--duration", type=float)
        sp.add_argument("--robots", type=int)

    d = sub.add_parser("demo", help="run a named demo experiment")
    d.add_argument("name", choices=["consensus", "formation", "coverage", "swap"])
    d.add_argument("--graph", choices=["cycle", "complete"])
    common(d)
    d.set_defaults(func=cmd_demo)

    r = sub.add_parser("run", help="run an experiment from a config file")
    common(r)
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="score a controller against the suite")
    v.add_argument("controller",
                   help="controller name or 'external' (with --config opts)")
    common(v)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("serve", help="serve an interactive coverage session")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=9870)
    s.add_argument("--rate", type=float, default=20.0)
    s.add_argument("--time-scale", type=float, default=1.0, dest="time_scale")
    common(s)
    s.set_defaults(func=cmd_serve)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InputError, FileNotFoundError) as exc:
        print(f"{ERROR_PREFIX} {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
