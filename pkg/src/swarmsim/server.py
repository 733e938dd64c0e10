"""Real-time session server.

One thread owns the simulation loop; clients connect over TCP, receive state
broadcasts at a fixed rate, and send cursor / parameter messages that are
queued and applied at tick boundaries.
"""

from __future__ import annotations

import queue
import socket
import threading
import time

import numpy as np

from . import protocol, sim
from .config import ExperimentConfig
from .controllers import CoverageController, CoverageParams
from .geometry import DensityField, DensityRef
from .protocol import PROTOCOL_VERSION, encode_frame, error_msg
from .safety import SafetyFilter

# validated ranges for set_param, inclusive bounds
PARAM_RANGES = {
    "gamma": (1e-3, 10.0),
    "d_s": (1e-3, 0.5),
    "alpha": (1e-3, 1.0),
    "kappa": (1e-3, 10.0),
}


class Session:
    """Socket-free session core: simulation state, density references, and
    message handling.  Thread-unsafe by design; the owning loop serializes
    all access."""

    def __init__(self, config: ExperimentConfig,
                 coverage: CoverageParams | None = None):
        self.config = config
        self.params = config.safety
        rng = np.random.default_rng(config.seed)
        self.positions = sim.spawn_positions(config.robots, self.params, rng)
        self.field = DensityField()
        self.coverage_params = coverage or CoverageParams(resolution=64)
        self.controller = CoverageController(
            self.field, self.coverage_params, self.params.bounds,
            control_period=config.dt * config.control_period_ticks)
        self.sfilter = SafetyFilter(self.params)
        self.t = 0.0
        self.tick_count = 0
        self.running = True
        self.kappa = self.coverage_params.kappa
        self._pending_params: dict[str, float] = {}
        self._u_star = np.zeros((config.robots, 2))
        self._contact_speed_total = 0.0

    # -- message handling ---------------------------------------------------

    def handle_message(self, msg: dict) -> dict | None:
        """Apply one client message; returns a reply (hello/error) or None."""
        if not isinstance(msg, dict) or "type" not in msg:
            return error_msg("missing message type")
        mtype = msg["type"]
        try:
            if mtype == "hello":
                return {"type": "hello", "v": PROTOCOL_VERSION, "role": "server"}
            if mtype == "cursor_add":
                cid = int(msg["id"])
                x, y, w = float(msg["x"]), float(msg["y"]), float(msg.get("w", 1.0))
                self._check_in_workspace(x, y)
                if any(r.id == cid for r in self.field.refs):
                    return error_msg(f"cursor id {cid} already exists")
                self.field.refs.append(DensityRef(cid, (x, y), w))
                return None
            if mtype == "cursor_update":
                cid = int(msg["id"])
                x, y = float(msg["x"]), float(msg["y"])
                self._check_in_workspace(x, y)
                for r in self.field.refs:
                    if r.id == cid:
                        r.position = (x, y)
                        return None
                return error_msg(f"unknown cursor id {cid}")
            if mtype == "cursor_remove":
                cid = int(msg["id"])
                before = len(self.field.refs)
                self.field.refs[:] = [r for r in self.field.refs if r.id != cid]
                if len(self.field.refs) == before:
                    return error_msg(f"unknown cursor id {cid}")
                return None
            if mtype == "set_param":
                name, value = str(msg["name"]), float(msg["value"])
                if name not in PARAM_RANGES:
                    return error_msg(f"unknown parameter {name!r}")
                lo, hi = PARAM_RANGES[name]
                if not (lo <= value <= hi):
                    return error_msg(f"{name} out of range [{lo}, {hi}]")
                self._pending_params[name] = value
                return None
            if mtype == "pause":
                self.running = False
                return None
            if mtype == "resume":
                self.running = True
                return None
            return error_msg(f"unknown message type {mtype!r}")
        except (KeyError, TypeError, ValueError) as exc:
            return error_msg(f"malformed {mtype} message: {exc}")

    def _check_in_workspace(self, x: float, y: float) -> None:
        bl, br, bb, bt = self.params.bounds
        if not (bl <= x <= br and bb <= y <= bt):
            raise ValueError(f"({x}, {y}) outside workspace")

    def _apply_pending_params(self) -> None:
        if not self._pending_params:
            return
        from dataclasses import replace
        updates = {k: v for k, v in self._pending_params.items() if k != "kappa"}
        if updates:
            self.params = replace(self.params, **updates)
            self.sfilter = SafetyFilter(self.params)
        if "kappa" in self._pending_params:
            self.kappa = self._pending_params["kappa"]
            self.controller.params = CoverageParams(
                kappa=self.kappa, mode=self.coverage_params.mode,
                resolution=self.coverage_params.resolution)
        self._pending_params.clear()

    # -- simulation ---------------------------------------------------------

    def tick(self) -> None:
        """Advance one sim tick if running; controller and parameter changes
        apply at control-period boundaries only."""
        if not self.running:
            return
        cfg = self.config
        if self.tick_count % cfg.control_period_ticks == 0:
            self._apply_pending_params()
            u_hat = self.controller(self.t, self.positions.copy())
            if cfg.filter:
                self._u_star = self.sfilter(u_hat, self.positions).u_star
            else:
                self._u_star = np.clip(u_hat, -self.params.alpha, self.params.alpha)
        self.positions = self.positions + self._u_star * cfg.dt
        self.t = round(self.t + cfg.dt, 12)
        self.tick_count += 1

    def score_so_far(self) -> float:
        if self.tick_count == 0:
            return 1.0
        denom = self.config.robots * self.tick_count * self.params.alpha
        return max(0.0, min(1.0, 1.0 - self._contact_speed_total / denom))

    def snapshot(self) -> dict:
        """Immutable state message for broadcast."""
        return {
            "type": "state",
            "v": PROTOCOL_VERSION,
            "t": round(self.t, 9),
            "robots": [
                {"id": i, "x": float(p[0]), "y": float(p[1]), "theta": 0.0}
                for i, p in enumerate(self.positions)
            ],
            "density_refs": [
                {"id": r.id, "x": r.position[0], "y": r.position[1], "w": r.weight}
                for r in self.field.refs
            ],
            "params": {
                "d_s": self.params.d_s, "gamma": self.params.gamma,
                "alpha": self.params.alpha, "kappa": self.kappa,
                "bounds": list(self.params.bounds),
                "status": "running" if self.running else "paused",
            },
            "score": self.score_so_far(),
        }


class _Client:
    def __init__(self, sock: socket.socket, addr):
        self.sock = sock
        self.addr = addr
        # latest-wins outbox: a slow client drops intermediate states
        self.outbox: queue.Queue = queue.Queue(maxsize=8)
        self.alive = True

    def offer(self, data: bytes) -> None:
        while True:
            try:
                self.outbox.put_nowait(data)
                return
            except queue.Full:
                try:
                    self.outbox.get_nowait()
                except queue.Empty:
                    pass

    def close(self) -> None:
        self.alive = False
        try:
            self.sock.close()
        except OSError:
            pass


class SimServer:
    """TCP server owning one Session; see docs/protocol.md for the wire
    format."""

    def __init__(self, config: ExperimentConfig,
                 host: str = "127.0.0.1", port: int = 9870,
                 broadcast_hz: float = 20.0, time_scale: float = 1.0,
                 coverage: CoverageParams | None = None):
        self.session = Session(config, coverage=coverage)
        self.host, self.port = host, port
        self.broadcast_hz = broadcast_hz
        self.time_scale = time_scale
        self._inbox: queue.Queue = queue.Queue()
        self._clients: list[_Client] = []
        self._clients_lock = threading.Lock()
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []
        self._listener: socket.socket | None = None

    # -- lifecycle ----------------------------------------------------------

    def start(self) -> None:
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind((self.host, self.port))
        self.port = self._listener.getsockname()[1]
        self._listener.listen(16)
        for target in (self._accept_loop, self._sim_loop, self._broadcast_loop):
            th = threading.Thread(target=target, daemon=True)
            th.start()
            self._threads.append(th)

    def stop(self) -> None:
        self._stop.set()
        if self._listener:
            try:
                self._listener.close()
            except OSError:
                pass
        with self._clients_lock:
            for c in self._clients:
                c.close()
        for th in self._threads:
            th.join(timeout=2.0)

    def serve_forever(self) -> None:
        if self._listener is None:
            self.start()
        try:
            while not self._stop.is_set():
                time.sleep(0.2)
        except KeyboardInterrupt:
            pass
        finally:
            self.stop()

    # -- threads ------------------------------------------------------------

    def _accept_loop(self) -> None:
        assert self._listener is not None
        while not self._stop.is_set():
            try:
                sock, addr = self._listener.accept()
            except OSError:
                return
            client = _Client(sock, addr)
            with self._clients_lock:
                self._clients.append(client)
            threading.Thread(target=self._reader_loop, args=(client,),
                             daemon=True).start()
            threading.Thread(target=self._writer_loop, args=(client,),
                             daemon=True).start()

    def _reader_loop(self, client: _Client) -> None:
        reader = protocol.FrameReader(client.sock)
        while not self._stop.is_set() and client.alive:
            try:
                msg = reader.read()
            except ValueError as exc:
                # framing errors are unrecoverable: the byte stream cannot be
                # resynchronized, so report and drop the connection
                client.offer(encode_frame(error_msg(str(exc))))
                time.sleep(0.1)  # let the writer flush the error reply
                break
            except OSError:
                break
            if msg is None:
                break
            self._inbox.put((client, msg))
        self._drop(client)

    def _writer_loop(self, client: _Client) -> None:
        while not self._stop.is_set() and client.alive:
            try:
                data = client.outbox.get(timeout=0.25)
            except queue.Empty:
                continue
            try:
                client.sock.sendall(data)
            except OSError:
                break
        self._drop(client)

    def _drop(self, client: _Client) -> None:
        client.close()
        with self._clients_lock:
            if client in self._clients:
                self._clients.remove(client)

    def _sim_loop(self) -> None:
        dt_wall = self.session.config.dt / self.time_scale
        next_tick = time.monotonic()
        while not self._stop.is_set():
            # apply queued messages at the tick boundary
            while True:
                try:
                    client, msg = self._inbox.get_nowait()
                except queue.Empty:
                    break
                reply = self.session.handle_message(msg)
                if reply is not None:
                    client.offer(encode_frame(reply))
            self.session.tick()
            next_tick += dt_wall
            delay = next_tick - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            else:
                next_tick = time.monotonic()

    def _broadcast_loop(self) -> None:
        period = 1.0 / self.broadcast_hz
        while not self._stop.is_set():
            data = encode_frame(self.session.snapshot())
            with self._clients_lock:
                clients = list(self._clients)
            for c in clients:
                c.offer(data)
            time.sleep(period)
