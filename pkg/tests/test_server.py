import socket
import threading
import time

import numpy as np
import pytest

from swarmsim import geometry
from swarmsim.config import ExperimentConfig
from swarmsim.protocol import FrameReader, encode_frame
from swarmsim.server import Session, SimServer


def msg(mtype, **kw):
    kw.update(type=mtype, v=1)
    return kw


@pytest.fixture
def session():
    return Session(ExperimentConfig(robots=3, seed=1))


# -- Session core (no sockets) ------------------------------------------------

def test_cursor_add_affects_density(session):
    assert session.handle_message(msg("cursor_add", id=1, x=0.2, y=0.1, w=2.0)) is None
    d = geometry.density_at(session.field, np.array([0.2, 0.1]))
    assert d == pytest.approx(session.field.floor + 2.0)


def test_cursor_update_and_remove(session):
    session.handle_message(msg("cursor_add", id=1, x=0.2, y=0.1, w=1.0))
    assert session.handle_message(msg("cursor_update", id=1, x=-0.3, y=0.0)) is None
    assert session.field.refs[0].position == (-0.3, 0.0)
    assert session.handle_message(msg("cursor_remove", id=1)) is None
    assert session.field.refs == []


def test_cursor_errors(session):
    r = session.handle_message(msg("cursor_update", id=9, x=0, y=0))
    assert r["type"] == "error"
    session.handle_message(msg("cursor_add", id=1, x=0, y=0, w=1))
    r = session.handle_message(msg("cursor_add", id=1, x=0, y=0, w=1))
    assert r["type"] == "error"
    r = session.handle_message(msg("cursor_add", id=2, x=99, y=0, w=1))
    assert "workspace" in r["reason"]


def test_set_param_validation(session):
    assert session.handle_message(msg("set_param", name="d_s", value=-1))["type"] == "error"
    assert session.handle_message(msg("set_param", name="bogus", value=1))["type"] == "error"
    assert session.handle_message(msg("set_param", name="gamma", value=2.0)) is None
    # applied at the next control period, not immediately
    assert session.params.gamma == 1.0
    session.tick()
    assert session.params.gamma == 2.0


def test_pause_resume_tick_count(session):
    session.handle_message(msg("pause"))
    for _ in range(5):
        session.tick()
    assert session.tick_count == 0
    assert session.snapshot()["params"]["status"] == "paused"
    session.handle_message(msg("resume"))
    session.tick()
    assert session.tick_count == 1


def test_unknown_and_malformed_messages(session):
    assert session.handle_message(msg("warp"))["type"] == "error"
    assert session.handle_message({"no": "type"})["type"] == "error"
    r = session.handle_message(msg("cursor_add", id="x", y=0))
    assert r["type"] == "error"


def test_snapshot_shape(session):
    snap = session.snapshot()
    assert snap["type"] == "state" and snap["v"] == 1
    assert len(snap["robots"]) == 3
    assert {"id", "x", "y", "theta"} <= set(snap["robots"][0])
    assert snap["score"] == 1.0


def test_cursor_messages_commute(session):
    a = Session(ExperimentConfig(robots=2, seed=3))
    b = Session(ExperimentConfig(robots=2, seed=3))
    m1 = msg("cursor_add", id=1, x=0.1, y=0.1, w=1.0)
    m2 = msg("cursor_add", id=2, x=-0.1, y=0.2, w=2.0)
    a.handle_message(m1), a.handle_message(m2)
    b.handle_message(m2), b.handle_message(m1)
    refs_a = sorted((r.id, r.position, r.weight) for r in a.field.refs)
    refs_b = sorted((r.id, r.position, r.weight) for r in b.field.refs)
    assert refs_a == refs_b


# -- TCP server ---------------------------------------------------------------

@pytest.fixture
def server():
    cfg = ExperimentConfig(robots=3, seed=2)
    srv = SimServer(cfg, port=0, broadcast_hz=20.0, time_scale=5.0)
    srv.start()
    yield srv
    srv.stop()


def connect(server):
    sock = socket.create_connection((server.host, server.port), timeout=5)
    return sock, FrameReader(sock)


def recv_state(reader, deadline=5.0):
    end = time.monotonic() + deadline
    while time.monotonic() < end:
        m = reader.read()
        if m is None:
            raise AssertionError("server closed connection")
        if m["type"] == "state":
            return m
    raise AssertionError("no state message received")


def test_hello_roundtrip(server):
    sock, reader = connect(server)
    sock.sendall(encode_frame(msg("hello", role="ui")))
    end = time.monotonic() + 5
    while time.monotonic() < end:
        m = reader.read()
        if m["type"] == "hello":
            assert m["role"] == "server"
            break
    else:
        raise AssertionError("no hello reply")
    sock.close()


def test_cursor_add_appears_in_broadcast(server):
    sock, reader = connect(server)
    sock.sendall(encode_frame(msg("cursor_add", id=5, x=0.25, y=-0.1, w=1.5)))
    end = time.monotonic() + 5
    while time.monotonic() < end:
        m = recv_state(reader)
        if m["density_refs"]:
            ref = m["density_refs"][0]
            assert ref["id"] == 5
            assert ref["x"] == pytest.approx(0.25)
            break
    else:
        raise AssertionError("density ref never broadcast")
    sock.close()


def test_broadcast_rate(server):
    sock, reader = connect(server)
    first = recv_state(reader)
    count = 0
    start = time.monotonic()
    while time.monotonic() - start < 1.0:
        m = reader.read()
        if m and m["type"] == "state":
            count += 1
    assert 14 <= count <= 26  # nominal 20 Hz with scheduling slack
    assert first["t"] >= 0.0
    sock.close()


def test_malformed_frame_gets_error_and_session_survives(server):
    sock, reader = connect(server)
    sock.sendall(b"garbage-without-length\n")
    end = time.monotonic() + 5
    saw_error = False
    while time.monotonic() < end:
        m = reader.read()
        if m is None:
            break
        if m["type"] == "error":
            saw_error = True
            break
    assert saw_error
    sock.close()
    # a fresh client still works
    sock2, reader2 = connect(server)
    assert recv_state(reader2)["type"] == "state"
    sock2.close()


def test_sim_advances_and_robots_move_toward_cursor(server):
    sock, reader = connect(server)
    sock.sendall(encode_frame(msg("cursor_add", id=1, x=0.4, y=0.4, w=20.0)))
    s0 = recv_state(reader)
    t_target = s0["t"] + 2.0
    while True:
        s1 = recv_state(reader)
        if s1["t"] >= t_target:
            break

    def mean_dist(state):
        return np.mean([np.hypot(r["x"] - 0.4, r["y"] - 0.4)
                        for r in state["robots"]])

    assert s1["t"] > s0["t"]
    assert mean_dist(s1) < mean_dist(s0)
    sock.close()


def test_serve_forever_after_start_does_not_rebind():
    # start() then serve_forever() is the CLI's call order; the second call
    # must not bind the listener again
    cfg = ExperimentConfig(robots=2, seed=5)
    srv = SimServer(cfg, port=0, time_scale=10.0)
    srv.start()
    th = threading.Thread(target=srv.serve_forever, daemon=True)
    th.start()
    time.sleep(0.3)
    sock, reader = connect(srv)
    assert recv_state(reader)["type"] == "state"
    sock.close()
    srv.stop()
    th.join(timeout=2.0)


def test_no_clients_stable():
    cfg = ExperimentConfig(robots=2, seed=4)
    srv = SimServer(cfg, port=0, broadcast_hz=20.0, time_scale=10.0)
    srv.start()
    time.sleep(1.0)
    assert srv.session.tick_count > 0
    srv.stop()
