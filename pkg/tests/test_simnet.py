"""Event loop, latency model, fault semantics, and determinism checks."""
import random

import pytest

from adaptstore.simnet import (
    Endpoint,
    FaultSpec,
    Reply,
    Simulator,
    TimeInPastError,
    Timeout,
    UnknownFaultError,
)

WEBUI = Endpoint("webui")
DB = Endpoint("local_static_db")
CLIENT = Endpoint("client")


def make_sim(seed=0):
    return Simulator(seed=seed)


def echo_handler(service_ms=10, counter=None):
    def handle(sim, env):
        if counter is not None:
            counter.append(env.id)
        return Reply({"echo": env.payload}, service_ms=service_ms)

    return handle


def test_schedule_fires_at_zero():
    sim = make_sim()
    fired = []
    sim.schedule(0, lambda: fired.append(sim.now))
    sim.run_until(0)
    assert fired == [0]


def test_equal_time_events_stable_order():
    sim = make_sim()
    order = []
    sim.schedule(10, lambda: order.append("A"))
    sim.schedule(10, lambda: order.append("B"))
    sim.run_until(20)
    assert order == ["A", "B"]


def test_schedule_in_past_errors():
    sim = make_sim()
    sim.run_until(7)
    with pytest.raises(TimeInPastError):
        sim.schedule(5, lambda: None)


def test_run_until_backwards_errors():
    sim = make_sim()
    sim.run_until(10)
    with pytest.raises(TimeInPastError):
        sim.run_until(5)


def test_run_until_empty_queue_returns_empty_slice():
    sim = make_sim()
    assert sim.run_until(0) == []


def test_response_arrives_per_latency_formula():
    # link 5ms each way plus 10ms service time: response at t+20.
    sim = make_sim()
    sim.register(DB, echo_handler(service_ms=10))
    resolutions = []
    sim.send_request(WEBUI, DB, {"op": "q"}, timeout_ms=100, on_resolve=resolutions.append)
    sim.run_until(19)
    assert resolutions == []
    sim.run_until(20)
    assert len(resolutions) == 1
    assert resolutions[0] == {"echo": {"op": "q"}}
    response = [r for r in sim.log if r["kind"] == "response"][0]
    assert response["t"] == 20
    assert response["detail"]["latency_ms"] == 20


def test_down_target_times_out_at_deadline():
    sim = make_sim()
    invoked = []
    sim.register(DB, echo_handler(counter=invoked))
    sim.inject_fault(FaultSpec(kind="down", targets=frozenset({DB})))
    resolutions = []
    sim.send_request(WEBUI, DB, {"op": "q"}, timeout_ms=100, on_resolve=resolutions.append)
    sim.run_until(500)
    assert invoked == []
    assert len(resolutions) == 1
    assert isinstance(resolutions[0], Timeout)
    timeout = [r for r in sim.log if r["kind"] == "timeout"][0]
    assert timeout["t"] == 100


def test_latency_multiplier_pushes_past_deadline():
    # 2 * (5 * 30) + 10 = 310 > 100, so the sender sees a timeout but the
    # late response is still recorded with its true latency.
    sim = make_sim()
    sim.register(DB, echo_handler(service_ms=10))
    sim.inject_fault(FaultSpec(kind="latency", targets=frozenset({DB}), factor=30))
    resolutions = []
    sim.send_request(WEBUI, DB, {"op": "q"}, timeout_ms=100, on_resolve=resolutions.append)
    sim.run_until(1000)
    assert isinstance(resolutions[0], Timeout)
    late = [r for r in sim.log if r["kind"] == "response"]
    assert len(late) == 1
    assert late[0]["detail"]["late"] is True
    assert late[0]["detail"]["latency_ms"] == 310


def test_clear_fault_restores_delivery():
    sim = make_sim()
    sim.register(DB, echo_handler())
    fault = sim.inject_fault(FaultSpec(kind="down", targets=frozenset({DB})))
    got = []
    sim.send_request(WEBUI, DB, {"op": "q"}, timeout_ms=50, on_resolve=got.append)
    sim.run_until(60)
    assert isinstance(got[0], Timeout)
    sim.clear_fault(fault)
    got.clear()
    sim.send_request(WEBUI, DB, {"op": "q"}, timeout_ms=50, on_resolve=got.append)
    sim.run_until(120)
    assert got == [{"echo": {"op": "q"}}]


def test_clear_fault_twice_errors():
    sim = make_sim()
    fault = sim.inject_fault(FaultSpec(kind="down", targets=frozenset({DB})))
    sim.clear_fault(fault)
    with pytest.raises(UnknownFaultError):
        sim.clear_fault(fault)


def test_clear_with_requests_in_flight_keeps_deadlines():
    # The request's delivery slot passed while the fault was active, so the
    # deadline fixed at send time still produces a timeout after clearing.
    sim = make_sim()
    sim.register(DB, echo_handler())
    fault = sim.inject_fault(FaultSpec(kind="down", targets=frozenset({DB})))
    got = []
    sim.send_request(WEBUI, DB, {"op": "q"}, timeout_ms=100, on_resolve=got.append)
    sim.run_until(50)
    sim.clear_fault(fault)
    sim.run_until(200)
    assert len(got) == 1
    assert isinstance(got[0], Timeout)


def test_partition_blocks_crossing_traffic_only():
    sim = make_sim()
    rec = Endpoint("recommender")
    sim.register(DB, echo_handler())
    sim.register(rec, echo_handler())
    sim.inject_fault(
        FaultSpec(
            kind="partition",
            group_a=frozenset({WEBUI}),
            group_b=frozenset({DB}),
        )
    )
    got_db, got_rec = [], []
    sim.send_request(WEBUI, DB, {"op": "q"}, timeout_ms=80, on_resolve=got_db.append)
    sim.send_request(WEBUI, rec, {"op": "q"}, timeout_ms=80, on_resolve=got_rec.append)
    sim.run_until(200)
    assert isinstance(got_db[0], Timeout)
    assert got_rec == [{"echo": {"op": "q"}}]


def test_partition_injected_mid_flight_blocks_response_leg():
    # Request delivered before the partition lands; the response crossing
    # the partition is dropped, so the sender still times out.
    sim = make_sim()
    sim.register(DB, echo_handler(service_ms=30))
    got = []
    sim.send_request(WEBUI, DB, {"op": "q"}, timeout_ms=100, on_resolve=got.append)
    sim.run_until(10)  # past delivery (t=5), before response emission (t=35)
    sim.inject_fault(
        FaultSpec(kind="partition", group_a=frozenset({WEBUI}), group_b=frozenset({DB}))
    )
    sim.run_until(300)
    assert len(got) == 1
    assert isinstance(got[0], Timeout)
    blocked = [r for r in sim.log if r["kind"] == "response" and r["detail"].get("blocked")]
    assert blocked and blocked[0]["detail"]["blocked"] == "partition"


def test_every_request_resolves_exactly_once():
    rng = random.Random(7)
    sim = make_sim(seed=7)
    sim.register(DB, echo_handler(service_ms=10))
    resolutions: dict[int, list] = {}
    fault_id = None
    for step in range(200):
        at = step * 17
        sim.run_until(at)
        if step == 60:
            fault_id = sim.inject_fault(FaultSpec(kind="down", targets=frozenset({DB})))
        if step == 120 and fault_id is not None:
            sim.clear_fault(fault_id)
        timeout = rng.choice([5, 30, 100])
        rid = sim.send_request(
            WEBUI,
            DB,
            {"op": "q", "n": step},
            timeout_ms=timeout,
            on_resolve=lambda result, rid_list=[]: rid_list.append(result),
        )
        resolutions[rid] = []
    # Re-send with tracked callbacks: simpler to recount from the log.
    sim.run_until(200 * 17 + 500)
    requests = [r["detail"]["id"] for r in sim.log if r["kind"] == "request"]
    timeouts = [r["detail"]["id"] for r in sim.log if r["kind"] == "timeout"]
    responses = [
        r["detail"]["id"]
        for r in sim.log
        if r["kind"] == "response" and not r["detail"].get("late")
    ]
    assert len(requests) == 200
    resolved = sorted(timeouts + responses)
    assert resolved == sorted(requests), "each request resolves exactly once"


def test_down_handler_never_invoked_while_down():
    sim = make_sim()
    invoked = []
    sim.register(DB, echo_handler(counter=invoked))
    sim.inject_fault(FaultSpec(kind="down", targets=frozenset({DB})))
    for i in range(10):
        sim.send_request(WEBUI, DB, {"op": "q", "n": i}, timeout_ms=50)
        sim.run_until(sim.now + 13)
    sim.run_until(1000)
    assert invoked == []


def test_identical_seeds_identical_logs():
    def run(seed):
        sim = Simulator(seed=seed)
        sim.register(DB, echo_handler(service_ms=10))
        for i in range(50):
            sim.run_until(i * 9)
            timeout = sim.rng.choice([20, 60, 100])
            sim.send_request(WEBUI, DB, {"op": "q", "n": i}, timeout_ms=timeout)
        if True:
            fid = sim.inject_fault(FaultSpec(kind="down", targets=frozenset({DB})))
            sim.run_until(600)
            sim.clear_fault(fid)
        sim.run_until(2000)
        return sim.log.sha256()

    assert run(42) == run(42)
    assert run(42) != run(43)


def test_endpoint_parse_roundtrip():
    assert Endpoint.parse("webui") == Endpoint("webui", 0)
    assert Endpoint.parse("persistence_ext:2") == Endpoint("persistence_ext", 2)
    assert str(Endpoint("auth", 1)) == "auth:1"
    with pytest.raises(ValueError):
        Endpoint("mystery_service")


def test_send_request_requires_positive_timeout():
    sim = make_sim()
    sim.register(DB, echo_handler())
    with pytest.raises(ValueError):
        sim.send_request(WEBUI, DB, {"op": "q"}, timeout_ms=0)


def test_fault_spec_validation():
    with pytest.raises(ValueError):
        FaultSpec(kind="latency", targets=frozenset({DB}), factor=0.5)
    with pytest.raises(ValueError):
        FaultSpec(kind="down")
    with pytest.raises(ValueError):
        FaultSpec(kind="warp")
