"""Monitor, analyzer, classifier, planner, and executor contract tests."""
import pytest

from adaptstore.adaptation import conditions as cond
from adaptstore.adaptation.conditions import Advisory, Condition, QoSPolicy, analyze, classify_traffic
from adaptstore.adaptation.engine import MapeEngine, PlanInvalidError
from adaptstore.adaptation.metrics import Monitor
from adaptstore.adaptation.planner import AdaptationPlan, ReconfigStep, plan
from adaptstore.variability import (
    AuthMode,
    Configuration,
    ImageSource,
    PersistenceSource,
    RecommenderMode,
    canonical_level,
    enumerate_valid,
    validate,
)
from adaptstore.world import World

L0 = canonical_level("L0_barebone")
L2 = canonical_level("L2_full")
POLICY = QoSPolicy()


def record(t, kind, frm, to, **detail):
    return {"t": t, "kind": kind, "from": frm, "to": to, "detail": detail}


def request_record(t, to, rid, session=None):
    detail = {"id": rid, "op": "db_read"}
    if session:
        detail["session"] = session
    return {"t": t, "kind": "request", "from": "webui:0", "to": to, "detail": detail}


# -- observe -----------------------------------------------------------------


def test_observe_timeout_ratio():
    monitor = Monitor(window_ms=5000)
    records = []
    for i in range(10):
        records.append(request_record(1000 + i * 10, "local_static_db:0", i))
    for i in range(5):
        records.append(record(1200 + i, "timeout", "webui:0", "local_static_db:0", id=i, op="db_read"))
    window = monitor.observe(records, now=2000)
    metrics = window.service("local_static_db")
    assert metrics.requests == 10
    assert metrics.timeouts == 5
    assert metrics.timeout_ratio == 0.5


def test_observe_empty_window_absent_percentiles():
    monitor = Monitor(window_ms=5000)
    window = monitor.observe([], now=1000)
    assert window.services == {}
    assert window.service("webui").p95 is None


def test_observe_window_boundary_excludes_old_events():
    monitor = Monitor(window_ms=5000)
    records = [
        request_record(994, "auth:0", 1),  # now - W - 1: excluded
        request_record(995, "auth:0", 2),  # now - W exactly: included
    ]
    window = monitor.observe(records, now=5995)
    assert window.service("auth").requests == 1


def test_observe_latency_percentiles_include_late_responses():
    monitor = Monitor(window_ms=5000)
    records = [
        record(1000, "response", "recommender:0", "webui:0", id=1, op="recommend", latency_ms=20),
        record(1500, "response", "recommender:0", "webui:0", id=2, op="recommend", latency_ms=310, late=True),
    ]
    window = monitor.observe(records, now=2000)
    metrics = window.service("recommender")
    assert metrics.p95 == 310
    assert metrics.p50 == 20


# -- analyze -----------------------------------------------------------------


def window_with(monitor_records, now):
    return Monitor(window_ms=5000).observe(monitor_records, now)


def test_analyze_db_down_needs_floor_and_ratio():
    records = []
    for i in range(10):
        records.append(request_record(1000 + i, "local_static_db:0", i))
    for i in range(8):
        records.append(record(1100 + i, "timeout", "webui:0", "local_static_db:0", id=i, op="q"))
    window = window_with(records, 2000)
    kinds = {c.kind for c in analyze(window, POLICY, (), L0)}
    assert cond.DB_DOWN in kinds

    few = records[:4] + records[10:13]  # only 4 requests: below the floor
    window = window_with(few, 2000)
    assert cond.DB_DOWN not in {c.kind for c in analyze(window, POLICY, (), L0)}


def test_analyze_external_outage_requires_all_active_externals():
    records = []
    rid = 0
    for service in ("persistence_ext:0", "image_ext:0", "auth:0"):
        for i in range(6):
            records.append(request_record(1000 + rid, service, rid))
            records.append(record(1100 + rid, "timeout", "x:0", service, id=rid, op="q"))
            rid += 1
    window = window_with(records, 2000)
    kinds = {c.kind for c in analyze(window, POLICY, (), L2)}
    assert cond.EXTERNAL_OUTAGE in kinds

    # Same signals but with one external healthy: no outage condition.
    healthy = [r for r in records if "auth" not in r["to"]]
    for i in range(6):
        healthy.append(request_record(1000 + rid, "auth:0", rid))
        rid += 1
    window = window_with(healthy, 2000)
    assert cond.EXTERNAL_OUTAGE not in {c.kind for c in analyze(window, POLICY, (), L2)}


def test_analyze_qos_violation_threshold_and_floor():
    records = []
    for i in range(12):
        records.append(request_record(1000 + i, "recommender:0", i))
        records.append(
            record(1200 + i, "response", "recommender:0", "webui:0", id=i, op="recommend", latency_ms=300)
        )
    window = window_with(records, 2000)
    conditions = analyze(window, POLICY, (), L2)
    assert any(
        c.kind == cond.QOS_VIOLATION and c.endpoint == "recommender" for c in conditions
    )

    # First 9 request/response pairs: below the 10-request floor.
    conditions = analyze(window_with(records[:18], 2000), POLICY, (), L2)
    assert not any(c.kind == cond.QOS_VIOLATION for c in conditions)


def test_analyze_security_takedown_only_from_advisory():
    window = window_with([], 1000)
    assert not any(
        c.kind == cond.SECURITY_TAKEDOWN for c in analyze(window, POLICY, (), L2)
    )
    conditions = analyze(window, POLICY, [Advisory(kind="security_takedown")], L2)
    assert any(c.kind == cond.SECURITY_TAKEDOWN for c in conditions)


def test_analyze_provider_restored_needs_incident():
    window = window_with([], 1000)
    probe = [Advisory(kind="probe_success")]
    assert not any(
        c.kind == cond.PROVIDER_RESTORED
        for c in analyze(window, POLICY, probe, L2, incident_open=False)
    )
    assert any(
        c.kind == cond.PROVIDER_RESTORED
        for c in analyze(window, POLICY, probe, L2, incident_open=True)
    )


def surge_window(rate_reqs, distinct_sessions, now=70_000):
    monitor = Monitor(window_ms=5000)
    records = []
    rid = 0
    # Trailing baseline: 5/s for the minute before the window.
    for t in range(now - 60_000, now - 5000, 200):
        records.append(
            {"t": t, "kind": "request", "from": "client:0", "to": "webui:0",
             "detail": {"id": rid, "op": "page", "session": f"base{rid % 20}"}}
        )
        rid += 1
    for i in range(rate_reqs):
        t = now - 4999 + (i * 4999) // max(1, rate_reqs)
        records.append(
            {"t": t, "kind": "request", "from": "client:0", "to": "webui:0",
             "detail": {"id": rid, "op": "page", "session": f"s{i % max(1, distinct_sessions)}"}}
        )
        rid += 1
    return monitor.observe(records, now)


def test_classify_traffic_bands():
    benign = surge_window(250, 200)
    assert classify_traffic(benign, POLICY) == cond.BENIGN
    malicious = surge_window(250, 3)
    assert classify_traffic(malicious, POLICY) == cond.MALICIOUS
    unknown = surge_window(250, 75)
    assert classify_traffic(unknown, POLICY) == cond.UNKNOWN


def test_analyze_surge_detection_uses_baseline():
    surged = surge_window(250, 200)
    conditions = analyze(surged, POLICY, (), L2)
    assert any(
        c.kind == cond.TRAFFIC_SURGE and c.traffic_class == cond.BENIGN
        for c in conditions
    )
    calm = surge_window(25, 20)
    assert not any(c.kind == cond.TRAFFIC_SURGE for c in analyze(calm, POLICY, (), L2))


# -- plan ------------------------------------------------------------------------


def test_plan_external_outage_targets_barebone_with_ordering():
    result = plan([Condition(cond.EXTERNAL_OUTAGE)], L2)
    assert result.target == L0
    kinds = [(s.kind, s.route, s.service) for s in result.steps]
    switch_db = kinds.index(("switch_route", "db", "local_static_db"))
    stop_front = kinds.index(("stop_service", None, "local_cache_db"))
    start_static = kinds.index(("start_service", None, "local_static_db"))
    assert start_static < switch_db < stop_front


def test_plan_security_takedown_degrades_recommender_via_completion():
    result = plan([Condition(cond.SECURITY_TAKEDOWN)], L2)
    assert result.target == Configuration(
        ImageSource.LOCAL_STATIC,
        PersistenceSource.LOCAL_STATIC,
        AuthMode.ABSENT,
        RecommenderMode.LOW_POWER,
    )


def test_plan_empty_conditions_empty_plan():
    result = plan([], L2)
    assert result.target == L2
    assert result.is_empty()


def test_plan_db_down_sets_maintenance_and_restarts():
    result = plan([Condition(cond.DB_DOWN, endpoint="local_static_db")], L0)
    assert result.target == L0
    kinds = [(s.kind, s.service, s.mode) for s in result.steps]
    assert ("set_mode", "webui", "maintenance") in kinds
    assert ("start_service", "local_static_db", None) in kinds


def test_plan_recovery_restores_webui_mode():
    result = plan(
        [Condition(cond.PROVIDER_RESTORED, restore_to=L0)], L0, webui_mode="maintenance"
    )
    assert result.target == L0
    assert ("set_mode", "webui", "normal") == (
        result.steps[-1].kind,
        result.steps[-1].service,
        result.steps[-1].mode,
    )


def test_plan_malicious_surge_hardens():
    result = plan([Condition(cond.TRAFFIC_SURGE, traffic_class=cond.MALICIOUS)], L2)
    assert result.target.auth is AuthMode.RESTRICTIVE
    assert result.target.recommender is RecommenderMode.LOW_POWER
    assert any(s.kind == "deploy_breakers" for s in result.steps)


def test_plan_unknown_surge_is_union_without_lockout():
    result = plan([Condition(cond.TRAFFIC_SURGE, traffic_class=cond.UNKNOWN)], L2)
    assert result.target.auth is AuthMode.RESTRICTIVE  # never absent
    assert result.target.recommender is RecommenderMode.LOW_POWER
    assert any(s.kind == "deploy_breakers" for s in result.steps)


def test_plan_benign_surge_only_downgrades_recommender():
    result = plan([Condition(cond.TRAFFIC_SURGE, traffic_class=cond.BENIGN)], L2)
    assert result.target == L2.replace(recommender=RecommenderMode.LOW_POWER)
    assert not any(s.kind == "deploy_breakers" for s in result.steps)


def test_plan_qos_violation_on_other_endpoint_is_noop():
    result = plan([Condition(cond.QOS_VIOLATION, endpoint="auth")], L2)
    assert result.target == L2
    assert result.is_empty()


def test_plan_devops_request_completes():
    result = plan(
        [Condition(cond.DEVOPS_REQUEST, request={"recommender": "full"})], L0
    )
    assert result.target == Configuration(
        ImageSource.LOCAL_STATIC,
        PersistenceSource.EXTERNAL,
        AuthMode.STANDARD,
        RecommenderMode.FULL,
    )


def test_plan_deterministic_and_always_valid():
    condition_sets = [
        [Condition(cond.EXTERNAL_OUTAGE)],
        [Condition(cond.SECURITY_TAKEDOWN)],
        [Condition(cond.TRAFFIC_SURGE, traffic_class=cond.MALICIOUS)],
        [Condition(cond.TRAFFIC_SURGE, traffic_class=cond.UNKNOWN)],
        [Condition(cond.TRAFFIC_SURGE, traffic_class=cond.BENIGN)],
        [Condition(cond.QOS_VIOLATION, endpoint="recommender")],
        [Condition(cond.DEVOPS_REQUEST, request={"image": "external_lite"})],
        [
            Condition(cond.SECURITY_TAKEDOWN),
            Condition(cond.TRAFFIC_SURGE, traffic_class=cond.MALICIOUS),
        ],
    ]
    for current in sorted(enumerate_valid()):
        for conditions in condition_sets:
            first = plan(conditions, current)
            second = plan(conditions, current)
            assert first.target == second.target
            assert first.steps == second.steps
            assert validate(first.target).valid


def test_plan_start_before_stop_in_every_emitted_plan():
    condition_sets = [
        [Condition(cond.EXTERNAL_OUTAGE)],
        [Condition(cond.SECURITY_TAKEDOWN)],
        [Condition(cond.DEVOPS_REQUEST, request={"persistence": "external"})],
        [Condition(cond.DEVOPS_REQUEST, request={"image": "external_full"})],
        [Condition(cond.DEVOPS_REQUEST, request={"persistence": "local_static", "image": "local_static"})],
    ]
    for current in sorted(enumerate_valid()):
        for conditions in condition_sets:
            result = plan(conditions, current)
            switched = set()
            stopped_targets = {"db": None, "img": None}
            for step in result.steps:
                if step.kind == "switch_route":
                    switched.add(step.route)
                if step.kind == "stop_service":
                    if step.service in ("local_static_db", "local_cache_db"):
                        assert "db" in switched, (current, conditions, result.steps)
                    if step.service in ("local_static_img", "local_cache_img"):
                        assert "img" in switched, (current, conditions, result.steps)


# -- execute -----------------------------------------------------------------------


def test_execute_rejects_stop_before_switch():
    world = World(L0, seed=1)
    engine = MapeEngine(world)
    bogus = AdaptationPlan(
        target=L0.replace(persistence=PersistenceSource.EXTERNAL),
        steps=(
            ReconfigStep("stop_service", service="local_static_db"),
            ReconfigStep("start_service", service="persistence_ext"),
            ReconfigStep("start_service", service="local_cache_db"),
            ReconfigStep("switch_route", route="db", service="local_cache_db"),
        ),
        trigger=(),
    )
    with pytest.raises(PlanInvalidError):
        engine._adopt(bogus)


def test_execute_rejects_switch_to_unstarted_service():
    world = World(L0, seed=1)
    engine = MapeEngine(world)
    bogus = AdaptationPlan(
        target=L0,
        steps=(ReconfigStep("switch_route", route="db", service="local_cache_db"),),
        trigger=(),
    )
    with pytest.raises(PlanInvalidError):
        engine._adopt(bogus)


def test_execute_halts_on_immediately_faulted_start():
    from adaptstore.simnet import Endpoint, FaultSpec

    world = World(L0, seed=1)
    engine = MapeEngine(world)
    # The next local_cache_db instance will be index 0; fault it up front so
    # the start step hits a dead service.
    world.inject_fault(
        FaultSpec(kind="down", targets=frozenset({Endpoint("local_cache_db", 0)}))
    )
    engine.submit_devops({"persistence": "external"})
    world.sim.run_until(30_000)
    failures = [r for r in world.sim.log if r["kind"] == "plan_failed"]
    assert len(failures) == 1
    assert failures[0]["detail"]["failed_step"]["service"] == "local_cache_db"
    assert failures[0]["detail"]["completed_steps"]  # partial progress recorded
    # The plan halted: configuration unchanged, engine idle again.
    assert world.config == L0
    assert engine.executing is None


def test_failed_restore_keeps_incident_open_and_retries():
    from adaptstore.adaptation.conditions import Advisory
    from adaptstore.simnet import Endpoint, FaultSpec

    world = World(L2, seed=3)
    engine = MapeEngine(world)
    engine.start()
    # The cache front the eventual restore plan will start is index 1 (index
    # 0 gets stopped during the takedown); fault it before anything runs.
    front_fault = world.inject_fault(
        FaultSpec(kind="down", targets=frozenset({Endpoint("local_cache_db", 1)}))
    )
    externals = frozenset(
        {Endpoint("auth", 0), Endpoint("persistence_ext", 0), Endpoint("image_ext", 0)}
    )
    attack = world.inject_fault(FaultSpec(kind="down", targets=externals))
    world.sim.schedule(
        2000,
        lambda: engine.submit_advisory(Advisory(kind="security_takedown", at=2000)),
    )
    world.sim.schedule(8000, lambda: world.clear_fault(attack))
    world.sim.run_until(14_000)
    # Providers are back, but the first restoration attempt died on the
    # faulted cache front: incident must survive the failed plan.
    assert any(r["kind"] == "plan_failed" for r in world.sim.log)
    assert engine.incident is not None
    assert world.config != L2

    world.clear_fault(front_fault)
    world.sim.run_until(30_000)
    assert world.config == L2
    assert engine.incident is None
    assert any(r["kind"] == "incident_closed" for r in world.sim.log)


def test_execute_devops_upgrade_has_zero_downtime():
    from adaptstore.scenarios import builtin_scenario, run_scenario

    report = run_scenario(builtin_scenario("devops_change"))
    downtime = next(
        a for a in report.assertions if a.predicate == "devops_downtime_zero"
    )
    assert downtime.passed and downtime.evaluated
    assert downtime.evidence["downtime_ms"] == {"catalog": 0, "images": 0}


def test_execute_reversibility_cyberattack_restores_exact_config():
    from adaptstore.scenarios import builtin_scenario, run_scenario

    report = run_scenario(builtin_scenario("cyberattack_external"))
    assert report.config_timeline[0]["config"] == report.config_timeline[-1]["config"]
    assert len(report.config_timeline) >= 3
