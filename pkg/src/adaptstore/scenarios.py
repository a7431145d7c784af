"""Executable scenario scripts: timed injections plus checkable assertions.

A script is data (also JSON-serializable): an initial configuration,
workload phases, timed injections (faults, advisories, operator requests),
and a list of assertions evaluated against the finished run's event log.
Running a script is fully deterministic in (script, seed): reports carry
the event-log SHA-256 so reproducibility is a one-line check.

Assertion results are report content, never exceptions; an assertion whose
window saw no relevant traffic passes vacuously but is flagged as not
evaluated.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from adaptstore.adaptation.conditions import Advisory, QoSPolicy
from adaptstore.adaptation.engine import MapeEngine
from adaptstore.simnet import Endpoint, FaultSpec
from adaptstore.variability import Configuration, canonical_level, validate
from adaptstore.workload import ClientDriver, Phase, WorkloadProfile, generate_workload
from adaptstore.world import CLIENT_TIMEOUT_MS, World

DEFAULT_SEED = 42

BUILTIN_NAMES = (
    "db_unavailable",
    "cyberattack_external",
    "provider_outage",
    "traffic_benign",
    "traffic_ddos",
    "traffic_unknown",
    "devops_change",
)


class UnknownScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Injection:
    at_ms: int
    fault: Optional[dict] = None  # FaultSpec wire form
    clear: Optional[str] = None  # label of an earlier fault injection
    advisory: Optional[dict] = None
    devops: Optional[dict] = None
    label: Optional[str] = None

    def to_json(self) -> dict:
        data: dict = {"at_ms": self.at_ms}
        for key in ("fault", "clear", "advisory", "devops", "label"):
            value = getattr(self, key)
            if value is not None:
                data[key] = value
        return data

    @classmethod
    def from_json(cls, data: dict) -> "Injection":
        return cls(
            at_ms=data["at_ms"],
            fault=data.get("fault"),
            clear=data.get("clear"),
            advisory=data.get("advisory"),
            devops=data.get("devops"),
            label=data.get("label"),
        )


@dataclass(frozen=True)
class Assertion:
    predicate: str
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"predicate": self.predicate, "params": dict(self.params)}

    @classmethod
    def from_json(cls, data: dict) -> "Assertion":
        return cls(predicate=data["predicate"], params=dict(data.get("params", {})))


@dataclass
class ScenarioScript:
    name: str
    initial_config: Configuration
    phases: list[Phase]
    injections: list[Injection]
    assertions: list[Assertion]
    duration_ms: int
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        result = validate(self.initial_config)
        if not result.valid:
            raise ValueError("scenario initial configuration must validate")
        for injection in self.injections:
            if not 0 <= injection.at_ms <= self.duration_ms:
                raise ValueError("injection outside [0, duration]")
        for phase in self.phases:
            if not 0 <= phase.start_ms <= self.duration_ms or phase.end_ms < phase.start_ms:
                raise ValueError("phase window outside [0, duration]")

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "initial_config": self.initial_config.to_json(),
            "phases": [p.to_json() for p in self.phases],
            "injections": [i.to_json() for i in self.injections],
            "assertions": [a.to_json() for a in self.assertions],
            "duration_ms": self.duration_ms,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ScenarioScript":
        return cls(
            name=data["name"],
            initial_config=Configuration.from_json(data["initial_config"]),
            phases=[Phase.from_json(p) for p in data.get("phases", [])],
            injections=[Injection.from_json(i) for i in data.get("injections", [])],
            assertions=[Assertion.from_json(a) for a in data.get("assertions", [])],
            duration_ms=data["duration_ms"],
            seed=data.get("seed", DEFAULT_SEED),
        )


@dataclass
class AssertionResult:
    predicate: str
    params: dict
    passed: bool
    evaluated: bool
    evidence: dict

    def to_json(self) -> dict:
        return {
            "predicate": self.predicate,
            "params": dict(self.params),
            "passed": self.passed,
            "evaluated": self.evaluated,
            "evidence": self.evidence,
        }


@dataclass
class ScenarioReport:
    name: str
    seed: int
    passed: bool
    assertions: list[AssertionResult]
    config_timeline: list[dict]
    metrics_timeline: list[dict]
    log_hash: str
    counts: dict

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "seed": self.seed,
            "passed": self.passed,
            "assertions": [a.to_json() for a in self.assertions],
            "config_timeline": self.config_timeline,
            "metrics_timeline": self.metrics_timeline,
            "log_hash": self.log_hash,
            "counts": dict(self.counts),
        }


# -- running ---------------------------------------------------------------------


def _resolve_fault_targets(world: World, names: list[str]) -> frozenset[Endpoint]:
    targets = set()
    for name in names:
        if ":" in name:
            targets.add(Endpoint.parse(name))
        else:
            instances = world.sim.registered_instances(name)
            if not instances:
                targets.add(Endpoint(name, 0))
            targets.update(instances)
    return frozenset(targets)


def parse_fault(world: World, data: dict) -> FaultSpec:
    kind = data.get("kind")
    if kind in ("down", "drop_all"):
        return FaultSpec(kind=kind, targets=_resolve_fault_targets(world, data["targets"]))
    if kind == "latency":
        return FaultSpec(
            kind="latency",
            targets=_resolve_fault_targets(world, data["targets"]),
            factor=float(data["factor"]),
        )
    if kind == "partition":
        return FaultSpec(
            kind="partition",
            group_a=_resolve_fault_targets(world, data["group_a"]),
            group_b=_resolve_fault_targets(world, data["group_b"]),
        )
    raise ValueError(f"unknown fault kind {kind!r}")


def stage_scenario(world: World, engine: MapeEngine, script: ScenarioScript, seed: int):
    """Schedule a script's workload phases and injections onto a world.

    Shared by the headless runner and the live control plane (which paces
    the same staged events against wall time instead of running flat out).
    """
    driver = ClientDriver(world)
    for idx, phase in enumerate(script.phases):
        rng = random.Random(seed * 1009 + idx)
        end = min(phase.end_ms, script.duration_ms)
        arrivals = generate_workload(phase.profile, phase.start_ms, end, rng, world.dataset)
        driver.schedule(arrivals)

    fault_ids: dict[str, int] = {}
    for injection in script.injections:
        def fire(injection=injection):
            if injection.fault is not None:
                fid = world.inject_fault(parse_fault(world, injection.fault))
                if injection.label:
                    fault_ids[injection.label] = fid
            if injection.clear is not None:
                fid = fault_ids.get(injection.clear)
                if fid is not None:
                    world.clear_fault(fid)
            if injection.advisory is not None:
                engine.submit_advisory(
                    Advisory(
                        kind=injection.advisory["kind"],
                        at=world.sim.now,
                        targets=tuple(injection.advisory.get("targets", ())),
                    )
                )
            if injection.devops is not None:
                engine.submit_devops(dict(injection.devops))

        world.sim.schedule(injection.at_ms, fire)
    return driver


def run_scenario(
    script: ScenarioScript,
    seed: Optional[int] = None,
    policy: Optional[QoSPolicy] = None,
) -> ScenarioReport:
    seed = script.seed if seed is None else seed
    world = World(script.initial_config, seed)
    engine = MapeEngine(world, policy or QoSPolicy())
    engine.start()
    stage_scenario(world, engine, script, seed)
    world.sim.run_until(script.duration_ms)

    ctx = ReportContext(script, world, engine)
    degenerate = not ctx.client_requests and not ctx.metrics_timeline
    if degenerate:
        # Nothing ever ran: every assertion passes vacuously, flagged as
        # not evaluated.
        results = [
            AssertionResult(a.predicate, a.params, True, False, {"vacuous": True})
            for a in script.assertions
        ]
    else:
        results = [evaluate_assertion(ctx, a) for a in script.assertions]
    return ScenarioReport(
        name=script.name,
        seed=seed,
        passed=all(r.passed for r in results),
        assertions=results,
        config_timeline=ctx.config_timeline,
        metrics_timeline=ctx.metrics_timeline,
        log_hash=world.sim.log.sha256(),
        counts={
            "events": len(world.sim.log),
            "client_requests": len(ctx.client_requests),
            "plans": len(ctx.plans),
        },
    )


# -- assertion evaluation -----------------------------------------------------------


class ReportContext:
    def __init__(self, script: ScenarioScript, world: World, engine: MapeEngine):
        self.script = script
        self.world = world
        self.engine = engine
        self.records = world.sim.log.records
        self.config_timeline = [
            {"t": r["t"], "config": r["detail"]["config"]}
            for r in self.records
            if r["kind"] == "config_changed"
        ]
        self.metrics_timeline = [
            dict(r["detail"], t=r["t"]) for r in self.records if r["kind"] == "metrics"
        ]
        self.plans = [r["detail"] for r in self.records if r["kind"] == "plan"]
        self.client_requests: dict[int, dict] = {}
        for r in self.records:
            detail = r.get("detail", {})
            if r["kind"] == "request" and r["from"].startswith("client"):
                self.client_requests[detail["id"]] = {
                    "t": r["t"],
                    "op": detail.get("op"),
                    "resolved": None,
                }
            elif r["kind"] == "response" and r["to"].startswith("client") and not detail.get("late"):
                req = self.client_requests.get(detail.get("id"))
                if req is not None:
                    req["resolved"] = {"t": r["t"], "kind": "response", "detail": detail}
            elif r["kind"] == "timeout" and r["from"].startswith("client"):
                req = self.client_requests.get(detail.get("id"))
                if req is not None:
                    req["resolved"] = {"t": r["t"], "kind": "timeout", "detail": detail}

    def config_at(self, t: int) -> Optional[dict]:
        current = None
        for entry in self.config_timeline:
            if entry["t"] <= t:
                current = entry["config"]
        return current

    def client_responses(self, t_from: int = 0, t_to: Optional[int] = None) -> list[dict]:
        """Resolved client requests whose send time falls in [t_from, t_to]."""
        t_to = self.script.duration_ms if t_to is None else t_to
        out = []
        for req in self.client_requests.values():
            if t_from <= req["t"] <= t_to and req["resolved"] is not None:
                out.append(
                    {
                        "sent": req["t"],
                        "resolved_at": req["resolved"]["t"],
                        "kind": req["resolved"]["kind"],
                        "detail": req["resolved"]["detail"],
                    }
                )
        return out

    def dimension_spans(self, dimension: str, value: str) -> list[tuple[int, int]]:
        """Time spans during which config[dimension] == value."""
        spans = []
        start = None
        for entry in self.config_timeline:
            has_value = entry["config"][dimension] == value
            if has_value and start is None:
                start = entry["t"]
            elif not has_value and start is not None:
                spans.append((start, entry["t"]))
                start = None
        if start is not None:
            spans.append((start, self.script.duration_ms))
        return spans


Predicate = Callable[[ReportContext, dict], tuple[bool, bool, dict]]
PREDICATES: dict[str, Predicate] = {}


def predicate(name: str):
    def register(fn: Predicate) -> Predicate:
        PREDICATES[name] = fn
        return fn

    return register


def evaluate_assertion(ctx: ReportContext, assertion: Assertion) -> AssertionResult:
    fn = PREDICATES.get(assertion.predicate)
    if fn is None:
        return AssertionResult(
            assertion.predicate, assertion.params, False, True, {"error": "unknown predicate"}
        )
    passed, evaluated, evidence = fn(ctx, assertion.params)
    return AssertionResult(assertion.predicate, assertion.params, passed, evaluated, evidence)


@predicate("client_liveness")
def _client_liveness(ctx, params):
    margin = params.get("margin_ms", 200)
    cutoff = ctx.script.duration_ms - margin
    budget = CLIENT_TIMEOUT_MS + 1
    unresolved = 0
    timeouts = 0
    slow = 0
    total = 0
    for req in ctx.client_requests.values():
        if req["t"] > cutoff:
            continue
        total += 1
        if req["resolved"] is None:
            unresolved += 1
        elif req["resolved"]["kind"] == "timeout":
            timeouts += 1
        elif req["resolved"]["t"] - req["t"] > budget:
            slow += 1
    evidence = {"total": total, "unresolved": unresolved, "timeouts": timeouts, "slow": slow}
    return (unresolved == 0 and timeouts == 0 and slow == 0, total > 0, evidence)


@predicate("all_responses_status")
def _all_responses_status(ctx, params):
    t_from, t_to = params["window"]
    status = params["status"]
    max_latency = params.get("max_latency_ms", CLIENT_TIMEOUT_MS)
    responses = ctx.client_responses(t_from, t_to)
    bad = []
    for r in responses:
        latency = r["resolved_at"] - r["sent"]
        if r["kind"] != "response" or r["detail"].get("status") != status or latency > max_latency:
            bad.append({"sent": r["sent"], "kind": r["kind"], "detail_status": r["detail"].get("status")})
    evidence = {"responses": len(responses), "bad": bad[:5], "bad_count": len(bad)}
    return (not bad, len(responses) > 0, evidence)


@predicate("ok_page_within")
def _ok_page_within(ctx, params):
    kind = params.get("kind", "product_page")
    t_from = params["after"]
    t_to = t_from + params["within"]
    for r in ctx.client_responses(t_from, t_to):
        d = r["detail"]
        if r["kind"] == "response" and d.get("kind") == kind and d.get("status") == "ok":
            return True, True, {"first_ok_at": r["resolved_at"]}
    return False, len(ctx.client_responses(t_from, t_to)) > 0, {"first_ok_at": None}


@predicate("config_equals_by")
def _config_equals_by(ctx, params):
    target = params["config"]
    deadline = params["deadline"]
    after = params.get("after", 0)
    for entry in ctx.config_timeline:
        if after <= entry["t"] <= deadline and entry["config"] == target:
            return True, True, {"at": entry["t"]}
    return False, True, {"timeline": ctx.config_timeline}


@predicate("config_at_end")
def _config_at_end(ctx, params):
    final = ctx.config_at(ctx.script.duration_ms)
    return (final == params["config"], True, {"final": final})


@predicate("config_timeline_contains")
def _config_timeline_contains(ctx, params):
    wanted = params["sequence"]
    seen = [entry["config"] for entry in ctx.config_timeline]
    idx = 0
    hits = []
    for pos, config in enumerate(seen):
        if idx < len(wanted) and config == wanted[idx]:
            hits.append(pos)
            idx += 1
    return (idx == len(wanted), True, {"matched": idx, "expected": len(wanted)})


@predicate("config_change_within_of_first_timeout")
def _config_change_within_of_first_timeout(ctx, params):
    target = params["config"]
    within = params["within_ms"]
    after = params.get("after", 0)
    first_timeout = None
    for r in ctx.records:
        if r["kind"] == "timeout" and r["t"] >= after:
            first_timeout = r["t"]
            break
    if first_timeout is None:
        return True, False, {"first_timeout": None}
    for entry in ctx.config_timeline:
        if entry["config"] == target and entry["t"] >= first_timeout:
            ok = entry["t"] - first_timeout <= within
            return ok, True, {"first_timeout": first_timeout, "switched_at": entry["t"]}
    return False, True, {"first_timeout": first_timeout, "switched_at": None}


@predicate("logins_auth_disabled_during_incident")
def _logins_auth_disabled(ctx, params):
    spans = ctx.dimension_spans("auth", "absent")
    # The incident span is the first absent span that starts after t=0.
    spans = [s for s in spans if s[0] > 0]
    if not spans:
        return False, True, {"error": "auth never disabled"}
    start, end = spans[0]
    bad = []
    count = 0
    for r in ctx.client_responses(start, end):
        d = r["detail"]
        if d.get("kind") != "login":
            continue
        count += 1
        if r["kind"] != "response" or d.get("rejection") != "auth_disabled":
            bad.append({"sent": r["sent"], "resolution": r["kind"], "rejection": d.get("rejection")})
    evidence = {"span": [start, end], "logins": count, "bad": bad[:5]}
    return (not bad, count > 0, evidence)


@predicate("placeholder_images_during_span")
def _placeholder_images(ctx, params):
    dimension = params.get("dimension", "image")
    value = params.get("value", "local_static")
    margin = params.get("margin_ms", 500)
    spans = [s for s in ctx.dimension_spans(dimension, value) if s[0] > 0]
    if not spans:
        return False, True, {"error": "no local-static span"}
    start, end = spans[0]
    start, end = start + margin, end - margin
    pages = 0
    bad = []
    for r in ctx.client_responses(start, end):
        d = r["detail"]
        if r["kind"] != "response" or d.get("kind") != "product_page":
            continue
        if d.get("status") != "ok" or "image" not in d.get("sections", []):
            continue
        pages += 1
        if not d.get("placeholder"):
            bad.append({"sent": r["sent"]})
    return (not bad and pages > 0, pages > 0, {"pages": pages, "bad_count": len(bad), "span": [start, end]})


@predicate("new_instances_created")
def _new_instances(ctx, params):
    services = params["services"]
    min_index = params.get("min_index", 1)
    found = {}
    for r in ctx.records:
        if r["kind"] == "service_started" and not r["detail"].get("restart"):
            endpoint = Endpoint.parse(r["detail"]["endpoint"])
            if endpoint.index >= min_index:
                found.setdefault(endpoint.service, r["t"])
    missing = [s for s in services if s not in found]
    return (not missing, True, {"found": found, "missing": missing})


@predicate("p95_exceeded")
def _p95_exceeded(ctx, params):
    service = params["service"]
    threshold = params.get("threshold_ms", 100)
    for snap in ctx.metrics_timeline:
        metrics = snap.get("services", {}).get(service)
        if metrics and metrics.get("p95_ms") is not None and metrics["p95_ms"] > threshold:
            return True, True, {"at": snap["t"], "p95_ms": metrics["p95_ms"]}
    return False, len(ctx.metrics_timeline) > 0, {}


@predicate("dimension_equals_within_of_violation")
def _dimension_within_violation(ctx, params):
    dimension = params["dimension"]
    value = params["value"]
    within = params["within_ms"]
    service = params.get("service", "recommender")
    threshold = params.get("threshold_ms", 100)
    violation_at = None
    for snap in ctx.metrics_timeline:
        metrics = snap.get("services", {}).get(service)
        if metrics and metrics.get("p95_ms") is not None and metrics["p95_ms"] > threshold:
            violation_at = snap["t"]
            break
    if violation_at is None:
        return False, False, {"violation_at": None}
    switch_at = None
    for entry in ctx.config_timeline:
        if entry["config"][dimension] == value:
            switch_at = entry["t"]
            break
    if switch_at is None:
        return False, True, {"violation_at": violation_at, "switch_at": None}
    return (
        switch_at <= violation_at + within,
        True,
        {"violation_at": violation_at, "switch_at": switch_at},
    )


@predicate("rec_sections_nonempty")
def _rec_sections_nonempty(ctx, params):
    after = params.get("present_after_ms")
    empties = 0
    present_after = False
    sections_seen = 0
    for r in ctx.client_responses():
        d = r["detail"]
        if r["kind"] != "response" or "recommendations" not in d.get("sections", []):
            continue
        sections_seen += 1
        if d.get("rec_items", 0) < 1:
            empties += 1
        if after is not None and r["sent"] >= after:
            present_after = True
    ok = empties == 0 and (after is None or present_after)
    return (
        ok,
        sections_seen > 0,
        {"sections": sections_seen, "empty": empties, "present_after": present_after},
    )


@predicate("breaker_opened")
def _breaker_opened(ctx, params):
    route = params.get("route")
    for r in ctx.records:
        if r["kind"] == "breaker" and r["detail"].get("to") == "open":
            if route is None or r["detail"].get("route") == route:
                return True, True, {"at": r["t"]}
    return False, True, {}


@predicate("no_upstream_invocations_while_open")
def _no_upstream_while_open(ctx, params):
    route = params["route"]
    service = params["service"]
    open_spans = []
    opened = None
    for r in ctx.records:
        if r["kind"] != "breaker" or r["detail"].get("route") != route:
            continue
        if r["detail"]["to"] == "open":
            opened = r["t"]
        elif opened is not None:
            open_spans.append((opened, r["t"]))
            opened = None
    if opened is not None:
        open_spans.append((opened, ctx.script.duration_ms))
    violations = []
    rejections = 0
    for r in ctx.records:
        if r["kind"] == "breaker_rejected" and r["detail"].get("route") == route:
            rejections += 1
        if (
            r["kind"] == "request"
            and r["from"].startswith("webui")
            and Endpoint.parse(r["to"]).service == service
        ):
            for start, end in open_spans:
                if start < r["t"] < end:
                    violations.append(r["t"])
    return (
        not violations and bool(open_spans),
        bool(open_spans),
        {"open_spans": open_spans, "violations": violations[:5], "rejections": rejections},
    )


@predicate("rate_limited_logins_min")
def _rate_limited_min(ctx, params):
    minimum = params.get("min", 1)
    count = sum(
        1
        for r in ctx.client_responses()
        if r["kind"] == "response" and r["detail"].get("rejection") == "rate_limited"
    )
    return (count >= minimum, True, {"rate_limited": count})


@predicate("dimension_equals_by")
def _dimension_equals_by(ctx, params):
    dimension = params["dimension"]
    value = params["value"]
    deadline = params["deadline"]
    for entry in ctx.config_timeline:
        if entry["t"] <= deadline and entry["config"][dimension] == value:
            if entry["t"] > 0:
                return True, True, {"at": entry["t"]}
    return False, True, {}


@predicate("first_surge_classified")
def _first_surge_classified(ctx, params):
    wanted = params["traffic_class"]
    for r in ctx.records:
        if r["kind"] == "condition" and r["detail"].get("kind") == "traffic_surge":
            got = r["detail"].get("traffic_class")
            return (got == wanted, True, {"at": r["t"], "traffic_class": got})
    return False, False, {}


@predicate("plan_includes_steps")
def _plan_includes_steps(ctx, params):
    wanted = params["steps"]  # list of partial step dicts

    def step_matches(step: dict, want: dict) -> bool:
        return all(step.get(k) == v for k, v in want.items())

    for plan_detail in ctx.plans:
        steps = plan_detail.get("steps", [])
        if all(any(step_matches(s, want) for s in steps) for want in wanted):
            return True, True, {"plan_id": plan_detail.get("id")}
    return False, len(ctx.plans) > 0, {"plans": len(ctx.plans)}


@predicate("devops_plan_target")
def _devops_plan_target(ctx, params):
    target = params["config"]
    for plan_detail in ctx.plans:
        triggers = plan_detail.get("trigger", [])
        if any(t.get("kind") == "devops_request" for t in triggers):
            return (plan_detail.get("target") == target, True, {"target": plan_detail.get("target")})
    return False, False, {}


@predicate("warm_before_switch")
def _warm_before_switch(ctx, params):
    route = params["route"]
    for plan_detail in ctx.plans:
        steps = plan_detail.get("steps", [])
        warm_idx = switch_idx = None
        for i, step in enumerate(steps):
            if step.get("kind") == "warm_cache" and step.get("route") == route:
                warm_idx = i
            if step.get("kind") == "switch_route" and step.get("route") == route:
                switch_idx = i
        if warm_idx is not None and switch_idx is not None:
            return (warm_idx < switch_idx, True, {"warm": warm_idx, "switch": switch_idx})
    return False, False, {}


@predicate("devops_downtime_zero")
def _devops_downtime_zero(ctx, params):
    features = params.get("features", ["catalog", "images"])
    for r in ctx.records:
        if r["kind"] != "plan_report":
            continue
        report = r["detail"]
        plan = next((p for p in ctx.plans if p.get("id") == report.get("plan_id")), None)
        if plan is None:
            continue
        if any(t.get("kind") == "devops_request" for t in plan.get("trigger", [])):
            downtime = report.get("downtime_ms", {})
            bad = {f: downtime.get(f) for f in features if downtime.get(f, 0) != 0}
            return (not bad, True, {"downtime_ms": downtime})
    return False, False, {"error": "no devops plan report"}


@predicate("condition_detected")
def _condition_detected(ctx, params):
    kind = params["kind"]
    for r in ctx.records:
        if r["kind"] == "condition" and r["detail"].get("kind") == kind:
            if "endpoint" in params and r["detail"].get("endpoint") != params["endpoint"]:
                continue
            return True, True, {"at": r["t"]}
    return False, True, {}


# -- builtins ---------------------------------------------------------------------


def _std_mix(login: float = 0.0) -> dict:
    remainder = 1.0 - login
    return {
        "product_page": round(remainder * 0.6, 6),
        "category_page": round(remainder * 0.25, 6),
        "add_to_cart": round(remainder * 0.15, 6),
        **({"login": login} if login else {}),
    }


def _benign(rate: float, pool: int, mix: dict, prefix: str = "s") -> WorkloadProfile:
    return WorkloadProfile(
        rate_per_s=rate, mix=mix, session_pool=pool, session_prefix=prefix
    )


def builtin_scenario(name: str) -> ScenarioScript:
    if name == "db_unavailable":
        return ScenarioScript(
            name=name,
            initial_config=canonical_level("L0_barebone"),
            phases=[Phase(0, 60_000, _benign(5, 20, _std_mix()))],
            injections=[
                Injection(at_ms=10_000, fault={"kind": "down", "targets": ["local_static_db"]}, label="db"),
                Injection(at_ms=30_000, clear="db"),
            ],
            assertions=[
                Assertion("condition_detected", {"kind": "db_down"}),
                Assertion(
                    "all_responses_status",
                    {"window": [10_000, 30_000], "status": "maintenance", "max_latency_ms": 100},
                ),
                Assertion("ok_page_within", {"kind": "product_page", "after": 30_000, "within": 5_000}),
                Assertion("client_liveness", {}),
            ],
            duration_ms=60_000,
        )
    if name == "cyberattack_external":
        l2 = canonical_level("L2_full")
        incident_config = {
            "image": "local_static",
            "persistence": "local_static",
            "auth": "absent",
            "recommender": "low_power",
        }
        return ScenarioScript(
            name=name,
            initial_config=l2,
            phases=[Phase(0, 45_000, _benign(5, 20, _std_mix(login=0.1)))],
            injections=[
                Injection(
                    at_ms=10_000,
                    fault={"kind": "down", "targets": ["auth", "persistence_ext", "image_ext"]},
                    advisory={"kind": "security_takedown", "targets": ["auth", "persistence_ext", "image_ext"]},
                    label="attack",
                ),
                Injection(at_ms=30_000, clear="attack"),
            ],
            assertions=[
                Assertion("config_equals_by", {"config": incident_config, "deadline": 15_000, "after": 10_000}),
                Assertion("logins_auth_disabled_during_incident", {}),
                Assertion("config_equals_by", {"config": l2.to_json(), "deadline": 45_000, "after": 30_000}),
                Assertion("config_at_end", {"config": l2.to_json()}),
                Assertion("client_liveness", {}),
            ],
            duration_ms=45_000,
        )
    if name == "provider_outage":
        l2 = canonical_level("L2_full")
        l0 = canonical_level("L0_barebone")
        return ScenarioScript(
            name=name,
            initial_config=l2,
            phases=[
                Phase(
                    0,
                    45_000,
                    WorkloadProfile(
                        rate_per_s=20,
                        mix={"product_page": 0.5, "category_page": 0.2, "login": 0.1, "add_to_cart": 0.2},
                        session_pool=20,
                    ),
                )
            ],
            injections=[
                Injection(
                    at_ms=10_000,
                    fault={"kind": "down", "targets": ["auth", "persistence_ext", "image_ext"]},
                    label="outage",
                ),
            ],
            assertions=[
                Assertion(
                    "config_timeline_contains",
                    {"sequence": [l2.to_json(), l0.to_json(), l2.to_json()]},
                ),
                Assertion(
                    "config_change_within_of_first_timeout",
                    {"config": l0.to_json(), "within_ms": 10_000, "after": 10_000},
                ),
                Assertion(
                    "new_instances_created",
                    {"services": ["persistence_ext", "image_ext", "auth"], "min_index": 1},
                ),
                Assertion("placeholder_images_during_span", {"margin_ms": 500}),
                Assertion("client_liveness", {}),
            ],
            duration_ms=45_000,
        )
    if name == "traffic_benign":
        return ScenarioScript(
            name=name,
            initial_config=canonical_level("L2_full"),
            phases=[
                Phase(0, 40_000, _benign(5, 20, _std_mix(login=0.05))),
                Phase(
                    10_000,
                    40_000,
                    _benign(45, 180, {"product_page": 0.7, "category_page": 0.3}, prefix="b"),
                ),
            ],
            injections=[],
            assertions=[
                Assertion("p95_exceeded", {"service": "recommender", "threshold_ms": 100}),
                Assertion(
                    "dimension_equals_within_of_violation",
                    {
                        "dimension": "recommender",
                        "value": "low_power",
                        "within_ms": 2_000,
                        "service": "recommender",
                        "threshold_ms": 100,
                    },
                ),
                Assertion("rec_sections_nonempty", {"present_after_ms": 20_000}),
                Assertion("client_liveness", {}),
            ],
            duration_ms=40_000,
        )
    if name == "traffic_ddos":
        return ScenarioScript(
            name=name,
            initial_config=canonical_level("L2_full"),
            phases=[
                Phase(0, 40_000, _benign(5, 20, _std_mix(login=0.05))),
                Phase(
                    10_000,
                    40_000,
                    WorkloadProfile(
                        rate_per_s=125,
                        mix={"login": 1.0},
                        session_pool=3,
                        malicious=True,
                        session_prefix="m",
                    ),
                ),
            ],
            injections=[
                Injection(
                    at_ms=20_000,
                    fault={"kind": "latency", "targets": ["auth"], "factor": 30},
                    label="auth_flood",
                ),
            ],
            assertions=[
                Assertion("plan_includes_steps", {"steps": [{"kind": "deploy_breakers"}]}),
                Assertion("dimension_equals_by", {"dimension": "auth", "value": "restrictive", "deadline": 16_000}),
                Assertion("dimension_equals_by", {"dimension": "recommender", "value": "low_power", "deadline": 16_000}),
                Assertion("rate_limited_logins_min", {"min": 1}),
                Assertion("breaker_opened", {"route": "auth"}),
                Assertion("no_upstream_invocations_while_open", {"route": "auth", "service": "auth"}),
                Assertion("client_liveness", {}),
            ],
            duration_ms=40_000,
        )
    if name == "traffic_unknown":
        # The ambiguous flood starts mid-cycle and hammers category pages:
        # the first classified window then holds 1.5s of flood (diversity
        # lands mid-band with margin on both cutoffs), and no service
        # overloads, so the surge is the only condition and its plan
        # carries the breaker deployment and the low-power downgrade
        # together.
        return ScenarioScript(
            name=name,
            initial_config=canonical_level("L2_full"),
            phases=[
                Phase(0, 30_000, _benign(5, 20, _std_mix(login=0.05))),
                Phase(
                    10_500,
                    30_000,
                    WorkloadProfile(
                        rate_per_s=125,
                        mix={"category_page": 1.0},
                        session_pool=60,
                        session_pick="random",
                        session_prefix="u",
                    ),
                ),
            ],
            injections=[],
            assertions=[
                Assertion("first_surge_classified", {"traffic_class": "unknown"}),
                Assertion(
                    "plan_includes_steps",
                    {
                        "steps": [
                            {"kind": "deploy_breakers"},
                            {"kind": "set_mode", "service": "recommender", "mode": "low_power"},
                        ]
                    },
                ),
                Assertion("client_liveness", {}),
            ],
            duration_ms=30_000,
        )
    if name == "devops_change":
        target = {
            "image": "local_static",
            "persistence": "external",
            "auth": "absent",
            "recommender": "disabled",
        }
        return ScenarioScript(
            name=name,
            initial_config=canonical_level("L0_barebone"),
            phases=[Phase(0, 30_000, _benign(5, 20, _std_mix()))],
            injections=[Injection(at_ms=10_000, devops={"persistence": "external"})],
            assertions=[
                Assertion("devops_plan_target", {"config": target}),
                Assertion("warm_before_switch", {"route": "db"}),
                Assertion("devops_downtime_zero", {"features": ["catalog", "images"]}),
                Assertion("client_liveness", {}),
            ],
            duration_ms=30_000,
        )
    raise UnknownScenarioError(f"unknown scenario {name!r}; builtins: {list(BUILTIN_NAMES)}")
