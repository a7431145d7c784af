"""Execute phase and the periodic MAPE loop over a running world.

The engine owns the knowledge the pure analyze/plan functions cannot:
open incidents (with the pre-incident configuration to restore), recovery
probing, redeploy provisioning, and pending operator requests. One plan
executes at a time; while a plan is in flight the loop keeps observing
but does not re-plan.

Downtime accounting: over the execution window of a plan, a mandatory
feature (catalog, images) counts as down for the span of any client
request that received neither a normal nor an explicitly degraded
(maintenance / placeholder) answer for it. Start-before-stop route
switches keep that union empty.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from adaptstore.adaptation import conditions as cond
from adaptstore.adaptation import planner
from adaptstore.adaptation.conditions import Advisory, Condition, QoSPolicy, analyze
from adaptstore.adaptation.metrics import Monitor
from adaptstore.adaptation.planner import AdaptationPlan, ReconfigStep
from adaptstore.simnet import CONTROLLER, Timeout
from adaptstore.variability import Configuration
from adaptstore.world import LOCAL_START_MS, PROVISION_MS, WARM_MS, World

CYCLE_MS = 1000
PROBE_INTERVAL_MS = 2000
PROBE_TIMEOUT_MS = 60
REDEPLOY_DELAY_MS = 8000
REPORT_GRACE_MS = 150

EXTERNAL_SERVICES = ("persistence_ext", "image_ext", "auth")


class PlanInvalidError(Exception):
    pass


class StepFailedError(Exception):
    def __init__(self, step: "ReconfigStep", reason: str):
        self.step = step
        self.reason = reason
        super().__init__(f"step {step.to_json()} failed: {reason}")


@dataclass
class ExecutionReport:
    plan_id: int
    started_at: int
    finished_at: int
    step_timestamps: list[dict] = field(default_factory=list)
    downtime_ms: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "plan_id": self.plan_id,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "steps": self.step_timestamps,
            "downtime_ms": dict(self.downtime_ms),
        }


@dataclass
class Incident:
    kind: str
    pre_config: Configuration
    pre_webui_mode: str
    probe_services: tuple[str, ...]
    started_at: int


class MapeEngine:
    def __init__(self, world: World, policy: QoSPolicy | None = None, cycle_ms: int = CYCLE_MS):
        self.world = world
        self.policy = policy or QoSPolicy()
        self.cycle_ms = cycle_ms
        self.monitor = Monitor(self.policy.window_ms, self.policy.baseline_ms)
        self._log_cursor = 0
        self._advisories: list[Advisory] = []
        self._devops_pending: list[AdaptationPlan] = []
        self.incident: Optional[Incident] = None
        self.executing: Optional[AdaptationPlan] = None
        self._plan_seq = 0
        self.reports: list[ExecutionReport] = []
        self.last_window = None
        self._started = False

    # -- wiring ---------------------------------------------------------------

    def start(self):
        if self._started:
            return
        self._started = True
        self.world.sim.schedule(self.world.sim.now + self.cycle_ms, self._cycle)

    def submit_advisory(self, advisory: Advisory):
        self._advisories.append(advisory)
        self.world.sim.log_event(
            "advisory",
            {"kind": advisory.kind, "targets": list(advisory.targets)},
        )

    def submit_devops(self, request: dict) -> AdaptationPlan:
        """Route an operator reconfiguration request; returns its plan.

        The target is completed immediately (the API answers with it); the
        plan itself runs on the loop, immediately when idle or at the next
        cycle when another plan is in flight.
        """
        condition = Condition(
            cond.DEVOPS_REQUEST, detected_at=self.world.sim.now, request=dict(request)
        )
        new_plan = planner.plan([condition], self.world.config, self.world.webui.mode)
        self._assign_id(new_plan)
        self.world.sim.log_event("condition", condition.to_json())
        if self.executing is None:
            self._adopt(new_plan)
        else:
            self._devops_pending.append(new_plan)
        return new_plan

    def _assign_id(self, plan: AdaptationPlan):
        self._plan_seq += 1
        plan.id = self._plan_seq

    # -- the loop ----------------------------------------------------------------

    def _cycle(self):
        sim = self.world.sim
        new_records = sim.log.records[self._log_cursor:]
        self._log_cursor = len(sim.log.records)
        window = self.monitor.observe(new_records, sim.now)
        self.last_window = window
        sim.log_event("metrics", window.to_json())

        advisories = self._advisories
        self._advisories = []
        conditions = analyze(
            window,
            self.policy,
            advisories,
            self.world.config,
            incident_open=self.incident is not None,
        )
        conditions = self._enrich_and_filter(conditions)
        for condition in conditions:
            sim.log_event("condition", condition.to_json())

        if self.executing is None:
            plan = self._next_plan(conditions)
            if plan is not None:
                self._adopt(plan)

        sim.schedule(sim.now + self.cycle_ms, self._cycle)

    def _enrich_and_filter(self, conditions: list[Condition]) -> list[Condition]:
        result = []
        for c in conditions:
            if self.incident is not None and c.kind in (
                cond.DB_DOWN,
                cond.EXTERNAL_OUTAGE,
                cond.SECURITY_TAKEDOWN,
            ):
                continue  # already mitigating an incident of this family
            if c.kind == cond.PROVIDER_RESTORED and self.incident is not None:
                c = Condition(
                    cond.PROVIDER_RESTORED,
                    detected_at=c.detected_at,
                    restore_to=self.incident.pre_config,
                )
            result.append(c)
        return result

    def _next_plan(self, conditions: list[Condition]) -> Optional[AdaptationPlan]:
        if self._devops_pending:
            queued = self._devops_pending.pop(0)
            # Re-plan against the current configuration; the id is kept.
            fresh = planner.plan(list(queued.trigger), self.world.config, self.world.webui.mode)
            fresh.id = queued.id
            return self._trim(fresh)
        if not conditions:
            return None
        new_plan = planner.plan(conditions, self.world.config, self.world.webui.mode)
        new_plan = self._trim(new_plan)
        if new_plan is None:
            return None
        self._assign_id(new_plan)
        return new_plan

    def _trim(self, plan: AdaptationPlan) -> Optional[AdaptationPlan]:
        """Drop steps that would be no-ops against the live world state."""
        steps = []
        for step in plan.steps:
            if step.kind == planner.DEPLOY_BREAKERS and self.world.webui.breakers:
                continue
            if step.kind == planner.REMOVE_BREAKERS and not self.world.webui.breakers:
                continue
            if (
                step.kind == planner.SET_MODE
                and step.service == "webui"
                and self.world.webui.mode == step.mode
            ):
                continue
            steps.append(step)
        if not steps and plan.target == self.world.config:
            return None
        plan.steps = tuple(steps)
        return plan

    # -- execution ------------------------------------------------------------------

    def _adopt(self, plan: AdaptationPlan):
        if plan.id == 0:
            self._assign_id(plan)
        self._validate(plan)
        sim = self.world.sim
        self.executing = plan
        sim.log_event("plan", plan.to_json())
        self._open_incident_if_needed(plan)
        started_at = sim.now
        timestamps: list[dict] = []

        def run_step(index: int):
            if index >= len(plan.steps):
                finish()
                return
            step = plan.steps[index]
            try:
                duration = self._apply_step(step)
            except StepFailedError as failure:
                # Halt here: no further steps, configuration unchanged, the
                # partial progress is the report.
                sim.log_event(
                    "plan_failed",
                    {
                        "plan_id": plan.id,
                        "failed_step": failure.step.to_json(),
                        "reason": failure.reason,
                        "completed_steps": timestamps,
                    },
                )
                self.executing = None
                report = ExecutionReport(
                    plan_id=plan.id,
                    started_at=started_at,
                    finished_at=sim.now,
                    step_timestamps=timestamps,
                )
                self.reports.append(report)
                return
            timestamps.append({"at": sim.now, **step.to_json()})
            sim.log_event("step", {"plan_id": plan.id, "index": index, **step.to_json()})
            sim.schedule(sim.now + duration, lambda: run_step(index + 1))

        def finish():
            if plan.target != self.world.config:
                self.world.set_config(plan.target)
            finished_at = sim.now
            sim.log_event("plan_executed", {"plan_id": plan.id, "target": plan.target.to_json()})
            self.executing = None
            # A completed restoration closes the incident; a failed one
            # leaves it open so probing keeps retrying the recovery.
            if self.incident is not None and any(
                c.kind == cond.PROVIDER_RESTORED for c in plan.trigger
            ):
                sim.log_event(
                    "incident_closed",
                    {"kind": self.incident.kind, "opened_at": self.incident.started_at},
                )
                self.incident = None
            report = ExecutionReport(
                plan_id=plan.id,
                started_at=started_at,
                finished_at=finished_at,
                step_timestamps=timestamps,
            )
            sim.schedule(finished_at + max(REPORT_GRACE_MS, 0), lambda: conclude(report))

        def conclude(report: ExecutionReport):
            report.downtime_ms = self._measure_downtime(report.started_at, report.finished_at)
            self.reports.append(report)
            sim.log_event("plan_report", report.to_json())

        run_step(0)

    def _validate(self, plan: AdaptationPlan):
        """Reject plans that stop a route's serving target before switching."""
        serving = {
            route: ep.service
            for route, ep in self.world.routes.items()
            if ep is not None
        }
        switched: set[str] = set()
        started: set[str] = set()
        for step in plan.steps:
            if step.kind == planner.START_SERVICE:
                started.add(step.service)
            elif step.kind == planner.SWITCH_ROUTE:
                if (
                    step.service is not None
                    and step.service not in started
                    and self.world.current_endpoint(step.service) is None
                ):
                    raise PlanInvalidError(
                        f"switch_route to {step.service} before it is started"
                    )
                switched.add(step.route)
            elif step.kind == planner.STOP_SERVICE:
                for route, service in serving.items():
                    if step.service == service and route not in switched:
                        raise PlanInvalidError(
                            f"stop_service {service} before switch_route {route}"
                        )

    def _apply_step(self, step: ReconfigStep) -> int:
        world = self.world
        if step.kind == planner.START_SERVICE:
            if world.current_endpoint(step.service) is not None:
                # Restarting a registered endpoint: recovery timing belongs
                # to whatever fault models the restart.
                world.start_service(step.service)
                return 0
            upcoming = world.upcoming_endpoint(step.service)
            if world.sim.is_down(upcoming):
                # Nothing registered: a retry meets the same fault until it
                # clears, instead of inheriting a half-started instance.
                raise StepFailedError(step, f"{upcoming} faulted at start")
            world.start_service(step.service)
            return PROVISION_MS if step.service in EXTERNAL_SERVICES else LOCAL_START_MS
        if step.kind == planner.WARM_CACHE:
            world.warm_front(step.route)
            return WARM_MS
        if step.kind == planner.SWITCH_ROUTE:
            target = (
                world.current_endpoint(step.service) if step.service is not None else None
            )
            world.switch_route(step.route, target)
            return 0
        if step.kind == planner.STOP_SERVICE:
            world.stop_service(step.service)
            return 0
        if step.kind == planner.SET_MODE:
            world.set_service_mode(step.service, step.mode)
            return 0
        if step.kind == planner.DEPLOY_BREAKERS:
            world.webui.deploy_breakers()
            world.sim.log_event("breakers_deployed", {})
            return 0
        if step.kind == planner.REMOVE_BREAKERS:
            world.webui.remove_breakers()
            world.sim.log_event("breakers_removed", {})
            return 0
        raise PlanInvalidError(f"unknown step kind {step.kind!r}")

    # -- incidents, probes, redeploy ----------------------------------------------------

    def _open_incident_if_needed(self, plan: AdaptationPlan):
        kinds = {c.kind for c in plan.trigger}
        sim = self.world.sim
        if cond.PROVIDER_RESTORED in kinds or self.incident is not None:
            return
        incident_kind = None
        for kind in (cond.DB_DOWN, cond.SECURITY_TAKEDOWN, cond.EXTERNAL_OUTAGE):
            if kind in kinds:
                incident_kind = kind
                break
        if incident_kind is None:
            return
        if incident_kind == cond.DB_DOWN:
            db_condition = next(c for c in plan.trigger if c.kind == cond.DB_DOWN)
            probes = (db_condition.endpoint or "local_static_db",)
        else:
            probes = tuple(
                s
                for s in EXTERNAL_SERVICES
                if s in cond.active_external_services(self.world.config)
            )
        self.incident = Incident(
            kind=incident_kind,
            pre_config=self.world.config,
            pre_webui_mode=self.world.webui.mode,
            probe_services=probes,
            started_at=self.world.sim.now,
        )
        sim.log_event(
            "incident_opened",
            {"kind": incident_kind, "probes": list(probes)},
        )
        if incident_kind == cond.EXTERNAL_OUTAGE:
            doomed = list(probes)
            sim.schedule(
                sim.now + REDEPLOY_DELAY_MS, lambda: self._complete_redeploy(doomed)
            )
        sim.schedule(sim.now + PROBE_INTERVAL_MS, self._probe_round)

    def _complete_redeploy(self, services: list[str]):
        if self.incident is None:
            return
        fresh = self.world.redeploy_externals(services)
        self.world.sim.log_event(
            "redeploy_complete", {"endpoints": [str(e) for e in fresh]}
        )

    def _probe_round(self):
        if self.incident is None:
            return
        sim = self.world.sim
        targets = [self.world.current_endpoint(s) for s in self.incident.probe_services]
        targets = [t for t in targets if t is not None]
        outcomes: list[bool] = []
        expected = len(targets)

        def resolved(result):
            outcomes.append(not isinstance(result, Timeout) and result.get("status") == "ok")
            if len(outcomes) == expected and all(outcomes) and self.incident is not None:
                self._advisories.append(
                    Advisory(kind="probe_success", at=sim.now, targets=tuple(
                        self.incident.probe_services
                    ))
                )
                sim.log_event("probe_success", {"targets": [str(t) for t in targets]})

        for target in targets:
            sim.send_request(
                CONTROLLER, target, {"op": "ping"}, PROBE_TIMEOUT_MS, on_resolve=resolved
            )
        sim.schedule(sim.now + PROBE_INTERVAL_MS, self._probe_round)

    # -- downtime accounting ---------------------------------------------------------

    def _measure_downtime(self, start: int, end: int) -> dict:
        """Interval union of client requests that lost a mandatory feature."""
        sent: dict[int, dict] = {}
        failures: dict[str, list[tuple[int, int]]] = {"catalog": [], "images": []}
        for record in self.world.sim.log.records:
            detail = record.get("detail", {})
            if record["kind"] == "request" and record["from"].startswith("client"):
                if start <= record["t"] <= end:
                    sent[detail["id"]] = {"t": record["t"], "op": detail.get("op")}
            elif record["kind"] == "timeout" and record["from"].startswith("client"):
                req = sent.get(detail.get("id"))
                if req is not None:
                    span = (req["t"], record["t"])
                    failures["catalog"].append(span)
                    failures["images"].append(span)
            elif record["kind"] == "response" and record["to"].startswith("client"):
                req = sent.get(detail.get("id"))
                if req is None or detail.get("late"):
                    continue
                status = detail.get("status")
                sections = detail.get("sections", [])
                span = (req["t"], record["t"])
                if status not in ("ok", "maintenance", "rejected", "error"):
                    failures["catalog"].append(span)
                if (
                    detail.get("kind") == "product_page"
                    and status == "ok"
                    and "image" not in sections
                ):
                    failures["images"].append(span)
        return {
            feature: _union_ms(spans) for feature, spans in failures.items()
        }


def _union_ms(spans: list[tuple[int, int]]) -> int:
    if not spans:
        return 0
    spans = sorted(spans)
    total = 0
    cur_start, cur_end = spans[0]
    for s, e in spans[1:]:
        if s > cur_end:
            total += cur_end - cur_start
            cur_start, cur_end = s, e
        else:
            cur_end = max(cur_end, e)
    total += cur_end - cur_start
    return total
