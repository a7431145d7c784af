"""Plan phase: the condition rule table and reconfiguration step synthesis.

Each detected condition contributes dimension assignments and/or control
actions by a fixed priority order; merged assignments are completed into a
valid target configuration, and the step list is synthesized so that for
every route change the new target is started and warmed before the route
switches, and the old target stops only afterwards. Planning is a pure
function of (conditions, current configuration, webui mode): identical
inputs yield step-for-step identical plans.

External provider endpoints are never stopped by synthesized steps; they
belong to the provider. Leaving an external source only tears down the
company-owned cache front and the route.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from adaptstore.adaptation import conditions as cond
from adaptstore.adaptation.conditions import Condition
from adaptstore.variability import (
    AuthMode,
    Configuration,
    ImageSource,
    PersistenceSource,
    RecommenderMode,
    complete_request,
    diff,
)

START_SERVICE = "start_service"
WARM_CACHE = "warm_cache"
SWITCH_ROUTE = "switch_route"
STOP_SERVICE = "stop_service"
SET_MODE = "set_mode"
DEPLOY_BREAKERS = "deploy_breakers"
REMOVE_BREAKERS = "remove_breakers"


@dataclass(frozen=True)
class ReconfigStep:
    kind: str
    service: Optional[str] = None
    route: Optional[str] = None
    mode: Optional[str] = None

    def to_json(self) -> dict:
        data = {"kind": self.kind}
        for key in ("service", "route", "mode"):
            value = getattr(self, key)
            if value is not None:
                data[key] = value
        return data


@dataclass
class AdaptationPlan:
    target: Configuration
    steps: tuple[ReconfigStep, ...]
    trigger: tuple[Condition, ...]
    id: int = 0

    def is_empty(self) -> bool:
        return not self.steps

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "target": self.target.to_json(),
            "steps": [s.to_json() for s in self.steps],
            "trigger": [c.to_json() for c in self.trigger],
        }


# Condition priority: earlier entries win dimension conflicts during the merge.
_PRIORITY = (
    cond.PROVIDER_RESTORED,
    cond.DB_DOWN,
    cond.SECURITY_TAKEDOWN,
    cond.EXTERNAL_OUTAGE,
    cond.TRAFFIC_SURGE,
    cond.QOS_VIOLATION,
    cond.DEVOPS_REQUEST,
)


def _ordered(conditions) -> list[Condition]:
    def key(c: Condition):
        return (_PRIORITY.index(c.kind), c.endpoint or "", c.traffic_class or "")

    return sorted(conditions, key=key)


def plan(
    conditions,
    current: Configuration,
    webui_mode: str = "normal",
) -> AdaptationPlan:
    """Produce the reconfiguration plan for the detected conditions."""
    ordered = _ordered(list(conditions))
    assignments: dict[str, object] = {}
    deploy_breakers = False
    maintenance = False
    restart_services: list[str] = []
    restore_to: Optional[Configuration] = None

    def assign(dimension: str, value):
        assignments.setdefault(dimension, value)

    for c in ordered:
        if c.kind == cond.PROVIDER_RESTORED:
            restore_to = c.restore_to or current
        elif c.kind == cond.DB_DOWN:
            maintenance = True
            restart_services.append(c.endpoint or "local_static_db")
        elif c.kind == cond.SECURITY_TAKEDOWN:
            assign("image", ImageSource.LOCAL_STATIC)
            assign("persistence", PersistenceSource.LOCAL_STATIC)
            assign("auth", AuthMode.ABSENT)
        elif c.kind == cond.EXTERNAL_OUTAGE:
            assign("image", ImageSource.LOCAL_STATIC)
            assign("persistence", PersistenceSource.LOCAL_STATIC)
            assign("auth", AuthMode.ABSENT)
            assign("recommender", RecommenderMode.DISABLED)
        elif c.kind == cond.TRAFFIC_SURGE:
            if c.traffic_class in (cond.MALICIOUS, cond.UNKNOWN):
                deploy_breakers = True
                if current.auth is not AuthMode.ABSENT:
                    assign("auth", AuthMode.RESTRICTIVE)
                if current.recommender is RecommenderMode.FULL:
                    assign("recommender", RecommenderMode.LOW_POWER)
            elif current.recommender is RecommenderMode.FULL:
                assign("recommender", RecommenderMode.LOW_POWER)
        elif c.kind == cond.QOS_VIOLATION:
            if c.endpoint == "recommender" and current.recommender is RecommenderMode.FULL:
                assign("recommender", RecommenderMode.LOW_POWER)
        elif c.kind == cond.DEVOPS_REQUEST:
            for dimension, value in (c.request or {}).items():
                assign(dimension, value)

    if restore_to is not None:
        target = restore_to
    elif assignments:
        target = complete_request(assignments, current)
    else:
        target = current

    steps: list[ReconfigStep] = []
    if maintenance and webui_mode != "maintenance":
        steps.append(ReconfigStep(SET_MODE, service="webui", mode="maintenance"))
    if deploy_breakers:
        steps.append(ReconfigStep(DEPLOY_BREAKERS))
    steps.extend(_route_steps(current, target))
    for service in restart_services:
        steps.append(ReconfigStep(START_SERVICE, service=service))
    if restore_to is not None and webui_mode == "maintenance":
        steps.append(ReconfigStep(SET_MODE, service="webui", mode="normal"))

    return AdaptationPlan(target=target, steps=tuple(steps), trigger=tuple(ordered))


def _route_steps(current: Configuration, target: Configuration) -> list[ReconfigStep]:
    steps: list[ReconfigStep] = []
    for entry in diff(current, target):
        if entry.dimension == "image":
            steps.extend(_image_steps(entry.from_value, entry.to_value))
        elif entry.dimension == "persistence":
            steps.extend(_persistence_steps(entry.from_value, entry.to_value))
        elif entry.dimension == "auth":
            steps.extend(_auth_steps(entry.from_value, entry.to_value))
        else:
            steps.extend(_recommender_steps(entry.from_value, entry.to_value))
    return steps


def _image_steps(src: ImageSource, dst: ImageSource) -> list[ReconfigStep]:
    flavor = "lite" if dst is ImageSource.EXTERNAL_LITE else "full"
    if src is ImageSource.LOCAL_STATIC:
        return [
            ReconfigStep(START_SERVICE, service="image_ext"),
            ReconfigStep(SET_MODE, service="image_ext", mode=flavor),
            ReconfigStep(START_SERVICE, service="local_cache_img"),
            ReconfigStep(WARM_CACHE, route="img"),
            ReconfigStep(SWITCH_ROUTE, route="img", service="local_cache_img"),
            ReconfigStep(STOP_SERVICE, service="local_static_img"),
        ]
    if dst is ImageSource.LOCAL_STATIC:
        return [
            ReconfigStep(START_SERVICE, service="local_static_img"),
            ReconfigStep(SWITCH_ROUTE, route="img", service="local_static_img"),
            ReconfigStep(STOP_SERVICE, service="local_cache_img"),
        ]
    return [ReconfigStep(SET_MODE, service="image_ext", mode=flavor)]


def _persistence_steps(src: PersistenceSource, dst: PersistenceSource) -> list[ReconfigStep]:
    if dst is PersistenceSource.EXTERNAL:
        return [
            ReconfigStep(START_SERVICE, service="persistence_ext"),
            ReconfigStep(START_SERVICE, service="local_cache_db"),
            ReconfigStep(WARM_CACHE, route="db"),
            ReconfigStep(SWITCH_ROUTE, route="db", service="local_cache_db"),
            ReconfigStep(STOP_SERVICE, service="local_static_db"),
        ]
    return [
        ReconfigStep(START_SERVICE, service="local_static_db"),
        ReconfigStep(SWITCH_ROUTE, route="db", service="local_static_db"),
        ReconfigStep(STOP_SERVICE, service="local_cache_db"),
    ]


def _auth_steps(src: AuthMode, dst: AuthMode) -> list[ReconfigStep]:
    if dst is AuthMode.ABSENT:
        return [ReconfigStep(SWITCH_ROUTE, route="auth", service=None)]
    mode = "restrictive" if dst is AuthMode.RESTRICTIVE else "standard"
    steps = []
    if src is AuthMode.ABSENT:
        steps.append(ReconfigStep(START_SERVICE, service="auth"))
        steps.append(ReconfigStep(SET_MODE, service="auth", mode=mode))
        steps.append(ReconfigStep(SWITCH_ROUTE, route="auth", service="auth"))
    else:
        steps.append(ReconfigStep(SET_MODE, service="auth", mode=mode))
    return steps


def _recommender_steps(src: RecommenderMode, dst: RecommenderMode) -> list[ReconfigStep]:
    if dst is RecommenderMode.DISABLED:
        return [
            ReconfigStep(SWITCH_ROUTE, route="rec", service=None),
            ReconfigStep(STOP_SERVICE, service="recommender"),
        ]
    mode = "full" if dst is RecommenderMode.FULL else "low_power"
    steps = []
    if src is RecommenderMode.DISABLED:
        steps.append(ReconfigStep(START_SERVICE, service="recommender"))
        steps.append(ReconfigStep(SET_MODE, service="recommender", mode=mode))
        steps.append(ReconfigStep(SWITCH_ROUTE, route="rec", service="recommender"))
    else:
        steps.append(ReconfigStep(SET_MODE, service="recommender", mode=mode))
    return steps
