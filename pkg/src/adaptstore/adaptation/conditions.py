"""Analyze phase: conditions detected from metrics, advisories, and probes.

Metric-inferred conditions respect minimum request floors so a single
timeout never triggers an adaptation. Security takedowns are never
inferred from metrics: they arrive only as explicit provider advisories.
Provider restoration needs a prior outage-style incident plus either a
restoration advisory or a successful probe round.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from adaptstore.adaptation.metrics import MetricsWindow
from adaptstore.variability import (
    AuthMode,
    Configuration,
    ImageSource,
    PersistenceSource,
)

DB_DOWN = "db_down"
EXTERNAL_OUTAGE = "external_outage"
SECURITY_TAKEDOWN = "security_takedown"
QOS_VIOLATION = "qos_violation"
TRAFFIC_SURGE = "traffic_surge"
PROVIDER_RESTORED = "provider_restored"
DEVOPS_REQUEST = "devops_request"

BENIGN = "benign"
MALICIOUS = "malicious"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class QoSPolicy:
    window_ms: int = 5000
    baseline_ms: int = 60_000
    default_p95_ms: int = 100
    p95_overrides: Mapping[str, int] = field(default_factory=dict)
    timeout_ratio: float = 0.5
    outage_min_requests: int = 5
    qos_min_requests: int = 10
    surge_factor: float = 5.0
    diversity_malicious: float = 0.1
    diversity_benign: float = 0.5

    def __post_init__(self):
        if min(self.window_ms, self.default_p95_ms, self.outage_min_requests) <= 0:
            raise ValueError("policy thresholds must be positive")
        if self.surge_factor <= 0 or self.timeout_ratio <= 0:
            raise ValueError("policy thresholds must be positive")

    def p95_threshold(self, service: str) -> int:
        return self.p95_overrides.get(service, self.default_p95_ms)


@dataclass(frozen=True)
class Advisory:
    """Out-of-band input to analyze: provider notices, probe outcomes,
    operator reconfiguration requests."""

    kind: str  # security_takedown | provider_restored | probe_success | devops_request
    at: int = 0
    targets: tuple[str, ...] = ()
    request: Optional[dict] = None


@dataclass(frozen=True)
class Condition:
    kind: str
    detected_at: int = 0
    endpoint: Optional[str] = None
    traffic_class: Optional[str] = None
    request: Optional[dict] = None
    restore_to: Optional[Configuration] = None

    def to_json(self) -> dict:
        data: dict = {"kind": self.kind, "detected_at": self.detected_at}
        if self.endpoint is not None:
            data["endpoint"] = self.endpoint
        if self.traffic_class is not None:
            data["traffic_class"] = self.traffic_class
        if self.request is not None:
            data["request"] = self.request
        if self.restore_to is not None:
            data["restore_to"] = self.restore_to.to_json()
        return data


def active_db_service(config: Configuration) -> str:
    if config.persistence is PersistenceSource.LOCAL_STATIC:
        return "local_static_db"
    return "local_cache_db"


def active_external_services(config: Configuration) -> list[str]:
    externals = []
    if config.persistence is PersistenceSource.EXTERNAL:
        externals.append("persistence_ext")
    if config.image is not ImageSource.LOCAL_STATIC:
        externals.append("image_ext")
    if config.auth is not AuthMode.ABSENT:
        externals.append("auth")
    return externals


def classify_traffic(window: MetricsWindow, policy: QoSPolicy) -> str:
    """Classify a present surge by session diversity at the webui."""
    webui = window.service("webui")
    if webui.requests == 0:
        return UNKNOWN
    diversity = webui.distinct_sessions / webui.requests
    if diversity < policy.diversity_malicious:
        return MALICIOUS
    if diversity > policy.diversity_benign:
        return BENIGN
    return UNKNOWN


def analyze(
    window: MetricsWindow,
    policy: QoSPolicy,
    advisories: Sequence[Advisory] = (),
    config: Configuration | None = None,
    incident_open: bool = False,
) -> list[Condition]:
    now = window.now
    conditions: list[Condition] = []

    if any(a.kind == "security_takedown" for a in advisories):
        conditions.append(Condition(SECURITY_TAKEDOWN, detected_at=now))

    if config is not None:
        db = active_db_service(config)
        metrics = window.service(db)
        if (
            metrics.requests >= policy.outage_min_requests
            and metrics.timeout_ratio >= policy.timeout_ratio
        ):
            conditions.append(Condition(DB_DOWN, detected_at=now, endpoint=db))

        externals = active_external_services(config)
        if externals:
            def failing(name: str) -> bool:
                m = window.service(name)
                return (
                    m.requests >= policy.outage_min_requests
                    and m.timeout_ratio >= policy.timeout_ratio
                )

            if all(failing(name) for name in externals):
                conditions.append(Condition(EXTERNAL_OUTAGE, detected_at=now))

    for name in sorted(window.services):
        metrics = window.services[name]
        if metrics.requests < policy.qos_min_requests or metrics.p95 is None:
            continue
        if metrics.p95 > policy.p95_threshold(name):
            conditions.append(Condition(QOS_VIOLATION, detected_at=now, endpoint=name))

    if (
        window.baseline_rate is not None
        and window.baseline_rate > 0
        and window.arrival_rate >= policy.surge_factor * window.baseline_rate
    ):
        conditions.append(
            Condition(
                TRAFFIC_SURGE,
                detected_at=now,
                traffic_class=classify_traffic(window, policy),
            )
        )

    if incident_open and any(
        a.kind in ("provider_restored", "probe_success") for a in advisories
    ):
        conditions.append(Condition(PROVIDER_RESTORED, detected_at=now))

    for advisory in advisories:
        if advisory.kind == "devops_request":
            conditions.append(
                Condition(DEVOPS_REQUEST, detected_at=now, request=advisory.request)
            )

    return conditions
