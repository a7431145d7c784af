"""Monitor phase: sliding per-service metrics windows over the event log.

Latency percentiles are computed from response records regardless of
whether the requester was still waiting (late responses carry the true
service latency, which is exactly what the QoS detector needs). Timeout
counts come from the requester-side timeout records, so an endpoint can
show both a high timeout ratio and measurable latency at once.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

from adaptstore.simnet import Endpoint

DEFAULT_WINDOW_MS = 5000
DEFAULT_BASELINE_MS = 60_000


@dataclass
class EndpointMetrics:
    requests: int = 0
    timeouts: int = 0
    breaker_rejections: int = 0
    p50: Optional[int] = None
    p95: Optional[int] = None
    distinct_sessions: int = 0

    @property
    def timeout_ratio(self) -> float:
        return self.timeouts / self.requests if self.requests else 0.0

    def to_json(self) -> dict:
        return {
            "requests": self.requests,
            "timeouts": self.timeouts,
            "timeout_ratio": round(self.timeout_ratio, 4),
            "breaker_rejections": self.breaker_rejections,
            "p50_ms": self.p50,
            "p95_ms": self.p95,
            "distinct_sessions": self.distinct_sessions,
        }


@dataclass
class MetricsWindow:
    now: int
    window_ms: int
    services: dict[str, EndpointMetrics] = field(default_factory=dict)
    arrival_rate: float = 0.0  # client requests per second over the window
    baseline_rate: Optional[float] = None  # trailing rate before the window

    def service(self, name: str) -> EndpointMetrics:
        return self.services.get(name, EndpointMetrics())

    def to_json(self) -> dict:
        return {
            "now": self.now,
            "window_ms": self.window_ms,
            "arrival_rate": round(self.arrival_rate, 3),
            "baseline_rate": None
            if self.baseline_rate is None
            else round(self.baseline_rate, 3),
            "services": {name: m.to_json() for name, m in sorted(self.services.items())},
        }


def _nearest_rank(sorted_values: list[int], q: float) -> int:
    rank = max(1, math.ceil(q * len(sorted_values)))
    return sorted_values[rank - 1]


class Monitor:
    """Incremental event-log consumer maintaining the sliding windows."""

    def __init__(self, window_ms: int = DEFAULT_WINDOW_MS, baseline_ms: int = DEFAULT_BASELINE_MS):
        self.window_ms = window_ms
        self.baseline_ms = baseline_ms
        # (t, service, kind, latency, session) tuples; kind in
        # {request, timeout, response, breaker}.
        self._events: deque[tuple] = deque()
        self._arrivals: deque[int] = deque()

    def ingest(self, records: Iterable[dict]):
        for record in records:
            kind = record["kind"]
            t = record["t"]
            detail = record.get("detail", {})
            if kind == "request":
                service = Endpoint.parse(record["to"]).service
                session = detail.get("session")
                self._events.append((t, service, "request", None, session))
                if record["from"].startswith("client"):
                    self._arrivals.append(t)
            elif kind == "timeout":
                service = Endpoint.parse(record["to"]).service
                self._events.append((t, service, "timeout", None, None))
            elif kind == "response":
                service = Endpoint.parse(record["from"]).service
                self._events.append((t, service, "response", detail.get("latency_ms"), None))
            elif kind == "breaker_rejected":
                service = Endpoint.parse(record["to"]).service
                self._events.append((t, service, "breaker", None, None))

    def observe(self, records: Iterable[dict], now: int) -> MetricsWindow:
        self.ingest(records)
        return self.window(now)

    def window(self, now: int) -> MetricsWindow:
        floor = now - self.window_ms
        while self._events and self._events[0][0] < now - self.baseline_ms:
            self._events.popleft()
        while self._arrivals and self._arrivals[0] < now - self.baseline_ms:
            self._arrivals.popleft()

        per_service: dict[str, dict] = {}
        for t, service, kind, latency, session in self._events:
            if t < floor or t > now:
                continue
            bucket = per_service.setdefault(
                service,
                {"requests": 0, "timeouts": 0, "breaker": 0, "latencies": [], "sessions": set()},
            )
            if kind == "request":
                bucket["requests"] += 1
                if session is not None:
                    bucket["sessions"].add(session)
            elif kind == "timeout":
                bucket["timeouts"] += 1
            elif kind == "response" and latency is not None:
                bucket["latencies"].append(latency)
            elif kind == "breaker":
                bucket["breaker"] += 1

        services = {}
        for name, bucket in per_service.items():
            latencies = sorted(bucket["latencies"])
            services[name] = EndpointMetrics(
                requests=bucket["requests"],
                timeouts=bucket["timeouts"],
                breaker_rejections=bucket["breaker"],
                p50=_nearest_rank(latencies, 0.50) if latencies else None,
                p95=_nearest_rank(latencies, 0.95) if latencies else None,
                distinct_sessions=len(bucket["sessions"]),
            )

        window_arrivals = sum(1 for t in self._arrivals if floor <= t <= now)
        arrival_rate = window_arrivals / (self.window_ms / 1000.0)

        baseline_rate = None
        baseline_start = max(0, now - self.baseline_ms)
        span_ms = floor - baseline_start
        if span_ms >= 1000:
            baseline_arrivals = sum(
                1 for t in self._arrivals if baseline_start <= t < floor
            )
            baseline_rate = baseline_arrivals / (span_ms / 1000.0)

        return MetricsWindow(
            now=now,
            window_ms=self.window_ms,
            services=services,
            arrival_rate=arrival_rate,
            baseline_rate=baseline_rate,
        )
