"""Deterministic discrete-event simulated network.

One event loop owns the clock, the event queue, every registered service
handler, and the single seeded RNG. Requests are delivered with a
configurable latency model; faults (service down, latency inflation,
partitions, blackholing) reshape deliveries; a request always resolves at
its sender exactly once, as either a response or a timeout.

Late responses (emitted after the sender's deadline) are still recorded in
the event log with ``late: true`` so monitors can observe true service
latency, but they are never delivered to the already-resolved sender.
"""
from __future__ import annotations

import hashlib
import heapq
import json
import random
from dataclasses import dataclass
from typing import Callable, Optional

SERVICE_NAMES = frozenset(
    {
        "webui",
        "auth",
        "persistence_ext",
        "image_ext",
        "recommender",
        "local_static_db",
        "local_static_img",
        "local_cache_db",
        "local_cache_img",
        "client",
        "controller",
    }
)

EXTERNAL_SERVICES = frozenset({"auth", "persistence_ext", "image_ext"})

LINK_DEFAULT_MS = 5
LINK_CLIENT_WEBUI_MS = 2
LINK_EXTERNAL_MS = 20
TIMEOUT_DEFAULT_MS = 100


class SimulationError(Exception):
    pass


class TimeInPastError(SimulationError):
    pass


class UnknownFaultError(SimulationError):
    pass


@dataclass(frozen=True)
class Endpoint:
    service: str
    index: int = 0

    def __post_init__(self):
        if self.service not in SERVICE_NAMES:
            raise ValueError(f"unknown service {self.service!r}")

    def __str__(self) -> str:
        return f"{self.service}:{self.index}"

    @classmethod
    def parse(cls, text: str) -> "Endpoint":
        if ":" in text:
            service, index = text.split(":", 1)
            return cls(service, int(index))
        return cls(text, 0)


CLIENT = Endpoint("client")
CONTROLLER = Endpoint("controller")


@dataclass(frozen=True)
class Envelope:
    id: int
    frm: Endpoint
    to: Endpoint
    payload: dict
    send_time: int
    deadline: int


@dataclass(frozen=True)
class Reply:
    """Immediate handler result: payload plus the service time it cost."""

    payload: dict
    service_ms: int = 1


# Sentinel for handlers that will answer later via Simulator.respond().
PENDING = object()


class Timeout:
    """Resolution marker for a request that hit its deadline."""

    __slots__ = ()

    def __repr__(self):
        return "Timeout()"


TIMEOUT = Timeout()


@dataclass(frozen=True)
class FaultSpec:
    kind: str  # down | latency | partition | drop_all
    targets: frozenset[Endpoint] = frozenset()
    factor: float = 1.0
    group_a: frozenset[Endpoint] = frozenset()
    group_b: frozenset[Endpoint] = frozenset()

    def __post_init__(self):
        if self.kind not in {"down", "latency", "partition", "drop_all"}:
            raise ValueError(f"unknown fault kind {self.kind!r}")
        if self.kind == "latency" and self.factor < 1:
            raise ValueError("latency factor must be >= 1")
        if self.kind == "partition":
            if not self.group_a or not self.group_b:
                raise ValueError("partition needs two non-empty groups")
        elif not self.targets:
            raise ValueError(f"{self.kind} fault needs targets")

    def to_json(self) -> dict:
        data: dict = {"kind": self.kind}
        if self.targets:
            data["targets"] = sorted(str(e) for e in self.targets)
        if self.kind == "latency":
            data["factor"] = self.factor
        if self.kind == "partition":
            data["group_a"] = sorted(str(e) for e in self.group_a)
            data["group_b"] = sorted(str(e) for e in self.group_b)
        return data


class EventLog:
    """Append-only, time-ordered record list with a reproducible hash."""

    def __init__(self):
        self.records: list[dict] = []

    def append(self, t: int, kind: str, frm: str, to: str, detail: dict):
        if self.records and t < self.records[-1]["t"]:
            raise SimulationError("log times must be non-decreasing")
        self.records.append({"t": t, "kind": kind, "from": frm, "to": to, "detail": detail})

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def lines(self) -> list[str]:
        return [
            json.dumps(r, sort_keys=True, separators=(",", ":")) for r in self.records
        ]

    def sha256(self) -> str:
        return hashlib.sha256("\n".join(self.lines()).encode("utf-8")).hexdigest()


@dataclass
class _Pending:
    envelope: Envelope
    on_resolve: Optional[Callable]
    resolved: bool = False


@dataclass
class LatencyConfig:
    default_ms: int = LINK_DEFAULT_MS
    client_webui_ms: int = LINK_CLIENT_WEBUI_MS
    external_ms: int = LINK_EXTERNAL_MS
    jitter_ms: int = 0  # +-jitter drawn from the loop RNG when > 0


Handler = Callable[["Simulator", Envelope], object]


class Simulator:
    def __init__(self, seed: int = 0, latency: LatencyConfig | None = None):
        self.seed = seed
        self.rng = random.Random(seed)
        self.latency = latency or LatencyConfig()
        self.now: int = 0
        self.log = EventLog()
        self._queue: list[tuple[int, int, Callable[[], None]]] = []
        self._seq = 0
        self._next_envelope_id = 1
        self._next_fault_id = 1
        self._handlers: dict[Endpoint, Handler] = {}
        self._pending: dict[int, _Pending] = {}
        self._faults: dict[int, FaultSpec] = {}

    # -- endpoints ---------------------------------------------------------

    def register(self, endpoint: Endpoint, handler: Handler):
        self._handlers[endpoint] = handler

    def deregister(self, endpoint: Endpoint):
        self._handlers.pop(endpoint, None)

    def is_registered(self, endpoint: Endpoint) -> bool:
        return endpoint in self._handlers

    def registered_instances(self, service: str) -> list[Endpoint]:
        return sorted(
            (e for e in self._handlers if e.service == service),
            key=lambda e: e.index,
        )

    # -- scheduling --------------------------------------------------------

    def schedule(self, at: int, fn: Callable[[], None]) -> int:
        if at < self.now:
            raise TimeInPastError(f"cannot schedule at {at}, clock is {self.now}")
        self._seq += 1
        heapq.heappush(self._queue, (at, self._seq, fn))
        return self._seq

    def run_until(self, t: int) -> list[dict]:
        if t < self.now:
            raise TimeInPastError(f"cannot run to {t}, clock is {self.now}")
        start = len(self.log.records)
        while self._queue and self._queue[0][0] <= t:
            at, _, fn = heapq.heappop(self._queue)
            self.now = at
            fn()
        self.now = t
        return self.log.records[start:]

    # -- latency model -----------------------------------------------------

    def base_link_ms(self, a: Endpoint, b: Endpoint) -> int:
        pair = {a.service, b.service}
        if pair == {"client", "webui"}:
            return self.latency.client_webui_ms
        if pair & EXTERNAL_SERVICES:
            return self.latency.external_ms
        return self.latency.default_ms

    def effective_link_ms(self, a: Endpoint, b: Endpoint) -> int:
        ms = float(self.base_link_ms(a, b))
        for spec in self._faults.values():
            if spec.kind == "latency" and (a in spec.targets or b in spec.targets):
                ms *= spec.factor
        if self.latency.jitter_ms:
            ms += self.rng.randint(-self.latency.jitter_ms, self.latency.jitter_ms)
        return max(1, int(round(ms)))

    # -- faults ------------------------------------------------------------

    def inject_fault(self, spec: FaultSpec) -> int:
        fault_id = self._next_fault_id
        self._next_fault_id += 1
        self._faults[fault_id] = spec
        self._log("fault_injected", CONTROLLER, CONTROLLER, {"fault_id": fault_id, **spec.to_json()})
        return fault_id

    def clear_fault(self, fault_id: int):
        if fault_id not in self._faults:
            raise UnknownFaultError(f"no active fault {fault_id}")
        spec = self._faults.pop(fault_id)
        self._log("fault_cleared", CONTROLLER, CONTROLLER, {"fault_id": fault_id, **spec.to_json()})

    def active_faults(self) -> dict[int, FaultSpec]:
        return dict(self._faults)

    def is_down(self, endpoint: Endpoint) -> bool:
        return any(
            spec.kind == "down" and endpoint in spec.targets
            for spec in self._faults.values()
        )

    def _blocked(self, frm: Endpoint, to: Endpoint) -> Optional[str]:
        """Why a message from `frm` cannot be delivered to `to`, if at all."""
        for spec in self._faults.values():
            if spec.kind == "down" and to in spec.targets:
                return "down"
            if spec.kind == "drop_all" and to in spec.targets:
                return "drop_all"
            if spec.kind == "partition":
                crossing = (frm in spec.group_a and to in spec.group_b) or (
                    frm in spec.group_b and to in spec.group_a
                )
                if crossing:
                    return "partition"
        return None

    # -- request / response ------------------------------------------------

    def send_request(
        self,
        frm: Endpoint,
        to: Endpoint,
        payload: dict,
        timeout_ms: int = TIMEOUT_DEFAULT_MS,
        on_resolve: Optional[Callable] = None,
    ) -> int:
        if timeout_ms <= 0:
            raise ValueError("timeout must be positive")
        env = Envelope(
            id=self._next_envelope_id,
            frm=frm,
            to=to,
            payload=payload,
            send_time=self.now,
            deadline=self.now + timeout_ms,
        )
        self._next_envelope_id += 1
        self._pending[env.id] = _Pending(env, on_resolve)
        self._log(
            "request",
            frm,
            to,
            self._request_detail(env),
        )
        self.schedule(self.now + self.effective_link_ms(frm, to), lambda: self._deliver(env))
        self.schedule(env.deadline, lambda: self._fire_timeout(env))
        return env.id

    @staticmethod
    def _request_detail(env: Envelope) -> dict:
        detail = {"id": env.id, "op": env.payload.get("op", "?")}
        session = env.payload.get("session")
        if isinstance(session, str):
            detail["session"] = session
        return detail

    def _deliver(self, env: Envelope):
        reason = self._blocked(env.frm, env.to)
        if reason is None and not self.is_registered(env.to):
            reason = "unregistered"
        if reason is not None:
            self._log("dropped", env.frm, env.to, {"id": env.id, "reason": reason})
            return
        result = self._handlers[env.to](self, env)
        if result is PENDING or result is None:
            return
        if isinstance(result, Reply):
            self.respond(env, result.payload, service_ms=result.service_ms)
        else:
            raise SimulationError(f"handler for {env.to} returned {result!r}")

    def respond(
        self,
        env: Envelope,
        payload: dict,
        service_ms: int = 1,
        note: Optional[dict] = None,
    ):
        """Send the response for `env` back to its sender.

        Arrival is scheduled at now + service time + return link latency.
        If the sender timed out first the record is tagged late and the
        payload is dropped on arrival.
        """
        arrival = self.now + service_ms + self.effective_link_ms(env.to, env.frm)
        self.schedule(arrival, lambda: self._deliver_response(env, payload, note))

    def _deliver_response(self, env: Envelope, payload: dict, note: Optional[dict]):
        pending = self._pending.get(env.id)
        if pending is None:
            return
        late = pending.resolved
        blocked = self._blocked(env.to, env.frm)
        detail = {
            "id": env.id,
            "op": env.payload.get("op", "?"),
            "latency_ms": self.now - env.send_time,
        }
        session = env.payload.get("session")
        if isinstance(session, str):
            detail["session"] = session
        if note:
            detail.update(note)
        if late:
            detail["late"] = True
        if blocked:
            detail["blocked"] = blocked
        self._log("response", env.to, env.frm, detail)
        if late or blocked:
            return
        pending.resolved = True
        if pending.on_resolve is not None:
            pending.on_resolve(payload)

    def _fire_timeout(self, env: Envelope):
        pending = self._pending.get(env.id)
        if pending is None or pending.resolved:
            return
        pending.resolved = True
        self._log(
            "timeout",
            env.frm,
            env.to,
            {"id": env.id, "op": env.payload.get("op", "?")},
        )
        if pending.on_resolve is not None:
            pending.on_resolve(TIMEOUT)

    # -- logging -----------------------------------------------------------

    def _log(self, kind: str, frm: Endpoint, to: Endpoint, detail: dict):
        self.log.append(self.now, kind, str(frm), str(to), detail)

    def log_event(self, kind: str, detail: dict, frm: Endpoint = CONTROLLER, to: Endpoint = CONTROLLER):
        """Record a non-transport event (adaptation decisions, lifecycle)."""
        self._log(kind, frm, to, detail)
