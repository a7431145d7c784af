"""Persistence tier: provider store, coherent instance caches, local fronts.

The provider store is the single source of truth. Each persistence
instance fronts it with an LFU cache; a write is applied to the store and
the invalidation is broadcast to every instance's cache before the write
acknowledges, so a read through any instance after an acknowledged write
is never stale.

The two local services cover the configuration space: the static stand-in
serves a frozen copy of the catalog (products and categories only) and
never contacts anything; the cache front is a read-through/write-through
layer over the current external persistence instance.
"""
from __future__ import annotations

from typing import Callable, Optional

from adaptstore.dataset import (
    Dataset,
    order_from_json,
    order_to_json,
    product_to_json,
)
from adaptstore.lfu import MISSING, LfuCache
from adaptstore.simnet import PENDING, Reply, Timeout

READ_SERVICE_MS = 10
WRITE_SERVICE_MS = 10
LOCAL_SERVICE_MS = 1
PING_SERVICE_MS = 1
UPSTREAM_TIMEOUT_MS = 60

DEFAULT_CACHE_CAPACITY = 128


class UnknownQueryError(ValueError):
    pass


def _order_keys() -> tuple[str, ...]:
    return ("all_orders",)


class ProviderStore:
    """Shared backing store, seeded once at the first instance start."""

    def __init__(self):
        self.products: dict[str, dict] = {}
        self.users: list[dict] = []
        self.orders: list[dict] = []
        self.seeded = False
        self.reads = 0
        self._instances: list["PersistenceInstance"] = []
        self.on_order: Optional[Callable[[dict], None]] = None

    def attach(self, instance: "PersistenceInstance"):
        if instance not in self._instances:
            self._instances.append(instance)

    def detach(self, instance: "PersistenceInstance"):
        if instance in self._instances:
            self._instances.remove(instance)

    def seed(self, dataset: Dataset) -> dict:
        """Populate once; later calls are no-ops returning existing counts."""
        if not self.seeded:
            self.products = {p.id: product_to_json(p) for p in dataset.products}
            self.users = [
                {"id": u.id, "username": u.username} for u in dataset.users
            ]
            self.orders = [order_to_json(o) for o in dataset.orders]
            self.seeded = True
        return {
            "products": len(self.products),
            "users": len(self.users),
            "orders": len(self.orders),
        }

    def read(self, query: str) -> list[dict]:
        self.reads += 1
        return self.scan(query)

    def scan(self, query: str) -> list[dict]:
        """Direct store scan; also the oracle the caches are checked against."""
        if query.startswith("by_id:"):
            product = self.products.get(query[len("by_id:"):])
            return [product] if product else []
        if query.startswith("by_category:"):
            category = query[len("by_category:"):]
            return [p for p in self.products.values() if p["category"] == category]
        if query == "all_orders":
            return list(self.orders)
        raise UnknownQueryError(query)

    def apply_order(self, order: dict):
        self.orders.append(dict(order))
        for instance in self._instances:
            instance.invalidate_for_order()
        if self.on_order is not None:
            self.on_order(dict(order))


class PersistenceInstance:
    """One persistence service instance: store access behind an LFU cache."""

    service_name = "persistence_ext"

    def __init__(self, store: ProviderStore, capacity: int = DEFAULT_CACHE_CAPACITY):
        self.store = store
        self.cache = LfuCache(capacity)
        store.attach(self)

    def seed(self, dataset: Dataset) -> dict:
        return self.store.seed(dataset)

    def read(self, query: str) -> list[dict]:
        cached = self.cache.get(query)
        if cached is not MISSING:
            return cached
        rows = self.store.read(query)
        self.cache.put(query, rows)
        return rows

    def write_order(self, order: dict):
        # The store broadcasts invalidation to every attached instance
        # (including this one) before this call returns, i.e. before the ack.
        self.store.apply_order(order)

    def invalidate_for_order(self):
        for key in _order_keys():
            self.cache.invalidate(key)

    def handle(self, sim, env) -> Reply:
        payload = env.payload
        op = payload.get("op")
        if op == "db_read":
            try:
                rows = self.read(payload.get("query", ""))
            except UnknownQueryError:
                return Reply({"status": "error", "reason": "unknown_query"}, PING_SERVICE_MS)
            return Reply({"status": "ok", "rows": rows}, READ_SERVICE_MS)
        if op == "db_write":
            if payload.get("entity") != "order":
                return Reply({"status": "error", "reason": "unknown_entity"}, PING_SERVICE_MS)
            self.write_order(payload["order"])
            return Reply({"status": "ok"}, WRITE_SERVICE_MS)
        if op == "ping":
            return Reply({"status": "ok"}, PING_SERVICE_MS)
        return Reply({"status": "error", "reason": "unknown_op"}, PING_SERVICE_MS)


class StaticDbService:
    """Frozen catalog stand-in: products and categories, no users or orders."""

    service_name = "local_static_db"

    def __init__(self, dataset: Dataset):
        self._products = {p.id: product_to_json(p) for p in dataset.products}
        self.upstream_calls = 0  # stays zero by construction

    def read(self, query: str) -> list[dict]:
        if query.startswith("by_id:"):
            product = self._products.get(query[len("by_id:"):])
            return [product] if product else []
        if query.startswith("by_category:"):
            category = query[len("by_category:"):]
            return [p for p in self._products.values() if p["category"] == category]
        if query == "all_orders":
            return []
        raise UnknownQueryError(query)

    def handle(self, sim, env) -> Reply:
        payload = env.payload
        op = payload.get("op")
        if op == "db_read":
            try:
                rows = self.read(payload.get("query", ""))
            except UnknownQueryError:
                return Reply({"status": "error", "reason": "unknown_query"}, PING_SERVICE_MS)
            return Reply({"status": "ok", "rows": rows}, LOCAL_SERVICE_MS)
        if op == "db_write":
            # Frozen dataset: callers are expected to defer writes instead.
            return Reply({"status": "deferred"}, LOCAL_SERVICE_MS)
        if op == "ping":
            return Reply({"status": "ok"}, PING_SERVICE_MS)
        return Reply({"status": "error", "reason": "unknown_op"}, PING_SERVICE_MS)


class CacheDbFront:
    """Read-through / write-through cache over the external persistence."""

    service_name = "local_cache_db"

    def __init__(self, upstream_resolver: Callable[[], Optional[object]], capacity: int = DEFAULT_CACHE_CAPACITY):
        # upstream_resolver returns the current external endpoint (simnet
        # Endpoint) so redeployed instances are picked up without rewiring.
        self._upstream_of = upstream_resolver
        self.cache = LfuCache(capacity)
        self.endpoint = None  # set at registration by the world

    def warm(self, entries: dict):
        for key, rows in entries.items():
            self.cache.put(key, rows)

    def handle(self, sim, env):
        payload = env.payload
        op = payload.get("op")
        if op == "db_read":
            query = payload.get("query", "")
            cached = self.cache.get(query)
            if cached is not MISSING:
                return Reply({"status": "ok", "rows": cached}, LOCAL_SERVICE_MS)
            upstream = self._upstream_of()
            if upstream is None:
                return Reply({"status": "error", "reason": "upstream_unavailable"}, LOCAL_SERVICE_MS)

            def resolved(result):
                if isinstance(result, Timeout) or result.get("status") != "ok":
                    sim.respond(
                        env,
                        {"status": "error", "reason": "upstream_unavailable"},
                        service_ms=LOCAL_SERVICE_MS,
                    )
                    return
                self.cache.put(query, result["rows"])
                sim.respond(env, {"status": "ok", "rows": result["rows"]}, service_ms=LOCAL_SERVICE_MS)

            sim.send_request(
                self.endpoint,
                upstream,
                {"op": "db_read", "query": query},
                timeout_ms=UPSTREAM_TIMEOUT_MS,
                on_resolve=resolved,
            )
            return PENDING
        if op == "db_write":
            upstream = self._upstream_of()
            if upstream is None:
                return Reply({"status": "error", "reason": "upstream_unavailable"}, LOCAL_SERVICE_MS)

            def write_done(result):
                if isinstance(result, Timeout) or result.get("status") != "ok":
                    sim.respond(
                        env,
                        {"status": "error", "reason": "upstream_unavailable"},
                        service_ms=LOCAL_SERVICE_MS,
                    )
                    return
                for key in _order_keys():
                    self.cache.invalidate(key)
                sim.respond(env, {"status": "ok"}, service_ms=LOCAL_SERVICE_MS)

            sim.send_request(
                self.endpoint,
                upstream,
                dict(env.payload),
                timeout_ms=UPSTREAM_TIMEOUT_MS,
                on_resolve=write_done,
            )
            return PENDING
        if op == "ping":
            return Reply({"status": "ok"}, PING_SERVICE_MS)
        return Reply({"status": "error", "reason": "unknown_op"}, PING_SERVICE_MS)
