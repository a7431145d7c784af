"""WebUI: page composition over whatever services the configuration keeps.

Every page request fans out sub-requests to the active routes in parallel
and answers once all of them resolved (each sub-call has a budget well
under the client's, so a degraded page always beats the client timeout).
A failed catalog read degrades the whole page to the maintenance message;
failures on optional routes just drop their section. In maintenance mode
the page is answered immediately with zero sub-requests.

When circuit breakers are deployed they wrap each route: a timeout is a
failure, any response from the direct peer (including an explicit
upstream-unavailable error) is a success for that hop.
"""
from __future__ import annotations

from typing import Callable, Optional

from adaptstore.breaker import CircuitBreaker
from adaptstore.simnet import PENDING, Endpoint, Timeout
from adaptstore.variability import AuthMode, PersistenceSource

PAGE_SERVICE_MS = 2
SUB_TIMEOUT_MS = 75

NORMAL = "normal"
MAINTENANCE = "maintenance"

PAGE_KINDS = ("product_page", "category_page", "login", "add_to_cart")

ROUTE_INACTIVE = object()
BREAKER_OPEN = object()


class _Gather:
    """Collects named sub-results and fires once when all arrived."""

    def __init__(self, names: list[str], on_done: Callable[[dict], None]):
        self.waiting = set(names)
        self.results: dict[str, object] = {}
        self._on_done = on_done
        if not self.waiting:
            on_done(self.results)

    def resolve(self, name: str, value):
        if name not in self.waiting:
            return
        self.waiting.discard(name)
        self.results[name] = value
        if not self.waiting:
            self._on_done(self.results)


def _failed(result) -> bool:
    if result is ROUTE_INACTIVE or result is BREAKER_OPEN:
        return True
    if isinstance(result, Timeout):
        return True
    return result.get("status") != "ok"


class WebUiService:
    service_name = "webui"

    def __init__(self, world):
        self.world = world
        self.endpoint = Endpoint("webui")
        self.mode = NORMAL
        self.breakers: dict[str, CircuitBreaker] = {}
        self.subrequest_count = 0

    # -- control surface ----------------------------------------------------

    def set_mode(self, mode: str):
        if mode not in (NORMAL, MAINTENANCE):
            raise ValueError(f"unknown webui mode {mode!r}")
        self.mode = mode

    def deploy_breakers(self, failure_threshold: int = 5, cooldown_ms: int = 5000):
        sim = self.world.sim
        for route in ("db", "img", "auth", "rec"):
            if route in self.breakers:
                continue

            def log_transition(old, new, now, route=route):
                sim.log_event("breaker", {"route": route, "from": old, "to": new})

            self.breakers[route] = CircuitBreaker(
                failure_threshold=failure_threshold,
                cooldown_ms=cooldown_ms,
                on_transition=log_transition,
            )

    def remove_breakers(self):
        self.breakers.clear()

    def breaker_snapshots(self) -> dict:
        return {route: b.snapshot() for route, b in sorted(self.breakers.items())}

    # -- sub-request plumbing -------------------------------------------------

    def _call(self, route: str, payload: dict, cb: Callable):
        sim = self.world.sim
        target = self.world.routes.get(route)
        if target is None:
            cb(ROUTE_INACTIVE)
            return
        breaker = self.breakers.get(route)
        if breaker is not None and not breaker.allow(sim.now):
            sim.log_event("breaker_rejected", {"route": route}, frm=self.endpoint, to=target)
            cb(BREAKER_OPEN)
            return

        def resolved(result):
            if breaker is not None:
                if isinstance(result, Timeout):
                    breaker.on_failure(sim.now)
                else:
                    breaker.on_success(sim.now)
            cb(result)

        self.subrequest_count += 1
        sim.send_request(self.endpoint, target, payload, SUB_TIMEOUT_MS, on_resolve=resolved)

    def _respond(self, sim, env, payload: dict, note: dict):
        sim.respond(env, payload, service_ms=PAGE_SERVICE_MS, note=note)

    # -- request handling -----------------------------------------------------

    def handle(self, sim, env):
        payload = env.payload
        kind = payload.get("kind")
        if kind not in PAGE_KINDS:
            self._respond(sim, env, {"status": "error", "reason": "unknown_kind"}, {"status": "error", "kind": str(kind)})
            return PENDING
        if self.mode == MAINTENANCE:
            self._respond(
                sim,
                env,
                {"status": "maintenance", "kind": kind},
                {"status": "maintenance", "kind": kind, "sections": []},
            )
            return PENDING
        if kind == "product_page":
            self._product_page(sim, env)
        elif kind == "category_page":
            self._category_page(sim, env)
        elif kind == "login":
            self._login(sim, env)
        else:
            self._add_to_cart(sim, env)
        return PENDING

    def _auth_sections(self) -> list[str]:
        if self.world.config.auth is AuthMode.ABSENT:
            return ["anonymous_banner"]
        return ["login_widget"]

    def _session_user(self, payload: dict) -> Optional[str]:
        token = payload.get("session_token")
        if isinstance(token, dict) and token.get("login"):
            return token.get("user")
        return None

    def _product_page(self, sim, env):
        payload = env.payload
        pid = payload.get("product_id", "?")
        size = payload.get("img_size", "128")
        names = ["db", "img"]
        rec_active = self.world.routes.get("rec") is not None
        if rec_active:
            names.append("rec")

        def done(results):
            self._finish_catalog_page(
                sim, env, "product_page", results, image_key="img", rec_key="rec"
            )

        gather = _Gather(names, done)
        self._call("db", {"op": "db_read", "query": f"by_id:{pid}"}, lambda r: gather.resolve("db", r))
        self._call(
            "img",
            {"op": "get_image", "product_id": pid, "size": size},
            lambda r: gather.resolve("img", r),
        )
        if rec_active:
            user = self._session_user(payload) or f"anon:{payload.get('session', '?')}"
            token = payload.get("session_token") or {}
            self._call(
                "rec",
                {
                    "op": "recommend",
                    "user_id": user,
                    "cart": list(token.get("cart", payload.get("cart", []))),
                    "viewed": pid,
                    "k": 3,
                },
                lambda r: gather.resolve("rec", r),
            )

    def _category_page(self, sim, env):
        payload = env.payload
        category = payload.get("category", "?")

        def done(results):
            self._finish_catalog_page(sim, env, "category_page", results)

        gather = _Gather(["db"], done)
        self._call(
            "db",
            {"op": "db_read", "query": f"by_category:{category}"},
            lambda r: gather.resolve("db", r),
        )

    def _finish_catalog_page(self, sim, env, kind, results, image_key=None, rec_key=None):
        db_result = results.get("db")
        if _failed(db_result):
            self._respond(
                sim,
                env,
                {"status": "maintenance", "kind": kind},
                {"status": "maintenance", "kind": kind, "sections": []},
            )
            return
        sections = ["catalog"] + self._auth_sections()
        note: dict = {"status": "ok", "kind": kind}
        body: dict = {"status": "ok", "kind": kind, "rows": db_result.get("rows", [])}
        if image_key is not None:
            image_result = results.get(image_key)
            if not _failed(image_result):
                blob = image_result["image"]
                sections.append("image")
                note["placeholder"] = bool(blob.get("placeholder"))
                body["image"] = blob
        if rec_key is not None:
            rec_result = results.get(rec_key)
            if rec_result is not None and not _failed(rec_result):
                sections.append("recommendations")
                items = rec_result.get("items", [])
                note["rec_items"] = len(items)
                body["recommendations"] = items
        note["sections"] = sorted(sections)
        self._respond(sim, env, body, note)

    def _login(self, sim, env):
        payload = env.payload
        if self.world.routes.get("auth") is None:
            self._respond(
                sim,
                env,
                {"status": "rejected", "reason": "auth_disabled", "kind": "login"},
                {"status": "rejected", "kind": "login", "rejection": "auth_disabled"},
            )
            return

        def done(result):
            if result is BREAKER_OPEN:
                reason = "breaker_open"
            elif result is ROUTE_INACTIVE:
                reason = "auth_disabled"
            elif isinstance(result, Timeout):
                reason = "auth_unavailable"
            elif result.get("status") == "ok":
                self._respond(
                    sim,
                    env,
                    {"status": "ok", "kind": "login", "session": result["session"]},
                    {"status": "ok", "kind": "login", "sections": sorted(["catalog", "login_widget"])},
                )
                return
            else:
                reason = result.get("reason", "rejected")
            self._respond(
                sim,
                env,
                {"status": "rejected", "reason": reason, "kind": "login"},
                {"status": "rejected", "kind": "login", "rejection": reason},
            )

        self._call(
            "auth",
            {
                "op": "login",
                "username": payload.get("username", ""),
                "password": payload.get("password", ""),
                "client_id": payload.get("session", "?"),
            },
            done,
        )

    def _add_to_cart(self, sim, env):
        payload = env.payload
        pid = payload.get("product_id", "?")
        session_id = payload.get("session", "?")
        token = payload.get("session_token")
        logged_in = isinstance(token, dict) and token.get("login")
        cart = list(token.get("cart", []) if logged_in else payload.get("cart", []))
        cart.append(pid)

        names = ["db"]
        write_order = self.world.config.persistence is PersistenceSource.EXTERNAL
        if write_order:
            names.append("write")
        sign = logged_in and self.world.routes.get("auth") is not None
        if sign:
            names.append("sign")

        def done(results):
            if _failed(results.get("db")):
                self._respond(
                    sim,
                    env,
                    {"status": "maintenance", "kind": "add_to_cart"},
                    {"status": "maintenance", "kind": "add_to_cart", "sections": []},
                )
                return
            sections = ["catalog", "cart"] + self._auth_sections()
            body: dict = {"status": "ok", "kind": "add_to_cart", "cart": cart}
            if write_order:
                sections.append(
                    "order_placed" if not _failed(results.get("write")) else "order_failed"
                )
            else:
                sections.append("order_deferred")
            if sign and not _failed(results.get("sign")):
                body["session"] = results["sign"]["session"]
            self._respond(
                sim,
                env,
                body,
                {"status": "ok", "kind": "add_to_cart", "sections": sorted(sections)},
            )

        gather = _Gather(names, done)
        self._call("db", {"op": "db_read", "query": f"by_id:{pid}"}, lambda r: gather.resolve("db", r))
        if write_order:
            user = (token or {}).get("user") if logged_in else f"anon:{session_id}"
            order = {
                "id": f"live-{env.id}",
                "user_id": user,
                "product_ids": [pid],
                "timestamp": sim.now,
            }
            self._call(
                "db",
                {"op": "db_write", "entity": "order", "order": order},
                lambda r: gather.resolve("write", r),
            )
        if sign:
            self._call(
                "auth",
                {"op": "sign_session", "session": token, "cart": cart},
                lambda r: gather.resolve("sign", r),
            )
