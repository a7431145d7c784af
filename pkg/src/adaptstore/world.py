"""Assembly of a running store: services, routes, and lifecycle operations.

The world owns the mapping from the current configuration to live service
instances and the four logical routes the WebUI calls (db, img, auth,
rec). Reconfiguration primitives (start/stop/switch/warm/set-mode) are the
execution surface the adaptation executor drives; everything stays inside
the single simulation event loop.
"""
from __future__ import annotations

from typing import Optional

from adaptstore.dataset import Dataset, generate_dataset
from adaptstore.services.auth import AuthService
from adaptstore.services.images import (
    FULL,
    LITE,
    CacheImgFront,
    ImageProviderService,
    StaticImageService,
    make_blob,
)
from adaptstore.services.persistence import (
    CacheDbFront,
    PersistenceInstance,
    ProviderStore,
    StaticDbService,
)
from adaptstore.services.recommender_service import RecommenderService
from adaptstore.services.webui import WebUiService
from adaptstore.simnet import CLIENT, Endpoint, FaultSpec, Simulator
from adaptstore.variability import (
    AuthMode,
    Configuration,
    ImageSource,
    PersistenceSource,
    RecommenderMode,
    validate,
)

ROUTES = ("db", "img", "auth", "rec")

LOCAL_START_MS = 200
PROVISION_MS = 8000
WARM_MS = 100

CLIENT_TIMEOUT_MS = 100

EXTERNAL_SET = ("persistence_ext", "image_ext", "auth")


class InvalidConfigurationError(ValueError):
    def __init__(self, result):
        self.result = result
        super().__init__(
            "invalid configuration: " + "; ".join(v.message for v in result.violations)
        )


class World:
    def __init__(self, config: Configuration, seed: int, dataset: Dataset | None = None):
        result = validate(config)
        if not result.valid:
            raise InvalidConfigurationError(result)
        self.sim = Simulator(seed)
        self.seed = seed
        self.dataset = dataset or generate_dataset(seed)
        self.secret = f"session-secret-{seed}"
        self.config = config
        self.provider_store: Optional[ProviderStore] = None
        self.services: dict[Endpoint, object] = {}
        self._instance_counter: dict[str, int] = {}
        self.routes: dict[str, Optional[Endpoint]] = {route: None for route in ROUTES}
        self.webui = WebUiService(self)
        self._register(Endpoint("webui"), self.webui)
        self._apply_initial(config)
        self.sim.log_event("config_changed", {"config": config.to_json()})

    # -- construction ---------------------------------------------------------

    def _register(self, endpoint: Endpoint, service):
        self.services[endpoint] = service
        self.sim.register(endpoint, service.handle)
        if hasattr(service, "endpoint"):
            service.endpoint = endpoint

    def _apply_initial(self, config: Configuration):
        if config.persistence is PersistenceSource.LOCAL_STATIC:
            db = self.start_service("local_static_db")
        else:
            self.start_service("persistence_ext")
            db = self.start_service("local_cache_db")
        self.switch_route("db", db)

        if config.image is ImageSource.LOCAL_STATIC:
            img = self.start_service("local_static_img")
        else:
            self.start_service("image_ext")
            img = self.start_service("local_cache_img")
        self.switch_route("img", img)

        if config.auth is not AuthMode.ABSENT:
            self.switch_route("auth", self.start_service("auth"))
        if config.recommender is not RecommenderMode.DISABLED:
            self.switch_route("rec", self.start_service("recommender"))

    # -- lifecycle primitives ---------------------------------------------------

    def current_endpoint(self, service: str) -> Optional[Endpoint]:
        instances = self.sim.registered_instances(service)
        return instances[-1] if instances else None

    def upcoming_endpoint(self, service: str) -> Endpoint:
        """The endpoint a fresh start of `service` would register."""
        if service in self._instance_counter:
            return Endpoint(service, self._instance_counter[service] + 1)
        return Endpoint(service, 0)

    def start_service(self, name: str, new_instance: bool = False) -> Endpoint:
        """Start (or restart) a service; returns the live endpoint.

        Restarting an already-registered instance is a logged no-op: actual
        recovery of a downed endpoint is governed by its fault lifetime.
        """
        existing = self.current_endpoint(name)
        if existing is not None and not new_instance:
            self.sim.log_event("service_started", {"endpoint": str(existing), "restart": True})
            return existing
        if name in self._instance_counter:
            index = self._instance_counter[name] + 1
        else:
            index = 0
        self._instance_counter[name] = index
        endpoint = Endpoint(name, index)
        self._register(endpoint, self._build_service(name))
        self.sim.log_event("service_started", {"endpoint": str(endpoint)})
        return endpoint

    def _build_service(self, name: str):
        if name == "local_static_db":
            return StaticDbService(self.dataset)
        if name == "local_static_img":
            return StaticImageService()
        if name == "local_cache_db":
            return CacheDbFront(lambda: self.current_endpoint("persistence_ext"))
        if name == "local_cache_img":
            return CacheImgFront(lambda: self.current_endpoint("image_ext"))
        if name == "persistence_ext":
            if self.provider_store is None:
                self.provider_store = ProviderStore()
                self.provider_store.on_order = self._notify_order
            first_start = not self.provider_store.seeded
            instance = PersistenceInstance(self.provider_store)
            counts = instance.seed(self.dataset)
            if first_start:
                self.sim.log_event("seeded", dict(counts))
            return instance
        if name == "image_ext":
            flavor = LITE if self.config.image is ImageSource.EXTERNAL_LITE else FULL
            return ImageProviderService((p.id for p in self.dataset.products), flavor=flavor)
        if name == "auth":
            mode = (
                "restrictive" if self.config.auth is AuthMode.RESTRICTIVE else "standard"
            )
            return AuthService(self.secret, self.dataset.users, mode=mode)
        if name == "recommender":
            mode = "full" if self.config.recommender is RecommenderMode.FULL else "low_power"
            service = RecommenderService(mode=mode, history=self._training_history())
            return service
        raise ValueError(f"no factory for service {name!r}")

    def _training_history(self) -> list[dict]:
        if self.provider_store is not None and self.provider_store.seeded:
            return [dict(o) for o in self.provider_store.orders]
        return []

    def stop_service(self, name: str):
        endpoint = self.current_endpoint(name)
        if endpoint is None:
            self.sim.log_event("service_stopped", {"endpoint": f"{name}:?", "noop": True})
            return
        service = self.services.pop(endpoint, None)
        if isinstance(service, PersistenceInstance):
            service.store.detach(service)
        self.sim.deregister(endpoint)
        self.sim.log_event("service_stopped", {"endpoint": str(endpoint)})

    def switch_route(self, route: str, endpoint: Optional[Endpoint]):
        if route not in self.routes:
            raise ValueError(f"unknown route {route!r}")
        self.routes[route] = endpoint
        self.sim.log_event(
            "route_switched",
            {"route": route, "target": str(endpoint) if endpoint else None},
        )

    def set_service_mode(self, service: str, mode: str):
        if service == "webui":
            self.webui.set_mode(mode)
        else:
            endpoint = self.current_endpoint(service)
            target = self.services.get(endpoint) if endpoint else None
            if target is None:
                raise ValueError(f"cannot set mode on stopped service {service!r}")
            if isinstance(target, ImageProviderService):
                target.set_flavor(mode)
            else:
                target.set_mode(mode)
        self.sim.log_event("mode_set", {"service": service, "mode": mode})

    def set_config(self, config: Configuration):
        result = validate(config)
        if not result.valid:
            raise InvalidConfigurationError(result)
        self.config = config
        self.sim.log_event("config_changed", {"config": config.to_json()})

    def redeploy_externals(self, services: list[str]) -> list[Endpoint]:
        """Provision fresh external instances (new indices), dropping the old."""
        fresh = []
        for name in services:
            old = self.current_endpoint(name)
            if old is not None:
                self.stop_service(name)
            fresh.append(self.start_service(name, new_instance=True))
        return fresh

    def warm_front(self, route: str):
        """Bulk-prefetch the cache front on `route` from its upstream data."""
        target = self.routes.get(route)
        service = self.services.get(target) if target else None
        if isinstance(service, CacheDbFront) and self.provider_store is not None:
            entries = {}
            for category in self.dataset.categories:
                entries[f"by_category:{category}"] = self.provider_store.scan(
                    f"by_category:{category}"
                )
            for product in self.dataset.products:
                entries[f"by_id:{product.id}"] = self.provider_store.scan(
                    f"by_id:{product.id}"
                )
            entries["all_orders"] = self.provider_store.scan("all_orders")
            service.warm(entries)
            self.sim.log_event("cache_warmed", {"route": route, "entries": len(entries)})
        elif isinstance(service, CacheImgFront):
            upstream = self.services.get(self.current_endpoint("image_ext"))
            lite = isinstance(upstream, ImageProviderService) and upstream.flavor == LITE
            entries = {}
            for product in self.dataset.products:
                delivered = "full" if lite else "128"
                entries[(product.id, "128")] = make_blob(product.id, delivered)
            service.warm(entries)
            self.sim.log_event("cache_warmed", {"route": route, "entries": len(entries)})
        else:
            self.sim.log_event("cache_warmed", {"route": route, "entries": 0})

    # -- traffic ------------------------------------------------------------------

    def send_client_request(self, payload: dict, on_resolve=None) -> int:
        webui = self.current_endpoint("webui")
        return self.sim.send_request(
            CLIENT, webui, payload, CLIENT_TIMEOUT_MS, on_resolve=on_resolve
        )

    def _notify_order(self, order: dict):
        rec = self.routes.get("rec")
        src = self.current_endpoint("persistence_ext")
        if rec is None or src is None:
            return
        self.sim.send_request(src, rec, {"op": "order_added", "order": order}, timeout_ms=50)

    # -- fault passthrough -----------------------------------------------------------

    def inject_fault(self, spec: FaultSpec) -> int:
        return self.sim.inject_fault(spec)

    def clear_fault(self, fault_id: int):
        self.sim.clear_fault(fault_id)

    # -- introspection -----------------------------------------------------------------

    def active_route_services(self) -> set[str]:
        """Service names the WebUI is expected to contact under self.config."""
        expected = set()
        if self.config.persistence is PersistenceSource.LOCAL_STATIC:
            expected.add("local_static_db")
        else:
            expected.add("local_cache_db")
        if self.config.image is ImageSource.LOCAL_STATIC:
            expected.add("local_static_img")
        else:
            expected.add("local_cache_img")
        if self.config.auth is not AuthMode.ABSENT:
            expected.add("auth")
        if self.config.recommender is not RecommenderMode.DISABLED:
            expected.add("recommender")
        return expected

    def snapshot(self) -> dict:
        return {
            "sim_time_ms": self.sim.now,
            "config": self.config.to_json(),
            "webui_mode": self.webui.mode,
            "breakers": self.webui.breaker_snapshots(),
            "routes": {
                route: str(ep) if ep else None for route, ep in sorted(self.routes.items())
            },
            "instances": sorted(str(e) for e in self.services),
            "active_faults": {
                str(fid): spec.to_json()
                for fid, spec in sorted(self.sim.active_faults().items())
            },
        }
