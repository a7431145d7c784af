"""Image tier: external provider flavors, placeholder stand-in, cache front.

Image payloads are synthetic: a blob is size metadata plus flags, never
real pixels. The full-flavor provider resizes on cache miss (15ms) and
serves cached hits fast (3ms); the lite flavor never resizes and always
returns the full-size blob regardless of the requested label.
"""
from __future__ import annotations

from typing import Callable, Optional

from adaptstore.lfu import MISSING, LfuCache
from adaptstore.simnet import PENDING, Reply, Timeout

SIZE_BYTES = {"64": 4_096, "128": 16_384, "256": 65_536, "full": 262_144}

RESIZE_SERVICE_MS = 15
CACHED_SERVICE_MS = 3
LOCAL_SERVICE_MS = 1
PING_SERVICE_MS = 1
UPSTREAM_TIMEOUT_MS = 60

LITE = "lite"
FULL = "full"

DEFAULT_CACHE_CAPACITY = 64


def make_blob(product_id: str, size: str, placeholder: bool = False, resized: bool = False) -> dict:
    return {
        "product_id": product_id,
        "size": size,
        "bytes_len": SIZE_BYTES[size],
        "placeholder": placeholder,
        "resized": resized,
    }


class ImageProviderService:
    """External provider holding one generated image per known product."""

    service_name = "image_ext"

    def __init__(self, product_ids, flavor: str = FULL, capacity: int = DEFAULT_CACHE_CAPACITY):
        if flavor not in (LITE, FULL):
            raise ValueError(f"unknown image flavor {flavor!r}")
        self.flavor = flavor
        self._known = set(product_ids)
        self.cache = LfuCache(capacity)
        self.resizes = 0

    def set_flavor(self, flavor: str):
        if flavor not in (LITE, FULL):
            raise ValueError(f"unknown image flavor {flavor!r}")
        self.flavor = flavor

    def get_image(self, product_id: str, size: str) -> tuple[dict, int]:
        """Return (blob, service_ms); lite flavor silently serves full size."""
        if product_id not in self._known:
            raise KeyError(product_id)
        if size not in SIZE_BYTES:
            raise ValueError(f"unknown size label {size!r}")
        delivered = size if self.flavor == FULL else "full"
        key = (product_id, delivered)
        cached = self.cache.get(key)
        if cached is not MISSING:
            return cached, CACHED_SERVICE_MS
        if self.flavor == FULL and delivered != "full":
            self.resizes += 1
            blob = make_blob(product_id, delivered, resized=True)
            cost = RESIZE_SERVICE_MS
        else:
            blob = make_blob(product_id, delivered)
            cost = CACHED_SERVICE_MS
        self.cache.put(key, blob)
        return blob, cost

    def handle(self, sim, env) -> Reply:
        payload = env.payload
        op = payload.get("op")
        if op == "get_image":
            try:
                blob, cost = self.get_image(payload.get("product_id", "?"), payload.get("size", "full"))
            except KeyError:
                return Reply({"status": "error", "reason": "unknown_product"}, PING_SERVICE_MS)
            except ValueError:
                return Reply({"status": "error", "reason": "unknown_size"}, PING_SERVICE_MS)
            return Reply({"status": "ok", "image": blob}, cost)
        if op == "ping":
            return Reply({"status": "ok"}, PING_SERVICE_MS)
        return Reply({"status": "error", "reason": "unknown_op"}, PING_SERVICE_MS)


class StaticImageService:
    """Placeholder-only stand-in used by the local/barebone configurations."""

    service_name = "local_static_img"

    def __init__(self):
        self.upstream_calls = 0  # stays zero by construction

    def handle(self, sim, env) -> Reply:
        payload = env.payload
        op = payload.get("op")
        if op == "get_image":
            size = payload.get("size", "full")
            if size not in SIZE_BYTES:
                return Reply({"status": "error", "reason": "unknown_size"}, PING_SERVICE_MS)
            blob = make_blob(payload.get("product_id", "?"), size, placeholder=True)
            return Reply({"status": "ok", "image": blob}, LOCAL_SERVICE_MS)
        if op == "ping":
            return Reply({"status": "ok"}, PING_SERVICE_MS)
        return Reply({"status": "error", "reason": "unknown_op"}, PING_SERVICE_MS)


class CacheImgFront:
    """Read-through cache over the external image provider."""

    service_name = "local_cache_img"

    def __init__(self, upstream_resolver: Callable[[], Optional[object]], capacity: int = DEFAULT_CACHE_CAPACITY):
        self._upstream_of = upstream_resolver
        self.cache = LfuCache(capacity)
        self.endpoint = None  # set at registration by the world

    def warm(self, entries: dict):
        for key, blob in entries.items():
            self.cache.put(key, blob)

    def handle(self, sim, env):
        payload = env.payload
        op = payload.get("op")
        if op == "get_image":
            key = (payload.get("product_id", "?"), payload.get("size", "full"))
            cached = self.cache.get(key)
            if cached is not MISSING:
                return Reply({"status": "ok", "image": cached}, LOCAL_SERVICE_MS)
            upstream = self._upstream_of()
            if upstream is None:
                return Reply({"status": "error", "reason": "upstream_unavailable"}, LOCAL_SERVICE_MS)

            def resolved(result):
                if isinstance(result, Timeout) or result.get("status") != "ok":
                    reason = (
                        "upstream_unavailable"
                        if isinstance(result, Timeout)
                        else result.get("reason", "upstream_error")
                    )
                    sim.respond(env, {"status": "error", "reason": reason}, service_ms=LOCAL_SERVICE_MS)
                    return
                self.cache.put(key, result["image"])
                sim.respond(env, {"status": "ok", "image": result["image"]}, service_ms=LOCAL_SERVICE_MS)

            sim.send_request(
                self.endpoint,
                upstream,
                {"op": "get_image", "product_id": key[0], "size": key[1]},
                timeout_ms=UPSTREAM_TIMEOUT_MS,
                on_resolve=resolved,
            )
            return PENDING
        if op == "ping":
            return Reply({"status": "ok"}, PING_SERVICE_MS)
        return Reply({"status": "error", "reason": "unknown_op"}, PING_SERVICE_MS)
