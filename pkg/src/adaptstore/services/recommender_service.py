"""Recommender service instance: mode dispatch, training data, peer sync.

Full mode has a load-dependent service time: the heavy Slope One path
degrades quadratically once the recent request rate exceeds its capacity,
which is what makes a benign surge observably violate the latency QoS
until the mode is switched down. The low-power fallback is cheap at any
load.
"""
from __future__ import annotations

from collections import deque

from adaptstore import recommender as algo
from adaptstore.simnet import Reply, Timeout

LOW_POWER_SERVICE_MS = 2
FULL_BASE_SERVICE_MS = 12
FULL_CAPACITY_PER_S = 10
LOAD_FACTOR_CAP = 30
PING_SERVICE_MS = 1
SYNC_RETRY_MS = 1000
SYNC_TIMEOUT_MS = 75


class RecommenderService:
    service_name = "recommender"

    def __init__(self, mode: str = algo.LOW_POWER, history: list | None = None):
        self.mode = mode
        self.history: list[dict] = list(history or [])
        self.model = algo.train_slope_one(self.history)
        self._pending_orders = 0
        self._recent: deque[int] = deque()
        self.synced_from_peer = False

    def set_mode(self, mode: str):
        if mode not in (algo.LOW_POWER, algo.FULL):
            raise ValueError(f"unknown recommender mode {mode!r}")
        self.mode = mode

    def replace_history(self, history: list):
        self.history = list(history)
        self.model = algo.train_slope_one(self.history)
        self._pending_orders = 0

    def add_order(self, order: dict):
        self.history.append(dict(order))
        self._pending_orders += 1
        if self._pending_orders >= algo.RETRAIN_BATCH:
            self.model = algo.train_slope_one(self.history)
            self._pending_orders = 0

    def recommend(self, user_id, cart, viewed, k=algo.DEFAULT_K):
        return algo.recommend(
            self.mode, user_id, cart, viewed, self.history, model=self.model, k=k
        )

    def _service_ms(self, now: int) -> int:
        if self.mode == algo.LOW_POWER:
            return LOW_POWER_SERVICE_MS
        while self._recent and self._recent[0] <= now - 1000:
            self._recent.popleft()
        self._recent.append(now)
        rate = len(self._recent)
        factor = min((rate / FULL_CAPACITY_PER_S) ** 2, LOAD_FACTOR_CAP)
        return int(FULL_BASE_SERVICE_MS * max(1.0, factor))

    def handle(self, sim, env) -> Reply:
        payload = env.payload
        op = payload.get("op")
        if op == "recommend":
            items = self.recommend(
                payload.get("user_id"),
                payload.get("cart", []),
                payload.get("viewed"),
                payload.get("k", algo.DEFAULT_K),
            )
            return Reply(
                {"status": "ok", "items": [[item, score] for item, score in items]},
                self._service_ms(sim.now),
            )
        if op == "order_added":
            self.add_order(payload.get("order", {}))
            return Reply({"status": "ok"}, PING_SERVICE_MS)
        if op == "sync":
            return Reply(
                {
                    "status": "ok",
                    "history": [dict(o) for o in self.history],
                    "model": self.model.to_json(),
                },
                self._service_ms(sim.now),
            )
        if op == "ping":
            return Reply({"status": "ok"}, PING_SERVICE_MS)
        return Reply({"status": "error", "reason": "unknown_op"}, PING_SERVICE_MS)

    def sync_from_peer(self, sim, own_endpoint, peer_endpoint, on_done=None):
        """Copy the peer's training data, retrying every second on timeout."""

        def attempt():
            def resolved(result):
                if isinstance(result, Timeout) or result.get("status") != "ok":
                    sim.schedule(sim.now + SYNC_RETRY_MS, attempt)
                    return
                self.replace_history(result["history"])
                self.model = algo.DeviationModel.from_json(result["model"])
                self.synced_from_peer = True
                sim.log_event(
                    "training_sync",
                    {"orders": len(self.history), "peer": str(peer_endpoint)},
                    frm=own_endpoint,
                    to=peer_endpoint,
                )
                if on_done is not None:
                    on_done()

            sim.send_request(
                own_endpoint,
                peer_endpoint,
                {"op": "sync"},
                timeout_ms=SYNC_TIMEOUT_MS,
                on_resolve=resolved,
            )

        attempt()
