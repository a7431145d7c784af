"""Client workload generation: seeded arrival processes per phase.

Arrivals are pre-generated as plain request specs (a pure function of the
profile, the window, and the RNG), so a scenario's traffic is fixed before
the simulation starts. Benign profiles cycle their session pool for
maximal session diversity; the malicious flag forces a flood from at most
three sessions targeting a single request kind; a "random" picker draws
sessions uniformly from the pool, which lands the diversity ratio between
the two classifier cutoffs.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping

from adaptstore.dataset import Dataset

CYCLE = "cycle"
RANDOM = "random"

IMG_SIZES = ("64", "128", "256")

MALICIOUS_SESSION_CAP = 3


@dataclass(frozen=True)
class WorkloadProfile:
    rate_per_s: float
    mix: Mapping[str, float]
    session_pool: int
    malicious: bool = False
    session_pick: str = CYCLE
    session_prefix: str = "s"

    def __post_init__(self):
        if self.rate_per_s <= 0:
            raise ValueError("rate must be positive")
        if abs(sum(self.mix.values()) - 1.0) > 1e-9:
            raise ValueError("mix weights must sum to 1")
        if self.session_pool < 1:
            raise ValueError("session pool must be >= 1")
        if self.malicious and len(self.mix) != 1:
            raise ValueError("a malicious flood targets exactly one request kind")

    @property
    def effective_pool(self) -> int:
        if self.malicious:
            return min(self.session_pool, MALICIOUS_SESSION_CAP)
        return self.session_pool

    def to_json(self) -> dict:
        return {
            "rate_per_s": self.rate_per_s,
            "mix": dict(self.mix),
            "session_pool": self.session_pool,
            "malicious": self.malicious,
            "session_pick": self.session_pick,
            "session_prefix": self.session_prefix,
        }

    @classmethod
    def from_json(cls, data: dict) -> "WorkloadProfile":
        return cls(
            rate_per_s=data["rate_per_s"],
            mix=dict(data["mix"]),
            session_pool=data["session_pool"],
            malicious=data.get("malicious", False),
            session_pick=data.get("session_pick", CYCLE),
            session_prefix=data.get("session_prefix", "s"),
        )


@dataclass(frozen=True)
class Phase:
    start_ms: int
    end_ms: int
    profile: WorkloadProfile

    def to_json(self) -> dict:
        return {
            "start_ms": self.start_ms,
            "end_ms": self.end_ms,
            "profile": self.profile.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "Phase":
        return cls(data["start_ms"], data["end_ms"], WorkloadProfile.from_json(data["profile"]))


def generate_workload(
    profile: WorkloadProfile,
    start_ms: int,
    end_ms: int,
    rng: random.Random,
    dataset: Dataset,
) -> list[tuple[int, dict]]:
    """Expand one phase into (arrival time, request spec) pairs."""
    kinds = list(profile.mix.keys())
    weights = [profile.mix[k] for k in kinds]
    pool = profile.effective_pool
    arrivals: list[tuple[int, dict]] = []
    t = float(start_ms)
    counter = 0
    while True:
        t += rng.expovariate(profile.rate_per_s) * 1000.0
        if t >= end_ms:
            break
        if profile.session_pick == RANDOM or profile.malicious:
            session_idx = rng.randrange(pool)
        else:
            session_idx = counter % pool
        counter += 1
        session = f"{profile.session_prefix}{session_idx}"
        kind = rng.choices(kinds, weights=weights)[0]
        spec: dict = {"kind": kind, "session": session}
        if kind == "product_page":
            spec["product_id"] = rng.choice(dataset.products).id
            spec["img_size"] = rng.choice(IMG_SIZES)
        elif kind == "category_page":
            spec["category"] = rng.choice(dataset.categories)
        elif kind == "add_to_cart":
            spec["product_id"] = rng.choice(dataset.products).id
        elif kind == "login":
            user = dataset.users[session_idx % len(dataset.users)]
            spec["username"] = user.username
            spec["password"] = "wrong-password" if profile.malicious else user.password
        arrivals.append((int(t), spec))
    return arrivals


class ClientDriver:
    """Replays generated arrivals against the world, tracking per-session
    state (signed token, cart) the way a browser would."""

    def __init__(self, world):
        self.world = world
        self.sessions: dict[str, dict] = {}

    def schedule(self, arrivals: list[tuple[int, dict]]):
        for t, spec in arrivals:
            self.world.sim.schedule(t, lambda spec=spec: self._fire(spec))

    def _fire(self, spec: dict):
        sid = spec["session"]
        state = self.sessions.setdefault(sid, {"token": None, "cart": []})
        payload = {"op": "page", "kind": spec["kind"], "session": sid}
        kind = spec["kind"]
        if kind == "product_page":
            payload["product_id"] = spec["product_id"]
            payload["img_size"] = spec.get("img_size", "128")
        elif kind == "category_page":
            payload["category"] = spec["category"]
        elif kind == "login":
            payload["username"] = spec["username"]
            payload["password"] = spec["password"]
        elif kind == "add_to_cart":
            payload["product_id"] = spec["product_id"]
        if state["token"] is not None:
            payload["session_token"] = state["token"]
        if kind in ("product_page", "add_to_cart"):
            payload["cart"] = list(state["cart"])

        def resolved(result):
            if not isinstance(result, dict):
                return
            if result.get("status") != "ok":
                return
            if "session" in result:
                state["token"] = result["session"]
            if kind == "add_to_cart" and "cart" in result:
                state["cart"] = list(result["cart"])

        self.world.send_client_request(payload, on_resolve=resolved)
