"""Stateless authentication: signed client-side sessions and login checks.

All session state travels with the client. The server keeps only its
signing secret and the seeded credential table, so validation depends on
nothing but the token and the secret. Restrictive mode adds a sliding
per-client rate rule applied before any credential verification.
"""
from __future__ import annotations

import hashlib
import json
from collections import deque
from typing import Mapping

from adaptstore.dataset import User
from adaptstore.simnet import Reply

STANDARD = "standard"
RESTRICTIVE = "restrictive"

RATE_LIMIT_ATTEMPTS = 3
RATE_LIMIT_WINDOW_MS = 10_000

VERIFY_SERVICE_MS = 8
CHEAP_SERVICE_MS = 1


def _signature(secret: str, user_id: str, cart: list, login: bool, issued_at: int) -> str:
    canonical = json.dumps(
        {"user": user_id, "cart": list(cart), "login": login, "issued_at": issued_at},
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha512(f"{secret}|{canonical}".encode("utf-8")).hexdigest()


def sign_session(secret: str, user_id: str, cart: list, login: bool, issued_at: int) -> dict:
    return {
        "user": user_id,
        "cart": list(cart),
        "login": login,
        "issued_at": issued_at,
        "sig": _signature(secret, user_id, cart, login, issued_at),
    }


def validate_session(secret: str, session) -> bool:
    if not isinstance(session, Mapping):
        return False
    try:
        expected = _signature(
            secret,
            session["user"],
            list(session["cart"]),
            bool(session["login"]),
            int(session["issued_at"]),
        )
    except (KeyError, TypeError, ValueError):
        return False
    return session.get("sig") == expected


def _password_hash(username: str, password: str) -> str:
    return hashlib.sha256(f"{username}:{password}".encode("utf-8")).hexdigest()


class AuthService:
    service_name = "auth"

    def __init__(self, secret: str, users: list[User], mode: str = STANDARD):
        self.secret = secret
        self.mode = mode
        self._password_hashes = {u.username: _password_hash(u.username, u.password) for u in users}
        self._user_ids = {u.username: u.id for u in users}
        self._attempts: dict[str, deque[int]] = {}

    def set_mode(self, mode: str):
        if mode not in (STANDARD, RESTRICTIVE):
            raise ValueError(f"unknown auth mode {mode!r}")
        self.mode = mode

    def _rate_limited(self, client_id: str, now: int) -> bool:
        window = self._attempts.setdefault(client_id, deque())
        while window and window[0] <= now - RATE_LIMIT_WINDOW_MS:
            window.popleft()
        limited = len(window) >= RATE_LIMIT_ATTEMPTS
        window.append(now)
        return limited

    def login(self, username: str, password: str, client_id: str, now: int) -> dict:
        if self.mode == RESTRICTIVE and self._rate_limited(client_id, now):
            return {"status": "rejected", "reason": "rate_limited"}
        stored = self._password_hashes.get(username)
        if stored is None or stored != _password_hash(username, password):
            return {"status": "rejected", "reason": "bad_credentials"}
        session = sign_session(self.secret, self._user_ids[username], [], True, now)
        return {"status": "ok", "session": session}

    def resign(self, session: dict, cart: list, now: int) -> dict:
        if not validate_session(self.secret, session):
            return {"status": "rejected", "reason": "invalid_session"}
        fresh = sign_session(self.secret, session["user"], cart, bool(session["login"]), now)
        return {"status": "ok", "session": fresh}

    def handle(self, sim, env) -> Reply:
        payload = env.payload
        op = payload.get("op")
        if op == "login":
            result = self.login(
                payload.get("username", ""),
                payload.get("password", ""),
                payload.get("client_id", "?"),
                sim.now,
            )
            cheap = result.get("reason") == "rate_limited"
            return Reply(result, service_ms=CHEAP_SERVICE_MS if cheap else VERIFY_SERVICE_MS)
        if op == "sign_session":
            result = self.resign(payload.get("session", {}), payload.get("cart", []), sim.now)
            return Reply(result, service_ms=2)
        if op == "validate":
            valid = validate_session(self.secret, payload.get("session"))
            return Reply({"status": "ok", "valid": valid}, service_ms=2)
        if op == "ping":
            return Reply({"status": "ok"}, service_ms=CHEAP_SERVICE_MS)
        return Reply({"status": "error", "reason": "unknown_op"}, service_ms=CHEAP_SERVICE_MS)
