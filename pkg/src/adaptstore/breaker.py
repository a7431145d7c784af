"""Circuit breaker over simulated time.

Closed counts consecutive failures and trips open at the threshold; open
fast-rejects until the cooldown elapses, then half-open admits exactly one
probe whose outcome decides between closing and re-opening.
"""
from __future__ import annotations

from typing import Callable, Optional

CLOSED = "closed"
OPEN = "open"
HALF_OPEN = "half_open"


class CircuitBreaker:
    def __init__(
        self,
        failure_threshold: int = 5,
        cooldown_ms: int = 5000,
        on_transition: Optional[Callable[[str, str, int], None]] = None,
    ):
        if failure_threshold < 1:
            raise ValueError("failure threshold must be >= 1")
        self.failure_threshold = failure_threshold
        self.cooldown_ms = cooldown_ms
        self.state = CLOSED
        self.consecutive_failures = 0
        self.opened_at: Optional[int] = None
        self._probe_in_flight = False
        self._on_transition = on_transition

    def _transition(self, state: str, now: int):
        old = self.state
        self.state = state
        self.opened_at = now if state == OPEN else None
        self._probe_in_flight = False
        if state == CLOSED:
            self.consecutive_failures = 0
        if self._on_transition is not None and old != state:
            self._on_transition(old, state, now)

    def allow(self, now: int) -> bool:
        """Whether a call may proceed at `now` (may move open -> half-open)."""
        if self.state == OPEN:
            assert self.opened_at is not None
            if now - self.opened_at >= self.cooldown_ms:
                self._transition(HALF_OPEN, now)
            else:
                return False
        if self.state == HALF_OPEN:
            if self._probe_in_flight:
                return False
            self._probe_in_flight = True
            return True
        return True

    def on_success(self, now: int):
        if self.state == HALF_OPEN:
            self._transition(CLOSED, now)
        elif self.state == CLOSED:
            self.consecutive_failures = 0

    def on_failure(self, now: int):
        if self.state == HALF_OPEN:
            self._transition(OPEN, now)
        elif self.state == CLOSED:
            self.consecutive_failures += 1
            if self.consecutive_failures >= self.failure_threshold:
                self._transition(OPEN, now)
        # Failures reported while already open (stragglers from calls that
        # were admitted earlier) do not restart the cooldown.

    def snapshot(self) -> dict:
        return {
            "state": self.state,
            "consecutive_failures": self.consecutive_failures,
            "opened_at": self.opened_at,
            "failure_threshold": self.failure_threshold,
            "cooldown_ms": self.cooldown_ms,
        }
