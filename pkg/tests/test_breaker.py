"""Circuit breaker state machine checks."""
import pytest

from adaptstore.breaker import CLOSED, HALF_OPEN, OPEN, CircuitBreaker


def test_five_consecutive_failures_trip_open():
    breaker = CircuitBreaker(failure_threshold=5, cooldown_ms=5000)
    for i in range(4):
        breaker.on_failure(now=i)
        assert breaker.state == CLOSED
    breaker.on_failure(now=4)
    assert breaker.state == OPEN
    assert breaker.opened_at == 4


def test_success_resets_consecutive_count():
    breaker = CircuitBreaker(failure_threshold=3)
    breaker.on_failure(0)
    breaker.on_failure(1)
    breaker.on_success(2)
    breaker.on_failure(3)
    breaker.on_failure(4)
    assert breaker.state == CLOSED
    breaker.on_failure(5)
    assert breaker.state == OPEN


def test_open_rejects_until_cooldown():
    breaker = CircuitBreaker(failure_threshold=1, cooldown_ms=5000)
    breaker.on_failure(100)
    assert breaker.state == OPEN
    assert not breaker.allow(101)
    assert not breaker.allow(5099)
    assert breaker.allow(5100)  # cooldown elapsed: half-open probe admitted
    assert breaker.state == HALF_OPEN


def test_half_open_allows_exactly_one_probe():
    breaker = CircuitBreaker(failure_threshold=1, cooldown_ms=100)
    breaker.on_failure(0)
    assert breaker.allow(100)
    assert not breaker.allow(100)
    assert not breaker.allow(150)


def test_half_open_probe_success_closes():
    breaker = CircuitBreaker(failure_threshold=1, cooldown_ms=100)
    breaker.on_failure(0)
    assert breaker.allow(100)
    breaker.on_success(110)
    assert breaker.state == CLOSED
    assert breaker.consecutive_failures == 0


def test_half_open_probe_failure_reopens_with_fresh_cooldown():
    breaker = CircuitBreaker(failure_threshold=1, cooldown_ms=100)
    breaker.on_failure(0)
    assert breaker.allow(100)
    breaker.on_failure(110)
    assert breaker.state == OPEN
    assert breaker.opened_at == 110
    assert not breaker.allow(205)
    assert breaker.allow(210)


def test_straggler_failures_while_open_do_not_restart_cooldown():
    breaker = CircuitBreaker(failure_threshold=1, cooldown_ms=100)
    breaker.on_failure(0)
    breaker.on_failure(50)  # result of a call admitted before the trip
    assert breaker.opened_at == 0
    assert breaker.allow(100)


def test_transition_callback_fires():
    seen = []
    breaker = CircuitBreaker(
        failure_threshold=1, cooldown_ms=10, on_transition=lambda o, n, t: seen.append((o, n, t))
    )
    breaker.on_failure(0)
    breaker.allow(10)
    breaker.on_success(11)
    assert seen == [(CLOSED, OPEN, 0), (OPEN, HALF_OPEN, 10), (HALF_OPEN, CLOSED, 11)]


def test_threshold_validation():
    with pytest.raises(ValueError):
        CircuitBreaker(failure_threshold=0)
