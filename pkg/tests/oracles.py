"""Independent reference implementations the main code is checked against.

These stay deliberately naive: direct scans and double loops, no shared
code with the implementations they judge.
"""
import random

from adaptstore.lfu import MISSING, LfuCache
from adaptstore.recommender import WEIGHTED, NoData


def brute_force_predict(ratings, user, target, variant):
    """Slope One by direct double loop over users and rated items."""
    row = ratings[user]
    num, den = 0.0, 0.0
    for item, rating in row.items():
        if item == target:
            continue
        co = [other for other in ratings.values() if target in other and item in other]
        if not co:
            continue
        dev = sum(other[target] - other[item] for other in co) / len(co)
        weight = len(co) if variant == WEIGHTED else 1
        num += (rating + dev) * weight
        den += weight
    if den == 0:
        raise NoData(target)
    return num / den


def random_ratings(rng: random.Random):
    users = [f"u{i}" for i in range(rng.randint(2, 8))]
    items = [f"i{i}" for i in range(rng.randint(2, 8))]
    ratings = {}
    for user in users:
        row = {item: float(rng.randint(1, 5)) for item in items if rng.random() < 0.6}
        if row:
            ratings[user] = row
    return ratings


class ReferenceLfu:
    """Brute-force cache model: victim = min (frequency, last-access tick)."""

    def __init__(self, capacity):
        self.capacity = capacity
        self.entries = {}
        self.tick = 0

    def get(self, key):
        self.tick += 1
        if key in self.entries:
            freq, _ = self.entries[key]
            self.entries[key] = (freq + 1, self.tick)
            return True
        return False

    def put(self, key):
        self.tick += 1
        if key in self.entries:
            freq, _ = self.entries[key]
            self.entries[key] = (freq + 1, self.tick)
            return None
        victim = None
        if len(self.entries) >= self.capacity:
            victim = min(self.entries, key=lambda k: self.entries[k])
            del self.entries[victim]
        self.entries[key] = (1, self.tick)
        return victim


def run_lfu_trace(ops, capacity=4):
    """Replay (op, key) pairs against both cache implementations in lockstep."""
    cache = LfuCache(capacity)
    model = ReferenceLfu(capacity)
    for op, key in ops:
        if op == "get":
            hit = cache.get(key) is not MISSING
            assert hit == model.get(key), (op, key)
        else:
            assert cache.put(key, key) == model.put(key), (op, key)
    assert set(cache.keys()) == set(model.entries)
