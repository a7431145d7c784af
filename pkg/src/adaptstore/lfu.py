"""Least-frequently-used cache with least-recently-used tie-breaking."""
from __future__ import annotations

from typing import Callable, Hashable, Optional

MISSING = object()


class LfuCache:
    """Bounded cache evicting the minimal-frequency entry (ties: oldest).

    Insertion counts as the first use; every hit increments the frequency
    and refreshes the recency tick. Frequencies are not decayed.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._entries: dict[Hashable, list] = {}  # key -> [value, freq, tick]
        self._tick = 0
        self.evictions: int = 0

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key) -> bool:
        return key in self._entries

    def keys(self):
        return list(self._entries.keys())

    def get(self, key, default=MISSING):
        entry = self._entries.get(key)
        if entry is None:
            return default
        self._tick += 1
        entry[1] += 1
        entry[2] = self._tick
        return entry[0]

    def put(self, key, value) -> Optional[Hashable]:
        """Insert or update. Returns the evicted key, if an eviction happened."""
        self._tick += 1
        entry = self._entries.get(key)
        if entry is not None:
            entry[0] = value
            entry[1] += 1
            entry[2] = self._tick
            return None
        evicted = None
        if len(self._entries) >= self.capacity:
            evicted = self._eviction_victim()
            del self._entries[evicted]
            self.evictions += 1
        self._entries[key] = [value, 1, self._tick]
        return evicted

    def _eviction_victim(self) -> Hashable:
        return min(self._entries, key=lambda k: (self._entries[k][1], self._entries[k][2]))

    def frequency(self, key) -> int:
        entry = self._entries.get(key)
        return 0 if entry is None else entry[1]

    def invalidate(self, key) -> bool:
        return self._entries.pop(key, None) is not None

    def invalidate_where(self, predicate: Callable[[Hashable], bool]) -> int:
        doomed = [k for k in self._entries if predicate(k)]
        for k in doomed:
            del self._entries[k]
        return len(doomed)

    def clear(self):
        self._entries.clear()
