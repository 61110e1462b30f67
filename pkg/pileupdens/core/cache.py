from __future__ import annotations

import threading
from typing import Callable, Dict, Hashable, Optional

import numpy as np


class TableCache:
    """Very small bounded memo for read-only arrays.

    Keyed by anything hashable, typically (model, n) for weight tables.
    Stored arrays are marked read-only so callers cannot corrupt shared entries.
    """

    def __init__(self, max_items: int = 64):
        self._max = max_items
        self._data: Dict[Hashable, np.ndarray] = {}
        self._lock = threading.Lock()

    def get(self, key: Hashable) -> Optional[np.ndarray]:
        with self._lock:
            return self._data.get(key)

    def set(self, key: Hashable, value: np.ndarray) -> np.ndarray:
        value = np.asarray(value)
        value.setflags(write=False)
        with self._lock:
            if key not in self._data and len(self._data) >= self._max:
                # drop the oldest entry
                self._data.pop(next(iter(self._data)), None)
            self._data[key] = value
        return value

    def get_or_compute(self, key: Hashable, compute: Callable[[], np.ndarray]) -> np.ndarray:
        cached = self.get(key)
        if cached is not None:
            return cached
        return self.set(key, compute())

    def clear(self) -> None:
        with self._lock:
            self._data.clear()

    def __len__(self) -> int:
        return len(self._data)
