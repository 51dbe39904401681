"""
Utility functions for circspec.
"""

import json
import hashlib
import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, Iterable, List, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

TWO_PI = 2.0 * math.pi


def calculate_settings_hash(settings: Dict[str, Any]) -> str:
    """
    Calculate a short hash for a resolved settings dictionary.

    Args:
        settings: JSON-serialisable settings dictionary

    Returns:
        First 16 hex digits of the SHA256 digest
    """
    settings_str = json.dumps(settings, sort_keys=True, default=str)
    return hashlib.sha256(settings_str.encode()).hexdigest()[:16]


def format_duration(seconds: float) -> str:
    """
    Format duration in human-readable format.

    Args:
        seconds: Duration in seconds

    Returns:
        Formatted duration string
    """
    if seconds < 1:
        return f"{seconds * 1000:.0f}ms"
    elif seconds < 60:
        return f"{seconds:.2f}s"
    elif seconds < 3600:
        minutes = int(seconds // 60)
        secs = seconds % 60
        return f"{minutes}m {secs:.1f}s"
    else:
        hours = int(seconds // 3600)
        minutes = int((seconds % 3600) // 60)
        secs = seconds % 60
        return f"{hours}h {minutes}m {secs:.1f}s"


def thread_count() -> int:
    """Worker threads allowed by ``CIRCSPEC_THREADS`` (default: CPU count)."""
    raw = os.environ.get("CIRCSPEC_THREADS", "")
    try:
        value = int(raw)
    except ValueError:
        value = os.cpu_count() or 1
    return max(1, value)


def parallel_map(func: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """
    Apply ``func`` to every item, fanning out over a thread pool.

    Results come back in input order regardless of scheduling, so callers
    that reduce over them stay deterministic.

    Args:
        func: Pure function applied to each item
        items: Work items

    Returns:
        List of results aligned with ``items``
    """
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def wrap_angle(theta: Any) -> Any:
    """Reduce angles to [0, 2π)."""
    # np.mod returns exactly 2π for tiny negative inputs
    wrapped = np.mod(theta, TWO_PI)
    wrapped = np.where(wrapped >= TWO_PI, 0.0, wrapped)
    return float(wrapped) if np.ndim(wrapped) == 0 else wrapped


def circular_distance(a: Any, b: Any) -> Any:
    """Distance between angles measured along the unit circle."""
    d = np.abs(np.mod(np.asarray(a) - np.asarray(b), TWO_PI))
    return np.minimum(d, TWO_PI - d)


def complex_pairs(vector: Sequence[complex]) -> List[float]:
    """Flatten a complex vector into ``[re0, im0, re1, im1, ...]``."""
    out: List[float] = []
    for z in np.asarray(vector, dtype=complex).ravel():
        out.extend([float(z.real), float(z.imag)])
    return out
