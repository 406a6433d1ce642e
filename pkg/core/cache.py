"""
Process-wide memo of cube resolutions.
Resolutions are pure functions of (diagram, vertex), so entries never expire.
"""
import hashlib
import json
import threading
from typing import Any, Dict, Optional, Tuple

from core.logger import logger

# Cache storage: {(diagram digest, vertex bits): resolution}
_cache: Dict[Tuple[str, Tuple[int, ...]], Any] = {}
_lock = threading.Lock()

_cache_stats = {
    "hits": 0,
    "misses": 0,
    "total_requests": 0,
    "cache_size": 0
}


def diagram_digest(payload: Any) -> str:
    """
    Hash a JSON-serialisable diagram description.

    Args:
        payload: Canonical dictionary form of a PD code

    Returns:
        sha256 hex digest
    """
    params_str = json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(params_str.encode('utf-8')).hexdigest()


def get_cached_resolution(digest: str, bits: Tuple[int, ...]) -> Optional[Any]:
    """
    Look up a memoised resolution.

    Args:
        digest: Diagram digest
        bits: Cube vertex

    Returns:
        Cached resolution or None
    """
    key = (digest, tuple(bits))
    with _lock:
        _cache_stats["total_requests"] += 1
        entry = _cache.get(key)
        if entry is None:
            _cache_stats["misses"] += 1
            return None
        _cache_stats["hits"] += 1
    return entry


def cache_resolution(digest: str, bits: Tuple[int, ...], resolution: Any) -> Any:
    """
    Insert a resolution unless another thread got there first; returns the stored entry.
    """
    key = (digest, tuple(bits))
    with _lock:
        stored = _cache.setdefault(key, resolution)
        _cache_stats["cache_size"] = len(_cache)
    return stored


def clear_cache():
    """Clear all cache entries."""
    with _lock:
        cleared_count = len(_cache)
        _cache.clear()
        _cache_stats["cache_size"] = 0
    logger.debug(f"Resolution cache cleared: {cleared_count} entries removed")


def get_cache_stats() -> Dict[str, Any]:
    """
    Get cache statistics.

    Returns:
        Dictionary with cache statistics
    """
    with _lock:
        total = _cache_stats["total_requests"]
        return {
            "hits": _cache_stats["hits"],
            "misses": _cache_stats["misses"],
            "total_requests": total,
            "hit_rate": _cache_stats["hits"] / total if total else 0.0,
            "cache_size": _cache_stats["cache_size"]
        }


def reset_cache_stats():
    """Reset cache statistics."""
    global _cache_stats
    with _lock:
        _cache_stats = {
            "hits": 0,
            "misses": 0,
            "total_requests": 0,
            "cache_size": len(_cache)
        }
