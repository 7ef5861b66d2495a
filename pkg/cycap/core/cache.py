"""
cycap - Cache Manager Module
Calibrated time-cap medians on disk, one JSON file per key, expiring after a TTL.
"""

import json
import hashlib
import logging
from datetime import datetime, timedelta
from pathlib import Path
from typing import Any, Optional, Union

from cycap.config import CACHE_DIR, CACHE_TTL_HOURS

logger = logging.getLogger(__name__)


class CacheManager:
    """Stores `{key, cached_at, content}` under `cache_dir/<sha256(key)>.json`."""

    def __init__(self, cache_dir: Union[str, Path] = CACHE_DIR, ttl_hours: float = CACHE_TTL_HOURS) -> None:
        self.cache_dir = Path(cache_dir)
        self.ttl = timedelta(hours=ttl_hours)

    def _path(self, key: str) -> Path:
        return self.cache_dir / f"{hashlib.sha256(key.encode()).hexdigest()}.json"

    def get(self, key: str) -> Optional[Any]:
        path = self._path(key)
        try:
            entry = json.loads(path.read_text(encoding="utf-8"))
            stored = datetime.fromisoformat(entry["cached_at"])
        except FileNotFoundError:
            return None
        except (json.JSONDecodeError, KeyError, ValueError, OSError) as e:
            logger.debug("unreadable cache entry for %s: %s", key, e)
            return None

        if datetime.now() - stored > self.ttl:
            logger.debug("cache entry for %s expired", key)
            path.unlink(missing_ok=True)
            return None
        return entry["content"]

    def set(self, key: str, content: Any) -> None:
        entry = {"key": key, "cached_at": datetime.now().isoformat(), "content": content}
        try:
            self.cache_dir.mkdir(parents=True, exist_ok=True)
            self._path(key).write_text(json.dumps(entry), encoding="utf-8")
        except OSError as e:
            logger.debug("cache write failed for %s: %s", key, e)

    def clear(self) -> int:
        """Remove every entry; returns how many files went."""
        removed = 0
        for path in self.cache_dir.glob("*.json"):
            try:
                path.unlink()
                removed += 1
            except OSError as e:
                logger.debug("could not remove %s: %s", path, e)
        return removed


# Global cache instance
cache = CacheManager()
