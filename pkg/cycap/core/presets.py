"""
cycap - Preset Loader Module
Loads best-known optima and named k-opt schedules from a YAML file.
"""

import logging
import os
from typing import Any, Optional

import yaml

from cycap.config import PRESET_FILE

logger = logging.getLogger(__name__)


class PresetLoader:
    """Handles loading of presets from YAML file."""

    def __init__(self, filepath: str = PRESET_FILE) -> None:
        self.filepath: str = filepath
        self.presets: dict[str, Any] = self._load_presets()

    def _load_presets(self) -> dict[str, Any]:
        if not os.path.exists(self.filepath):
            logger.warning("%s not found, using built-in defaults", self.filepath)
            return {}

        try:
            with open(self.filepath, 'r', encoding='utf-8') as f:
                data = yaml.safe_load(f) or {}
        except (yaml.YAMLError, OSError) as e:
            logger.error("error loading presets: %s", e)
            return {}
        if not isinstance(data, dict):
            logger.error("presets file %s is not a mapping", self.filepath)
            return {}
        return data

    def get(self, *keys: str, default: Optional[Any] = None) -> Optional[Any]:
        """Deep get for nested dictionary."""
        val: Any = self.presets
        for key in keys:
            if isinstance(val, dict):
                val = val.get(key)
            else:
                return default
        return val if val is not None else default

    def best_known(self, name: str) -> Optional[int]:
        value = self.get("best_known", name)
        try:
            return int(value) if value is not None else None
        except (TypeError, ValueError):
            logger.warning("best_known entry for %s is not an integer: %r", name, value)
            return None

    def schedule(self, name: str) -> Optional[tuple]:
        """Step list for a named schedule as OptStep members, or None."""
        from cycap.solvers.local_search import OptStep

        steps = self.get("schedules", name)
        if not isinstance(steps, list) or not steps:
            return None
        try:
            return tuple(OptStep(int(k)) for k in steps)
        except (TypeError, ValueError):
            logger.warning("schedule %s has invalid steps %r", name, steps)
            return None


# Global preset loader instance
preset_loader = PresetLoader()
