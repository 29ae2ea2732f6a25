#!/usr/bin/env python3
"""
Calculator Configuration
Verification defaults from a per-user JSON file and TORSCALC_* environment variables
"""

import os
import json
from typing import Dict, Any, List, Optional
from pathlib import Path
import logging

logger = logging.getLogger(__name__)

DEFAULTS: Dict[str, Any] = {
    "seed": 0,
    "depth": 4,
    "samples": 200,
    "k": [1],
    "theories": 10,
    "log_level": "WARNING",
}

ENV_VARS = {
    "seed": "TORSCALC_SEED",
    "depth": "TORSCALC_DEPTH",
    "samples": "TORSCALC_SAMPLES",
    "k": "TORSCALC_K",
    "theories": "TORSCALC_THEORIES",
    "log_level": "TORSCALC_LOG_LEVEL",
}

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _coerce(key: str, value: Any) -> Any:
    """Bring file and environment values to the type of the default"""
    if key == "k":
        if isinstance(value, str):
            return [int(part) for part in value.replace(",", " ").split()]
        if isinstance(value, int):
            return [value]
        return [int(part) for part in value]
    if key == "log_level":
        return str(value).upper()
    return int(value)


def check_values(values: Dict[str, Any]) -> Dict[str, bool]:
    """Validity of each known option in values"""

    def count(key: str, least: int) -> bool:
        value = values.get(key)
        return isinstance(value, int) and value >= least

    ks: List[int] = values.get("k") or []
    return {
        "seed": isinstance(values.get("seed"), int),
        "depth": count("depth", 1),
        "samples": count("samples", 1),
        "k": bool(ks) and all(isinstance(k, int) and k >= 1 for k in ks),
        "theories": count("theories", 0),
        "log_level": values.get("log_level") in LOG_LEVELS,
    }


class CalcConfig:
    """Configuration manager for verification defaults"""

    def __init__(self, config_dir: Optional[str] = None):
        config_dir = config_dir or os.getenv("TORSCALC_CONFIG_DIR")
        self.config_dir = Path(config_dir) if config_dir else Path.home() / ".torscalc"
        self.config_file = self.config_dir / "config.json"

        self._config_cache: Dict[str, Any] = dict(DEFAULTS)
        self._load_config()

    def _load_config(self):
        """Load configuration from file and environment"""

        if self.config_file.exists():
            try:
                with open(self.config_file, 'r') as f:
                    file_config = json.load(f)
                for key, value in file_config.items():
                    self._config_cache[key] = _coerce(key, value) if key in DEFAULTS else value
            except (OSError, ValueError, TypeError) as e:
                logger.warning(f"⚠️ Failed to load config file {self.config_file}: {e}")

        for key, env_var in ENV_VARS.items():
            value = os.getenv(env_var)
            if not value:
                continue
            try:
                self._config_cache[key] = _coerce(key, value)
            except ValueError:
                logger.warning(f"⚠️ Ignoring {env_var}={value!r}: not a valid {key}")

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value"""
        return self._config_cache.get(key, default)

    def set(self, key: str, value: Any, persist: bool = True):
        """Set configuration value"""
        self._config_cache[key] = _coerce(key, value) if key in DEFAULTS else value

        if persist:
            self._save_config()

    def as_dict(self) -> Dict[str, Any]:
        return dict(self._config_cache)

    def _save_config(self):
        """Save configuration to file"""

        try:
            self.config_dir.mkdir(parents=True, exist_ok=True)
            with open(self.config_file, 'w') as f:
                json.dump(self._config_cache, f, indent=2, sort_keys=True)
            logger.info(f"💾 Configuration saved to {self.config_file}")
        except OSError as e:
            logger.error(f"❌ Failed to save config: {e}")

    def validate_configuration(self) -> Dict[str, bool]:
        """Validate current configuration"""
        return check_values(self._config_cache)
