"""
Configuration Manager
Handles loading and merging configuration from default, local and experiment config files
"""
import copy
import json
import os
import logging
from contextlib import contextmanager
from typing import Any, Dict, Iterator, Optional

from core.config.config_schema import validate_config

logger = logging.getLogger(__name__)

THREADS_ENV = 'KANO_THREADS'


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively merge override into base (in place) and return base"""
    for key, value in override.items():
        if key in base and isinstance(base[key], dict) and isinstance(value, dict):
            deep_merge(base[key], value)
        else:
            base[key] = value
    return base


class ConfigManager:
    """Manages configuration for the KANO tools"""

    def __init__(self, config_dir: Optional[str] = None):
        self._config: Dict[str, Any] = {}
        self._config_dir = config_dir or self._default_config_dir()
        self._load_config()

    @staticmethod
    def _default_config_dir() -> str:
        script_dir = os.path.dirname(os.path.abspath(__file__))
        return os.path.join(os.path.dirname(os.path.dirname(script_dir)), 'config')

    @property
    def config_dir(self) -> str:
        return self._config_dir

    def _load_config(self):
        """Load configuration from files"""
        default_config_path = os.path.join(self._config_dir, 'default_config.json')
        if os.path.exists(default_config_path):
            try:
                with open(default_config_path, 'r', encoding='utf-8') as f:
                    self._config = json.load(f)
                logger.debug(f"Loaded default config from {default_config_path}")
            except Exception as e:
                logger.warning(f"Failed to load default config: {e}")
                self._config = self._get_default_config()
        else:
            logger.debug("No default config file found, using built-in defaults")
            self._config = self._get_default_config()

        # Local overrides
        local_config_path = os.path.join(self._config_dir, 'local_config.json')
        if os.path.exists(local_config_path):
            try:
                with open(local_config_path, 'r', encoding='utf-8') as f:
                    local_config = json.load(f)
                deep_merge(self._config, local_config)
                logger.debug(f"Merged local config from {local_config_path}")
            except Exception as e:
                logger.warning(f"Failed to load local config: {e}")

        threads = os.environ.get(THREADS_ENV)
        if threads is not None:
            try:
                self._config.setdefault('runtime', {})['threads'] = int(threads)
            except ValueError:
                logger.warning(f"Ignoring non-integer {THREADS_ENV}={threads!r}")

    def _get_default_config(self) -> Dict[str, Any]:
        """Get built-in default configuration"""
        return {
            "app": {"name": "kano-sr", "version": "1.0.0"},
            "compute": {"dtype": "float64"},
            "kan": {"grid_range": [-1.0, 1.0], "grid_size": 5, "degree": 3, "coef_std": 0.1},
            "degradation": {
                "kernel_sizes": {"2": 11, "3": 15, "4": 21, "8": 21},
                "sigma_range": [0.6, 5.0],
                "theta_range": [-3.141592653589793, 3.141592653589793],
                "noise_max": 25.0 / 255.0,
                "presets_dir": "config/degradation",
                "default_preset": "natural_images"
            },
            "model": {
                "stages": 4,
                "step_size_init": 0.1,
                "backbone": "kan",
                "knet_depth": 2,
                "onet_2d_sets": 4,
                "onet_channel_plan": "C-2C-C",
                "snet_enabled": True
            },
            "training": {
                "channels": 3, "image_size": 64, "corpus_size": 64, "patch_size": 32,
                "batch_size": 4, "steps": 2000, "learning_rate": 1e-3,
                "beta1": 0.9, "beta2": 0.999, "eps": 1e-8,
                "lr_milestones": [0.6, 0.8], "lr_decay": 0.5,
                "scale": 2, "seed": 0, "ema_decay": 0.98, "holdout_size": 8
            },
            "metrics": {"peak": 1.0, "ssim_window": 11, "ssim_sigma": 1.5,
                        "ssim_k1": 0.01, "ssim_k2": 0.03},
            "io": {"kernel_csv_precision": 12},
            "runtime": {"threads": 0},
            "progress": {"enabled": True},
            "logging": {"level": "WARNING", "file": None}
        }

    def merged_with(self, override: Optional[Dict[str, Any]]) -> Dict[str, Any]:
        """Return a deep copy of the configuration with override merged in"""
        merged = copy.deepcopy(self._config)
        if override:
            deep_merge(merged, copy.deepcopy(override))
        return merged

    def apply(self, override: Optional[Dict[str, Any]]) -> Dict[str, Any]:
        """Deep-merge an experiment config over the current one after validating the result"""
        merged = validate_config(self.merged_with(override))
        self._config = merged
        return copy.deepcopy(merged)

    @contextmanager
    def overridden(self, override: Optional[Dict[str, Any]]) -> Iterator['ConfigManager']:
        """Temporarily apply an experiment config; the previous state is restored on exit"""
        saved = self._config
        try:
            self.apply(override)
            yield self
        finally:
            self._config = saved

    def get(self, key: str, default: Any = None) -> Any:
        """Get a configuration value by key (supports dot notation)"""
        keys = key.split('.')
        value = self._config
        for k in keys:
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def get_section(self, section: str) -> Dict[str, Any]:
        """Get an entire configuration section"""
        return self._config.get(section, {})

    def resolve_path(self, path: str) -> str:
        """Resolve a repository-relative path from the config (e.g. presets_dir)"""
        if os.path.isabs(path):
            return path
        return os.path.join(os.path.dirname(self._config_dir), path)

    def thread_count(self) -> int:
        """Worker thread cap (0 = auto)"""
        threads = int(self.get('runtime.threads', 0) or 0)
        return threads if threads > 0 else (os.cpu_count() or 1)

    @property
    def all(self) -> Dict[str, Any]:
        """Get the entire configuration"""
        return copy.deepcopy(self._config)


# Global config instance
config = ConfigManager()
