"""Configuration module for the KANO tools."""

from core.config.config_manager import config, ConfigManager, deep_merge
from core.config.config_schema import CONFIG_SCHEMA, validate_config

__all__ = ['config', 'ConfigManager', 'deep_merge', 'CONFIG_SCHEMA', 'validate_config']
