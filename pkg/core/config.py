"""
Configuration management for foamkh.
"""
import os
from typing import Any, Dict, Optional

import yaml

from core.logger import logger
from core.utils import get_base_directory

_config: Optional[Dict[str, Any]] = None

DEFAULT_CONFIG: Dict[str, Any] = {
    "logging": {
        "level": "INFO",
        "file": "logs/foamkh.log",
        "max_bytes": 10485760,
        "backup_count": 5,
        "console": True,
        "file_enabled": True
    },
    "compute": {
        "threads": 1,
        "level": "full",
        "sign_policy": "auto",
        "memoize": True
    },
    "output": {
        "format": "text",
        "json_indent": 2
    },
    "corpus": {
        "path": "data/corpus.yaml"
    }
}


def load_config(config_path: Optional[str] = None) -> Dict[str, Any]:
    """
    Load configuration from YAML file.

    Args:
        config_path: Path to config file (optional)

    Returns:
        Configuration dictionary
    """
    global _config

    if _config is not None:
        return _config

    if config_path is None:
        config_path = os.path.join(get_base_directory(), "config.yaml")

    if os.path.exists(config_path):
        try:
            with open(config_path, "r", encoding="utf-8") as f:
                file_config = yaml.safe_load(f) or {}
            _config = merge_config(DEFAULT_CONFIG, file_config)
            logger.info(f"Configuration loaded from {config_path}")
        except (OSError, yaml.YAMLError) as e:
            logger.warning(f"Failed to load config from {config_path}: {e}, using defaults")
            _config = merge_config(DEFAULT_CONFIG, {})
    else:
        logger.info("No config file found, using default configuration")
        _config = merge_config(DEFAULT_CONFIG, {})

    return _config


def merge_config(default: Dict, override: Dict) -> Dict:
    """
    Merge two configuration dictionaries recursively.

    Args:
        default: Default configuration
        override: Override configuration

    Returns:
        Merged configuration
    """
    result = {key: (dict(value) if isinstance(value, dict) else value) for key, value in default.items()}
    for key, value in override.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = merge_config(result[key], value)
        else:
            result[key] = value
    return result


def get_config(key: Optional[str] = None, default: Any = None) -> Any:
    """
    Get configuration value.

    Args:
        key: Configuration key (e.g., "compute.threads" or "compute")
        default: Default value if key not found

    Returns:
        Configuration value
    """
    config = load_config()

    if key is None:
        return config

    value = config
    for k in key.split("."):
        if isinstance(value, dict) and k in value:
            value = value[k]
        else:
            return default

    return value


def reload_config(config_path: Optional[str] = None) -> Dict[str, Any]:
    """Reload configuration from file."""
    global _config
    _config = None
    return load_config(config_path)
