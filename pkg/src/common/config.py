from __future__ import annotations
import logging
import os
from typing import Any, Dict

import yaml

from common.errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG = "config/default.yaml"


def load_yaml(path: str) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        try:
            cfg = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError(f"{path}: invalid YAML: {e}") from e
    if cfg is None:
        return {}
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return cfg


def load_config(path: str = DEFAULT_CONFIG) -> Dict[str, Any]:
    """Load a YAML config; a missing file is only tolerated for the default path."""
    if not os.path.exists(path) and path == DEFAULT_CONFIG:
        logger.info("[config] %s not found, using built-in defaults", path)
        return {}
    return load_yaml(path)
