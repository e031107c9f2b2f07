"""Engine configuration loader"""

import json
from pathlib import Path
from typing import Dict, Optional
import logging

from pydantic import BaseModel, ValidationError, field_validator

from ..linalg.sparse_matrix import memory_budget_mb
from ..utils.constants import CPU_COUNT
from ..utils.types import PivotPolicy

logger = logging.getLogger(__name__)


class EngineConfig(BaseModel):
    """Bounds and knobs shared by every engine command"""
    max_homdeg: int = 4
    max_weight: int = 6
    slack_cap: int = 4
    pivot_policy: PivotPolicy = PivotPolicy.SMALLEST_ENTRY
    dense_fill_threshold: float = 0.30
    threads: int = 0  # 0 = all cores
    memory_budget_mb: Optional[float] = None
    gl_samples: int = 10
    gl_entry_bound: int = 3
    random_seed: int = 0
    gl_control: Optional[str] = None  # None = entry (1, 2) of the first generator

    @field_validator('max_homdeg', 'max_weight', 'slack_cap', 'threads', 'gl_samples', 'random_seed')
    @classmethod
    def _non_negative(cls, value: int) -> int:
        if value < 0:
            raise ValueError("must be >= 0")
        return value

    @field_validator('gl_entry_bound')
    @classmethod
    def _positive_bound(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be >= 1")
        return value

    @field_validator('dense_fill_threshold')
    @classmethod
    def _fraction(cls, value: float) -> float:
        if not 0.0 <= value <= 1.0:
            raise ValueError("must be between 0.0 and 1.0")
        return value

    @property
    def worker_threads(self) -> int:
        return self.threads or CPU_COUNT

    @property
    def effective_memory_budget_mb(self) -> Optional[float]:
        return memory_budget_mb(self.memory_budget_mb)


def _validated(merged: Dict) -> EngineConfig:
    """Build the model key by key so one bad value falls back alone"""
    defaults = EngineConfig()
    accepted = {}
    for key, value in merged.items():
        if key not in EngineConfig.model_fields:
            logger.warning(f"Unknown engine config key '{key}', ignoring")
            continue
        try:
            EngineConfig(**{key: value})
            accepted[key] = value
        except ValidationError as e:
            logger.warning(f"Invalid value for {key}: {value!r} ({e.errors()[0]['msg']}), using default {getattr(defaults, key)!r}")
    return EngineConfig(**accepted)


def load_engine_config(config: Optional[Dict] = None) -> EngineConfig:
    """
    Load engine configuration from dict or JSON file

    Args:
        config: Dictionary of overrides (optional); merged over the JSON file

    Returns:
        Validated EngineConfig
    """
    merged: Dict = {}

    # Go up from src/core/config/ -> src/core/ -> src/ -> root/ -> config/
    config_file = Path(__file__).parent.parent.parent.parent / "config" / "engine_config.json"
    if config_file.exists():
        try:
            with open(config_file, 'r', encoding='utf-8') as f:
                file_config = json.load(f)
                merged.update({k: v for k, v in file_config.items() if not k.startswith('_')})
        except Exception as e:
            logger.warning(f"Could not load engine config file: {e}, using defaults")

    if config:
        merged.update(config)

    return _validated(merged)
