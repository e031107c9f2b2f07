"""Verification target configuration loader"""

import json
from pathlib import Path
from typing import Dict, Literal, Optional
import logging

from pydantic import BaseModel, ValidationError

logger = logging.getLogger(__name__)

ROOT = Path(__file__).parent.parent.parent.parent


class VerifyTarget(BaseModel):
    """One `verify NAME` entry: what to compute and which golden file holds the expected value"""
    kind: Literal["build", "homology", "norm", "traces", "periodicity", "tangent"]
    golden: str
    file: Optional[str] = None
    algebra: Optional[str] = None
    dim: int = 1
    nc: bool = False
    n_max: int = 3
    w_max: int = 4
    reweight: Optional[int] = None
    rep: Optional[str] = None
    gl_samples: int = 0
    description: str = ""

    def path(self, relative: Optional[str]) -> Optional[Path]:
        return ROOT / relative if relative else None


def load_verify_targets(targets: Optional[Dict] = None) -> Dict[str, VerifyTarget]:
    """
    Load verification targets from dict or JSON file

    Args:
        targets: Dictionary name -> target fields (optional)

    Returns:
        Dictionary mapping target names to validated VerifyTarget entries
    """
    raw: Dict = {}
    if targets:
        raw = targets
    else:
        # Go up from src/core/config/ -> src/core/ -> src/ -> root/ -> config/
        config_file = ROOT / "config" / "verify_targets.json"
        if config_file.exists():
            try:
                with open(config_file, 'r', encoding='utf-8') as f:
                    raw = {k: v for k, v in json.load(f).items() if not k.startswith('_')}
            except Exception as e:
                logger.warning(f"Could not load verify targets file: {e}, no targets available")

    loaded: Dict[str, VerifyTarget] = {}
    for name, fields in raw.items():
        try:
            loaded[name] = VerifyTarget(**fields)
        except ValidationError as e:
            logger.warning(f"Skipping invalid verify target '{name}': {e.errors()[0]['msg']}")
    return loaded
