import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))

from src.core.stages.dsl_parser import PresentationFile, load_presentation  # noqa: E402


def _example(name: str) -> Path:
    return ROOT / "data" / "examples" / name


@pytest.fixture
def example_path():
    return _example


@pytest.fixture
def golden_path():
    return lambda name: ROOT / "data" / "golden" / name


@pytest.fixture
def ex2d() -> PresentationFile:
    return load_presentation(_example("ex2d.drep"))


@pytest.fixture
def ex3d() -> PresentationFile:
    return load_presentation(_example("ex3d.drep"))


@pytest.fixture
def kx() -> PresentationFile:
    return load_presentation(_example("kx.drep"))
