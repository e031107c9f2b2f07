import json
import logging
from pathlib import Path

import pytest

from src.core.config.engine_config import load_engine_config
from src.core.config.verify_targets import load_verify_targets
from src.core.engine import DRepEngine
from src.core.utils.errors import DSLSyntaxError, PresentationError, ResourceError
from src.core.utils.types import PivotPolicy

ROOT = Path(__file__).resolve().parent.parent
TARGETS = sorted(json.loads((ROOT / "config" / "verify_targets.json").read_text(encoding="utf-8")))


@pytest.fixture
def engine() -> DRepEngine:
    return DRepEngine({'threads': 1})


def test_config_defaults_come_from_the_json_file() -> None:
    config = load_engine_config()
    assert config.max_homdeg == 4
    assert config.max_weight == 6
    assert config.pivot_policy is PivotPolicy.SMALLEST_ENTRY


def test_config_overrides_and_fallbacks(caplog: pytest.LogCaptureFixture) -> None:
    with caplog.at_level(logging.WARNING):
        config = load_engine_config({
            'max_weight': 8,
            'pivot_policy': 'first_nonzero',
            'dense_fill_threshold': 2.0,
            'slack_cap': -1,
            'colour': 'blue',
        })
    assert config.max_weight == 8
    assert config.pivot_policy is PivotPolicy.FIRST_NONZERO
    assert config.dense_fill_threshold == 0.30
    assert config.slack_cap == 4
    assert "Unknown engine config key 'colour'" in caplog.text
    assert "Invalid value for slack_cap" in caplog.text


def test_threads_zero_means_every_core() -> None:
    assert load_engine_config({'threads': 0}).worker_threads >= 1
    assert load_engine_config({'threads': 3}).worker_threads == 3


def test_verify_targets_load_and_skip_invalid_entries(caplog: pytest.LogCaptureFixture) -> None:
    assert set(load_verify_targets()) == set(TARGETS)
    with caplog.at_level(logging.WARNING):
        targets = load_verify_targets({
            'good': {'kind': 'norm', 'algebra': 'k', 'golden': 'x.json'},
            'bad': {'kind': 'unknown', 'golden': 'x.json'},
        })
    assert list(targets) == ['good']
    assert "Skipping invalid verify target 'bad'" in caplog.text


@pytest.mark.parametrize("name", TARGETS)
def test_every_verify_target_passes(engine: DRepEngine, name: str) -> None:
    result = engine.verify(name)
    assert result.passed, result.detail


def test_unknown_verify_target(engine: DRepEngine) -> None:
    with pytest.raises(KeyError):
        engine.verify("no-such-target")


def test_check_reports_d_squared(engine: DRepEngine, example_path) -> None:
    assert engine.check(example_path("ex2d.drep")).passed
    report = engine.check(example_path("bad_dsquared.drep"))
    assert not report.passed
    assert report.to_dict()["passed"] is False
    assert "FAIL" in str(report)


def test_check_lists_weight_decreasing_generators(engine: DRepEngine, example_path) -> None:
    report = engine.check(example_path("ex3d.drep"))
    assert report.passed
    assert set(report.weight_decreasing) == {"xi", "theta", "lambda"}


def test_presentations_are_cached(engine: DRepEngine, example_path) -> None:
    path = example_path("ex2d.drep")
    first = engine.build(path, 1)
    second = engine.build(path, 1)
    assert first == second
    stats = engine.get_stats()
    assert stats['cache_hits'] >= 2
    assert stats['builds'] == 2
    engine.clear_cache()
    engine.build(path, 1)
    assert engine.get_stats()['builds'] == 4


def test_homology_uses_config_bounds(example_path) -> None:
    engine = DRepEngine({'threads': 1, 'max_homdeg': 2, 'max_weight': 3})
    table = engine.homology(example_path("kxy.drep"), 1)
    assert (table.n_max, table.w_max) == (2, 3)
    assert table.by_degree(0) == [1, 2, 3, 4]


def test_cyclic_on_builtin_and_file_algebras(engine: DRepEngine, example_path) -> None:
    assert engine.cyclic("k", 4).dims == [1, 0, 1, 0, 1]
    graded = engine.cyclic(example_path("kx.drep"), 1, w_max=3)
    assert graded.by_weight[(0, 2)] == 1


def test_errors_are_counted(engine: DRepEngine, tmp_path: Path) -> None:
    broken = tmp_path / "broken.drep"
    broken.write_text("[resolution]\ngen x deg 0\nd x = y\n", encoding="utf-8")
    with pytest.raises(DSLSyntaxError):
        engine.check(broken)
    assert engine.get_stats()['errors'] == 1
    algebra_only = tmp_path / "algebra_only.drep"
    algebra_only.write_text("[algebra]\ngen x deg 0\n", encoding="utf-8")
    with pytest.raises(PresentationError):
        engine.build(algebra_only, 1)


def test_cyclic_commands_use_the_configured_memory_budget(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv("DREP_MAX_MB", raising=False)
    engine = DRepEngine({'threads': 1, 'memory_budget_mb': 0.000001})
    with pytest.raises(ResourceError):
        engine.cyclic("dual-numbers", 4)
    with pytest.raises(ResourceError):
        engine.norm("dual-numbers", 3)
    assert engine.get_stats()['errors'] == 2


def test_exactness_target_reaches_weight_six(engine: DRepEngine) -> None:
    result = engine.verify("qper1-exactness")
    assert result.passed, result.detail
    assert result.actual['w_max'] == 6


def test_trace_uses_the_configured_control(example_path) -> None:
    assert load_engine_config().gl_control is None
    engine = DRepEngine({'threads': 1, 'gl_control': 'y_2_1'})
    report = engine.trace(example_path("kxy.drep"), 2, 1, 2, gl_samples=3)
    assert report.gl.control_moved is True
