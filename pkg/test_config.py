"""
Tests for environment settings and run-configuration assembly.
"""

import click
import pytest
from pydantic import ValidationError

from app.cli.options import build_run_config, load_config_file, parse_branch
from app.core.config import Settings, settings
from app.schemas.report import RunConfig, SweepGrid
from app.models.gauge import ModelParams


def test_settings_defaults():
    print("🔧 Testing default settings...")
    assert settings.cutoff_policy in ("auto", "fixed")
    assert settings.boundary_margin < settings.default_cutoff
    assert settings.ode_atol < settings.ode_rtol
    print(f"✅ {settings.app_name} {settings.app_version}")


def test_settings_read_prefixed_environment(monkeypatch):
    monkeypatch.setenv("PTGAUGE_DEFAULT_CUTOFF", "96")
    monkeypatch.setenv("PTGAUGE_CUTOFF_POLICY", "fixed")
    fresh = Settings()
    assert fresh.default_cutoff == 96
    assert fresh.cutoff_policy == "fixed"
    monkeypatch.setenv("PTGAUGE_CUTOFF_POLICY", "sometimes")
    with pytest.raises(ValidationError):
        Settings()


def test_parse_branch():
    assert parse_branch("+") == 1
    assert parse_branch("-1") == -1
    assert parse_branch(" - ") == -1
    with pytest.raises(click.BadParameter):
        parse_branch("0")


def test_run_config_defaults_follow_settings():
    config = RunConfig(params=ModelParams(Omega=2.0, G=0.5, omega=1.0))
    assert config.cutoff == settings.default_cutoff
    assert config.tol_assert == settings.assertion_tolerance
    assert config.space.boundary_margin == settings.boundary_margin
    echoed = config.echo()
    assert echoed["branch"] == -1
    assert "inject_fault" not in echoed


def test_build_run_config_from_strings():
    merged = {"omega_cap": "2", "g": "0.5", "drive": "1", "branch": "+", "nmax": "4", "margin": "4"}
    config = build_run_config(merged, periods=None, samples=5)
    assert config.params.Omega == 2.0
    assert config.params.branch == 1
    assert config.n_max == 4
    assert config.boundary_margin == 4
    assert config.samples == 5
    assert config.periods == 1.0
    with pytest.raises(ValidationError):
        build_run_config({"omega_cap": "2", "g": "0.5", "drive": "-1"})


def test_load_config_file(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("# acceptance point\nomega_cap = 2\ng = 0.5\ndrive = 1\ncutoff_policy = fixed\n", encoding="utf-8")
    values = load_config_file(str(path))
    assert values == {"omega_cap": "2", "g": "0.5", "drive": "1", "cutoff_policy": "fixed"}
    assert load_config_file(None) == {}
    path.write_text("omega = 2\n", encoding="utf-8")
    with pytest.raises(click.UsageError):
        load_config_file(str(path))


def test_sweep_grid():
    grid = SweepGrid(parameter="g", start=0.0, stop=1.0, steps=5)
    assert grid.field == "G"
    assert grid.values() == [0.0, 0.25, 0.5, 0.75, 1.0]
    with pytest.raises(ValidationError):
        SweepGrid(parameter="g", start=0.0, stop=1.0, steps=1)
    with pytest.raises(ValidationError):
        SweepGrid(parameter="g", start=0.0, stop=1.0, steps=3, quantity="temperature")


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    test_settings_defaults()
    test_parse_branch()
    test_run_config_defaults_follow_settings()
    test_build_run_config_from_strings()
    with tempfile.TemporaryDirectory() as scratch:
        test_load_config_file(Path(scratch))
    test_sweep_grid()
    print("\n🎉 Configuration tests completed!")
