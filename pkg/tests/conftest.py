"""
Pytest configuration and fixtures for phaselab tests
"""
from pathlib import Path
from typing import Callable

import pytest
import yaml

from phaselab.config import RuntimeSettings
from phaselab.models.physics import NATURAL_UNITS, Grid1D, PhysicalConstants

CONFIG_DIR = Path(__file__).parent.parent / "config" / "scenarios"


@pytest.fixture
def grid() -> Grid1D:
    """Default grid: [-20, 20) with 1024 points."""
    return Grid1D(n_points=1024, x_min=-20.0, x_max=20.0)


@pytest.fixture
def wide_grid() -> Grid1D:
    """Grid wide enough for two packets to spread and overlap."""
    return Grid1D(n_points=2048, x_min=-48.0, x_max=48.0)


@pytest.fixture
def constants() -> PhysicalConstants:
    return NATURAL_UNITS


@pytest.fixture
def config_dir() -> Path:
    """Directory holding the shipped example scenario configs."""
    return CONFIG_DIR


@pytest.fixture
def example_config(config_dir) -> Callable[[str], dict]:
    """Load a shipped example config as a plain mapping."""
    def load(kind: str) -> dict:
        with open(config_dir / f"{kind}.yaml", "r") as f:
            return yaml.safe_load(f)
    return load


@pytest.fixture
def write_config(tmp_path) -> Callable[[dict, str], Path]:
    """Write a mapping as YAML under tmp_path and return the path."""
    def write(data: dict, filename: str = "scenario.yaml") -> Path:
        path = tmp_path / filename
        with open(path, "w") as f:
            yaml.safe_dump(data, f, sort_keys=False)
        return path
    return write


@pytest.fixture
def run_settings(tmp_path) -> RuntimeSettings:
    """Runtime settings writing run directories under tmp_path/runs."""
    return RuntimeSettings(out_dir=tmp_path / "runs", log_level="INFO", jobs=1)
