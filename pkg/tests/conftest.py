"""Shared fixtures: repository paths and the bundled scenarios."""

from __future__ import annotations

from pathlib import Path

import pytest

from tubeplan.scenario import load_scenario

REPO = Path(__file__).resolve().parents[1]
SCENARIOS = REPO / "scenarios"


@pytest.fixture(scope="session")
def repo_root():
    return REPO


@pytest.fixture(scope="session")
def quad_scenario_path():
    return SCENARIOS / "quadrotor_ascent_cruise_descent.json"


@pytest.fixture(scope="session")
def fw_scenario_path():
    return SCENARIOS / "fixedwing_lateral_sinusoid.json"


@pytest.fixture(scope="session")
def plan_scenario_path():
    return SCENARIOS / "quadrotor_three_obstacles.json"


@pytest.fixture(scope="session")
def quad_scenario(quad_scenario_path):
    return load_scenario(quad_scenario_path)


@pytest.fixture(scope="session")
def fw_scenario(fw_scenario_path):
    return load_scenario(fw_scenario_path)


@pytest.fixture(scope="session")
def plan_scenario(plan_scenario_path):
    return load_scenario(plan_scenario_path)
