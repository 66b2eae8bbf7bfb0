"""Shared fixtures: reference configuration and frozen oracle baselines."""
from __future__ import annotations

import json
from pathlib import Path

import pytest

from pinchloc import default_paper_config

RESULTS = Path(__file__).resolve().parents[1] / "results" / "oracle_baselines.json"


@pytest.fixture(scope="session")
def paper_config():
    return default_paper_config(seed=20240801)


@pytest.fixture(scope="session")
def baselines():
    """Pre-registered oracle values produced by scripts/calibrate.py."""
    with open(RESULTS) as fh:
        return json.load(fh)
