#!/usr/bin/env python3
"""
Pytest configuration and fixtures.
"""

import json
import random

import pytest
from pathlib import Path

from mhh.cube_complex import cube_algebra
from mhh.mhh_rings import EtaleRing, IntegralRing, ReducedRing


# Project paths
PROJECT_ROOT = Path(__file__).parent.parent
SCHEMA_FILE = PROJECT_ROOT / "schemas" / "run-config-schema.json"
CONFIGS_DIR = PROJECT_ROOT / "configs"


@pytest.fixture(scope="session")
def project_root():
    """Return project root path."""
    return PROJECT_ROOT


@pytest.fixture(scope="session")
def schema_file():
    """Return schema file path."""
    return SCHEMA_FILE


@pytest.fixture(scope="session")
def configs_dir():
    """Return run-configuration directory path."""
    return CONFIGS_DIR


@pytest.fixture(scope="session")
def schema():
    """Load and return the run-config JSON schema."""
    with open(SCHEMA_FILE, 'r') as f:
        return json.load(f)


@pytest.fixture(scope="session")
def rng():
    """Return a seeded random generator."""
    return random.Random(20240601)


@pytest.fixture(scope="session")
def cube2():
    """Return the cube algebra at p=2 with generators up to mu_2, lambda_3."""
    return cube_algebra(2, 2)


@pytest.fixture(scope="session")
def cube3():
    """Return the cube algebra at p=3 with generators up to mu_2, lambda_3."""
    return cube_algebra(3, 2)


@pytest.fixture(scope="session")
def integral2():
    """Return the integral coefficient ring at p=2."""
    return IntegralRing(2)


@pytest.fixture(scope="session")
def integral3():
    """Return the integral coefficient ring at p=3."""
    return IntegralRing(3)


@pytest.fixture(scope="session")
def etale2():
    """Return the etale coefficient ring at p=2."""
    return EtaleRing(2)


@pytest.fixture(scope="session")
def reduced2():
    """Return the reduced coefficient ring at p=2."""
    return ReducedRing(2)


@pytest.fixture
def isolated_env(monkeypatch, tmp_path):
    """Clear MHH_* variables and run from an empty directory."""
    for key in ("MHH_PRIME", "MHH_SEED", "MHH_LOG_LEVEL"):
        monkeypatch.delenv(key, raising=False)
    monkeypatch.chdir(tmp_path)
    return tmp_path
