"""
Shared pytest fixtures for the entlab test suite.

This module provides common fixtures used across unit, integration,
fuzzing and evaluation tests: seeded vectors, small encoding
configurations and isolated settings.
"""

import logging
from pathlib import Path
from typing import Dict

import numpy as np
import pytest

from entlab.config import Settings
from entlab.core.entangler import EntanglementKey, encode
from entlab.core.rngcore import derive_stream


@pytest.fixture(scope="session")
def small_dims() -> Dict[str, int]:
    """
    Provide small encoding dimensions that keep unit tests fast.

    Returns:
        Dict with ell, n, k and t
    """
    return {"ell": 32, "n": 200, "k": 50, "t": 6}


@pytest.fixture
def vector_factory():
    """Provide a factory for seeded standard-normal vectors."""

    def _make(seed: int, dim: int) -> np.ndarray:
        return derive_stream(seed, 0).normals(dim)

    return _make


@pytest.fixture
def feature_vector(vector_factory, small_dims) -> np.ndarray:
    """Provide one seeded feature vector of dimension ell."""
    return vector_factory(11, small_dims["ell"])


@pytest.fixture
def partner_vector(vector_factory, small_dims) -> np.ndarray:
    """Provide a second, independent feature vector of dimension ell."""
    return vector_factory(12, small_dims["ell"])


@pytest.fixture
def small_key(feature_vector, small_dims) -> EntanglementKey:
    """Provide a key produced by encoding ``feature_vector``."""
    _, key = encode(
        feature_vector, small_dims["n"], small_dims["k"], small_dims["t"], 7
    )
    return key


@pytest.fixture
def test_settings() -> Settings:
    """
    Provide test-specific settings, independent of the environment.

    Returns:
        Settings instance with test configuration
    """
    return Settings(
        threads=2,
        log_level="DEBUG",
        log_format="json",
    )


@pytest.fixture
def workdir(tmp_path: Path) -> Path:
    """Provide an empty directory for files written by a test."""
    return tmp_path


@pytest.fixture
def restore_logging():
    """Restore root logger handlers replaced by ``setup_logging``."""
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)
