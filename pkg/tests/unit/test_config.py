"""Tests for environment-driven settings."""

import pytest
from pydantic import ValidationError

from entlab.config import Settings, get_settings


class TestSettings:
    """Test cases for Settings."""

    def test_defaults(self, monkeypatch):
        """Test the built-in defaults."""
        monkeypatch.delenv("ENTLAB_THREADS", raising=False)
        s = Settings(_env_file=None)
        assert (s.default_n, s.default_k, s.default_t) == (2000, 500, 15)
        assert s.default_seed == 0
        assert s.pilot_len == 16
        assert s.threads is None

    def test_environment_override(self, monkeypatch):
        """Test that ENTLAB_* variables override defaults."""
        monkeypatch.setenv("ENTLAB_DEFAULT_N", "4000")
        monkeypatch.setenv("ENTLAB_LOG_LEVEL", "DEBUG")
        s = Settings(_env_file=None)
        assert s.default_n == 4000
        assert s.log_level == "DEBUG"

    def test_threads_variable(self, monkeypatch):
        """Test that ENTLAB_THREADS caps the worker count."""
        monkeypatch.setenv("ENTLAB_THREADS", "3")
        s = Settings(_env_file=None)
        assert s.threads == 3
        assert s.resolved_threads() == 3

    def test_threads_must_be_positive(self, monkeypatch):
        """Test that a zero worker cap is rejected."""
        monkeypatch.setenv("ENTLAB_THREADS", "0")
        with pytest.raises(ValidationError):
            Settings(_env_file=None)

    def test_all_cores_by_default(self, monkeypatch, mocker):
        """Test that an unset cap uses every core."""
        monkeypatch.delenv("ENTLAB_THREADS", raising=False)
        mocker.patch("entlab.config.os.cpu_count", return_value=6)
        assert Settings(_env_file=None).resolved_threads() == 6

    def test_unknown_core_count(self, monkeypatch, mocker):
        """Test the single-worker fallback."""
        monkeypatch.delenv("ENTLAB_THREADS", raising=False)
        mocker.patch("entlab.config.os.cpu_count", return_value=None)
        assert Settings(_env_file=None).resolved_threads() == 1

    def test_log_format_validator(self):
        """Test that log_format accepts json/text in any case."""
        assert Settings(log_format="JSON", _env_file=None).log_format == "json"
        with pytest.raises(ValidationError):
            Settings(log_format="xml", _env_file=None)

    def test_pilot_minimum(self):
        """Test that pilot blocks shorter than 8 are rejected."""
        with pytest.raises(ValidationError):
            Settings(pilot_len=4, _env_file=None)

    def test_get_settings_cached(self):
        """Test that get_settings returns one shared instance."""
        assert get_settings() is get_settings()

    def test_explicit_values(self, test_settings):
        """Test that constructor values take effect."""
        assert test_settings.resolved_threads() == 2
        assert test_settings.log_format == "json"
        assert test_settings.log_level == "DEBUG"
