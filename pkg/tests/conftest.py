"""Pytest configuration and fixtures."""

import pytest


@pytest.fixture(autouse=True)
def _isolate_cache(tmp_path, monkeypatch):
    """Keep the default trace cache out of the working tree."""
    monkeypatch.setattr("njr.config.settings.cache_path", str(tmp_path / ".njrcache"))
