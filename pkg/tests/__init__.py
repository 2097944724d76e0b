"""Tests for Agent Grid."""
