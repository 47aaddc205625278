"""Tests for cstar-learn."""
