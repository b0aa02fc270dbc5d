"""Tests for the nuclear_levy library."""
