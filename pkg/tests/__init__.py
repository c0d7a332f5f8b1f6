"""Tests for petriproof."""
