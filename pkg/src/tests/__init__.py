"""Tests for renyi_sharp package."""
