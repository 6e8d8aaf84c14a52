"""Test fixtures for qephonon tests."""
