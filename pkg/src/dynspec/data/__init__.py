"""Bundled example maps for dynspec."""
