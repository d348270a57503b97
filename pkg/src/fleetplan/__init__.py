"""Hierarchical temporal planning and mission control for mixed robot fleets."""

__version__ = "0.1.0"
