"""Closed-loop simulator for planner-driven drone block assembly."""

__version__ = "0.1.0"
