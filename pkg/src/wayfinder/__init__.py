"""Wayfinder: an edge gateway turning live camera frames into spoken navigation cues."""

__version__ = "0.1.0"
