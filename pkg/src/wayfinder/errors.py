"""Errors shared across subsystems."""


class ConfigError(Exception):
    """Invalid configuration, stub script, or recording; raised at startup, never mid-stream."""
