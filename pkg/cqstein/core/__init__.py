"""Core module - configuration, errors and linear-algebra helpers."""
from cqstein.core.config import Settings, settings
from cqstein.core.errors import CqSteinError

__all__ = ["Settings", "settings", "CqSteinError"]
