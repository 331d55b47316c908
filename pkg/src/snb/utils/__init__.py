"""Utility functions and helpers"""

from .runtime import ensure_output_dir, ordered_map, resolve_jobs

__all__ = ['ensure_output_dir', 'ordered_map', 'resolve_jobs']
