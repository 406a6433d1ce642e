"""
Utility functions for foamkh.
Path helpers shared by configuration, logging and the bundled corpus.
"""
import os
import sys


def get_base_directory() -> str:
    """
    Get the project root (next to the executable when frozen).

    Returns:
        Base directory path
    """
    if getattr(sys, 'frozen', False):
        return os.path.dirname(sys.executable)
    return os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def resource_path(relative_path: str) -> str:
    """
    Resolve a path relative to the project root; absolute paths pass through.

    Args:
        relative_path: Relative path to resource

    Returns:
        Absolute path to resource
    """
    if os.path.isabs(relative_path):
        return relative_path
    return os.path.join(get_base_directory(), relative_path)
