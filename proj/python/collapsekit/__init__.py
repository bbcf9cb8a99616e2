"""Collapses of complexes and inverse systems of retractions."""

from ._core import (
    InvalidSpec,
    MissingHomotopy,
    ParseError,
    System,
    __version__,
    build,
    collapse,
    gallery_names,
    insulation,
    sample_limit,
    thread_of,
    tree_ends,
)

__all__ = [
    "InvalidSpec",
    "MissingHomotopy",
    "ParseError",
    "System",
    "__version__",
    "build",
    "collapse",
    "gallery_names",
    "insulation",
    "sample_limit",
    "thread_of",
    "tree_ends",
]
