"""Query-model toolkit for small path and cycle detection problems."""

__version__ = "0.1.0"
