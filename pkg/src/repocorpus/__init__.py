"""Code-graph analysis and training-corpus synthesis for a single repository."""

__version__ = "0.1.0"
