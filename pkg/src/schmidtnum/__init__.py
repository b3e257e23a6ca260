"""Schmidt-number certification from trace norms of correlation matrices."""

__version__ = "0.1.0"
