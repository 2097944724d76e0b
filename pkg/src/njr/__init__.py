"""njr: an interpreter for a small host language with embedded natural-language blocks."""

__version__ = "0.1.0"
