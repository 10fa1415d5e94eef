"""Coverage-guided fuzzing of block-diagram control models with signal-aware mutations."""

__version__ = "0.1.0"
