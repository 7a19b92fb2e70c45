"""High-precision alternating harmonic-number sums and their closed forms."""

from __future__ import annotations

from .numerics import ConvergenceFailure, PrecisionConfig, ValueWithError

__version__ = "0.1.0"

__all__ = ["ConvergenceFailure", "PrecisionConfig", "ValueWithError", "__version__"]
