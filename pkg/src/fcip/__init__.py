"""Conceptual cost estimation toolkit for field-canal improvement works.

The package covers the full workflow: expert-survey screening of candidate
cost parameters, data-driven driver selection, four alternative estimators
(transformed regression, a small neural network, case-based retrieval, and
a genetic-fuzzy rule system), inflation adjustment, scenario analysis, and
a command-line / HTTP front end.
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
