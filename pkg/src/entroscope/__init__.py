"""Unpredictability analysis for multi-channel sensor data.

Per-channel and joint Renyi entropy profiles (H0, H1, H2, Hmin), pairwise
dependence, Chow-Liu joint approximation with a direct-enumeration validator,
exhaustive subset sweeps, bin-sensitivity curves, and guessing-cost tables.
"""

__version__ = "0.1.0"
