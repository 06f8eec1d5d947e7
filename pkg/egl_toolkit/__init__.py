"""
EGL Toolkit Package

Extended Generalized Lindley distribution: evaluation, simulation,
maximum-likelihood fitting and model comparison.
"""

__version__ = "1.0.0"
