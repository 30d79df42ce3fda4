"""Numerical lab for pure-jump Levy processes and their Poisson-count discretization."""

from .intervals import Interval
from .numerics import DivergenceError, QuadratureResult, integrate

__all__ = ["Interval", "DivergenceError", "QuadratureResult", "integrate"]
