"""Exact and simulated probability: counting, walks, distributions,
conditioning, martingales, Markov chains and Monte Carlo limit theorems."""
from . import chains, conditioning, distributions, exact_core, martingales, monte_carlo, walks
from .errors import StochLabError

__all__ = [
    "StochLabError",
    "chains",
    "conditioning",
    "distributions",
    "exact_core",
    "martingales",
    "monte_carlo",
    "walks",
]
__version__ = "0.1.0"
