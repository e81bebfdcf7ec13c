"""Simulation and analysis of the stochastic Brusselator.

Modules: ``model`` (vector fields), ``noise`` (reproducible Wiener paths),
``integrator`` (Euler-Maruyama, two-point motion), ``ftle`` (finite-time
Lyapunov exponents), ``slowfast`` (slow-fast coordinates and regimes) and
``ssa`` (Gillespie simulation of the reaction network).
"""

__version__ = "0.1.0"

from .integrator import BlowUpError, integrate, two_point
from .model import Params, Stability, State, classify_equilibrium, equilibrium, hopf_threshold
from .noise import NoisePath, generate

__all__ = [
    "BlowUpError",
    "NoisePath",
    "Params",
    "Stability",
    "State",
    "classify_equilibrium",
    "equilibrium",
    "generate",
    "hopf_threshold",
    "integrate",
    "two_point",
]
