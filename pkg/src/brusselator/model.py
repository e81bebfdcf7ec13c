"""Vector fields of the deterministic and parametric-noise Brusselator.

The stochastic model perturbs the bifurcation parameter ``b`` with
Stratonovich white noise, ``b -> b + sigma o dW``::

    dx = (a - (1+b) x + x^2 y) dt - sigma x o dW
    dy = (b x - x^2 y) dt         + sigma x o dW

Numerical schemes need the Ito form, which is obtained here by adding the
Wong-Zakai drift correction to the Stratonovich drift rather than by
writing the Ito drift out a second time.

All functions accept either scalars or numpy arrays for the state
coordinates, so the same code evaluates one point or a whole grid.
"""

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

CRITICAL_ATOL = 1e-12


class State(NamedTuple):
    """A point ``(x, y)`` of the positive quadrant."""

    x: float
    y: float


@dataclass(frozen=True)
class Params:
    """Parameters ``(a, b, sigma)`` of the stochastic Brusselator."""

    a: float
    b: float
    sigma: float = 0.0

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"a must be positive, got {self.a}")
        if not self.b > 0:
            raise ValueError(f"b must be positive, got {self.b}")
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")

    @property
    def b_crit(self):
        return hopf_threshold(self.a)

    @property
    def epsilon(self):
        """Time-scale ratio ``a / b`` of the slow-fast formulation."""
        return self.a / self.b


class Stability(Enum):
    STABLE = "stable"
    CRITICAL = "critical"
    UNSTABLE = "unstable"


def drift_deterministic(p, s):
    """Reaction rate equation ``(a - (1+b)x + x^2 y, b x - x^2 y)``."""
    x, y = s
    x2y = x * x * y
    return np.array([p.a - (1.0 + p.b) * x + x2y, p.b * x - x2y])


def diffusion(p, s):
    """Stratonovich (and Ito) noise coefficient ``(-sigma x, sigma x)``."""
    x, _ = s
    g = p.sigma * x
    return np.array([-g, g])


def diffusion_jacobian(p, s):
    """Jacobian of :func:`diffusion` with respect to ``(x, y)``."""
    x, _ = s
    zero = np.zeros_like(x, dtype=float)
    sig = zero + p.sigma
    return np.array([[-sig, zero], [sig, zero]])


def stratonovich_correction(dg, g):
    """Wong-Zakai drift ``1/2 sum_j (dg_l/dz_j) g_j`` for one noise channel.

    ``dg`` is the Jacobian of the noise vector field with shape ``(n, n, ...)``
    and ``g`` the field itself with shape ``(n, ...)``. Adding the result to a
    Stratonovich drift gives the equivalent Ito drift.
    """
    total = dg[:, 0] * g[0]
    for j in range(1, len(g)):
        total = total + dg[:, j] * g[j]
    return 0.5 * total


def wong_zakai_correction(p, s):
    """Ito-minus-Stratonovich drift of the Brusselator, ``(s^2 x/2, -s^2 x/2)``."""
    return stratonovich_correction(diffusion_jacobian(p, s), diffusion(p, s))


def ito_drift(p, s):
    return drift_deterministic(p, s) + wong_zakai_correction(p, s)


def jacobian(p, s):
    """Jacobian of the deterministic drift as a dense 2x2 array."""
    x, y = s
    xy2 = 2.0 * x * y
    x2 = x * x
    return np.array([[-(1.0 + p.b) + xy2, x2], [p.b - xy2, -x2]])


def equilibrium(p):
    return State(p.a, p.b / p.a)


def hopf_threshold(a):
    """Critical ``b = 1 + a^2`` where the equilibrium loses stability."""
    return 1.0 + a * a


def classify_equilibrium(p, atol=CRITICAL_ATOL):
    gap = p.b - hopf_threshold(p.a)
    if abs(gap) <= atol:
        return Stability.CRITICAL
    return Stability.STABLE if gap < 0 else Stability.UNSTABLE
