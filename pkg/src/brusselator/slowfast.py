"""Slow-fast form of the stochastic Brusselator.

With ``u = y``, ``v = x + y`` and ``b = a / eps`` the model becomes::

    du = [(a (v-u) - eps u (v-u)^2) / eps] dt + sigma (v-u) o dW     (slow time t)
    dv = [a - (v-u)] dt

or, in fast time ``tau = t / eps`` with ``W~(tau) = eps^(-1/2) W(eps tau)``::

    du = [a (v-u) - eps u (v-u)^2] dtau + sqrt(eps) sigma (v-u) o dW~
    dv = eps [a - (v-u)] dtau

The critical manifold is the diagonal ``u = v``, where the noise vanishes,
and the u-nullcline is ``v = u + a / (eps u)``.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np

from .integrator import BLOWUP_LIMIT, X_FLOOR, BlowUpError, Trajectory, run
from .model import Params, State, stratonovich_correction
from .noise import coarsen, rescale


class SfState(NamedTuple):
    u: float
    v: float


@dataclass(frozen=True)
class SlowFastParams:
    """``(a, eps, sigma)`` with ``eps = a / b``; ``eps = 0`` is the singular limit."""

    a: float
    epsilon: float
    sigma: float = 0.0
    b: float = field(default=None, compare=False)

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"a must be positive, got {self.a}")
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")
        if self.b is None:
            b = self.a / self.epsilon if self.epsilon > 0 else math.inf
            object.__setattr__(self, "b", b)

    @classmethod
    def from_params(cls, p):
        return cls(p.a, p.a / p.b, p.sigma, b=p.b)

    def to_params(self):
        return Params(self.a, self.b, self.sigma)


class Regime(Enum):
    ULTRA_SLOW = "I"
    FAST_LEFT = "II"
    SLOW = "III"
    FAST_RETURN = "IV"


@dataclass(frozen=True)
class RegimeThresholds:
    delta_s: float = 0.1  # distance to the critical manifold
    delta_n: float = 0.1  # distance to the nullcline
    fast_cutoff: float = 1.0  # |u-drift| in slow time marking the fast leftward jump


def to_slowfast(s):
    x, y = s
    return SfState(y, x + y)


def from_slowfast(sf):
    u, v = sf
    if np.any(np.asarray(v) < np.asarray(u)):
        raise ValueError("slow-fast state needs v >= u")
    return State(v - u, u)


def _require_eps(sp):
    if not sp.epsilon > 0:
        raise ValueError("the slow-time system needs epsilon > 0")


def slow_system_drift_diffusion(sp, sf):
    """Stratonovich drift and noise of the slow-time system (u-equation divided by eps)."""
    _require_eps(sp)
    u, v = sf
    w = v - u
    drift = np.array([(sp.a * w - sp.epsilon * u * w * w) / sp.epsilon, sp.a - w])
    return drift, np.array([sp.sigma * w, 0.0 * w])


def fast_system_drift_diffusion(sp, sf):
    """Stratonovich drift and noise of the fast-time system."""
    u, v = sf
    w = v - u
    drift = np.array([sp.a * w - sp.epsilon * u * w * w, sp.epsilon * (sp.a - w)])
    return drift, np.array([math.sqrt(sp.epsilon) * sp.sigma * w, 0.0 * w])


def _noise_jacobian(coef, sf):
    # g = (coef (v - u), 0)
    u, _ = sf
    zero = np.zeros_like(u, dtype=float)
    return np.array([[zero - coef, zero + coef], [zero, zero]])


def slow_system_ito_drift(sp, sf):
    drift, g = slow_system_drift_diffusion(sp, sf)
    return drift + stratonovich_correction(_noise_jacobian(sp.sigma, sf), g)


def fast_system_ito_drift(sp, sf):
    drift, g = fast_system_drift_diffusion(sp, sf)
    coef = math.sqrt(sp.epsilon) * sp.sigma
    return drift + stratonovich_correction(_noise_jacobian(coef, sf), g)


def reduced_flow(sp, u0, t):
    """Exact solution ``u = v = u0 + a t`` of the reduced problem on the diagonal."""
    w = u0 + sp.a * t
    return SfState(w, w)


def layer_jacobian(sp, sf=None):
    """Jacobian of the layer field ``(a (v-u), 0)``; constant in the state."""
    return np.array([[-sp.a, sp.a], [0.0, 0.0]])


def transverse_eigenpair(sp, sf=None):
    """Nontrivial eigenvalue of the layer Jacobian and its unit eigenvector."""
    vals, vecs = np.linalg.eig(layer_jacobian(sp, sf))
    i = int(np.argmax(np.abs(vals)))
    vec = vecs[:, i] / np.linalg.norm(vecs[:, i])
    if vec[np.argmax(np.abs(vec))] < 0:
        vec = -vec
    return float(vals[i].real), vec.real


def critical_manifold_distance(sf):
    u, v = sf
    return np.abs(v - u) / math.sqrt(2.0)


def nullcline_v(sp, u):
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0):
        raise ValueError("nullcline is defined for u > 0 only")
    out = u + sp.a / (sp.epsilon * u)
    return float(out) if out.ndim == 0 else out


def _nullcline_gap(sp, u, v):
    """``v - nullcline_v(u)``; ``-inf`` where ``u <= 0`` (the nullcline is at infinity)."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore"):
        gap = v - u - sp.a / (sp.epsilon * np.where(u > 0, u, np.nan))
    return np.where(u > 0, gap, -np.inf)


def nullcline_distance(sp, sf):
    """First-order distance ``|F| / |grad F|`` to the nullcline, ``F = v - nullcline_v(u)``."""
    u, v = (np.asarray(c, dtype=float) for c in sf)
    gap = _nullcline_gap(sp, u, v)
    with np.errstate(divide="ignore", invalid="ignore"):
        du = -1.0 + sp.a / (sp.epsilon * u * u)
        dist = np.abs(gap) / np.sqrt(du * du + 1.0)
    return np.where(u > 0, dist, np.inf)


def classify_regimes(sp, u, v, thresholds=RegimeThresholds()):
    """Vectorized :func:`classify_regime`; returns an array of labels ``"I".."IV"``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    w = v - u
    gap = _nullcline_gap(sp, u, v)
    near_s = (np.abs(w) / math.sqrt(2.0) <= thresholds.delta_s) & (gap <= 0)
    near_n = nullcline_distance(sp, (u, v)) <= thresholds.delta_n
    u_drift = (sp.a * w - sp.epsilon * u * w * w) / sp.epsilon
    fast_left = u_drift < -thresholds.fast_cutoff
    return np.select([near_s, near_n, fast_left], ["I", "III", "II"], default="IV")


def classify_regime(sp, sf, thresholds=RegimeThresholds()):
    """Time-scale regime of one point.

    I: within ``delta_s`` of the diagonal and not beyond the nullcline;
    III: within ``delta_n`` of the nullcline (and not I);
    II: slow-time u-drift below ``-fast_cutoff``; IV: everything else.
    """
    _require_eps(sp)
    label = classify_regimes(sp, sf[0], sf[1], thresholds)
    return Regime(str(label))


def hitting_time_nullcline(sp, times, states):
    """First time ``v - nullcline_v(u)`` changes sign, by linear interpolation.

    ``states`` has shape ``(n, 2)`` in ``(u, v)`` coordinates. Returns
    ``times[0]`` if the path starts on the nullcline and ``None`` if it never
    crosses.
    """
    times = np.asarray(times, dtype=float)
    states = np.asarray(states, dtype=float)
    if len(times) == 0:
        raise ValueError("empty trajectory")
    gap = _nullcline_gap(sp, states[:, 0], states[:, 1])
    if gap[0] == 0:
        return float(times[0])
    side = np.sign(gap)
    hit = np.nonzero(side[1:] != side[0])[0]
    if hit.size == 0:
        return None
    i = int(hit[0])
    g0, g1 = gap[i], gap[i + 1]
    if not np.isfinite(g0):
        return float(times[i + 1])
    frac = g0 / (g0 - g1)
    return float(times[i] + frac * (times[i + 1] - times[i]))


def integrate_slowfast(sp, sf0, path, t_end, h=None, system="slow", stride=1):
    """Euler-Maruyama trajectory in ``(u, v)`` coordinates, times in slow time.

    ``h`` (default ``path.h``) must be a whole multiple of ``path.h``; the
    path's increments are summed in groups to match. ``system="fast"`` steps
    the fast-time equations with the rescaled Wiener path instead; the
    numerical map is the same up to rounding.
    """
    _require_eps(sp)
    h = path.h if h is None else h
    factor = int(round(h / path.h))
    if factor < 1 or abs(factor * path.h - h) > 1e-12 * h:
        raise ValueError(f"step {h} is not a multiple of the path step {path.h}")
    n = int(round(t_end / h))
    if n * factor > path.length:
        raise ValueError("noise path too short for t_end")
    if system == "slow":
        dW = coarsen(path.increments[: n * factor], factor)
        step = h
    elif system == "fast":
        fast = rescale(path, sp.epsilon)
        dW = coarsen(fast.increments[: n * factor], factor)
        step = h / sp.epsilon
    else:
        raise ValueError(f"unknown system {system!r}")

    u, v = (float(c) for c in sf0)
    idx = np.arange(0, n + 1, stride)
    out = np.empty((len(idx), 2))
    out[0] = (u, v)
    k = 1
    for i, w in enumerate(dW.tolist()):
        fu, fv, g = _ito_components(sp, u, v, system)
        u, v = u + step * fu + g * w, v + step * fv
        if u < 0.0:
            u = 0.0
        if v < u + X_FLOOR:
            v = u + X_FLOOR
        if not (abs(u) <= BLOWUP_LIMIT and abs(v) <= BLOWUP_LIMIT):
            raise BlowUpError(i, state=np.array([u, v]))
        if (i + 1) % stride == 0:
            out[k] = (u, v)
            k += 1
    return Trajectory(idx * h, out)


def _ito_components(sp, u, v, system):
    """Ito drift ``(fu, fv)`` and noise coefficient of the u-equation, on floats.

    Same values as :func:`slow_system_ito_drift` / :func:`fast_system_ito_drift`
    without building arrays at every step.
    """
    w = v - u
    eps = sp.epsilon
    if system == "slow":
        coef = sp.sigma
        fu = (sp.a * w - eps * u * w * w) / eps
        fv = sp.a - w
    else:
        coef = math.sqrt(eps) * sp.sigma
        fu = sp.a * w - eps * u * w * w
        fv = eps * (sp.a - w)
    g = coef * w
    return fu + 0.5 * (-coef * g), fv, g


def transform_consistency_check(p, s0, path, t_end, h, transform="slowfast", system="slow"):
    """Largest distance between the two formulations along one noise path.

    The original Ito system is stepped with ``h`` (increments of ``path``
    summed in groups of ``h / path.h``); the transformed system is stepped on
    the path's own resolution. Both are compared in transformed coordinates
    at the common times. With ``h == path.h`` the two numerical maps agree up
    to rounding, since Euler-Maruyama commutes with linear coordinate
    changes. ``transform="identity"`` replaces the transformed run by the
    original system itself (a self-check of the harness).
    """
    factor = int(round(h / path.h))
    if factor < 1 or abs(factor * path.h - h) > 1e-12 * h:
        raise ValueError(f"step {h} is not a multiple of the path step {path.h}")
    n = int(round(t_end / h))
    if n * factor > path.length:
        raise ValueError("noise path too short for t_end")
    dW = path.increments[: n * factor]
    _, coarse, _ = run(p, s0, coarsen(dW, factor), h)
    u, v = coarse[:, 1], coarse[:, 0] + coarse[:, 1]

    if transform == "identity":
        _, fine, _ = run(p, s0, dW, path.h, stride=factor)
        fu, fv = fine[:, 1], fine[:, 0] + fine[:, 1]
    elif transform == "slowfast":
        sp = SlowFastParams.from_params(p)
        traj = integrate_slowfast(sp, to_slowfast(s0), path, n * h, h=path.h,
                                  system=system, stride=factor)
        fu, fv = traj.states[:, 0], traj.states[:, 1]
    else:
        raise ValueError(f"unknown transform {transform!r}")
    return float(np.max(np.hypot(u - fu, v - fv)))


def nullcline_polyline(sp, u_range, n=200):
    u = np.linspace(max(u_range[0], 1e-9), u_range[1], n)
    return u, nullcline_v(sp, u)


def critical_manifold_polyline(u_range, n=2):
    u = np.linspace(u_range[0], u_range[1], n)
    return u, u.copy()
