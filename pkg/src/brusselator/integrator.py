"""Euler-Maruyama integration of the Ito Brusselator and two-point motion.

Every routine here advances states through :func:`em_step`, which works on a
single state ``(x, y)`` or on stacked states of shape ``(2, m)``. Columns
never interact, so running trajectories together or one at a time gives
bit-identical results; :func:`two_point` relies on this to feed both
initial conditions the very same increments.
"""

from dataclasses import dataclass

import numpy as np

from .model import State

X_FLOOR = 1e-12
BLOWUP_LIMIT = 1e9


class BlowUpError(FloatingPointError):
    """A step left the finite region ``|x|, |y| <= BLOWUP_LIMIT``."""

    def __init__(self, step, column=None, state=None):
        self.step = step
        self.column = column
        self.state = state
        where = f" (trajectory {column})" if column is not None else ""
        super().__init__(f"numerical blow-up at step {step}{where}: state {state}")


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), 2)
    clamp_count: int = 0

    @property
    def x(self):
        return self.states[:, 0]

    @property
    def y(self):
        return self.states[:, 1]

    @property
    def final(self):
        return State(*map(float, self.states[-1]))


@dataclass
class DistanceSeries:
    times: np.ndarray
    d: np.ndarray


def apply_floor(z):
    """Clamp ``x`` to ``X_FLOOR`` and ``y`` to 0; return ``(z, n_clamped)``."""
    x, y = z[0], z[1]
    low_x = x < X_FLOOR
    low_y = y < 0.0
    n = int(np.count_nonzero(low_x) + np.count_nonzero(low_y))
    if n:
        z = np.array([np.where(low_x, X_FLOOR, x), np.where(low_y, 0.0, y)])
    return z, n


def bad_columns(z):
    """Mask of states that are non-finite or beyond the blow-up limit."""
    with np.errstate(invalid="ignore"):
        return ~(np.abs(z) <= BLOWUP_LIMIT).all(axis=0)


def em_update(p, x, y, dW, h):
    """Raw Euler-Maruyama update in components, before the floor.

    Works on Python floats and on numpy arrays alike and performs exactly
    the floating-point operations of ``s + h ito_drift(p, s) + diffusion(p, s) dW``,
    so scalar and batched runs agree bit for bit.
    """
    x2y = x * x * y
    g = p.sigma * x
    wz = 0.5 * (p.sigma * g)
    fx = p.a - (1.0 + p.b) * x + x2y
    fy = p.b * x - x2y
    return x + h * (fx + wz) + (-g) * dW, y + h * (fy - wz) + g * dW


def _advance(p, z, dW, h, step):
    # callers silence overflow warnings; blow-ups are caught below
    new, clamped = apply_floor(np.array(em_update(p, z[0], z[1], dW, h)))
    bad = bad_columns(new)
    if np.any(bad):
        col = None if new.ndim == 1 else int(np.argmax(bad))
        raise BlowUpError(step, col, new if col is None else new[:, col])
    return new, clamped


def em_step(p, s, dW, h, step=0):
    """One Euler-Maruyama step ``s + h f(s) + g(s) dW`` with the positivity floor.

    ``s`` is a state or a ``(2, m)`` stack; ``dW`` a scalar or an ``m``-vector.
    Raises :class:`BlowUpError` (carrying ``step``) if the result is not finite
    or exceeds the blow-up limit.
    """
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h}")
    with np.errstate(over="ignore", invalid="ignore"):
        new, _ = _advance(p, np.asarray(s, dtype=float), dW, h, step)
    if new.ndim == 1:
        return State(float(new[0]), float(new[1]))
    return new


def _run_scalar(p, x, y, dW, h, stride, out):
    """Single trajectory on Python floats; same arithmetic as the array path."""
    clamps = 0
    k = 1
    for i, w in enumerate(dW.tolist()):
        x, y = em_update(p, x, y, w, h)
        if x < X_FLOOR:
            x = X_FLOOR
            clamps += 1
        if y < 0.0:
            y = 0.0
            clamps += 1
        if not (abs(x) <= BLOWUP_LIMIT and abs(y) <= BLOWUP_LIMIT):
            raise BlowUpError(i, state=np.array([x, y]))
        if (i + 1) % stride == 0:
            out[k] = (x, y)
            k += 1
    return clamps


def run(p, z0, dW, h, stride=1):
    """Integrate stacked states ``z0`` (shape ``(2,)`` or ``(2, m)``).

    ``dW`` has one row per step: shape ``(n,)`` shares each increment across
    all columns, shape ``(n, m)`` gives column ``k`` its own path.
    Returns ``(times, states, clamp_count)`` with ``states`` of shape
    ``(k, 2[, m])`` holding every ``stride``-th state, starting at ``t = 0``.
    """
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h}")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    z = np.array(z0, dtype=float)
    dW = np.asarray(dW, dtype=float)
    n = dW.shape[0]
    idx = np.arange(0, n + 1, stride)
    out = np.empty((len(idx),) + z.shape)
    out[0] = z
    if z.ndim == 1 and dW.ndim == 1:
        clamps = _run_scalar(p, float(z[0]), float(z[1]), dW, h, stride, out)
        return idx * h, out, clamps
    clamps = 0
    k = 1
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(n):
            z, c = _advance(p, z, dW[i], h, i)
            clamps += c
            if (i + 1) % stride == 0:
                out[k] = z
                k += 1
    return idx * h, out, clamps


def integrate(p, s0, path, t_end, stride=1):
    """Trajectory from ``s0`` driven by ``path`` on ``[0, t_end]``."""
    n = path.steps_for(t_end)
    times, states, clamps = run(p, s0, path.increments[:n], path.h, stride)
    return Trajectory(times, states, clamps)


def distance(traj0, traj1):
    diff = traj0.states - traj1.states
    return DistanceSeries(traj0.times, np.hypot(diff[:, 0], diff[:, 1]))


def two_point(p, s0, s1, path, t_end, stride=1):
    """Two trajectories under one noise realization and their distance."""
    n = path.steps_for(t_end)
    z0 = np.array([[s0[0], s1[0]], [s0[1], s1[1]]], dtype=float)
    times, states, clamps = run(p, z0, path.increments[:n], path.h, stride)
    t0 = Trajectory(times, states[:, :, 0], clamps)
    t1 = Trajectory(times, states[:, :, 1], clamps)
    return t0, t1, distance(t0, t1)


def two_point_ensemble(p, s0, s1, seed, h, t_end, n_paths, stride=1):
    """Distance series of ``n_paths`` two-point motions, one noise stream each.

    ``s0`` and ``s1`` have shape ``(2, n_paths)``; pair ``k`` is driven by
    stream ``k`` of ``seed``. Returns ``(times, d)`` with ``d`` of shape
    ``(len(times), n_paths)``.
    """
    from .noise import generate_ensemble

    n = int(round(t_end / h))
    dW = generate_ensemble(seed, h, n, n_paths)
    z0 = np.concatenate([np.asarray(s0, float), np.asarray(s1, float)], axis=1)
    times, states, _ = run(p, z0, np.concatenate([dW, dW], axis=1), h, stride)
    a, b = states[:, :, :n_paths], states[:, :, n_paths:]
    return times, np.hypot(a[:, 0] - b[:, 0], a[:, 1] - b[:, 1])

