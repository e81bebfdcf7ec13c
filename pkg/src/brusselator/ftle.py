"""Finite-time Lyapunov exponents of the stochastic Brusselator.

The state and the 2x2 fundamental matrix ``Phi`` of the linearized flow are
advanced together by Euler-Maruyama with the same increments::

    dPhi = (J(x, y) + sigma^2/2 [[1, 0], [-1, 0]]) Phi dt + sigma B Phi dW,
    B = [[-1, 0], [1, 0]],

starting from ``Phi = I``. The FTLE at horizon ``T`` is ``ln ||Phi_T|| / T``
with the spectral norm.

``Phi`` grows or decays exponentially, so it is kept as ``2**k * M``: when
``||M||`` leaves ``[1e-6, 1e6]`` it is divided by the power of two nearest
its norm. Multiplying by a power of two is exact in binary floating point
and the update is linear in ``Phi``, so renormalization does not change a
single bit of the result. Logarithms are taken once, at the end, per cell
with :func:`math.log`; everything inside the time loop is elementwise
``+ - * / sqrt``, which makes results independent of how cells are batched
or split across threads.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .integrator import BLOWUP_LIMIT, X_FLOOR, em_update, run
from .model import jacobian

NORM_LOW = 1e-6
NORM_HIGH = 1e6
LN2 = math.log(2.0)
MIN_FFT_SAMPLES = 256
DEFAULT_PRERUN = 200.0


@dataclass
class TangentMatrix:
    """Fundamental matrix stored as ``exp(log_scale) * entries``."""

    entries: np.ndarray
    log_scale: float = 0.0

    @property
    def matrix(self):
        return math.exp(self.log_scale) * self.entries

    def log_norm(self):
        return self.log_scale + math.log(spectral_norm_2x2(self.entries))


@dataclass
class FtleField:
    x_range: tuple
    y_range: tuple
    nx: int
    ny: int
    T: float
    seed: int
    values: np.ndarray  # shape (nx, ny); values[i, j] belongs to (xs[i], ys[j])

    @property
    def xs(self):
        return cell_centres(self.x_range, self.nx)

    @property
    def ys(self):
        return cell_centres(self.y_range, self.ny)

    def positive_fraction(self):
        """Fraction of finite cells with a positive exponent."""
        finite = np.isfinite(self.values)
        if not finite.any():
            return float("nan")
        return float(np.count_nonzero(self.values[finite] > 0) / finite.sum())


def _mul2(A, M):
    """Product of two stacks of 2x2 matrices, shape ``(2, 2, ...)``."""
    return np.array([
        [A[0][0] * M[0][0] + A[0][1] * M[1][0], A[0][0] * M[0][1] + A[0][1] * M[1][1]],
        [A[1][0] * M[0][0] + A[1][1] * M[1][0], A[1][0] * M[0][1] + A[1][1] * M[1][1]],
    ])


def variational_drift(p, s, Phi):
    """Ito drift ``(J(s) + sigma^2/2 [[1,0],[-1,0]]) Phi`` of the tangent flow."""
    A = jacobian(p, s)
    c = 0.5 * p.sigma * p.sigma
    A[0, 0] = A[0, 0] + c
    A[1, 0] = A[1, 0] - c
    return _mul2(A, Phi)


def variational_diffusion(p, Phi):
    """Noise coefficient ``sigma [[-1,0],[1,0]] Phi`` of the tangent flow."""
    row = p.sigma * np.asarray(Phi[0], dtype=float)
    return np.array([-row, row])


def spectral_norm_2x2(M):
    """Largest singular value from ``f = sum M_ij^2`` and ``det M``.

    Uses ``sqrt((f + sqrt(f^2 - 4 det^2)) / 2)`` written as
    ``sqrt((f + sqrt((f - 2|det|)(f + 2|det|))) / 2)``, which keeps the inner
    radicand nonnegative in floating point. Works on stacks ``(2, 2, ...)`` and
    on flat ``(m00, m01, m10, m11)`` tuples.
    """
    if len(M) == 4:
        a, b, c, d = M
    else:
        a, b = M[0][0], M[0][1]
        c, d = M[1][0], M[1][1]
    f = a * a + b * b + c * c + d * d
    det2 = 2.0 * np.abs(a * d - b * c)
    disc = np.maximum((f - det2) * (f + det2), 0.0)
    return np.sqrt(0.5 * (f + np.sqrt(disc)))


def cell_centres(interval, n):
    lo, hi = interval
    return lo + (np.arange(n) + 0.5) * ((hi - lo) / n)


def _noise_rows(noise, start, stop):
    if isinstance(noise, np.ndarray):
        return noise[start:stop]
    return noise.chunk(start, stop)


def tangent_update(p, x, y, P00, P01, P10, P11, dW, h):
    """Raw joint update of state and fundamental matrix, before the floor.

    Operator-only, for Python floats or numpy arrays; the arithmetic is the
    same as :func:`~brusselator.integrator.em_update` together with
    ``Phi + h variational_drift + variational_diffusion dW``.
    """
    xy2 = 2.0 * x * y
    x2 = x * x
    c = 0.5 * p.sigma * p.sigma
    A00 = -(1.0 + p.b) + xy2 + c
    A10 = p.b - xy2 - c
    gP0 = p.sigma * P00
    gP1 = p.sigma * P01
    nP00 = P00 + h * (A00 * P00 + x2 * P10) + (-gP0) * dW
    nP01 = P01 + h * (A00 * P01 + x2 * P11) + (-gP1) * dW
    nP10 = P10 + h * (A10 * P00 + (-x2) * P10) + gP0 * dW
    nP11 = P11 + h * (A10 * P01 + (-x2) * P11) + gP1 * dW
    nx, ny = em_update(p, x, y, dW, h)
    return nx, ny, nP00, nP01, nP10, nP11


def _scalar_norm(a, b, c, d):
    f = a * a + b * b + c * c + d * d
    det2 = 2.0 * abs(a * d - b * c)
    return math.sqrt(0.5 * (f + math.sqrt(max((f - det2) * (f + det2), 0.0))))


def _check_checkpoints(checkpoints):
    checkpoints = [int(c) for c in checkpoints]
    if any(b <= a for a, b in zip(checkpoints, checkpoints[1:])) or checkpoints[0] < 1:
        raise ValueError("checkpoints must be increasing positive step counts")
    return checkpoints


def _tangent_scalar(p, x, y, noise, h, checkpoints, renormalize, chunk_size):
    """One cell on Python floats; bit-identical to the batched loop."""
    P00, P01, P10, P11 = 1.0, 0.0, 0.0, 1.0
    e_total = 0
    n = checkpoints[-1]
    out = [math.nan] * len(checkpoints)
    k = 0
    step = 0
    while step < n:
        rows = np.asarray(_noise_rows(noise, step, min(n, step + chunk_size)), dtype=float)
        for w in rows.reshape(len(rows), -1)[:, 0].tolist():
            x, y, P00, P01, P10, P11 = tangent_update(p, x, y, P00, P01, P10, P11, w, h)
            if x < X_FLOOR:
                x = X_FLOOR
            if y < 0.0:
                y = 0.0
            step += 1
            if not (abs(x) <= BLOWUP_LIMIT and abs(y) <= BLOWUP_LIMIT
                    and math.isfinite(P00 + P01 + P10 + P11)):
                return out, (math.nan, math.nan), (np.full((2, 2), math.nan), 0)
            if renormalize:
                nrm = _scalar_norm(P00, P01, P10, P11)
                if nrm > NORM_HIGH or nrm < NORM_LOW:
                    e = math.frexp(nrm)[1]
                    P00, P01 = math.ldexp(P00, -e), math.ldexp(P01, -e)
                    P10, P11 = math.ldexp(P10, -e), math.ldexp(P11, -e)
                    e_total += e
            if step == checkpoints[k]:
                nrm = _scalar_norm(P00, P01, P10, P11)
                out[k] = math.log(nrm) + e_total * LN2 if nrm > 0 else math.nan
                k += 1
    return out, (x, y), (np.array([[P00, P01], [P10, P11]]), e_total)


def tangent_log_norms(p, x0, y0, noise, h, checkpoints, renormalize=True,
                      chunk_size=65536, return_state=False):
    """Co-integrate states and fundamental matrices; ``ln ||Phi||`` at checkpoints.

    ``x0``, ``y0``: arrays of ``m`` initial conditions. ``noise``: a
    :class:`~brusselator.noise.NoisePath` (read chunk by chunk, shared by all
    cells) or an increment array of shape ``(n,)`` or ``(n, m)``.
    ``checkpoints``: increasing step counts. Cells that blow up get NaN.

    Returns an array of shape ``(len(checkpoints), m)``; with
    ``return_state`` also the final states ``(2, m)`` and the final
    :class:`TangentMatrix` stack ``(entries (2, 2, m), log2 scale (m,))``.
    A single cell runs on Python floats, which is much faster and gives the
    same bits as the batched loop.
    """
    xs = np.atleast_1d(np.asarray(x0, float))
    ys = np.atleast_1d(np.asarray(y0, float))
    checkpoints = _check_checkpoints(checkpoints)
    if xs.size == 1:
        vals, z, (Phi, e) = _tangent_scalar(p, float(xs[0]), float(ys[0]), noise, h,
                                            checkpoints, renormalize, chunk_size)
        out = np.array(vals).reshape(-1, 1)
        if return_state:
            return out, np.array(z).reshape(2, 1), (Phi.reshape(2, 2, 1), np.array([e]))
        return out
    x, y = xs.copy(), ys.copy()
    m = x.size
    P00, P01, P10, P11 = np.ones(m), np.zeros(m), np.zeros(m), np.ones(m)
    log2_scale = np.zeros(m, dtype=np.int64)
    dead = np.zeros(m, dtype=bool)
    n = checkpoints[-1]
    out = np.empty((len(checkpoints), m))
    k = 0
    step = 0
    with np.errstate(over="ignore", invalid="ignore"):
        while step < n:
            rows = _noise_rows(noise, step, min(n, step + chunk_size))
            for dW in rows:
                x, y, P00, P01, P10, P11 = tangent_update(p, x, y, P00, P01, P10, P11, dW, h)
                x = np.where(x < X_FLOOR, X_FLOOR, x)
                y = np.where(y < 0.0, 0.0, y)
                step += 1
                bad = ~((np.abs(x) <= BLOWUP_LIMIT) & (np.abs(y) <= BLOWUP_LIMIT)
                        & np.isfinite(P00 + P01 + P10 + P11))
                if bad.any():
                    dead |= bad
                    x[bad] = y[bad] = 1.0
                    P00[bad] = P11[bad] = 1.0
                    P01[bad] = P10[bad] = 0.0
                if renormalize:
                    norm = spectral_norm_2x2((P00, P01, P10, P11))
                    off = (norm > NORM_HIGH) | (norm < NORM_LOW)
                    if off.any():
                        e = np.where(off, np.frexp(norm)[1], 0)
                        P00, P01 = np.ldexp(P00, -e), np.ldexp(P01, -e)
                        P10, P11 = np.ldexp(P10, -e), np.ldexp(P11, -e)
                        log2_scale += e
                if step == checkpoints[k]:
                    out[k] = _log_norms((P00, P01, P10, P11), log2_scale, dead)
                    k += 1
    x[dead] = y[dead] = np.nan
    if return_state:
        return out, np.array([x, y]), (np.array([[P00, P01], [P10, P11]]), log2_scale)
    return out


def _log_norms(Phi, log2_scale, dead):
    norms = spectral_norm_2x2(Phi)
    res = np.empty(norms.shape)
    for i, (nrm, e, gone) in enumerate(zip(norms.tolist(), log2_scale.tolist(), dead.tolist())):
        if gone or not nrm > 0:
            res[i] = math.nan
        else:
            res[i] = math.log(nrm) + e * LN2
    return res


def _steps(T, h):
    if not T > 0:
        raise ValueError(f"horizon must be positive, got {T}")
    return max(1, int(round(T / h)))


def _check_duration(path, n):
    if n > path.length:
        raise ValueError(
            f"horizon needs {n} steps but the noise path has {path.length}")


def tangent(p, s0, path, T, renormalize=True):
    """Final state and fundamental matrix at horizon ``T`` from ``s0``."""
    n = _steps(T, path.h)
    _check_duration(path, n)
    _, z, (Phi, e) = tangent_log_norms(p, [s0[0]], [s0[1]], path, path.h, [n],
                                       renormalize=renormalize, return_state=True)
    if not np.isfinite(z).all():
        raise FloatingPointError("trajectory blew up")
    return (float(z[0, 0]), float(z[1, 0])), TangentMatrix(Phi[:, :, 0].copy(), float(e[0]) * LN2)


def ftle(p, s0, path, T, renormalize=True, chunk_size=65536):
    """``lambda^T = ln ||Phi_T|| / T`` along the trajectory from ``s0``."""
    n = _steps(T, path.h)
    _check_duration(path, n)
    out = tangent_log_norms(p, [s0[0]], [s0[1]], path, path.h, [n],
                            renormalize=renormalize, chunk_size=chunk_size)
    value = float(out[0, 0])
    if math.isnan(value):
        from .integrator import BlowUpError
        raise BlowUpError(n, state=s0)
    return value / T


def ftle_series(p, s0, path, T_values):
    """FTLE at each horizon in ``T_values`` from one pass over one noise path.

    Returns a list of ``(T, lambda^T)`` pairs.
    """
    T_values = [float(T) for T in T_values]
    steps = [_steps(T, path.h) for T in T_values]
    _check_duration(path, steps[-1])
    out = tangent_log_norms(p, [s0[0]], [s0[1]], path, path.h, steps)
    return [(T, float(v) / T) for T, v in zip(T_values, out[:, 0])]


def ftle_field(p, x_range, y_range, nx, ny, path, T, workers=1):
    """FTLE landscape over an ``nx`` by ``ny`` grid of cell centres.

    Every cell is driven by the same noise path. Cells are split into
    ``workers`` contiguous blocks run on a thread pool; results do not depend
    on ``workers``. Cells that blow up hold NaN.
    """
    if min(x_range) <= 0 or min(y_range) < 0:
        raise ValueError("grid must lie inside the positive quadrant")
    n = _steps(T, path.h)
    _check_duration(path, n)
    X, Y = np.meshgrid(cell_centres(x_range, nx), cell_centres(y_range, ny), indexing="ij")
    xs, ys = X.ravel(), Y.ravel()
    dW = path.increments[:n]

    def block(sl):
        return tangent_log_norms(p, xs[sl], ys[sl], dW, path.h, [n])[0]

    workers = max(1, min(int(workers), xs.size))
    bounds = np.linspace(0, xs.size, workers + 1).astype(int)
    slices = [slice(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:])]
    if workers == 1:
        parts = [block(slices[0])]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(block, slices))
    values = np.concatenate(parts).reshape(nx, ny) / T
    return FtleField(tuple(x_range), tuple(y_range), nx, ny, float(T), path.seed, values)


def dominant_frequency(series, h):
    """Frequency of the largest nonzero-frequency bin of the mean-removed DFT."""
    x = np.asarray(series, dtype=float)
    if x.size < MIN_FFT_SAMPLES:
        raise ValueError(f"need at least {MIN_FFT_SAMPLES} samples, got {x.size}")
    x = x - x.mean()
    if not np.any(x != 0.0):
        raise ValueError("series has zero variance")
    spectrum = np.abs(np.fft.rfft(x))
    k = 1 + int(np.argmax(spectrum[1:]))
    return k / (x.size * h)


def horizon_from_frequency(omega):
    """Half period ``T = 1 / (2 omega)``."""
    return 0.5 / omega


def prerun_frequency(p, duration=DEFAULT_PRERUN, h=1e-3, s0=None):
    """Dominant frequency of ``x(t)`` for the noise-free system.

    The deterministic run starts at ``s0`` (default: the equilibrium shifted by
    ``(0.5, 0)``) and covers ``[0, duration]``.
    """
    q = replace(p, sigma=0.0)
    if s0 is None:
        s0 = (q.a + 0.5, q.b / q.a)
    n = int(round(duration / h))
    _, states, _ = run(q, s0, np.zeros(n), h)
    return dominant_frequency(states[:, 0], h)


def auto_horizon(p, duration=DEFAULT_PRERUN, h=1e-3, s0=None):
    """Default FTLE horizon ``1 / (2 omega)`` from a deterministic pre-run."""
    return horizon_from_frequency(prerun_frequency(p, duration, h, s0))


def default_window(p):
    """Default grid window ``[0.05, 4] x [0.05, 6]``, scaled by ``a``.

    For ``a = 1`` and ``b`` up to about 4 it contains the equilibrium and the
    limit cycle with room to spare.
    """
    return (0.05 * p.a, 4.0 * p.a), (0.05 * p.a, 6.0 * p.a)
