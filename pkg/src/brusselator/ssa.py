"""Gillespie direct method for the Brusselator reaction network.

Reactions, with A and B held at constant counts (infinite pools)::

    R1: A      -> X
    R2: B + X  -> Y + D
    R3: 2X + Y -> 3X
    R4: X      -> E

Mass-action propensities for volume V::

    a1 = g1 A,  a2 = g2 B X / V,  a3 = g3 X (X-1) Y / V^2,  a4 = g4 X

Reactions are numbered 1..4 throughout, matching R1..R4. Random numbers come
from the same counter-based Philox streams as :mod:`brusselator.noise`.
"""

import math
from dataclasses import dataclass

import numpy as np

from .model import Params
from .noise import uniforms

STATE_CHANGES = (
    (1, 0, 0, 0),
    (-1, 1, 1, 0),
    (1, -1, 0, 0),
    (-1, 0, 0, 1),
)
MAX_EVENTS = 10**8


class EventCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class RateConstants:
    A: int
    B: int
    V: float
    gamma1: float = 1.0
    gamma2: float = 1.0
    gamma3: float = 1.0
    gamma4: float = 1.0

    def __post_init__(self):
        for name in ("A", "B", "V", "gamma1", "gamma2", "gamma3", "gamma4"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if int(self.A) != self.A or int(self.B) != self.B:
            raise ValueError("A and B are molecule counts and must be integers")

    @classmethod
    def matching(cls, p, V):
        """Counts that reproduce the rate equation of ``p`` at volume ``V``.

        Uses ``a = g1 A/V`` and ``b = g2 B/V`` with all ``g = 1``; ``A`` and ``B``
        are rounded to whole molecules.
        """
        return cls(A=int(round(p.a * V)), B=int(round(p.b * V)), V=float(V))

    def matched_params(self):
        """Rate-equation parameters ``(a, b)`` in concentration units."""
        if self.gamma3 != 1.0 or self.gamma4 != 1.0:
            raise ValueError("matching to the Brusselator needs gamma3 = gamma4 = 1")
        return Params(self.gamma1 * self.A / self.V, self.gamma2 * self.B / self.V)


@dataclass(frozen=True)
class JumpState:
    X: int
    Y: int
    D: int = 0
    E: int = 0

    def __post_init__(self):
        if min(self.X, self.Y, self.D, self.E) < 0:
            raise ValueError(f"negative molecule count in {self}")

    def apply(self, reaction):
        dx, dy, dd, de = STATE_CHANGES[reaction - 1]
        return JumpState(self.X + dx, self.Y + dy, self.D + dd, self.E + de)


@dataclass
class JumpPath:
    """Piecewise-constant path: state ``states[n]`` holds on ``[times[n], times[n+1])``.

    ``reactions[n]`` is the reaction that produced ``states[n]`` (0 for the
    initial state).
    """

    times: np.ndarray
    reactions: np.ndarray
    states: np.ndarray  # (n, 4) counts X, Y, D, E
    t_end: float

    def __len__(self):
        return len(self.times)

    def at(self, t):
        """States at times ``t`` (array), by right-continuous lookup."""
        idx = np.searchsorted(self.times, t, side="right") - 1
        return self.states[idx]

    def resample(self, dt):
        grid = np.arange(0.0, self.t_end + 0.5 * dt, dt)
        grid = grid[grid <= self.t_end]
        return grid, self.at(grid)

    def time_average(self, t0, t1, species=0):
        """Time average of one species' count over ``[t0, t1]``."""
        if not 0 <= t0 < t1 <= self.t_end:
            raise ValueError("averaging window must lie inside [0, t_end]")
        edges = np.concatenate([self.times, [self.t_end]])
        lo = np.clip(edges[:-1], t0, t1)
        hi = np.clip(edges[1:], t0, t1)
        return float(np.sum((hi - lo) * self.states[:, species]) / (t1 - t0))


class UniformStream:
    """Buffered uniforms from Philox stream ``(seed, stream)``."""

    def __init__(self, seed, stream=0, block=1 << 16):
        self.seed = seed
        self.stream = stream
        self.block = block
        self._pos = 0
        self._buf = []
        self._i = 0

    def next(self):
        if self._i == len(self._buf):
            self._buf = uniforms(self.seed, self._pos, self.block, self.stream).tolist()
            self._pos += self.block
            self._i = 0
        u = self._buf[self._i]
        self._i += 1
        return u


def propensities(rc, z):
    X, Y = z.X, z.Y
    return (
        rc.gamma1 * rc.A,
        rc.gamma2 * rc.B * X / rc.V,
        rc.gamma3 * X * (X - 1) * Y / (rc.V * rc.V),
        rc.gamma4 * X,
    )


def state_change_vectors():
    return [tuple(v) for v in STATE_CHANGES]


def select_reaction(alphas, r):
    """Reaction ``k`` (1-based) with ``sum_{j<k} alpha_j <= r < sum_{j<=k} alpha_j``."""
    acc = 0.0
    last = 0
    for k, a in enumerate(alphas, start=1):
        if a > 0:
            last = k
            acc += a
            if r < acc:
                return k
    return last


def direct_method_step(rc, z, rng):
    """One event: ``(waiting time, reaction number, new state)``.

    ``rng`` provides ``next()`` returning uniforms in (0, 1); two are used
    per event, the first for the waiting time and the second for the channel.
    """
    alphas = propensities(rc, z)
    a0 = sum(alphas)
    assert a0 > 0, "total propensity vanished; the network is absorbed"
    tau = -math.log(rng.next()) / a0
    k = select_reaction(alphas, rng.next() * a0)
    return tau, k, z.apply(k)


def simulate_jump(rc, z0, t_end, seed, stream=0, max_events=MAX_EVENTS):
    """Direct-method path on ``[0, t_end]``, reproducible from ``(seed, stream)``."""
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    rng = UniformStream(seed, stream)
    times, reactions, states = [0.0], [0], [(z0.X, z0.Y, z0.D, z0.E)]
    t = 0.0
    z = z0
    n = 0
    while True:
        tau, k, nz = direct_method_step(rc, z, rng)
        t += tau
        if t > t_end:
            break
        n += 1
        if n > max_events:
            raise EventCapExceeded(f"more than {max_events} events before t={t_end}")
        z = nz
        times.append(t)
        reactions.append(k)
        states.append((z.X, z.Y, z.D, z.E))
    return JumpPath(np.array(times), np.array(reactions, dtype=np.int8),
                    np.array(states, dtype=np.int64), float(t_end))


def _ensemble_member(args):
    rc, z0, t_end, seed, stream, max_events = args
    return simulate_jump(rc, z0, t_end, seed, stream, max_events)


def simulate_ensemble(rc, z0, t_end, seed, n_paths, workers=1, max_events=MAX_EVENTS):
    """Paths on streams ``0..n_paths-1`` of ``seed``; identical for any ``workers``."""
    jobs = [(rc, z0, t_end, seed, k, max_events) for k in range(n_paths)]
    if workers <= 1:
        return [_ensemble_member(j) for j in jobs]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_ensemble_member, jobs))


def rate_equation_rhs(rc, x, y):
    """Mass-action rate equation in concentrations ``x = X/V``, ``y = Y/V``."""
    a1 = rc.gamma1 * rc.A / rc.V
    b1 = rc.gamma2 * rc.B / rc.V
    x2y = rc.gamma3 * x * x * y
    return np.array([a1 - b1 * x + x2y - rc.gamma4 * x, b1 * x - x2y])


def scaled_sup_distance(path, V, times, x_ref):
    """``max_t |X(t)/V - x_ref(t)|`` over the sample ``times``."""
    return float(np.max(np.abs(path.at(times)[:, 0] / V - x_ref)))


def matching_metadata(rc):
    """Key/value description of how ``rc`` maps onto rate-equation parameters."""
    return {
        "a_matched": rc.gamma1 * rc.A / rc.V,
        "b_matched": rc.gamma2 * rc.B / rc.V,
        "matching": "a=gamma1*A/V b=gamma2*B/V gamma3=gamma4=1",
    }
