"""Reproducible discretized Wiener paths.

Increments come from a counter-based generator, so any index range can be
produced on its own and always yields the same numbers:

* bit source: Philox-4x64 (numpy's ``Philox``) keyed by ``(seed, stream)``.
  Draw ``i`` of a stream is word ``i % 4`` of the block at counter ``i // 4``.
* uniforms: ``u = ((r >> 11) + 0.5) * 2**-53``, which lies strictly in (0, 1).
* normals: inverse-CDF, ``z = ndtri(u)`` (Cephes rational approximation).
* increments: ``dW = sqrt(h) * z``.

This recipe is version 1 of the stream format; it is recorded in binary
dumps and must not change without bumping :data:`STREAM_VERSION`.

Ensembles use ``stream = task index`` with the master seed as the first key
word, so sub-streams are a pure function of ``(seed, index)``.
"""

import struct
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.random import Philox
from scipy.special import ndtri

STREAM_VERSION = 1
_MAGIC = b"BRWN"
_HEADER = struct.Struct("<4sIQQdQ")
_MASK64 = (1 << 64) - 1


def raw_draws(seed, start, count, stream=0):
    """Return ``count`` raw 64-bit words of stream ``(seed, stream)`` from ``start``."""
    if start < 0 or count < 0:
        raise ValueError("start and count must be nonnegative")
    block, offset = divmod(start, 4)
    key = np.array([seed & _MASK64, stream & _MASK64], dtype=np.uint64)
    counter = np.array([block, 0, 0, 0], dtype=np.uint64)
    gen = Philox(key=key, counter=counter)
    words = gen.random_raw(offset + count)
    return words[offset:]


def uniforms(seed, start, count, stream=0):
    words = raw_draws(seed, start, count, stream)
    return ((words >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def standard_normals(seed, start, count, stream=0):
    return ndtri(uniforms(seed, start, count, stream))


def increments(seed, h, start, count, stream=0):
    """Wiener increments ``start .. start+count-1`` of step ``h``."""
    return np.sqrt(h) * standard_normals(seed, start, count, stream)


@dataclass(frozen=True)
class NoisePath:
    """A fixed noise realization: i.i.d. ``N(0, h)`` increments.

    Increments are materialized lazily on first access; :meth:`chunk` reads
    any sub-range directly from the generator without touching the cache.
    """

    seed: int
    h: float
    length: int
    stream: int = 0
    _data: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError(f"step size must be positive, got {self.h}")
        if self.length < 1:
            raise ValueError(f"length must be at least 1, got {self.length}")

    @property
    def duration(self):
        return self.length * self.h

    @cached_property
    def increments(self):
        if self._data is not None:
            data = np.array(self._data, dtype=np.float64)
        else:
            data = increments(self.seed, self.h, 0, self.length, self.stream)
        data.setflags(write=False)
        return data

    def chunk(self, start, stop):
        if not 0 <= start <= stop <= self.length:
            raise IndexError(f"chunk [{start}, {stop}) outside [0, {self.length}]")
        if self._data is not None:
            return np.array(self._data[start:stop], dtype=np.float64)
        return increments(self.seed, self.h, start, stop - start, self.stream)

    def steps_for(self, t_end, h=None):
        """Number of steps of size ``h`` (default: own step) covering ``t_end``."""
        h = self.h if h is None else h
        n = int(round(t_end / h))
        if n * h > self.duration * (1 + 1e-12):
            raise ValueError(
                f"noise path covers t <= {self.duration:g}, requested {t_end:g}")
        return n


def generate(seed, h, length, stream=0):
    """Return the noise path for ``(seed, h, length)``; always the same numbers."""
    return NoisePath(int(seed), float(h), int(length), int(stream))


def generate_ensemble(seed, h, length, n_paths):
    """Increments of ``n_paths`` independent paths, shape ``(length, n_paths)``.

    Column ``k`` is bit-identical to ``generate(seed, h, length, stream=k)``.
    """
    cols = [increments(seed, h, 0, length, k) for k in range(n_paths)]
    return np.stack(cols, axis=1)


def partial_sum(path, n):
    """``W(t_n)``, the sum of the first ``n`` increments.

    For a :class:`RescaledPath` this is ``eps^(-1/2)`` times the base sum.
    """
    if not 0 <= n <= path.length:
        raise IndexError(f"n={n} outside [0, {path.length}]")
    if n == 0:
        return 0.0
    if isinstance(path, RescaledPath):
        return path.epsilon**-0.5 * partial_sum(path.base, n)
    return float(np.sum(path.increments[:n]))


def coarsen(dW, factor):
    """Sum consecutive groups of ``factor`` increments (leading axis)."""
    dW = np.asarray(dW)
    n = dW.shape[0] // factor
    return dW[: n * factor].reshape((n, factor) + dW.shape[1:]).sum(axis=1)


@dataclass(frozen=True)
class RescaledPath:
    """Fast-time path ``W~(tau) = eps^(-1/2) W(eps tau)``.

    If the base path has slow-time step ``h`` then, in fast time, the same
    index corresponds to step ``h / eps``, and the rescaled increments have
    variance ``h / eps``: the path is again a standard Wiener path.
    """

    base: NoisePath
    epsilon: float

    @property
    def h(self):
        return self.base.h / self.epsilon

    @property
    def length(self):
        return self.base.length

    @property
    def duration(self):
        return self.length * self.h

    @cached_property
    def increments(self):
        out = self.base.increments * self.epsilon**-0.5
        out.setflags(write=False)
        return out

    def chunk(self, start, stop):
        return self.base.chunk(start, stop) * self.epsilon**-0.5


def rescale(path, epsilon):
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    return RescaledPath(path, float(epsilon))


def dump(path, file):
    """Write a path as a little-endian binary file.

    Layout: magic ``BRWN``, uint32 stream version, uint64 seed, uint64 stream,
    float64 h, uint64 length, then ``length`` float64 increments.
    """
    header = _HEADER.pack(_MAGIC, STREAM_VERSION, path.seed & _MASK64,
                          path.stream & _MASK64, path.h, path.length)
    with open(file, "wb") as fh:
        fh.write(header)
        fh.write(np.asarray(path.increments, dtype="<f8").tobytes())


def load(file):
    with open(file, "rb") as fh:
        header = fh.read(_HEADER.size)
        magic, version, seed, stream, h, length = _HEADER.unpack(header)
        if magic != _MAGIC:
            raise ValueError(f"{file}: not a noise path dump")
        if version != STREAM_VERSION:
            raise ValueError(f"{file}: stream version {version}, expected {STREAM_VERSION}")
        data = np.frombuffer(fh.read(8 * length), dtype="<f8")
    if data.size != length:
        raise ValueError(f"{file}: truncated, {data.size} of {length} increments")
    return NoisePath(seed, h, length, stream, _data=data.astype(np.float64))
