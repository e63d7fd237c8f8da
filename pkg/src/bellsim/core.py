"""Shared primitives: symbol alphabets, finite distributions, seeded streams.

Symbols are opaque string labels.  Every table in the package is indexed by
position in a declared :class:`Alphabet`, and iteration order is always
declaration order, so results never depend on hashing or locale.

Random streams are counter-based: draw ``k`` of stream ``j`` is a pure
function of ``(master_seed, j, k)``.  Parallel workers therefore never share
generator state, and a run's draws do not depend on how runs are batched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-9

_M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB


class BellsimError(Exception):
    """Base class for every error raised by this package."""


class NegativeWeightError(BellsimError):
    def __init__(self, index: int, weight: float):
        super().__init__(f"weight[{index}] = {weight!r} is negative")
        self.index = index
        self.weight = weight


class NotNormalizedError(BellsimError):
    def __init__(self, total: float, what: str = "weights"):
        super().__init__(f"{what} sum to {total!r}, expected 1 within {NORM_TOL}")
        self.total = total


class IndexOutOfRangeError(BellsimError):
    def __init__(self, what: str, index: int, size: int):
        super().__init__(f"{what} index {index} outside [0, {size})")
        self.what = what
        self.index = index
        self.size = size


@dataclass(frozen=True)
class Alphabet:
    """Ordered, duplicate-free tuple of symbol labels."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(str(s) for s in self.symbols))
        if not self.symbols:
            raise BellsimError("alphabet must not be empty")
        index = {}
        for j, sym in enumerate(self.symbols):
            if sym in index:
                raise BellsimError(f"duplicate symbol {sym!r} in alphabet")
            index[sym] = j
        object.__setattr__(self, "_index", index)

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise BellsimError(f"unknown symbol {label!r}") from None

    def __contains__(self, label: str) -> bool:
        return label in self._index

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __getitem__(self, j: int) -> str:
        return self.symbols[j]


def _own_float_array(values, shape_name: str) -> np.ndarray:
    a = np.array(values, dtype=np.float64, copy=True)
    if a.ndim != 1:
        raise BellsimError(f"{shape_name} must be one-dimensional")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability weights over one alphabet, addressed by symbol index."""

    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", _own_float_array(self.weights, "weights"))

    @staticmethod
    def point_mass(size: int, index: int) -> "Distribution":
        if not 0 <= index < size:
            raise IndexOutOfRangeError("point mass", index, size)
        w = np.zeros(size)
        w[index] = 1.0
        return Distribution(w)

    @staticmethod
    def uniform(size: int) -> "Distribution":
        return Distribution(np.full(size, 1.0 / size))

    @property
    def size(self) -> int:
        return int(self.weights.shape[0])

    def __eq__(self, other) -> bool:
        return isinstance(other, Distribution) and np.array_equal(
            self.weights, other.weights
        )


def validate_distribution(d: Distribution) -> None:
    """Raise unless all weights are nonnegative and sum to 1 within NORM_TOL."""
    for j, w in enumerate(d.weights):
        if w < 0.0:
            raise NegativeWeightError(j, float(w))
    total = math.fsum(d.weights)
    if abs(total - 1.0) > NORM_TOL:
        raise NotNormalizedError(total)


def _mix64(z: int) -> int:
    """Finalizer that scrambles one 64-bit word (splitmix64 construction)."""
    z &= _M64
    z = ((z ^ (z >> 30)) * _MIX_A) & _M64
    z = ((z ^ (z >> 27)) * _MIX_B) & _M64
    return z ^ (z >> 31)


def _stream_base(master_seed: int, stream_index: int) -> int:
    return _mix64(((_mix64(master_seed) + _GOLDEN) & _M64) ^ _mix64(stream_index))


@dataclass
class RngStream:
    """Counter-based uniform stream.

    Draw ``k`` (0-based) returns ``mix64(base + (k+1)*GOLDEN)`` where ``base``
    derives from ``(master_seed, stream_index)``; equality and repr expose the
    three coordinates only.
    """

    master_seed: int
    stream_index: int
    counter: int = 0

    def __post_init__(self):
        self.master_seed &= _M64
        self.stream_index &= _M64
        object.__setattr__(self, "_base", _stream_base(self.master_seed, self.stream_index))

    def next_u64(self) -> int:
        self.counter += 1
        return _mix64((self._base + self.counter * _GOLDEN) & _M64)

    def next_float(self) -> float:
        """Uniform in [0, 1) from the top 53 bits of the next word."""
        return (self.next_u64() >> 11) * 2.0**-53


def substream(master_seed: int, stream_index: int) -> RngStream:
    """Fresh stream for one run; streams with distinct indices are independent."""
    return RngStream(master_seed, stream_index)


def sample(d: Distribution, r: RngStream) -> int:
    """Draw one index by cumulative inversion in declaration order.

    Consumes exactly one uniform.  If accumulated rounding leaves the uniform
    above the final cumulative weight, the last positive-weight index wins.
    """
    u = r.next_float()
    acc = 0.0
    last_positive = -1
    for j, w in enumerate(d.weights):
        # "increased the cumulative" rather than "w > 0" so the fallback
        # index agrees bit for bit with the kernels' cumulative tables
        new_acc = acc + w
        if new_acc > acc:
            last_positive = j
        acc = new_acc
        if u < acc:
            return j
    if last_positive < 0:
        raise BellsimError("cannot sample from all-zero weights")
    return last_positive
