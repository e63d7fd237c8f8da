"""Finite probabilistic sequential machines and the deterministic special case.

A machine is a tuple (inputs, outputs, states, p0, table) where
``table[i, s, o, t]`` is the probability of emitting output ``o`` and moving
to state ``t`` when reading input ``i`` in state ``s``.  Storage is
(input, state)-major; the flattened branch order for one (i, s) cell is
output-major, i.e. ``(o, t)`` with ``t`` fastest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    NORM_TOL,
    Alphabet,
    BellsimError,
    Distribution,
    IndexOutOfRangeError,
    NegativeWeightError,
    NotNormalizedError,
    RngStream,
    sample,
    validate_distribution,
)


class BadInitialDistributionError(BellsimError):
    pass


class RowNotStochasticError(BellsimError):
    """Raised with symbol labels, not indices, so the message names the
    offending table row the way the source document spells it."""

    def __init__(self, i: str, s: str, total: float):
        super().__init__(
            f"branch weights for (input={i}, state={s}) sum to {total!r}, "
            f"expected 1 within {NORM_TOL}"
        )
        self.i = i
        self.s = s
        self.total = total


class NegativeEntryError(BellsimError):
    def __init__(self, o: str, t: str, i: str, s: str, value: float):
        super().__init__(f"p(o={o}, t={t} | i={i}, s={s}) = {value!r} is negative")
        self.coords = (o, t, i, s)
        self.value = value


class NotDeterministicError(BellsimError):
    pass


def _own_table(table, expected_shape: tuple[int, ...], dtype) -> np.ndarray:
    a = np.array(table, dtype=dtype, copy=True)
    if a.shape != expected_shape:
        raise BellsimError(f"table shape {a.shape} != expected {expected_shape}")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Fpsm:
    """Probabilistic machine with table layout (inputs, states, outputs, states)."""

    inputs: Alphabet
    outputs: Alphabet
    states: Alphabet
    p0: Distribution
    table: np.ndarray

    def __post_init__(self):
        shape = (len(self.inputs), len(self.states), len(self.outputs), len(self.states))
        object.__setattr__(self, "table", _own_table(self.table, shape, np.float64))
        if self.p0.size != len(self.states):
            raise BellsimError(
                f"p0 has {self.p0.size} weights for {len(self.states)} states"
            )

    def prob(self, o: int, t: int, i: int, s: int) -> float:
        return float(self.table[i, s, o, t])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Fpsm)
            and self.inputs == other.inputs
            and self.outputs == other.outputs
            and self.states == other.states
            and self.p0 == other.p0
            and np.array_equal(self.table, other.table)
        )


def validate_fpsm(m: Fpsm) -> None:
    """Check p0 and every (input, state) branch row for stochasticity."""
    try:
        validate_distribution(m.p0)
    except (NegativeWeightError, NotNormalizedError) as exc:
        raise BadInitialDistributionError(f"initial distribution: {exc}") from exc
    for i in range(len(m.inputs)):
        for s in range(len(m.states)):
            block = m.table[i, s]
            neg = np.argwhere(block < 0.0)
            if neg.size:
                o, t = (int(x) for x in neg[0])
                raise NegativeEntryError(
                    m.outputs[o], m.states[t], m.inputs[i], m.states[s],
                    float(block[o, t]),
                )
            total = float(block.sum())
            if abs(total - 1.0) > NORM_TOL:
                raise RowNotStochasticError(m.inputs[i], m.states[s], total)


def output_distribution(m: Fpsm, i: int, s: int) -> Distribution:
    """Distribution over (output, next state) branches, output-major."""
    if not 0 <= i < len(m.inputs):
        raise IndexOutOfRangeError("input", i, len(m.inputs))
    if not 0 <= s < len(m.states):
        raise IndexOutOfRangeError("state", s, len(m.states))
    return Distribution(m.table[i, s].reshape(-1))


@dataclass(frozen=True)
class StepResult:
    output: int
    next_state: int


def step(m: Fpsm, i: int, s: int, r: RngStream) -> StepResult:
    """One transition; consumes exactly one uniform from ``r``."""
    k = sample(output_distribution(m, i, s), r)
    o, t = divmod(k, len(m.states))
    return StepResult(output=o, next_state=t)


def _near_binary(a: np.ndarray) -> bool:
    return bool(np.all(np.minimum(np.abs(a), np.abs(a - 1.0)) <= NORM_TOL))


def is_deterministic(m: Fpsm) -> bool:
    """True iff p0 and every table entry is 0 or 1 within NORM_TOL."""
    return _near_binary(m.p0.weights) and _near_binary(m.table)


@dataclass(frozen=True, eq=False)
class Dsm:
    """Deterministic machine: one (output, next state) per (input, state)."""

    inputs: Alphabet
    outputs: Alphabet
    states: Alphabet
    s0: int
    out_sym: np.ndarray
    next_state: np.ndarray

    def __post_init__(self):
        shape = (len(self.inputs), len(self.states))
        object.__setattr__(self, "out_sym", _own_table(self.out_sym, shape, np.int64))
        object.__setattr__(self, "next_state", _own_table(self.next_state, shape, np.int64))
        if not 0 <= self.s0 < len(self.states):
            raise IndexOutOfRangeError("initial state", self.s0, len(self.states))
        if np.any(self.out_sym < 0) or np.any(self.out_sym >= len(self.outputs)):
            raise BellsimError("output map entry outside output alphabet")
        if np.any(self.next_state < 0) or np.any(self.next_state >= len(self.states)):
            raise BellsimError("transition map entry outside state alphabet")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Dsm)
            and self.inputs == other.inputs
            and self.outputs == other.outputs
            and self.states == other.states
            and self.s0 == other.s0
            and np.array_equal(self.out_sym, other.out_sym)
            and np.array_equal(self.next_state, other.next_state)
        )


def to_dsm(m: Fpsm) -> Dsm:
    """Collapse a {0,1}-valued machine to its deterministic form."""
    if not is_deterministic(m):
        raise NotDeterministicError("machine has a table entry strictly between 0 and 1")
    validate_fpsm(m)
    s0 = int(np.argmax(m.p0.weights))
    ni, ns = len(m.inputs), len(m.states)
    out_sym = np.zeros((ni, ns), dtype=np.int64)
    next_state = np.zeros((ni, ns), dtype=np.int64)
    for i in range(ni):
        for s in range(ns):
            flat = int(np.argmax(m.table[i, s]))
            out_sym[i, s], next_state[i, s] = divmod(flat, ns)
    return Dsm(m.inputs, m.outputs, m.states, s0, out_sym, next_state)


def from_dsm(d: Dsm) -> Fpsm:
    """Embed a deterministic machine as a {0,1}-valued probabilistic one."""
    ni, ns, no = len(d.inputs), len(d.states), len(d.outputs)
    table = np.zeros((ni, ns, no, ns))
    for i in range(ni):
        for s in range(ns):
            table[i, s, d.out_sym[i, s], d.next_state[i, s]] = 1.0
    return Fpsm(d.inputs, d.outputs, d.states, Distribution.point_mass(ns, d.s0), table)
