"""Finite quantum sequential machines.

Same table layout as the probabilistic case but with complex amplitudes:
``phi[i, s, o, t]`` is the amplitude for branch (o, t) on input ``i`` from
state ``s``, and ``psi0`` is the initial state vector.  The probability of
observing output ``o`` on input ``i`` sums |amplitude|^2 over next states
outside the modulus, matching a measurement after every step.
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
    NotNormalizedError,
    RngStream,
    sample,
)
from .fpsm import _own_table


class NonFiniteAmplitudeError(BellsimError):
    pass


class NotIsometryError(BellsimError):
    def __init__(self, i: str, deviation: float):
        super().__init__(
            f"transition amplitudes for input {i} are not an isometry "
            f"(max |V*V - I| = {deviation:.3e})"
        )
        self.i = i
        self.deviation = deviation


@dataclass(frozen=True, eq=False)
class Fqsm:
    """Quantum machine with amplitude layout (inputs, states, outputs, states)."""

    inputs: Alphabet
    outputs: Alphabet
    states: Alphabet
    psi0: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        ns = len(self.states)
        psi = np.array(self.psi0, dtype=np.complex128, copy=True)
        if psi.shape != (ns,):
            raise BellsimError(f"psi0 shape {psi.shape} != ({ns},)")
        psi.setflags(write=False)
        object.__setattr__(self, "psi0", psi)
        shape = (len(self.inputs), ns, len(self.outputs), ns)
        object.__setattr__(self, "phi", _own_table(self.phi, shape, np.complex128))

    def amplitude(self, o: int, t: int, i: int, s: int) -> complex:
        return complex(self.phi[i, s, o, t])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Fqsm)
            and self.inputs == other.inputs
            and self.outputs == other.outputs
            and self.states == other.states
            and np.array_equal(self.psi0, other.psi0)
            and np.array_equal(self.phi, other.phi)
        )


def validate_fqsm(q: Fqsm) -> None:
    """Check psi0 normalization and that each input's transition is an isometry.

    The isometry check (columns orthonormal, not just unit-norm) is what keeps
    every reachable state vector normalized, so it is enforced here even
    though it is stronger than preserving the initial vector alone.
    """
    if not np.all(np.isfinite(q.psi0)):
        raise NonFiniteAmplitudeError("psi0 contains a non-finite amplitude")
    if not np.all(np.isfinite(q.phi)):
        raise NonFiniteAmplitudeError("phi contains a non-finite amplitude")
    norm = float(np.sum(np.abs(q.psi0) ** 2))
    if abs(norm - 1.0) > NORM_TOL:
        raise NotNormalizedError(norm, what="squared amplitudes of psi0")
    ns = len(q.states)
    for i in range(len(q.inputs)):
        # V[(o,t), s] = phi[i, s, o, t]
        v = q.phi[i].reshape(ns, -1).T
        gram = v.conj().T @ v
        dev = float(np.max(np.abs(gram - np.eye(ns))))
        if dev > NORM_TOL:
            raise NotIsometryError(q.inputs[i], dev)


def branch_amplitude(q: Fqsm, o: int, t: int, i: int) -> complex:
    """Amplitude of the (o, t) branch from the current initial vector."""
    if not 0 <= i < len(q.inputs):
        raise IndexOutOfRangeError("input", i, len(q.inputs))
    if not 0 <= o < len(q.outputs):
        raise IndexOutOfRangeError("output", o, len(q.outputs))
    if not 0 <= t < len(q.states):
        raise IndexOutOfRangeError("state", t, len(q.states))
    return complex(np.dot(q.phi[i, :, o, t], q.psi0))


def branch_probabilities(q: Fqsm, i: int) -> np.ndarray:
    """|amplitude|^2 per (o, t) branch, flattened output-major."""
    if not 0 <= i < len(q.inputs):
        raise IndexOutOfRangeError("input", i, len(q.inputs))
    amps = np.tensordot(q.psi0, q.phi[i], axes=(0, 0))
    return np.abs(amps.reshape(-1)) ** 2


def outcome_probability(q: Fqsm, o: int, i: int) -> float:
    """Probability of output ``o`` on input ``i``: next states summed outside
    the modulus."""
    if not 0 <= o < len(q.outputs):
        raise IndexOutOfRangeError("output", o, len(q.outputs))
    probs = branch_probabilities(q, i).reshape(len(q.outputs), len(q.states))
    return float(np.sum(probs[o]))


@dataclass(frozen=True)
class QStepResult:
    output: int
    next_state: int
    post_psi: np.ndarray


def step_q(q: Fqsm, i: int, r: RngStream) -> QStepResult:
    """Measure one step; consumes exactly one uniform.

    The post-measurement vector is the point mass on the observed next state.
    """
    probs = branch_probabilities(q, i)
    k = sample(Distribution(probs), r)
    o, t = divmod(k, len(q.states))
    post = np.zeros(len(q.states), dtype=np.complex128)
    post[t] = 1.0
    return QStepResult(output=o, next_state=t, post_psi=post)
