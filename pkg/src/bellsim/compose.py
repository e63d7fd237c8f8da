"""Pair halves and their compound machines.

A half sits on one side of a two-party arrangement: it reads the triple
input (a, b, lambda) and emits -1 or 1.  Composing a left ("a") half with a
right ("b") half yields an ordinary machine over the product state set whose
branch probabilities (or amplitudes) are products of the halves'.

Canonical label conventions, used everywhere tuples become symbols:
selection alphabets are ("0", "1"); half outputs are ("-1", "1"); a tuple
label is the comma-joined parts in parentheses with no spaces, and product
enumerations are left-major.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .core import (
    Alphabet,
    BellsimError,
    Distribution,
    NotNormalizedError,
    NORM_TOL,
    validate_distribution,
)
from .fpsm import Fpsm, validate_fpsm
from .fqsm import Fqsm, validate_fqsm

SELECTIONS = Alphabet(("0", "1"))
HALF_OUTPUTS = Alphabet(("-1", "1"))

INDEPENDENCE_TOL = 1e-9
PRODUCT_RANK_TOL = 1e-9


class AlphabetMismatchError(BellsimError):
    pass


class DependsOnRemoteError(BellsimError):
    def __init__(self, witness: "Witness"):
        super().__init__(f"half is not independent of the remote selection: {witness}")
        self.witness = witness


def tuple_label(parts) -> str:
    return "(" + ",".join(parts) + ")"


def split_tuple_label(label: str) -> tuple[str, ...]:
    if not (label.startswith("(") and label.endswith(")")):
        raise BellsimError(f"not a tuple label: {label!r}")
    return tuple(label[1:-1].split(","))


def product_alphabet(left: Alphabet, right: Alphabet) -> Alphabet:
    return Alphabet(tuple(tuple_label((x, y)) for x in left for y in right))

JOINT_OUTPUTS = product_alphabet(HALF_OUTPUTS, HALF_OUTPUTS)


def output_value(label: str) -> int:
    v = int(label)
    if v not in (-1, 1):
        raise BellsimError(f"output label {label!r} is not -1 or 1")
    return v


def joint_output_values(label: str) -> tuple[int, int]:
    a_part, b_part = split_tuple_label(label)
    return output_value(a_part), output_value(b_part)


def bell_input_alphabet(lambda_alphabet: Alphabet) -> Alphabet:
    """All (a, b, lambda) triples, lexicographic with a outermost."""
    labels = tuple(
        tuple_label((sa, sb, lam))
        for sa, sb in itertools.product(SELECTIONS, SELECTIONS)
        for lam in lambda_alphabet
    )
    return Alphabet(labels)


def bell_input_index(a: int, b: int, lam: int, n_lambda: int) -> int:
    return (a * 2 + b) * n_lambda + lam


@dataclass(frozen=True, eq=False)
class HalfFpsm:
    """One probabilistic side: inputs (a, b, lambda), outputs {-1, 1}."""

    fpsm: Fpsm
    own_role: str
    lambda_alphabet: Alphabet

    def __post_init__(self):
        if self.own_role not in ("a", "b"):
            raise BellsimError(f"own_role must be 'a' or 'b', got {self.own_role!r}")
        if self.fpsm.inputs != bell_input_alphabet(self.lambda_alphabet):
            raise AlphabetMismatchError(
                "half inputs must be the canonical (a, b, lambda) triples"
            )
        if self.fpsm.outputs != HALF_OUTPUTS:
            raise AlphabetMismatchError('half outputs must be ("-1", "1")')

    @property
    def remote_role(self) -> str:
        return "b" if self.own_role == "a" else "a"

    def prob(self, o: int, t: int, a: int, b: int, lam: int, s: int) -> float:
        i = bell_input_index(a, b, lam, len(self.lambda_alphabet))
        return self.fpsm.prob(o, t, i, s)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, HalfFpsm)
            and self.own_role == other.own_role
            and self.lambda_alphabet == other.lambda_alphabet
            and self.fpsm == other.fpsm
        )


@dataclass(frozen=True, eq=False)
class HalfFqsm:
    """One quantum side: inputs are the own selection only, outputs {-1, 1}."""

    fqsm: Fqsm

    def __post_init__(self):
        if self.fqsm.inputs != SELECTIONS:
            raise AlphabetMismatchError('quantum half inputs must be ("0", "1")')
        if self.fqsm.outputs != HALF_OUTPUTS:
            raise AlphabetMismatchError('half outputs must be ("-1", "1")')

    def __eq__(self, other) -> bool:
        return isinstance(other, HalfFqsm) and self.fqsm == other.fqsm


@dataclass(frozen=True)
class Witness:
    """One table cell whose value changes with the remote selection."""

    output: str
    next_state: str
    own_input: str
    lam: str
    state: str
    value_remote0: float
    value_remote1: float

    def __str__(self) -> str:
        return (
            f"p({self.output}, {self.next_state} | own={self.own_input}, "
            f"lambda={self.lam}, s={self.state}) = {self.value_remote0!r} "
            f"with remote=0 but {self.value_remote1!r} with remote=1"
        )


@dataclass(frozen=True)
class IndependenceReport:
    independent: bool
    witness: Witness | None

    def __post_init__(self):
        if self.independent == (self.witness is not None):
            raise BellsimError("witness must be present iff not independent")


def check_remote_independence(
    h: HalfFpsm, remote_role: str | None = None
) -> IndependenceReport:
    """Scan for the first cell (lexicographic in o, t, own, lambda, s) that
    differs across the remote selection by more than INDEPENDENCE_TOL."""
    if remote_role is not None and remote_role != h.remote_role:
        raise BellsimError(
            f"remote of an '{h.own_role}' half is '{h.remote_role}', not {remote_role!r}"
        )
    nl = len(h.lambda_alphabet)
    ns = len(h.fpsm.states)
    for o in range(2):
        for t in range(ns):
            for own in range(2):
                for lam in range(nl):
                    for s in range(ns):
                        if h.own_role == "a":
                            i0 = bell_input_index(own, 0, lam, nl)
                            i1 = bell_input_index(own, 1, lam, nl)
                        else:
                            i0 = bell_input_index(0, own, lam, nl)
                            i1 = bell_input_index(1, own, lam, nl)
                        v0 = h.fpsm.prob(o, t, i0, s)
                        v1 = h.fpsm.prob(o, t, i1, s)
                        if abs(v0 - v1) > INDEPENDENCE_TOL:
                            w = Witness(
                                output=h.fpsm.outputs[o],
                                next_state=h.fpsm.states[t],
                                own_input=SELECTIONS[own],
                                lam=h.lambda_alphabet[lam],
                                state=h.fpsm.states[s],
                                value_remote0=v0,
                                value_remote1=v1,
                            )
                            return IndependenceReport(independent=False, witness=w)
    return IndependenceReport(independent=True, witness=None)


@dataclass(frozen=True, eq=False)
class ProductInit:
    left: Distribution
    right: Distribution

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ProductInit)
            and self.left == other.left
            and self.right == other.right
        )


@dataclass(frozen=True, eq=False)
class JointInit:
    """Distribution over the product state set, left-major."""

    dist: Distribution
    n_left: int
    n_right: int

    def __post_init__(self):
        if self.dist.size != self.n_left * self.n_right:
            raise BellsimError(
                f"joint init has {self.dist.size} weights for "
                f"{self.n_left} x {self.n_right} states"
            )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, JointInit)
            and (self.n_left, self.n_right) == (other.n_left, other.n_right)
            and self.dist == other.dist
        )


@dataclass(frozen=True, eq=False)
class ProductAmplitude:
    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        for attr in ("left", "right"):
            v = np.array(getattr(self, attr), dtype=np.complex128, copy=True)
            if v.ndim != 1:
                raise BellsimError("amplitude vectors must be one-dimensional")
            v.setflags(write=False)
            object.__setattr__(self, attr, v)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ProductAmplitude)
            and np.array_equal(self.left, other.left)
            and np.array_equal(self.right, other.right)
        )


@dataclass(frozen=True, eq=False)
class EntangledAmplitude:
    """Amplitude vector over the product state set, left-major."""

    psi: np.ndarray
    n_left: int
    n_right: int

    def __post_init__(self):
        psi = np.array(self.psi, dtype=np.complex128, copy=True)
        if psi.shape != (self.n_left * self.n_right,):
            raise BellsimError(
                f"joint amplitude has {psi.shape[0]} entries for "
                f"{self.n_left} x {self.n_right} states"
            )
        psi.setflags(write=False)
        object.__setattr__(self, "psi", psi)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, EntangledAmplitude)
            and (self.n_left, self.n_right) == (other.n_left, other.n_right)
            and np.array_equal(self.psi, other.psi)
        )


def is_product_init(init, n_left: int | None = None, n_right: int | None = None) -> bool:
    """True iff the joint initial condition factorizes across the two sides.

    Product containers are products by construction.  Joint containers are
    reshaped to (left, right) and pass iff rank one within PRODUCT_RANK_TOL,
    measured as the squared singular value mass beyond the first.
    """
    if isinstance(init, (ProductInit, ProductAmplitude)):
        return True
    if isinstance(init, JointInit):
        vec, n_left, n_right = init.dist.weights, init.n_left, init.n_right
    elif isinstance(init, EntangledAmplitude):
        vec, n_left, n_right = init.psi, init.n_left, init.n_right
    else:
        vec = np.asarray(init)
        if n_left is None or n_right is None:
            raise BellsimError("n_left and n_right are required for a bare vector")
    m = vec.reshape(n_left, n_right)
    sv = np.linalg.svd(m, compute_uv=False)
    tail = float(np.sum(sv**2) - sv[0] ** 2)
    return tail <= PRODUCT_RANK_TOL


@dataclass(frozen=True, eq=False)
class CompoundFpsm:
    """Two probabilistic halves glued over a shared lambda, as one machine."""

    left: HalfFpsm
    right: HalfFpsm
    init: ProductInit | JointInit
    fpsm: Fpsm = field(repr=False)

    @property
    def lambda_alphabet(self) -> Alphabet:
        return self.left.lambda_alphabet

    def __eq__(self, other) -> bool:
        # the materialized fpsm is derived, so halves plus init decide equality
        return (
            isinstance(other, CompoundFpsm)
            and self.left == other.left
            and self.right == other.right
            and self.init == other.init
        )


def compose_fpsm(
    left: HalfFpsm, right: HalfFpsm, init: ProductInit | JointInit | None = None
) -> CompoundFpsm:
    """Materialize the compound of an "a" half and a "b" half.

    With no explicit init the halves' own initial distributions are used as
    a product.  An explicit product init becomes the halves' distributions;
    under a joint init they carry a point mass on state 0 as a placeholder.
    The compound table is the cellwise product; it is stochastic whenever
    the halves are, and validate_fpsm re-checks it here.
    """
    if left.own_role != "a" or right.own_role != "b":
        raise AlphabetMismatchError(
            f"compose expects roles (a, b), got ({left.own_role!r}, {right.own_role!r})"
        )
    if left.lambda_alphabet != right.lambda_alphabet:
        raise AlphabetMismatchError("halves disagree on the lambda alphabet")
    nsa, nsb = len(left.fpsm.states), len(right.fpsm.states)
    if init is None:
        init = ProductInit(left.fpsm.p0, right.fpsm.p0)
    if isinstance(init, ProductInit):
        if init.left.size != nsa or init.right.size != nsb:
            raise BellsimError("product init sizes do not match the halves")
        validate_distribution(init.left)
        validate_distribution(init.right)
        # a product init is the halves' own start distributions, so they
        # adopt it; serialize and parse then rebuild this exact object
        left = replace(left, fpsm=replace(left.fpsm, p0=init.left))
        right = replace(right, fpsm=replace(right.fpsm, p0=init.right))
        p0 = Distribution(np.outer(init.left.weights, init.right.weights).reshape(-1))
    elif isinstance(init, JointInit):
        if (init.n_left, init.n_right) != (nsa, nsb):
            raise BellsimError("joint init shape does not match the halves")
        # under a joint init the halves' own p0 has no role and documents
        # do not store it; pin the placeholder the parser builds
        left = replace(left, fpsm=replace(left.fpsm, p0=Distribution.point_mass(nsa, 0)))
        right = replace(right, fpsm=replace(right.fpsm, p0=Distribution.point_mass(nsb, 0)))
        p0 = init.dist
    else:
        raise BellsimError(f"unsupported init {type(init).__name__} for fpsm halves")
    table = np.einsum(
        "iaxu,ibyv->iabxyuv", left.fpsm.table, right.fpsm.table
    ).reshape(len(left.fpsm.inputs), nsa * nsb, 4, nsa * nsb)
    compound = Fpsm(
        inputs=left.fpsm.inputs,
        outputs=JOINT_OUTPUTS,
        states=product_alphabet(left.fpsm.states, right.fpsm.states),
        p0=p0,
        table=table,
    )
    validate_fpsm(compound)
    return CompoundFpsm(left=left, right=right, init=init, fpsm=compound)


_TRIVIAL_LAMBDA = Alphabet(("l0",))


@dataclass(frozen=True, eq=False)
class CompoundFqsm:
    """Two quantum halves as one machine over the product state set."""

    left: HalfFqsm
    right: HalfFqsm
    init: ProductAmplitude | EntangledAmplitude
    fqsm: Fqsm = field(repr=False)

    @property
    def lambda_alphabet(self) -> Alphabet:
        return _TRIVIAL_LAMBDA

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CompoundFqsm)
            and self.left == other.left
            and self.right == other.right
            and self.init == other.init
        )


def compose_fqsm(
    left: HalfFqsm,
    right: HalfFqsm,
    init: ProductAmplitude | EntangledAmplitude | None = None,
) -> CompoundFqsm:
    """Tensor two quantum halves; the compound reads inputs "(a,b)".

    A product init becomes the halves' own initial vectors (each side must
    be unit norm).  Under an entangled init no per-half vector exists, so
    the stored halves carry the basis state 0 as a placeholder.
    """
    nsa, nsb = len(left.fqsm.states), len(right.fqsm.states)
    if init is None:
        init = ProductAmplitude(left.fqsm.psi0, right.fqsm.psi0)
    if isinstance(init, ProductAmplitude):
        la = np.asarray(init.left, dtype=np.complex128)
        ra = np.asarray(init.right, dtype=np.complex128)
        if la.shape != (nsa,) or ra.shape != (nsb,):
            raise BellsimError("product amplitude sizes do not match the halves")
        for side, vec in (("left", la), ("right", ra)):
            n2 = float(np.sum(np.abs(vec) ** 2))
            if abs(n2 - 1.0) > NORM_TOL:
                raise NotNormalizedError(
                    n2, what=f"squared amplitudes of the {side} init"
                )
        left = HalfFqsm(fqsm=replace(left.fqsm, psi0=la))
        right = HalfFqsm(fqsm=replace(right.fqsm, psi0=ra))
        init = ProductAmplitude(la, ra)
        psi0 = np.outer(la, ra).reshape(-1)
    elif isinstance(init, EntangledAmplitude):
        if (init.n_left, init.n_right) != (nsa, nsb):
            raise BellsimError("joint amplitude shape does not match the halves")
        # no per-half vector exists under entanglement; pin the placeholder
        # the parser builds so serialize and parse rebuild this exact object
        ea = np.zeros(nsa, dtype=np.complex128)
        ea[0] = 1.0
        eb = np.zeros(nsb, dtype=np.complex128)
        eb[0] = 1.0
        left = HalfFqsm(fqsm=replace(left.fqsm, psi0=ea))
        right = HalfFqsm(fqsm=replace(right.fqsm, psi0=eb))
        psi0 = init.psi
    else:
        raise BellsimError(f"unsupported init {type(init).__name__} for fqsm halves")
    norm = float(np.sum(np.abs(psi0) ** 2))
    if abs(norm - 1.0) > NORM_TOL:
        raise NotNormalizedError(norm, what="squared amplitudes of the joint init")
    phi = np.einsum(
        "aixu,bjyv->abijxyuv", left.fqsm.phi, right.fqsm.phi
    ).reshape(4, nsa * nsb, 4, nsa * nsb)
    compound = Fqsm(
        inputs=product_alphabet(SELECTIONS, SELECTIONS),
        outputs=JOINT_OUTPUTS,
        states=product_alphabet(left.fqsm.states, right.fqsm.states),
        psi0=psi0,
        phi=phi,
    )
    validate_fqsm(compound)
    return CompoundFqsm(left=left, right=right, init=init, fqsm=compound)
