"""Two-party test harness: the run protocol, exact statistics, and oracles.

One run of the protocol prepares the machine, draws the shared symbol
lambda and the two selections a and b, performs a single step on the triple
input, and records the +-1 pair (A, B).  Aggregation keeps integer counts
and integer sums of the products A*B per (a, b) cell, so merging partial
results is exact and order-independent; estimates and the empirical CHSH
combination are formed only at reporting time.

Everything exact lives beside the sampled path: per-outcome probabilities
q(A, B | a, b), conditional expectations, the CHSH combination, and the
classical-bound oracles used to cross-check the sampled results.
"""

from __future__ import annotations

import math
import os
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import _kernels
from .compose import (
    JOINT_OUTPUTS,
    SELECTIONS,
    CompoundFpsm,
    CompoundFqsm,
    DependsOnRemoteError,
    HalfFpsm,
    IndependenceReport,
    Witness,
    bell_input_alphabet,
    bell_input_index,
    check_remote_independence,
    joint_output_values,
    product_alphabet,
    split_tuple_label,
)
from .core import (
    Alphabet,
    BellsimError,
    Distribution,
    RngStream,
    sample,
    substream,
)
from .fpsm import Fpsm, validate_fpsm
from .fqsm import Fqsm, branch_probabilities, outcome_probability, step_q, validate_fqsm

CLASSICAL_BOUND = 2.0
TSIRELSON_BOUND = 2.0 * math.sqrt(2.0)
ALGEBRAIC_BOUND = 4.0
CHSH_TOL = 1e-9

# seeds live in u64 space; the scalar mixer masks on entry, so folding here
# keeps arbitrary Python ints but hands the kernels a representable value
_MASK64 = 0xFFFFFFFFFFFFFFFF

_QUANTUM_PAIR_INPUTS = product_alphabet(SELECTIONS, SELECTIONS)


class MissingCellError(BellsimError):
    def __init__(self, a: int, b: int):
        super().__init__(f"no runs landed in cell (a={a}, b={b})")
        self.a = a
        self.b = b


class ValueOutOfRangeError(BellsimError):
    pass


class InternalContradictionError(BellsimError):
    """A mathematically impossible state; raising it means a bug, not bad input."""


def classify_chsh(value: float) -> str:
    v = abs(value)
    if v <= CLASSICAL_BOUND + CHSH_TOL:
        return "classical"
    if v <= TSIRELSON_BOUND + CHSH_TOL:
        return "superclassical"
    if v <= ALGEBRAIC_BOUND + CHSH_TOL:
        return "supraquantum"
    raise InternalContradictionError(f"CHSH value {value!r} above the algebraic bound")


@dataclass(frozen=True)
class ChshReport:
    """Conditional expectations E[AB | a, b] and their CHSH combination."""

    e00: float
    e01: float
    e10: float
    e11: float
    chsh: float
    classification: str

    @property
    def expectations(self) -> tuple[float, float, float, float]:
        return (self.e00, self.e01, self.e10, self.e11)


def chsh_report(e00: float, e01: float, e10: float, e11: float) -> ChshReport:
    # float() here keeps numpy scalars out of every report
    e00, e01, e10, e11 = float(e00), float(e01), float(e10), float(e11)
    value = e00 + e01 + e10 - e11
    return ChshReport(e00, e01, e10, e11, value, classify_chsh(value))


@dataclass(frozen=True)
class BellInputs:
    """Input-side distributions: selections a and b, shared symbol lambda."""

    dist_a: Distribution
    dist_b: Distribution
    dist_lambda: Distribution

    def __post_init__(self):
        if self.dist_a.size != 2 or self.dist_b.size != 2:
            raise BellsimError("selection distributions must have two weights")


@dataclass(frozen=True, eq=False)
class KernelTables:
    """Flattened cumulative tables the protocol loop consumes."""

    has_state_draw: bool
    init_cum: np.ndarray
    lambda_cum: np.ndarray
    a_cum: np.ndarray
    b_cum: np.ndarray
    step_cum: np.ndarray
    branch_prod: np.ndarray


class MachineUnderTest(ABC):
    """Anything the harness can drive: sampled steps plus exact probabilities."""

    @property
    @abstractmethod
    def lambda_alphabet(self) -> Alphabet: ...

    @abstractmethod
    def exact_q(self, A: int, B: int, a: int, b: int, dist_lambda: Distribution) -> float:
        """Exact probability of the outcome pair given the selections."""

    @abstractmethod
    def draw_init(self, r: RngStream):
        """Per-run preparation; consumes draws only if preparation is random."""

    @abstractmethod
    def step_prepared(self, prep, a: int, b: int, lam: int, r: RngStream) -> tuple[int, int]:
        """One step from the preparation; returns the +-1 pair (A, B)."""

    @abstractmethod
    def kernel_tables(self, inputs: BellInputs) -> KernelTables: ...


def _outcome_index(A: int, B: int) -> int:
    if A not in (-1, 1) or B not in (-1, 1):
        raise BellsimError(f"outcomes must be -1 or 1, got ({A}, {B})")
    return ((A + 1) // 2) * 2 + (B + 1) // 2


def _check_lambda_size(inputs: BellInputs, n_lambda: int) -> None:
    if inputs.dist_lambda.size != n_lambda:
        raise BellsimError(
            f"lambda distribution has {inputs.dist_lambda.size} weights "
            f"for {n_lambda} symbols"
        )


def _branch_products(n_states: int) -> np.ndarray:
    prods = np.empty(4 * n_states, dtype=np.int64)
    for o, label in enumerate(JOINT_OUTPUTS):
        va, vb = joint_output_values(label)
        prods[o * n_states : (o + 1) * n_states] = va * vb
    return prods


@dataclass(frozen=True, eq=False)
class BellFpsm(MachineUnderTest):
    """Probabilistic machine over (a, b, lambda) triples with +-1 pair outputs."""

    fpsm: Fpsm
    lam: Alphabet

    def __post_init__(self):
        if self.fpsm.inputs != bell_input_alphabet(self.lam):
            raise BellsimError("inputs are not the canonical (a, b, lambda) triples")
        if self.fpsm.outputs != JOINT_OUTPUTS:
            raise BellsimError("outputs are not the canonical +-1 pairs")
        validate_fpsm(self.fpsm)

    @staticmethod
    def wrap(m: Fpsm) -> "BellFpsm":
        return BellFpsm(m, lambda_of_bell_inputs(m.inputs))

    @property
    def lambda_alphabet(self) -> Alphabet:
        return self.lam

    def exact_q(self, A: int, B: int, a: int, b: int, dist_lambda: Distribution) -> float:
        o = _outcome_index(A, B)
        nl = len(self.lam)
        if dist_lambda.size != nl:
            raise BellsimError("lambda distribution does not match the machine")
        total = 0.0
        for lam in range(nl):
            w = float(dist_lambda.weights[lam])
            if w == 0.0:
                continue
            block = self.fpsm.table[bell_input_index(a, b, lam, nl), :, o, :]
            total += w * float(self.fpsm.p0.weights @ block.sum(axis=1))
        return total

    def draw_init(self, r: RngStream) -> int:
        return sample(self.fpsm.p0, r)

    def step_prepared(self, prep: int, a: int, b: int, lam: int, r: RngStream) -> tuple[int, int]:
        from .fpsm import step

        res = step(self.fpsm, bell_input_index(a, b, lam, len(self.lam)), prep, r)
        return joint_output_values(self.fpsm.outputs[res.output])

    def kernel_tables(self, inputs: BellInputs) -> KernelTables:
        _check_lambda_size(inputs, len(self.lam))
        ns, nl = len(self.fpsm.states), len(self.lam)
        step_cum = np.empty((4, nl, ns, 4 * ns))
        for a in range(2):
            for b in range(2):
                for lam in range(nl):
                    i = bell_input_index(a, b, lam, nl)
                    step_cum[a * 2 + b, lam] = np.cumsum(
                        self.fpsm.table[i].reshape(ns, -1), axis=1
                    )
        return KernelTables(
            has_state_draw=True,
            init_cum=np.cumsum(self.fpsm.p0.weights),
            lambda_cum=np.cumsum(inputs.dist_lambda.weights),
            a_cum=np.cumsum(inputs.dist_a.weights),
            b_cum=np.cumsum(inputs.dist_b.weights),
            step_cum=np.ascontiguousarray(step_cum),
            branch_prod=_branch_products(ns),
        )


@dataclass(frozen=True, eq=False)
class BellFqsm(MachineUnderTest):
    """Quantum machine over "(a,b)" inputs with +-1 pair outputs.

    The shared symbol is trivial here: preparation is the fixed initial
    vector, so draw_init consumes no randomness.
    """

    fqsm: Fqsm

    def __post_init__(self):
        if self.fqsm.inputs != _QUANTUM_PAIR_INPUTS:
            raise BellsimError('inputs are not the canonical "(a,b)" pairs')
        if self.fqsm.outputs != JOINT_OUTPUTS:
            raise BellsimError("outputs are not the canonical +-1 pairs")
        validate_fqsm(self.fqsm)

    @property
    def lambda_alphabet(self) -> Alphabet:
        return Alphabet(("l0",))

    def exact_q(self, A: int, B: int, a: int, b: int, dist_lambda: Distribution) -> float:
        if dist_lambda.size != 1:
            raise BellsimError("quantum pair has a trivial lambda alphabet")
        return outcome_probability(self.fqsm, _outcome_index(A, B), a * 2 + b)

    def draw_init(self, r: RngStream) -> None:
        return None

    def step_prepared(self, prep, a: int, b: int, lam: int, r: RngStream) -> tuple[int, int]:
        res = step_q(self.fqsm, a * 2 + b, r)
        return joint_output_values(self.fqsm.outputs[res.output])

    def kernel_tables(self, inputs: BellInputs) -> KernelTables:
        _check_lambda_size(inputs, 1)
        ns = len(self.fqsm.states)
        step_cum = np.empty((4, 1, 1, 4 * ns))
        for sel in range(4):
            step_cum[sel, 0, 0] = np.cumsum(branch_probabilities(self.fqsm, sel))
        return KernelTables(
            has_state_draw=False,
            init_cum=np.ones(1),
            lambda_cum=np.cumsum(inputs.dist_lambda.weights),
            a_cum=np.cumsum(inputs.dist_a.weights),
            b_cum=np.cumsum(inputs.dist_b.weights),
            step_cum=np.ascontiguousarray(step_cum),
            branch_prod=_branch_products(ns),
        )


def lambda_of_bell_inputs(inputs: Alphabet) -> Alphabet:
    """Recover the lambda alphabet from canonical (a, b, lambda) triples."""
    lams = []
    for label in inputs:
        parts = split_tuple_label(label)
        if len(parts) != 3:
            raise BellsimError(f"input {label!r} is not an (a, b, lambda) triple")
        if parts[0] == "0" and parts[1] == "0":
            lams.append(parts[2])
        else:
            break
    lam = Alphabet(tuple(lams))
    if inputs != bell_input_alphabet(lam):
        raise BellsimError("inputs are not the canonical (a, b, lambda) triples")
    return lam


def as_machine_under_test(m) -> MachineUnderTest:
    if isinstance(m, MachineUnderTest):
        return m
    if isinstance(m, CompoundFpsm):
        return BellFpsm(m.fpsm, m.lambda_alphabet)
    if isinstance(m, CompoundFqsm):
        return BellFqsm(m.fqsm)
    if isinstance(m, Fpsm):
        return BellFpsm.wrap(m)
    if isinstance(m, Fqsm):
        return BellFqsm(m)
    raise BellsimError(f"cannot run the protocol on {type(m).__name__}")


def default_inputs(m) -> BellInputs:
    """Uniform selections; uniform over lambda (a point mass when trivial)."""
    mut = as_machine_under_test(m)
    return BellInputs(
        dist_a=Distribution.uniform(2),
        dist_b=Distribution.uniform(2),
        dist_lambda=Distribution.uniform(len(mut.lambda_alphabet)),
    )


@dataclass(frozen=True, eq=False)
class BellStats:
    """Integer tallies per (a, b) cell; exact to merge in any order."""

    counts: np.ndarray
    sums: np.ndarray

    def __post_init__(self):
        c = np.array(self.counts, dtype=np.int64, copy=True)
        s = np.array(self.sums, dtype=np.int64, copy=True)
        if c.shape != (2, 2) or s.shape != (2, 2):
            raise BellsimError("stats must be 2 x 2 per-cell tallies")
        if np.any(np.abs(s) > c):
            raise BellsimError("|sum of +-1 products| cannot exceed the count")
        c.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "counts", c)
        object.__setattr__(self, "sums", s)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def merge(self, other: "BellStats") -> "BellStats":
        return BellStats(self.counts + other.counts, self.sums + other.sums)


@dataclass(frozen=True)
class RunRecord:
    a: int
    b: int
    lam: str
    A: int
    B: int

    @property
    def product(self) -> int:
        return self.A * self.B


def _one_run(
    mut: MachineUnderTest,
    inputs: BellInputs,
    stream: RngStream,
    a: int | None = None,
    b: int | None = None,
) -> RunRecord:
    prep = mut.draw_init(stream)
    lam = sample(inputs.dist_lambda, stream)
    if a is None:
        a = sample(inputs.dist_a, stream)
        b = sample(inputs.dist_b, stream)
    A, B = mut.step_prepared(prep, a, b, lam, stream)
    return RunRecord(a=a, b=b, lam=mut.lambda_alphabet[lam], A=A, B=B)


def iter_run_records(
    m, inputs: BellInputs | None, n_runs: int, master_seed: int
) -> Iterator[RunRecord]:
    """Scalar reference path; run r uses substream(master_seed, r)."""
    mut = as_machine_under_test(m)
    if inputs is None:
        inputs = default_inputs(mut)
    master_seed = int(master_seed) & _MASK64
    for r in range(n_runs):
        yield _one_run(mut, inputs, substream(master_seed, r))


def run_one(
    m, inputs: BellInputs | None, stream: RngStream, a: int, b: int
) -> RunRecord:
    """Single run with caller-chosen selections (no a or b draws)."""
    mut = as_machine_under_test(m)
    if inputs is None:
        inputs = default_inputs(mut)
    return _one_run(mut, inputs, stream, a=a, b=b)


def stats_from_records(records) -> BellStats:
    counts = np.zeros((2, 2), dtype=np.int64)
    sums = np.zeros((2, 2), dtype=np.int64)
    for rec in records:
        counts[rec.a, rec.b] += 1
        sums[rec.a, rec.b] += rec.product
    return BellStats(counts, sums)


def _resolve_workers(workers: int | None) -> int:
    if workers is None:
        raw = os.environ.get("BELLSIM_THREADS", "").strip()
        if raw:
            try:
                workers = int(raw)
            except ValueError:
                raise BellsimError(f"BELLSIM_THREADS={raw!r} is not an integer") from None
        else:
            workers = 1
    if workers < 1:
        raise BellsimError("worker count must be at least 1")
    return workers


def run_protocol(
    m,
    inputs: BellInputs | None = None,
    n_runs: int = 100_000,
    master_seed: int = 0,
    workers: int | None = None,
) -> BellStats:
    """Run the protocol n_runs times.

    Results are a pure function of (machine, inputs, n_runs, master_seed):
    independent of the worker count, the backend, and the chunking, because
    every run draws from its own counter-based stream and tallies are merged
    by integer addition.
    """
    if n_runs < 1:
        raise BellsimError("n_runs must be at least 1")
    master_seed = int(master_seed) & _MASK64
    mut = as_machine_under_test(m)
    if inputs is None:
        inputs = default_inputs(mut)
    kt = mut.kernel_tables(inputs)
    workers = min(_resolve_workers(workers), n_runs)

    def chunk(start: int, count: int) -> BellStats:
        counts, sums = _kernels.run_chunk(
            master_seed,
            start,
            count,
            kt.has_state_draw,
            kt.init_cum,
            kt.lambda_cum,
            kt.a_cum,
            kt.b_cum,
            kt.step_cum,
            kt.branch_prod,
        )
        return BellStats(counts, sums)

    if workers == 1:
        return chunk(0, n_runs)
    size, extra = divmod(n_runs, workers)
    ranges = []
    start = 0
    for w in range(workers):
        count = size + (1 if w < extra else 0)
        ranges.append((start, count))
        start += count
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda r: chunk(*r), ranges))
    total = parts[0]
    for part in parts[1:]:
        total = total.merge(part)
    return total


def empirical_chsh(stats: BellStats) -> ChshReport:
    """Per-cell means and their CHSH combination; every cell must have runs."""
    means = np.empty((2, 2))
    for a in range(2):
        for b in range(2):
            n = int(stats.counts[a, b])
            if n == 0:
                raise MissingCellError(a, b)
            means[a, b] = stats.sums[a, b] / n
    return chsh_report(means[0, 0], means[0, 1], means[1, 0], means[1, 1])


def exact_q(m, A: int, B: int, a: int, b: int, inputs: BellInputs | None = None) -> float:
    mut = as_machine_under_test(m)
    if inputs is None:
        inputs = default_inputs(mut)
    return mut.exact_q(A, B, a, b, inputs.dist_lambda)


def exact_conditional_expectation(
    m, a: int, b: int, inputs: BellInputs | None = None
) -> float:
    mut = as_machine_under_test(m)
    if inputs is None:
        inputs = default_inputs(mut)
    total = 0.0
    for A in (-1, 1):
        for B in (-1, 1):
            total += A * B * mut.exact_q(A, B, a, b, inputs.dist_lambda)
    return total


def exact_chsh(m, inputs: BellInputs | None = None) -> ChshReport:
    mut = as_machine_under_test(m)
    if inputs is None:
        inputs = default_inputs(mut)
    e = [exact_conditional_expectation(mut, a, b, inputs) for a, b in
         ((0, 0), (0, 1), (1, 0), (1, 1))]
    return chsh_report(*e)


def _local_means(h: HalfFpsm) -> np.ndarray:
    """E[own output | own selection, lambda, state] with the remote pinned
    to 0, as a (2, n_lambda, n_states) array after one independence scan."""
    rep = check_remote_independence(h)
    if not rep.independent:
        raise DependsOnRemoteError(rep.witness)
    nl = len(h.lambda_alphabet)
    ns = len(h.fpsm.states)
    values = np.array([int(x) for x in h.fpsm.outputs], dtype=np.float64)
    out = np.empty((2, nl, ns))
    for own in range(2):
        for lam in range(nl):
            if h.own_role == "a":
                i = bell_input_index(own, 0, lam, nl)
            else:
                i = bell_input_index(0, own, lam, nl)
            out[own, lam] = np.einsum("sot,o->s", h.fpsm.table[i], values)
    return out


def local_expectation(h: HalfFpsm, own_input: int, lam: int, s: int) -> float:
    """Expected +-1 output of one half given (own selection, lambda, state).

    Well-defined only when the half ignores the remote selection; the remote
    is pinned to 0 after that check.
    """
    return float(_local_means(h)[own_input, lam, s])


def pair_product_expectation(
    c: CompoundFpsm, a: int, b: int, lam: int, sa: int, sb: int
) -> float:
    """E[A*B] from the halves' tables at the actual (a, b), by brute sum."""
    nl = len(c.lambda_alphabet)
    i = bell_input_index(a, b, lam, nl)
    ta_n = len(c.left.fpsm.states)
    tb_n = len(c.right.fpsm.states)
    total = 0.0
    for oa, la in enumerate(c.left.fpsm.outputs):
        va = int(la)
        for ta in range(ta_n):
            pa = c.left.fpsm.prob(oa, ta, i, sa)
            if pa == 0.0:
                continue
            for ob, lb in enumerate(c.right.fpsm.outputs):
                vb = int(lb)
                for tb in range(tb_n):
                    total += va * vb * pa * c.right.fpsm.prob(ob, tb, i, sb)
    return total


def max_factorization_residual(c: CompoundFpsm) -> float:
    """Largest |E[AB] - <A><B>| over all (a, b, lambda, s_a, s_b) cells.

    Both halves must ignore the remote selection; the left factor comes from
    the joint table at the actual (a, b) and the right factors from the
    remote-pinned local expectations, so agreement is evidence, not identity.
    """
    ma = _local_means(c.left)
    mb = _local_means(c.right)
    worst = 0.0
    for a in range(2):
        for b in range(2):
            for lam in range(len(c.lambda_alphabet)):
                for sa in range(len(c.left.fpsm.states)):
                    ea = float(ma[a, lam, sa])
                    for sb in range(len(c.right.fpsm.states)):
                        eb = float(mb[b, lam, sb])
                        lhs = pair_product_expectation(c, a, b, lam, sa, sb)
                        worst = max(worst, abs(lhs - ea * eb))
    return worst


def exact_chsh_via_locals(c: CompoundFpsm, inputs: BellInputs | None = None) -> ChshReport:
    """CHSH through per-side local expectations instead of the joint table."""
    if inputs is None:
        inputs = default_inputs(c)
    nl = len(c.lambda_alphabet)
    _check_lambda_size(inputs, nl)
    p0 = c.fpsm.p0
    nsa = len(c.left.fpsm.states)
    nsb = len(c.right.fpsm.states)
    ma = _local_means(c.left)
    mb = _local_means(c.right)
    e = []
    for a, b in ((0, 0), (0, 1), (1, 0), (1, 1)):
        total = 0.0
        for lam in range(nl):
            w = float(inputs.dist_lambda.weights[lam])
            if w == 0.0:
                continue
            for sa in range(nsa):
                ea = float(ma[a, lam, sa])
                for sb in range(nsb):
                    joint_w = float(p0.weights[sa * nsb + sb])
                    if joint_w == 0.0:
                        continue
                    total += w * joint_w * ea * float(mb[b, lam, sb])
        e.append(total)
    return chsh_report(*e)


@dataclass(frozen=True)
class CornerReport:
    rows: tuple[tuple[int, int, int, int, int], ...]
    max_abs: int


def corner_oracle() -> CornerReport:
    """Evaluate A0*B0 + A0*B1 + A1*B0 - A1*B1 at every +-1 corner.

    The combination is A0*(B0+B1) + A1*(B0-B1); one parenthesis is 0 and the
    other +-2 at every corner, so each row must be +-2.
    """
    rows = []
    for a0 in (-1, 1):
        for a1 in (-1, 1):
            for b0 in (-1, 1):
                for b1 in (-1, 1):
                    v = a0 * b0 + a0 * b1 + a1 * b0 - a1 * b1
                    if abs(v) != 2:
                        raise InternalContradictionError(
                            f"corner ({a0}, {a1}, {b0}, {b1}) gave {v}"
                        )
                    rows.append((a0, a1, b0, b1, v))
    return CornerReport(rows=tuple(rows), max_abs=2)


def random_variable_oracle(a0, a1, b0, b1, mu: Distribution) -> float:
    """Average the corner combination of four [-1, 1] tables over mu.

    The result is a convex mixture of per-point values that the corner
    argument bounds by 2, so exceeding 2 + CHSH_TOL is an internal error.
    """
    tables = [np.asarray(t, dtype=np.float64) for t in (a0, a1, b0, b1)]
    for name, t in zip(("a0", "a1", "b0", "b1"), tables):
        if t.shape != (mu.size,):
            raise BellsimError(f"table {name} does not match the measure's size")
        bad = np.nonzero((t < -1.0) | (t > 1.0))[0]
        if bad.size:
            j = int(bad[0])
            raise ValueOutOfRangeError(
                f"{name}[{j}] = {float(t[j])!r} outside [-1, 1]"
            )
    ta0, ta1, tb0, tb1 = tables
    pointwise = ta0 * tb0 + ta0 * tb1 + ta1 * tb0 - ta1 * tb1
    value = float(mu.weights @ pointwise)
    if abs(value) > CLASSICAL_BOUND + CHSH_TOL:
        raise InternalContradictionError(
            f"averaged corner combination {value!r} exceeds the classical bound"
        )
    return value


@dataclass(frozen=True)
class TheoremReport:
    """Exact CHSH of a compound plus both halves' independence scans."""

    chsh: ChshReport
    left: IndependenceReport
    right: IndependenceReport
    violating: bool
    witnesses: tuple[Witness, ...]


def theorem_witness(c: CompoundFpsm, inputs: BellInputs | None = None) -> TheoremReport:
    """Check that a classical-bound violation comes with a dependence witness.

    A compound whose CHSH exceeds 2 must have at least one half whose table
    reads the remote selection; finding none is an internal contradiction.
    """
    if not isinstance(c, CompoundFpsm):
        raise BellsimError("the witness check applies to probabilistic pairs")
    rep = exact_chsh(c, inputs)
    left = check_remote_independence(c.left)
    right = check_remote_independence(c.right)
    violating = abs(rep.chsh) > CLASSICAL_BOUND + CHSH_TOL
    witnesses = tuple(w for w in (left.witness, right.witness) if w is not None)
    if violating and not witnesses:
        raise InternalContradictionError(
            "CHSH exceeds the classical bound but both halves ignore the remote selection"
        )
    return TheoremReport(
        chsh=rep, left=left, right=right, violating=violating, witnesses=witnesses
    )
