import math

import numpy as np
import pytest

from bellsim import zoo
from bellsim.belltest import (
    ALGEBRAIC_BOUND,
    CHSH_TOL,
    CLASSICAL_BOUND,
    TSIRELSON_BOUND,
    BellFpsm,
    BellFqsm,
    BellInputs,
    BellStats,
    InternalContradictionError,
    MissingCellError,
    ValueOutOfRangeError,
    as_machine_under_test,
    chsh_report,
    classify_chsh,
    corner_oracle,
    default_inputs,
    empirical_chsh,
    exact_chsh,
    exact_chsh_via_locals,
    exact_conditional_expectation,
    exact_q,
    iter_run_records,
    local_expectation,
    max_factorization_residual,
    random_variable_oracle,
    run_one,
    run_protocol,
    stats_from_records,
    theorem_witness,
)
from bellsim.compose import DependsOnRemoteError, JointInit, compose_fpsm
from bellsim.core import BellsimError, Distribution, substream

RT2 = math.sqrt(2.0)


def test_classify_boundaries():
    assert classify_chsh(2.0) == "classical"
    assert classify_chsh(2.0 + CHSH_TOL / 2) == "classical"
    assert classify_chsh(-2.0) == "classical"
    assert classify_chsh(2.0 + 1e-8) == "superclassical"
    assert classify_chsh(TSIRELSON_BOUND) == "superclassical"
    assert classify_chsh(TSIRELSON_BOUND + 1e-8) == "supraquantum"
    assert classify_chsh(4.0) == "supraquantum"
    assert classify_chsh(-4.0) == "supraquantum"
    with pytest.raises(InternalContradictionError):
        classify_chsh(4.0 + 1e-8)


def test_chsh_report_combination():
    rep = chsh_report(0.5, 0.5, 0.5, -0.5)
    assert rep.chsh == pytest.approx(2.0)
    assert rep.expectations == (0.5, 0.5, 0.5, -0.5)


def test_bell_inputs_require_binary_selections():
    with pytest.raises(BellsimError):
        BellInputs(Distribution.uniform(3), Distribution.uniform(2), Distribution.uniform(1))


def test_exact_q_normalizes_per_setting():
    for name in zoo.names():
        m = zoo.builtin(name).machine
        for a in range(2):
            for b in range(2):
                total = sum(
                    exact_q(m, A, B, a, b) for A in (-1, 1) for B in (-1, 1)
                )
                assert total == pytest.approx(1.0, abs=1e-12), name


def test_exact_q_of_single_state_machine_reads_table():
    m5 = zoo.builtin("M5").machine
    # one state and trivial lambda: q is the table itself
    got = exact_q(m5, -1, -1, 0, 0)
    assert got == pytest.approx(m5.prob(0, 0, 0, 0), abs=1e-15)


def test_exact_expectation_matches_zoo_reports():
    for name in zoo.names():
        entry = zoo.builtin(name)
        for (a, b), want in zip(
            ((0, 0), (0, 1), (1, 0), (1, 1)), entry.expected.expectations
        ):
            got = exact_conditional_expectation(entry.machine, a, b)
            assert got == pytest.approx(want, abs=1e-9), name


def test_wrap_rejects_wrong_alphabets():
    q = zoo.builtin("Q_pair_entangled").machine
    with pytest.raises(BellsimError):
        BellFpsm.wrap(q.fqsm)  # not a probabilistic machine
    m5 = zoo.builtin("M5").machine
    wrapped = BellFpsm.wrap(m5)
    assert wrapped.lambda_alphabet.symbols == ("l0",)
    with pytest.raises(BellsimError):
        BellFqsm(fqsm=q.left.fqsm)  # half inputs, not (a,b) products


def test_as_machine_under_test_dispatch():
    m5 = zoo.builtin("M5").machine
    assert isinstance(as_machine_under_test(m5), BellFpsm)
    pair = zoo.builtin("M1_pair").machine
    assert isinstance(as_machine_under_test(pair), BellFpsm)
    q = zoo.builtin("Q_pair_entangled").machine
    assert isinstance(as_machine_under_test(q), BellFqsm)
    with pytest.raises(BellsimError):
        as_machine_under_test(pair.left)  # a lone half is not testable


def test_default_inputs_are_uniform():
    m = zoo.builtin("M1_pair").machine
    inputs = default_inputs(as_machine_under_test(m))
    assert inputs.dist_a.weights.tolist() == [0.5, 0.5]
    assert inputs.dist_b.weights.tolist() == [0.5, 0.5]
    assert inputs.dist_lambda.weights.tolist() == [1.0]


def test_bell_stats_invariants_and_merge():
    a = BellStats(np.full((2, 2), 3), np.zeros((2, 2), dtype=int))
    b = BellStats(np.full((2, 2), 2), np.full((2, 2), -2))
    m = a.merge(b)
    assert m.total == 20
    assert m.counts[0, 0] == 5 and m.sums[1, 1] == -2
    with pytest.raises(BellsimError):
        BellStats(np.ones((2, 2), dtype=int), np.full((2, 2), 5))


def test_empirical_chsh_requires_every_cell():
    stats = BellStats(np.array([[1, 1], [1, 0]]), np.zeros((2, 2), dtype=int))
    with pytest.raises(MissingCellError):
        empirical_chsh(stats)


def test_scalar_records_carry_lambda_labels():
    m = zoo.builtin("M2").machine
    recs = list(iter_run_records(m, None, 50, 3))
    assert {r.lam for r in recs} == {"l0"}
    assert all(r.A == 1 and r.B == 1 and r.product == 1 for r in recs)


def test_run_protocol_worker_invariance():
    m = zoo.builtin("M5").machine
    s1 = run_protocol(m, None, 5000, 9, workers=1)
    s3 = run_protocol(m, None, 5000, 9, workers=3)
    s8 = run_protocol(m, None, 5000, 9, workers=8)
    assert np.array_equal(s1.counts, s3.counts) and np.array_equal(s1.sums, s3.sums)
    assert np.array_equal(s1.counts, s8.counts) and np.array_equal(s1.sums, s8.sums)


def test_run_protocol_matches_scalar_reference():
    m = zoo.builtin("M5").machine
    want = stats_from_records(iter_run_records(m, None, 3000, 17))
    got = run_protocol(m, None, 3000, 17)
    assert np.array_equal(want.counts, got.counts)
    assert np.array_equal(want.sums, got.sums)


def test_negative_seed_equals_folded_seed():
    m = zoo.builtin("M1").machine
    a = run_protocol(m, None, 500, -1)
    b = run_protocol(m, None, 500, (1 << 64) - 1)
    assert np.array_equal(a.counts, b.counts) and np.array_equal(a.sums, b.sums)


def test_run_one_forces_selections():
    m = zoo.builtin("M3_pair").machine
    for a in range(2):
        for b in range(2):
            rec = run_one(m, None, substream(0, a * 2 + b), a, b)
            assert (rec.a, rec.b) == (a, b)
            assert rec.A == 1 and rec.B == (-1 if a == 1 and b == 1 else 1)


def test_empirical_matches_exact_for_deterministic_pair():
    m = zoo.builtin("M2_pair").machine
    stats = run_protocol(m, None, 2000, 0)
    rep = empirical_chsh(stats)
    assert rep.expectations == (1.0, 1.0, 1.0, 1.0)
    assert rep.chsh == pytest.approx(2.0)


def test_local_expectation_and_factorization():
    m1 = zoo.builtin("M1_pair").machine
    assert local_expectation(m1.left, 0, 0, 0) == pytest.approx(0.0)
    assert max_factorization_residual(m1) == pytest.approx(0.0, abs=1e-12)
    m2 = zoo.builtin("M2_pair").machine
    assert max_factorization_residual(m2) == pytest.approx(0.0, abs=1e-12)
    m3 = zoo.builtin("M3_pair").machine
    with pytest.raises(DependsOnRemoteError):
        max_factorization_residual(m3)


def test_exact_chsh_via_locals_agrees_on_independent_pairs():
    for name in ("M1_pair", "M2_pair"):
        c = zoo.builtin(name).machine
        direct = exact_chsh(c)
        via = exact_chsh_via_locals(c)
        for x, y in zip(direct.expectations, via.expectations):
            assert x == pytest.approx(y, abs=1e-12)


def test_exact_chsh_via_locals_with_correlated_joint_init():
    # correlated classical start: perfectly aligned coin pair
    m1 = zoo.builtin("M1_pair").machine
    c = compose_fpsm(m1.left, m1.right, JointInit(Distribution((1.0,)), 1, 1))
    assert exact_chsh_via_locals(c).chsh == pytest.approx(exact_chsh(c).chsh)


def test_corner_oracle_sixteen_rows_all_two():
    rep = corner_oracle()
    assert len(rep.rows) == 16
    assert rep.max_abs == 2
    assert all(abs(v) == 2 for *_, v in rep.rows)
    assert rep.rows[0][:4] == (-1, -1, -1, -1)


def test_random_variable_oracle_checks_inputs():
    mu = Distribution.uniform(3)
    good = np.array([0.5, -1.0, 1.0])
    assert abs(random_variable_oracle(good, good, good, good, mu)) <= 2.0 + CHSH_TOL
    with pytest.raises(ValueOutOfRangeError):
        random_variable_oracle(np.array([1.5, 0.0, 0.0]), good, good, good, mu)
    with pytest.raises(BellsimError):
        random_variable_oracle(np.array([0.5, 0.5]), good, good, good, mu)


def test_theorem_witness_on_zoo_pairs():
    rep = theorem_witness(zoo.builtin("M3_pair").machine)
    assert rep.violating
    assert rep.left.independent and not rep.right.independent
    assert len(rep.witnesses) == 1
    calm = theorem_witness(zoo.builtin("M1_pair").machine)
    assert not calm.violating and calm.witnesses == ()
    with pytest.raises(BellsimError):
        theorem_witness(zoo.builtin("M5").machine)  # not a pair


def test_bounds_are_the_expected_constants():
    assert CLASSICAL_BOUND == 2.0
    assert TSIRELSON_BOUND == pytest.approx(2.8284271247461903, abs=0)
    assert ALGEBRAIC_BOUND == 4.0
