"""End-to-end guarantees, one test per line of `pytest -v` output.

Every expected number below is frozen from an independent high-precision
evaluation, never read back from the code under test.
"""

import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from bellsim import belltest, mdf, zoo
from bellsim.belltest import (
    as_machine_under_test,
    corner_oracle,
    empirical_chsh,
    exact_chsh,
    exact_q,
    max_factorization_residual,
    random_variable_oracle,
    run_protocol,
    theorem_witness,
)
from bellsim.compose import ProductAmplitude, compose_fqsm
from bellsim.core import Distribution

import genmachines

RT2_HALF = 0.7071067811865476      # sqrt(2)/2
TWO_RT2 = 2.8284271247461903       # 2*sqrt(2)
Q_SAME = 0.42677669529663687       # (2+sqrt(2))/8
Q_DIFF = 0.07322330470336312       # (2-sqrt(2))/8
TOL = 1e-9

REFERENCE_REPORTS = {
    "M1": ((0.0, 0.0, 0.0, 0.0), 0.0, "classical"),
    "M2": ((1.0, 1.0, 1.0, 1.0), 2.0, "classical"),
    "M3": ((1.0, 1.0, 1.0, -1.0), 4.0, "supraquantum"),
    "M4": ((1.0, 1.0, 1.0, -1.0), 4.0, "supraquantum"),
    "M5": ((RT2_HALF, RT2_HALF, RT2_HALF, -RT2_HALF), TWO_RT2, "superclassical"),
}


def test_exact_chsh_of_the_reference_machines():
    start = time.perf_counter()
    for name, (cells, chsh, label) in REFERENCE_REPORTS.items():
        rep = exact_chsh(zoo.builtin(name).machine)
        for got, want in zip((rep.e00, rep.e01, rep.e10, rep.e11), cells):
            assert got == pytest.approx(want, abs=TOL), name
        assert rep.chsh == pytest.approx(chsh, abs=TOL), name
        assert rep.classification == label, name
    assert time.perf_counter() - start < 1.0


def test_entangled_pair_outcome_table_and_chsh():
    start = time.perf_counter()
    machine = zoo.builtin("Q_pair_entangled").machine
    for a in (0, 1):
        for b in (0, 1):
            for A in (-1, 1):
                for B in (-1, 1):
                    same = (A == B) != (a == 1 and b == 1)
                    want = Q_SAME if same else Q_DIFF
                    got = exact_q(machine, A, B, a, b)
                    assert got == pytest.approx(want, abs=TOL), (a, b, A, B)
    assert exact_chsh(machine).chsh == pytest.approx(TWO_RT2, abs=TOL)
    assert time.perf_counter() - start < 1.0


def test_monte_carlo_estimates_track_the_exact_value():
    n = 100_000
    three_sigma = 3.0 * math.sqrt(8.0 / n)
    for name in ("M5", "Q_pair_entangled"):
        start = time.perf_counter()
        mut = as_machine_under_test(zoo.builtin(name).machine)
        rep = empirical_chsh(run_protocol(mut, n_runs=n, master_seed=42))
        assert abs(rep.chsh - TWO_RT2) <= 0.05, name
        exceedances = 0
        for seed in range(20):
            est = empirical_chsh(run_protocol(mut, n_runs=n, master_seed=seed)).chsh
            if abs(est - TWO_RT2) > three_sigma:
                exceedances += 1
        assert exceedances <= 1, name
        assert time.perf_counter() - start < 5.0, name


def test_independent_pairs_respect_the_classical_bound():
    start = time.perf_counter()
    rng = np.random.default_rng(20260818)
    for k in range(1000):
        pair = genmachines.random_pair_fpsm(rng, joint=True, max_lambda=4, max_states=3)
        inputs = genmachines.random_lambda_inputs(rng, pair)
        rep = exact_chsh(pair, inputs)
        assert abs(rep.chsh) <= 2.0 + TOL, k
        assert max_factorization_residual(pair) <= TOL, k
    assert time.perf_counter() - start < 30.0


def test_every_violation_comes_with_a_dependence_witness():
    rep = theorem_witness(zoo.builtin("M3_pair").machine)
    assert rep.violating
    assert len(rep.witnesses) >= 1
    rng = np.random.default_rng(97)
    for k in range(100):
        pair, expected = genmachines.violating_pair(rng)
        rep = theorem_witness(pair)  # must never raise InternalContradictionError
        assert rep.chsh.chsh == pytest.approx(expected, abs=TOL), k
        assert rep.violating, k
        assert len(rep.witnesses) >= 1, k


def test_corner_oracle_and_random_mixtures_stay_bounded():
    start = time.perf_counter()
    assert corner_oracle().max_abs == 2
    rng = np.random.default_rng(11)
    for k in range(10_000):
        size = int(rng.integers(1, 5))
        tables = rng.uniform(-1.0, 1.0, size=(4, size))
        w = rng.uniform(0.0, 1.0, size=size) + 1e-12
        mu = Distribution(w / w.sum())
        value = random_variable_oracle(*tables, mu)
        assert abs(value) <= 2.0 + TOL, k
    assert time.perf_counter() - start < 5.0


def test_product_initialized_quantum_pairs_stay_classical():
    machine = zoo.builtin("Q_pair_entangled").machine
    rng = np.random.default_rng(5)
    for k in range(1000):
        la = rng.normal(size=2) + 1j * rng.normal(size=2)
        ra = rng.normal(size=2) + 1j * rng.normal(size=2)
        init = ProductAmplitude(la / np.linalg.norm(la), ra / np.linalg.norm(ra))
        rep = exact_chsh(compose_fqsm(machine.left, machine.right, init))
        assert abs(rep.chsh) <= 2.0 + TOL, k


def test_documents_round_trip_canonically():
    for name in zoo.names():
        text = zoo.export(name)
        assert mdf.serialize(mdf.parse(text)) == text, name
    rng = np.random.default_rng(2718)
    builders = (
        lambda: genmachines.random_fpsm(rng),
        lambda: genmachines.random_fqsm(rng),
        lambda: genmachines.random_pair_fpsm(rng, joint=False),
        lambda: genmachines.random_pair_fpsm(rng, joint=True),
        lambda: genmachines.random_pair_fqsm(rng, entangled=True),
        lambda: genmachines.random_pair_fqsm(rng, entangled=False),
    )
    for k in range(1000):
        text = mdf.serialize(builders[k % len(builders)](), f"fuzz{k}")
        doc = mdf.parse(text)
        assert mdf.serialize(doc) == text, k
    # loading runs the validators unconditionally
    broken = zoo.export("M2").replace("(0,0,l0), s0] = 1", "(0,0,l0), s0] = 1/2")
    with pytest.raises(mdf.ValidationFailedError):
        mdf.parse(broken)


def test_run_output_is_byte_identical_across_thread_counts():
    for source in ("zoo:M5", "zoo:Q_pair_entangled"):
        argv = [
            sys.executable, "-m", "bellsim",
            "run", source, "--runs", "20000", "--seed", "5",
        ]
        outputs = []
        for threads in ("1", "1", "2", "8"):
            env = dict(os.environ, BELLSIM_THREADS=threads)
            proc = subprocess.run(argv, capture_output=True, env=env, check=True)
            outputs.append(proc.stdout)
        assert all(out == outputs[0] for out in outputs), source
