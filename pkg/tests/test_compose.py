import math

import numpy as np
import pytest

from bellsim.compose import (
    HALF_OUTPUTS,
    JOINT_OUTPUTS,
    SELECTIONS,
    AlphabetMismatchError,
    CompoundFpsm,
    EntangledAmplitude,
    HalfFpsm,
    HalfFqsm,
    JointInit,
    ProductAmplitude,
    ProductInit,
    bell_input_alphabet,
    bell_input_index,
    check_remote_independence,
    compose_fpsm,
    compose_fqsm,
    is_product_init,
    joint_output_values,
    output_value,
    product_alphabet,
    split_tuple_label,
    tuple_label,
)
from bellsim.core import Alphabet, BellsimError, Distribution
from bellsim import zoo


def test_tuple_labels_round_trip():
    lbl = tuple_label(("-1", "1"))
    assert lbl == "(-1,1)"
    assert split_tuple_label(lbl) == ("-1", "1")
    assert split_tuple_label("(0,1,l0)") == ("0", "1", "l0")


def test_product_alphabet_order():
    p = product_alphabet(("x", "y"), ("0", "1"))
    assert p.symbols == ("(x,0)", "(x,1)", "(y,0)", "(y,1)")
    assert JOINT_OUTPUTS.symbols == ("(-1,-1)", "(-1,1)", "(1,-1)", "(1,1)")


def test_bell_input_alphabet_matches_index_helper():
    lam = Alphabet(("l0", "l1", "l2"))
    inputs = bell_input_alphabet(lam)
    assert len(inputs) == 12
    for a in range(2):
        for b in range(2):
            for l in range(3):
                label = tuple_label((str(a), str(b), lam[l]))
                assert inputs.index(label) == bell_input_index(a, b, l, 3)


def test_output_values():
    assert output_value("-1") == -1 and output_value("1") == 1
    assert tuple(joint_output_values(lbl) for lbl in JOINT_OUTPUTS) == (
        (-1, -1),
        (-1, 1),
        (1, -1),
        (1, 1),
    )
    with pytest.raises(BellsimError):
        output_value("2")


def test_half_requires_canonical_alphabets():
    m3 = zoo.builtin("M3_pair").machine
    good = m3.left
    assert good.own_role == "a" and good.remote_role == "b"
    with pytest.raises(BellsimError):
        HalfFpsm(fpsm=good.fpsm, own_role="x", lambda_alphabet=good.lambda_alphabet)
    # a plain machine without the (a,b,lambda) input alphabet is rejected
    from bellsim.fpsm import Fpsm

    table = np.zeros((1, 1, 2, 1))
    table[0, 0, 0, 0] = 1.0
    plain = Fpsm(Alphabet(("i",)), HALF_OUTPUTS, Alphabet(("s",)), Distribution((1.0,)), table)
    with pytest.raises(AlphabetMismatchError):
        HalfFpsm(fpsm=plain, own_role="a", lambda_alphabet=Alphabet(("l0",)))


def test_independence_scan_sides_of_m3_pair():
    m3 = zoo.builtin("M3_pair").machine
    left = check_remote_independence(m3.left)
    right = check_remote_independence(m3.right)
    assert left.independent and left.witness is None
    assert not right.independent
    w = right.witness
    # first difference in (o, t, own, lambda, s) order: output -1, own b=1
    assert w.output == "-1" and w.own_input == "1"
    assert w.value_remote0 == 0.0 and w.value_remote1 == 1.0
    assert "remote" in str(w)


def test_independence_report_shape_invariant():
    from bellsim.compose import IndependenceReport, Witness

    with pytest.raises(BellsimError):
        IndependenceReport(independent=True, witness=Witness("1", "s", "0", "l", "s", 0.0, 1.0))
    with pytest.raises(BellsimError):
        IndependenceReport(independent=False, witness=None)


def test_compose_fpsm_defaults_to_product_of_half_inits():
    m1 = zoo.builtin("M1_pair").machine
    again = compose_fpsm(m1.left, m1.right)
    assert again == m1
    assert isinstance(again.init, ProductInit)


def test_compose_fpsm_joint_init_table():
    m1 = zoo.builtin("M1_pair").machine
    with pytest.raises(BellsimError):
        JointInit(Distribution((1.0, 0.0, 0.0, 0.0)), 1, 1)  # 4 weights for 1 x 1
    ok = JointInit(Distribution((1.0,)), 1, 1)
    c = compose_fpsm(m1.left, m1.right, ok)
    assert isinstance(c.init, JointInit)


def test_compose_fpsm_requires_a_then_b():
    m1 = zoo.builtin("M1_pair").machine
    with pytest.raises(BellsimError):
        compose_fpsm(m1.right, m1.left)


def test_compose_fpsm_requires_equal_lambda():
    m1 = zoo.builtin("M1_pair").machine
    other = Alphabet(("l0", "l1"))
    # rebuild the right half over a larger lambda alphabet
    from bellsim.fpsm import Fpsm

    nl = 2
    table = np.zeros((4 * nl, 1, 2, 1))
    table[:, 0, 0, 0] = 0.5
    table[:, 0, 1, 0] = 0.5
    right = HalfFpsm(
        fpsm=Fpsm(
            inputs=bell_input_alphabet(other),
            outputs=HALF_OUTPUTS,
            states=Alphabet(("s0",)),
            p0=Distribution((1.0,)),
            table=table,
        ),
        own_role="b",
        lambda_alphabet=other,
    )
    with pytest.raises(AlphabetMismatchError):
        compose_fpsm(m1.left, right)


def test_compound_table_is_the_product():
    c = zoo.builtin("M1_pair").machine
    # every cell of the compound table equals the product of half entries
    nl = len(c.lambda_alphabet)
    for a in range(2):
        for b in range(2):
            for l in range(nl):
                i = bell_input_index(a, b, l, nl)
                for oa in range(2):
                    for ob in range(2):
                        got = c.fpsm.prob(oa * 2 + ob, 0, i, 0)
                        want = c.left.fpsm.prob(oa, 0, i, 0) * c.right.fpsm.prob(ob, 0, i, 0)
                        assert got == pytest.approx(want)


def test_is_product_init_on_vectors():
    outer = np.outer((0.25, 0.75), (0.5, 0.5)).reshape(-1)
    assert is_product_init(outer, 2, 2)
    correlated = np.array([0.5, 0.0, 0.0, 0.5])
    assert not is_product_init(correlated, 2, 2)
    assert not is_product_init(JointInit(Distribution(correlated), 2, 2))
    assert is_product_init(ProductInit(Distribution((1.0,)), Distribution((1.0,))))


def test_is_product_init_on_amplitudes():
    bell = np.array([0.0, 1.0, -1.0, 0.0]) / math.sqrt(2.0)
    assert not is_product_init(EntangledAmplitude(bell, 2, 2), 2, 2)
    prod = np.outer((1.0, 0.0), (0.6, 0.8)).reshape(-1)
    assert is_product_init(EntangledAmplitude(prod, 2, 2), 2, 2)


def test_compose_fqsm_product_and_entangled():
    q = zoo.builtin("Q_pair_entangled").machine
    assert isinstance(q.init, EntangledAmplitude)
    qp = zoo.builtin("Q_pair_product").machine
    assert isinstance(qp.init, ProductAmplitude)
    # same halves, swapped init
    again = compose_fqsm(q.left, q.right, qp.init)
    assert again == qp
    assert again != q


def test_compose_fqsm_rejects_unnormalized_entangled():
    q = zoo.builtin("Q_pair_entangled").machine
    bad = EntangledAmplitude(np.array([0.5, 0.0, 0.0, 0.0], dtype=complex), 2, 2)
    with pytest.raises(BellsimError):
        compose_fqsm(q.left, q.right, bad)


def test_quantum_half_alphabets_enforced():
    q = zoo.builtin("Q_pair_entangled").machine
    assert q.left.fqsm.inputs.symbols == SELECTIONS.symbols
    assert q.fqsm.inputs.symbols == product_alphabet(SELECTIONS, SELECTIONS).symbols
    with pytest.raises(BellsimError):
        HalfFqsm(fqsm=q.fqsm)  # compound inputs, not a half


def test_compound_equality_tracks_halves_and_init():
    a = zoo.builtin("M1_pair").machine
    b = compose_fpsm(a.left, a.right)
    assert a == b
    c = compose_fpsm(a.left, a.right, JointInit(Distribution((1.0,)), 1, 1))
    assert a != c


def test_compound_fqsm_trivial_lambda():
    q = zoo.builtin("Q_pair_entangled").machine
    assert q.lambda_alphabet.symbols == ("l0",)
