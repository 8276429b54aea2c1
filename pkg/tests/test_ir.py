import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcflow.backends import circuit_unitary
from qcflow.decompose import QFTNoSwap
from qcflow.errors import CompositeHasNoMatrix, InvalidCommand, NonInvertibleGate, TooWide
from qcflow.ir import (QFT, Allocate, Command, Deallocate, Gate, GateClass, H, Loop, Measure, Phase, Rx, Ry, Rz,
                       S, Sdg, Swap, T, Tdg, X, Y, Z, canonical_angle, classify, inverse, matrix, COMPUTE,
                       UNCOMPUTE)


def test_inverse_rotation_negates_angle():
    assert inverse(Command(Rz(0.3), (0,))) == Command(Rz(-0.3), (0,))


def test_inverse_cnot_is_itself():
    c = Command(X, (0,), (1,))
    assert inverse(c) == c


def test_inverse_swaps_daggers():
    assert inverse(Command(S, (0,))).gate == Sdg
    assert inverse(Command(Tdg, (0,))).gate == T


def test_inverse_qft_flag_and_product():
    q = (0, 1, 2, 3)
    c = Command(QFT(4), q)
    inv = inverse(c)
    assert inv.gate == QFT(4, inverse=True)
    u = circuit_unitary([c, inv], q)
    assert np.allclose(u, np.eye(16), atol=1e-10)


@pytest.mark.parametrize("g", [Measure, Allocate, Deallocate])
def test_inverse_rejects_non_unitary(g):
    with pytest.raises(NonInvertibleGate):
        inverse(Command(g, (0,)))


def test_inverse_keeps_tags():
    c = Command(H, (0,), tags=(COMPUTE, Loop(3, 1)))
    assert inverse(c).tags == c.tags


def test_classify_examples():
    assert classify(Command(Rz(math.pi / 2 + 1e-13), (0,))) is GateClass.CLIFFORD1Q
    assert classify(Command(Rz(math.pi / 4), (0,))) is GateClass.T
    assert classify(Command(Rz(0.7), (0,))) is GateClass.RZ
    assert classify(Command(X, (0,), (1,))) is GateClass.CNOT
    assert classify(Command(H, (0,))) is GateClass.CLIFFORD1Q
    assert classify(Command(Tdg, (0,))) is GateClass.T
    assert classify(Command(Measure, (0,))) is GateClass.MEASURE
    assert classify(Command(Allocate, (0,))) is GateClass.BOOKKEEPING
    assert classify(Command(X, (0,), (1, 2))) is GateClass.OTHER
    assert classify(Command(Swap, (0, 1))) is GateClass.OTHER


def test_classify_phase_like_rz():
    for th in (0.0, math.pi / 4, 0.7, 3 * math.pi / 2):
        assert classify(Command(Phase(th), (0,))) is classify(Command(Rz(th), (0,)))


@given(st.integers(0, 7).map(lambda j: j * math.pi / 4) | st.floats(0.01, 6.2), st.integers(-3, 3))
def test_classify_invariant_under_full_turns(theta, k):
    a = classify(Command(Rz(theta), (0,)))
    b = classify(Command(Rz(theta + 2 * math.pi * k), (0,)))
    assert a is b


def test_canonical_angle_range():
    assert canonical_angle(-0.1) == pytest.approx(2 * math.pi - 0.1)
    assert canonical_angle(2 * math.pi - 1e-12) == 0.0
    assert canonical_angle(4 * math.pi) == 0.0


def test_matrix_qft1_is_hadamard():
    assert np.allclose(matrix(QFT(1)), matrix(H))


def test_matrix_swap():
    m = matrix(Swap)
    e = np.eye(4)
    assert np.array_equal(m, e[[0, 2, 1, 3]])


def test_matrix_qft3_is_dft():
    w = cmath.exp(2j * math.pi / 8)
    ref = np.array([[w ** (j * k) for k in range(8)] for j in range(8)]) / math.sqrt(8)
    assert np.allclose(matrix(QFT(3)), ref, atol=1e-12)
    assert np.allclose(matrix(QFT(3, inverse=True)), ref.conj().T, atol=1e-12)


def test_matrix_errors():
    with pytest.raises(TooWide):
        matrix(QFT(11))
    with pytest.raises(CompositeHasNoMatrix):
        matrix(QFTNoSwap(3))
    with pytest.raises(CompositeHasNoMatrix):
        matrix(Measure)


def test_rotation_matrices():
    th = 0.37
    assert np.allclose(matrix(Rz(th)), np.diag([cmath.exp(-0.5j * th), cmath.exp(0.5j * th)]))
    assert np.allclose(matrix(Phase(th)), np.diag([1, cmath.exp(1j * th)]))
    c, s = math.cos(th / 2), math.sin(th / 2)
    assert np.allclose(matrix(Rx(th)), [[c, -1j * s], [-1j * s, c]])
    assert np.allclose(matrix(Ry(th)), [[c, -s], [s, c]])
    for g in (X, Y, Z, H, S, T):
        m = matrix(g)
        assert np.allclose(m @ m.conj().T, np.eye(2))


def test_command_validation():
    with pytest.raises(InvalidCommand):
        Command(X, (0,), (0,))
    with pytest.raises(InvalidCommand):
        Command(Swap, (0, 0))
    with pytest.raises(InvalidCommand):
        Command(Swap, (0,))
    with pytest.raises(InvalidCommand):
        Command(Measure, (0,), (1,))
    with pytest.raises(InvalidCommand):
        Command(H, (0,), tags=(COMPUTE, UNCOMPUTE))
    with pytest.raises(InvalidCommand):
        Gate("Bogus")
    with pytest.raises(InvalidCommand):
        Rz(float("nan"))


def test_controls_are_sorted():
    assert Command(X, (0,), (5, 2, 3)).controls == (2, 3, 5)


gates_1q = st.sampled_from([X, Y, Z, H, S, Sdg, T, Tdg]) | st.builds(
    lambda k, th: [Rx, Ry, Rz, Phase][k](th), st.integers(0, 3), st.floats(-7, 7))


@given(gates_1q, st.integers(0, 3), st.lists(st.integers(0, 3), max_size=3, unique=True))
def test_command_then_inverse_is_identity(g, t, ctrl):
    ctrl = [c for c in ctrl if c != t]
    c = Command(g, (t,), tuple(ctrl))
    u = circuit_unitary([c, inverse(c)], range(4))
    assert np.allclose(u, np.eye(16), atol=1e-10)
