import cmath
import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcflow.backends import circuit_unitary
from qcflow.decompose import (IGS, RULES, SIMULATABLE, TARGET, DecomposeStage, QFTNoSwap, expand_once,
                              find_rule, lower, rule_cc_phase, rule_controlled_1q, zyz_decompose)
from qcflow.engine import ListBackend, Pipeline
from qcflow.errors import NoRuleApplicable
from qcflow.ir import (COMPUTE, QFT, UNCOMPUTE, Command, Gate, GateClass, H, Loop, Measure, Phase, Rx, Ry, Rz,
                       S, Sdg, Swap, T, Tdg, X, Y, Z, classify, matrix)
from qcflow.qmath import PhiAdd

from conftest import FIXED, controlled, equal_up_to_phase, kron_le

XM = np.array([[0, 1], [1, 0]], dtype=complex)


def phase_m(th):
    return np.diag([1, cmath.exp(1j * th)])


def lowered_unitary(cmd, order):
    out = lower([cmd], TARGET)
    for c in out:
        assert TARGET(c), c
    return circuit_unitary(out, order), out


def dft(w, inv=False):
    d = 1 << w
    s = -1 if inv else 1
    return np.array([[cmath.exp(s * 2j * math.pi * j * k / d) for k in range(d)] for j in range(d)]) / math.sqrt(d)


def test_swap_is_three_cnots():
    u, out = lowered_unitary(Command(Swap, (0, 1)), (0, 1))
    assert len(out) == 3 and all(classify(c) is GateClass.CNOT for c in out)
    assert np.allclose(u, np.eye(4)[[0, 2, 1, 3]])


def test_toffoli_exact():
    u, out = lowered_unitary(Command(X, (2,), (0, 1)), (2, 0, 1))
    assert len(out) == 15
    assert np.allclose(u, controlled(XM, 2), atol=1e-10)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_multi_controlled_x(k):
    order = tuple(range(k + 1))
    u, _ = lowered_unitary(Command(X, (0,), order[1:]), order)
    assert np.allclose(u, controlled(XM, k), atol=1e-10)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_controlled_swap(k):
    n = k + 2
    cmd = Command(Swap, (0, 1), tuple(range(2, n)))
    u, _ = lowered_unitary(cmd, range(n))
    ref = np.eye(1 << n)
    full = (1 << n) - 1
    for i in range(1 << n):
        if (i >> 2) == (full >> 2) and ((i & 1) != ((i >> 1) & 1)):
            ref[i] = np.eye(1 << n)[i ^ 3]
    assert np.allclose(u, ref, atol=1e-10)


@pytest.mark.parametrize("theta", [0.3, math.pi / 4, -1.1, math.pi])
@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_controlled_phase(theta, k):
    order = tuple(range(k + 1))
    u, _ = lowered_unitary(Command(Phase(theta), (0,), order[1:]), order)
    assert np.allclose(u, controlled(phase_m(theta), k), atol=1e-10)


def test_cc_phase_shape():
    out = rule_cc_phase(Command(Phase(0.8), (0,), (1, 2)))
    assert [c.gate.name for c in out] == ["Phase", "X", "Phase", "X", "Phase"]
    assert sum(1 for c in out if c.gate.name == "Phase" and len(c.controls) == 1) == 3


@pytest.mark.parametrize("perm", list(itertools.permutations(range(3))))
def test_cc_phase_symmetric(perm):
    # a doubly controlled phase is symmetric in all three qubits
    q = tuple(perm)
    cmd = Command(Phase(0.9), (q[0],), (q[1], q[2]))
    u, _ = lowered_unitary(cmd, (0, 1, 2))
    assert np.allclose(u, np.diag([1] * 7 + [cmath.exp(0.9j)]), atol=1e-10)


@pytest.mark.parametrize("g", ["Z", "S", "Sdg", "T", "Tdg"])
@pytest.mark.parametrize("k", [1, 2])
def test_controlled_diagonal(g, k):
    gate = {"Z": Z, "S": S, "Sdg": Sdg, "T": T, "Tdg": Tdg}[g]
    order = tuple(range(k + 1))
    u, _ = lowered_unitary(Command(gate, (0,), order[1:]), order)
    assert np.allclose(u, controlled(matrix(gate), k), atol=1e-10)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_controlled_rz_exact(k):
    th = 0.77
    order = tuple(range(k + 1))
    u, _ = lowered_unitary(Command(Rz(th), (0,), order[1:]), order)
    rz = np.diag([cmath.exp(-0.5j * th), cmath.exp(0.5j * th)])
    assert np.allclose(u, controlled(rz, k), atol=1e-10)


@pytest.mark.parametrize("gate", FIXED + [Rx(0.4), Ry(-2.0), Rz(1.3), Phase(2.2)])
def test_controlled_1q_exact(gate):
    u, _ = lowered_unitary(Command(gate, (0,), (1,)), (0, 1))
    assert np.allclose(u, controlled(matrix(gate), 1), atol=1e-10)


@pytest.mark.parametrize("gate", [H, Y, Rx(0.4), Ry(1.0)])
def test_doubly_controlled_1q(gate):
    u, _ = lowered_unitary(Command(gate, (0,), (1, 2)), (0, 1, 2))
    assert np.allclose(u, controlled(matrix(gate), 2), atol=1e-10)


def test_abc_rule_on_x_is_exact():
    out = rule_controlled_1q(Command(X, (0,), (1,)))
    assert np.allclose(circuit_unitary(out, (0, 1)), controlled(XM, 1), atol=1e-10)


def test_controlled_h_cost():
    _, out = lowered_unitary(Command(H, (0,), (1,)), (0, 1))
    assert sum(1 for c in out if classify(c) is GateClass.CNOT) == 2


@given(st.floats(-math.pi, math.pi), st.floats(0, math.pi), st.floats(-math.pi, math.pi), st.floats(-math.pi, math.pi))
def test_zyz_roundtrip(a, b, g, d):
    def rz(t):
        return np.diag([cmath.exp(-0.5j * t), cmath.exp(0.5j * t)])

    def ry(t):
        c, s = math.cos(t / 2), math.sin(t / 2)
        return np.array([[c, -s], [s, c]])

    u = cmath.exp(1j * d) * rz(a) @ ry(b) @ rz(g)
    delta, alpha, beta, gamma = zyz_decompose(u)
    v = cmath.exp(1j * delta) * rz(alpha) @ ry(beta) @ rz(gamma)
    assert np.allclose(u, v, atol=1e-9)


@pytest.mark.parametrize("w", [1, 2, 3, 4, 5])
def test_qft_lowering(w):
    q = tuple(range(w))
    u, _ = lowered_unitary(Command(QFT(w), q), q)
    assert np.allclose(u, dft(w), atol=1e-10)
    ui, _ = lowered_unitary(Command(QFT(w, inverse=True), q), q)
    assert np.allclose(ui, dft(w, inv=True), atol=1e-10)


def test_qft_cost():
    out = expand_once(Command(QFT(4), (0, 1, 2, 3)))
    assert sum(1 for c in out if c.gate.name == "H") == 4
    assert sum(1 for c in out if c.gate.name == "Phase") == 6
    assert sum(1 for c in out if c.gate.name == "Swap") == 2


def test_qft_noswap_is_bit_reversed_dft():
    w = 3
    q = tuple(range(w))
    u, _ = lowered_unitary(Command(QFTNoSwap(w), q), q)
    rev = [int(format(i, f"0{w}b")[::-1], 2) for i in range(1 << w)]
    assert np.allclose(u, dft(w)[rev], atol=1e-10)


def test_controlled_qft2():
    u, _ = lowered_unitary(Command(QFT(2), (0, 1), (2,)), (0, 1, 2))
    ref = np.eye(8, dtype=complex)
    ref[4:, 4:] = dft(2)
    assert np.allclose(u, ref, atol=1e-10)


@pytest.mark.parametrize("c", [0, 1, 5, 7])
@pytest.mark.parametrize("ctrl", [False, True])
def test_phi_add_sandwich(c, ctrl):
    w = 3
    reg = (0, 1, 2)
    cmds = [Command(QFTNoSwap(w), reg), Command(PhiAdd(c, w), reg, (3,) if ctrl else ()),
            Command(QFTNoSwap(w, inverse=True), reg)]
    u = circuit_unitary(lower(cmds, TARGET), (0, 1, 2, 3))
    for b in range(8):
        for cb in (0, 1):
            v = np.zeros(16)
            v[b | cb << 3] = 1
            out = u @ v
            add = c if (cb or not ctrl) else 0
            assert abs(out[((b + add) % 8) | cb << 3]) == pytest.approx(1, abs=1e-9)


def test_inverse_composite_swaps_tags():
    from qcflow.decompose import register_composite
    from qcflow.meta import Compute, uncompute

    def body(rec, gate, t):
        with Compute(rec) as sec:
            rec.apply(H, t[0])
        rec.apply(X, t[1], [t[0]])
        uncompute(rec, sec)

    register_composite("TestSandwich", 2, body)
    fwd = expand_once(Command(Gate("TestSandwich", (), False), (0, 1)))
    inv = expand_once(Command(Gate("TestSandwich", (), True), (0, 1)))
    assert [c.tags for c in fwd] == [(COMPUTE,), (), (UNCOMPUTE,)]
    assert [c.tags for c in inv] == [(COMPUTE,), (), (UNCOMPUTE,)]
    assert np.allclose(circuit_unitary(fwd + inv, (0, 1)), np.eye(4), atol=1e-10)
    # a controlled composite keeps its compute sections uncontrolled
    ctl = expand_once(Command(Gate("TestSandwich", (), False), (0, 1), (2,)))
    assert [len(c.controls) for c in ctl] == [0, 2, 0]
    naive = expand_once(Command(Gate("TestSandwich", (), False), (0, 1), (2,)), naive=True)
    assert [len(c.controls) for c in naive] == [1, 2, 1]


def test_tags_and_cbits_propagate():
    cmd = Command(Swap, (0, 1), tags=(COMPUTE, Loop(3, 1)))
    for c in expand_once(cmd):
        assert c.tags == (COMPUTE, Loop(3, 1))
    cmd = Command(X, (0,), (1, 2), cbits=(5,))
    for c in lower([cmd], TARGET):
        assert c.cbits == (5,)


def test_specificity_prefers_toffoli():
    assert find_rule(Command(X, (2,), (0, 1))).name == "toffoli"
    assert find_rule(Command(X, (3,), (0, 1, 2))).name == "multi_controlled_x"
    assert find_rule(Command(Rz(0.1), (0,), (1,))).name == "controlled_rz"


def test_no_rule():
    with pytest.raises(NoRuleApplicable):
        expand_once(Command(Measure, (0,)))
    with pytest.raises(NoRuleApplicable):
        find_rule(Command(H, (0,)), RULES[:1])


def test_gate_set_membership():
    assert TARGET(Command(X, (0,), (1,)))
    assert not TARGET(Command(H, (0,), (1,)))
    assert IGS(Command(H, (0,), (1,)))
    assert IGS(Command(QFT(4), (0, 1, 2, 3)))
    assert not IGS(Command(QFT(4), (0, 1, 2, 3), (4,)))
    assert SIMULATABLE(Command(Swap, (0, 1), (2, 3)))
    assert not SIMULATABLE(Command(QFT(2), (0, 1)))


@pytest.mark.parametrize("seed", range(8))
def test_random_lowering_preserves_unitary(seed):
    from conftest import random_circuit

    rng = np.random.default_rng(seed)
    circ = random_circuit(rng, 4, 15, controls_max=3)
    low = lower(circ, TARGET)
    assert all(classify(c) is not GateClass.OTHER for c in low)
    assert np.allclose(circuit_unitary(low, range(4)), circuit_unitary(circ, range(4)), atol=1e-9)


def test_decompose_stage_streams():
    back = ListBackend()
    eng = Pipeline([DecomposeStage(IGS)], back)
    q = eng.allocate_qureg(3)
    eng.apply(X, q[2], q[:2])
    eng.emit(Command(QFT(3), tuple(q)))
    eng.flush()
    names = [c.gate.name for c in back.commands if c.gate.name != "Allocate"]
    assert names[-1] == "QFT" and len(names) == 16


def test_kron_helper_sanity():
    # bit 0 is the first factor
    m = kron_le(XM, np.eye(2))
    assert m[1, 0] == 1 and m[2, 0] == 0
    assert equal_up_to_phase(1j * np.eye(2), np.eye(2))
