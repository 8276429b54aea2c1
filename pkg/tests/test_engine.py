import numpy as np
import pytest

from qcflow.backends import CounterStage, Simulator, circuit_unitary
from qcflow.decompose import TARGET, DecomposeStage
from qcflow.engine import Engine, ListBackend, Pipeline
from qcflow.errors import DeadQubitUse
from qcflow.ir import Allocate, Command, Deallocate, GateClass, H, Rz, X, classify
from qcflow.optimize import OptimizerStage

from conftest import random_circuit


def test_allocate_ids_are_monotone():
    eng = Pipeline()
    assert eng.allocate_qubit() == 0
    assert eng.allocate_qubit() == 1
    eng.deallocate(0)
    assert eng.allocate_qubit() == 2


def test_width_after_two_allocations():
    c = CounterStage()
    eng = Pipeline([], c)
    eng.allocate_qureg(2)
    eng.flush()
    assert c.report().max_width == 2


def test_identity_pipeline_forwards():
    back = ListBackend()
    eng = Pipeline([Engine()], back)
    q = eng.allocate_qubit()
    eng.apply(H, q)
    eng.flush()
    assert back.commands == [Command(Allocate, (0,)), Command(H, (q,))]


def test_optimizer_pipeline_cancels_rotations():
    back = ListBackend()
    eng = Pipeline([OptimizerStage()], back)
    q = eng.allocate_qubit()
    eng.send([Command(Rz(0.3), (q,)), Command(Rz(-0.3), (q,))])
    eng.flush()
    assert [c for c in back.commands if c.gate.name != "Allocate"] == []


def test_toffoli_through_decomposer():
    back = ListBackend()
    eng = Pipeline([DecomposeStage(TARGET)], back)
    a, b, c = eng.allocate_qureg(3)
    eng.apply(X, c, [a, b])
    eng.flush()
    out = [x for x in back.commands if x.gate.name != "Allocate"]
    assert len(out) == 15
    classes = [classify(x) for x in out]
    assert classes.count(GateClass.T) == 7
    assert classes.count(GateClass.CNOT) == 6
    assert sum(1 for x in out if x.gate.name == "H") == 2
    ref = np.eye(8)[[0, 1, 2, 7, 4, 5, 6, 3]]
    assert np.allclose(circuit_unitary(out, [a, b, c]), ref, atol=1e-10)


def test_dead_qubit_use():
    eng = Pipeline()
    q = eng.allocate_qubit()
    eng.deallocate(q)
    with pytest.raises(DeadQubitUse):
        eng.apply(H, q)
    with pytest.raises(DeadQubitUse):
        eng.apply(H, 7)
    with pytest.raises(DeadQubitUse):
        eng.deallocate(q)


def test_flush_empty_and_idempotent():
    back = ListBackend()
    eng = Pipeline([OptimizerStage()], back)
    eng.flush()
    assert back.commands == []
    q = eng.allocate_qubit()
    eng.apply(H, q)
    assert back.commands == [Command(Allocate, (q,))]  # H still buffered
    eng.flush()
    eng.flush()
    assert back.commands == [Command(Allocate, (q,)), Command(H, (q,))]
    assert back.flushes == 3


def test_deallocate_does_not_flush():
    back = ListBackend()
    eng = Pipeline([OptimizerStage()], back)
    a, b = eng.allocate_qureg(2)
    eng.apply(H, a)
    eng.deallocate(b)
    assert Command(H, (a,)) not in back.commands


def test_bounded_buffering(rng):
    opt = OptimizerStage(window=5)
    back = ListBackend()
    opt.next_engine = back
    for c in random_circuit(rng, 3, 200, rotations=False):
        opt.receive([c])
        for dq in opt._q.values():
            assert len(dq) <= 5


@pytest.mark.parametrize("seed", range(5))
def test_pipeline_preserves_state(seed):
    rng = np.random.default_rng(seed)
    nq = 5
    circ = random_circuit(rng, nq, 40, controls_max=2)
    ref = Simulator()
    for q in range(nq):
        ref.add_qubit(q)
    ref.receive(circ)
    sim = Simulator()
    eng = Pipeline([DecomposeStage(TARGET), OptimizerStage(), DecomposeStage(TARGET)], sim)
    qs = eng.allocate_qureg(nq)
    eng.send(circ)
    eng.flush()
    a = ref.amplitudes(range(nq))
    b = sim.amplitudes(qs)
    assert abs(abs(np.vdot(a, b)) - 1) < 1e-8


def test_batch_boundaries_do_not_matter(rng):
    circ = random_circuit(rng, 4, 80)
    outs = []
    for batch in (1, 7, 80):
        back = ListBackend()
        eng = Pipeline([DecomposeStage(TARGET), OptimizerStage()], back)
        eng.allocate_qureg(4)
        for i in range(0, len(circ), batch):
            eng.send(circ[i:i + batch])
        eng.flush()
        outs.append(back.commands)
    assert outs[0] == outs[1] == outs[2]
