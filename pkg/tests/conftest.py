import math
import os

import numpy as np
import pytest
from hypothesis import settings

from qcflow.ir import Command, Gate, H, Phase, Rx, Ry, Rz, S, Sdg, Swap, T, Tdg, X, Y, Z

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

I2 = np.eye(2, dtype=complex)


def kron_le(*mats):
    """Tensor product with mats[0] acting on the least significant bit."""
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(m, out)
    return out


def controlled(u, k):
    """u on bit 0 controlled by bits 1..k (little-endian), built without qcflow."""
    dim = 2 << k
    out = np.eye(dim, dtype=complex)
    top = dim - 2
    out[top:, top:] = u
    return out


def equal_up_to_phase(a, b, tol=1e-10):
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    i = int(np.argmax(np.abs(b)))
    if abs(b[i]) < tol:
        return np.allclose(a, b, atol=tol)
    ph = a[i] / b[i]
    if abs(abs(ph) - 1) > 1e-6:
        return False
    return np.allclose(a, ph * b, atol=tol)


FIXED = [X, Y, Z, H, S, Sdg, T, Tdg]


def random_circuit(rng, nq, ngates, two_qubit=0.4, rotations=True, controls_max=1):
    """Random unitary circuit on qubits 0..nq-1 using 1q gates, CNOT-style controls and Swap."""
    cmds = []
    for _ in range(ngates):
        r = rng.random()
        if rotations and r < 0.3:
            g = [Rx, Ry, Rz, Phase][rng.integers(4)](float(rng.uniform(-math.pi, math.pi)))
        else:
            g = FIXED[rng.integers(len(FIXED))]
        q = int(rng.integers(nq))
        if nq > 1 and rng.random() < two_qubit:
            others = [p for p in range(nq) if p != q]
            k = int(rng.integers(1, min(controls_max, len(others)) + 1))
            ctrl = tuple(int(c) for c in rng.choice(others, size=k, replace=False))
            if rng.random() < 0.2:
                cmds.append(Command(Swap, (q, ctrl[0])))
            else:
                cmds.append(Command(g, (q,), ctrl))
        else:
            cmds.append(Command(g, (q,)))
    return cmds


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance criteria report one line each in the terminal summary
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
