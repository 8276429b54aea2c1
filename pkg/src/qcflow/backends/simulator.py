"""Dense state-vector simulator used as the verification oracle.

Qubits get bit positions in order of first appearance. Commands outside the
simulatable set (1q gates and Swap with any controls, Measure, bookkeeping)
are lowered with the decomposition rules first. Controls are applied by
masking amplitudes, never by building larger matrices.
"""
from __future__ import annotations

import numpy as np

from ..decompose import SIMULATABLE, Lowerer
from ..engine import Engine
from ..errors import QcflowError, TooWide, UnsimulableGate
from ..ir import Command, matrix
from . import _kernels as K

MAX_QUBITS = 24
CLEAN_TOL = 1e-10


class Simulator(Engine):
    """Terminal stage holding a state vector.

    Deallocated qubits in a computational basis state are traced out; a
    deallocation with probability of |1> above ``CLEAN_TOL`` is recorded in
    ``unclean`` (and the qubit is traced out if it is still a basis state).
    """

    supports_loops = False

    def __init__(self, seed=None, naive_control: bool | None = None):
        super().__init__()
        self.rng = np.random.default_rng(seed)
        self.state = np.ones(1, dtype=np.complex128)
        self.index: dict[int, int] = {}
        self.outcomes: dict[int, int] = {}
        self.unclean: list[int] = []
        self._naive = naive_control
        self._lowerer: Lowerer | None = None
        self._mcache: dict = {}

    # -- qubit bookkeeping --------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.index)

    def add_qubit(self, q: int) -> int:
        if q in self.index:
            return self.index[q]
        if self.n >= MAX_QUBITS:
            raise TooWide(f"simulator limited to {MAX_QUBITS} qubits")
        self.index[q] = self.n
        self.state = np.concatenate([self.state, np.zeros_like(self.state)])
        return self.index[q]

    def _bit(self, q: int) -> int:
        b = self.index.get(q)
        return self.add_qubit(q) if b is None else b

    def _remove(self, q: int) -> None:
        b = self.index[q]
        p1 = K.prob_one(self.state, b)
        if p1 > CLEAN_TOL:
            self.unclean.append(q)
        if CLEAN_TOL < p1 < 1 - CLEAN_TOL:
            return  # entangled or superposed; keep it around
        keep = 1 if p1 >= 1 - CLEAN_TOL else 0
        s = self.state.reshape(-1, 2, 1 << b)[:, keep, :]
        self.state = np.ascontiguousarray(s).reshape(-1)
        del self.index[q]
        for k, v in self.index.items():
            if v > b:
                self.index[k] = v - 1

    # -- execution ----------------------------------------------------------

    def _get_lowerer(self) -> Lowerer:
        if self._lowerer is None:
            naive = self._naive
            if naive is None:
                naive = bool(self.main.naive_control) if self.main is not None else False
            self._lowerer = Lowerer(SIMULATABLE, naive)
        return self._lowerer

    def receive(self, cmds):
        low = self._get_lowerer()
        for c in cmds:
            if SIMULATABLE.supports(c):
                self.apply(c)
            else:
                for d in low.lower([c]):
                    self.apply(d)

    def flush(self):
        pass

    def _matrix(self, gate):
        m = self._mcache.get(gate)
        if m is None:
            m = matrix(gate)
            m = (complex(m[0, 0]), complex(m[0, 1]), complex(m[1, 0]), complex(m[1, 1]))
            self._mcache[gate] = m
        return m

    def apply(self, cmd: Command) -> None:
        name = cmd.gate.name
        if name == "Allocate":
            self.add_qubit(cmd.targets[0])
            return
        if name == "Deallocate":
            if cmd.targets[0] in self.index:
                self._remove(cmd.targets[0])
            return
        for c in cmd.cbits:
            if c not in self.outcomes:
                raise QcflowError(f"classical control on unmeasured qubit {c}")
            if self.outcomes[c] != 1:
                return
        if name == "Measure":
            self.measure(cmd.targets[0])
            return
        cmask = 0
        for c in cmd.controls:
            cmask |= 1 << self._bit(c)
        if name == "Swap":
            a, b = (self._bit(q) for q in cmd.targets)
            K.apply_swap(self.state, a, b, cmask)
            return
        if len(cmd.targets) != 1 or cmd.gate.is_composite:
            raise UnsimulableGate(f"cannot apply {cmd.gate} directly")
        t = self._bit(cmd.targets[0])  # may grow the state, so resolve before passing it
        m00, m01, m10, m11 = self._matrix(cmd.gate)
        K.apply_1q(self.state, t, m00, m01, m10, m11, cmask)

    def measure(self, q: int) -> int:
        b = self._bit(q)
        p1 = min(max(K.prob_one(self.state, b), 0.0), 1.0)
        outcome = int(self.rng.random() < p1)
        norm = float(np.sqrt(p1 if outcome else 1.0 - p1))
        K.collapse(self.state, b, outcome, norm)
        self.outcomes[q] = outcome
        return outcome

    # -- readout -------------------------------------------------------------

    def amplitudes(self, order=None) -> np.ndarray:
        """State vector with ``order[i]`` as bit i (default: first-appearance order).

        Qubits not listed must be in |0>; they are projected out.
        """
        if order is None:
            return self.state.copy()
        order = list(order)
        for q in order:
            self._bit(q)
        n = self.n
        t = self.state.reshape([2] * n) if n else self.state
        # numpy axis k holds bit n-1-k
        rest = [q for q in self.index if q not in set(order)]
        axes_bits = [self.index[q] for q in reversed(order)] + [self.index[q] for q in rest]
        t = np.transpose(t, [n - 1 - b for b in axes_bits]) if n else t
        t = t.reshape(1 << len(order), -1)
        return t[:, 0].copy()

    def probability(self, q: int) -> float:
        b = self._bit(q)
        return K.prob_one(self.state, b)


def simulate(cmds, seed=None, qubits=(), naive_control: bool = False) -> Simulator:
    """Run ``cmds`` on a fresh simulator; ``qubits`` are pre-registered in order."""
    sim = Simulator(seed, naive_control)
    for q in qubits:
        sim.add_qubit(q)
    sim.receive(list(cmds))
    return sim


def circuit_unitary(cmds, qubits, naive_control: bool = False) -> np.ndarray:
    """Matrix of a unitary circuit on ``qubits`` (``qubits[0]`` is the LSB)."""
    qubits = list(qubits)
    if len(qubits) > 10:
        raise TooWide("circuit_unitary limited to 10 qubits")
    cmds = list(cmds)
    dim = 1 << len(qubits)
    low = Lowerer(SIMULATABLE, naive_control).lower(cmds)
    u = np.zeros((dim, dim), dtype=np.complex128)
    for col in range(dim):
        sim = Simulator()
        sim._lowerer = Lowerer(SIMULATABLE, naive_control)
        for q in qubits:
            sim.add_qubit(q)
        sim.state[:] = 0
        sim.state[col] = 1
        for c in low:
            sim.apply(c)
        u[:, col] = sim.amplitudes(qubits)
    return u
