"""Circuit intermediate representation.

A circuit is a stream of :class:`Command` objects. Each command applies one
:class:`Gate` to an ordered tuple of target qubit ids, optionally under a set
of quantum controls, and carries annotation :class:`Tag` values used by the
meta-instructions (compute/uncompute sections, loops).

Register convention: multi-qubit targets are little-endian, i.e. ``targets[0]``
is the least significant bit of the matrix index.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import CompositeHasNoMatrix, InvalidCommand, NonInvertibleGate, TooWide

ANGLE_TOL = 1e-10
TWO_PI = 2.0 * math.pi

FIXED_1Q = frozenset({"X", "Y", "Z", "H", "S", "Sdg", "T", "Tdg"})
ROTATIONS = frozenset({"Rx", "Ry", "Rz", "Phase"})
SINGLE_QUBIT = FIXED_1Q | ROTATIONS
BOOKKEEPING = frozenset({"Allocate", "Deallocate"})
NON_UNITARY = BOOKKEEPING | {"Measure"}
BUILTIN = SINGLE_QUBIT | NON_UNITARY | {"Swap", "QFT"}

_SELF_INVERSE = frozenset({"X", "Y", "Z", "H", "Swap"})
_DAGGER = {"S": "Sdg", "Sdg": "S", "T": "Tdg", "Tdg": "T"}

# name -> expected target count; WIDTH_PARAM: first parameter is the width;
# None: unconstrained
WIDTH_PARAM = -1
_composites: dict[str, int | None] = {}


def register_composite_name(name: str, arity: int | None = None) -> None:
    """Declare a composite gate name so commands using it validate."""
    if name in BUILTIN:
        raise ValueError(f"{name!r} is a builtin gate")
    _composites[name] = arity


def is_composite_name(name: str) -> bool:
    return name in _composites


@dataclass(frozen=True, slots=True)
class Gate:
    """A gate kind plus its classical parameters.

    ``params`` holds the angle for rotations, the width for ``QFT`` and
    integer parameters for composites. ``inverse`` is only meaningful for
    ``QFT`` and composite gates; every other gate inverts by rewriting itself.
    """

    name: str
    params: tuple = ()
    inverse: bool = False

    def __post_init__(self):
        name = self.name
        if name in ROTATIONS:
            if len(self.params) != 1 or not math.isfinite(self.params[0]):
                raise InvalidCommand(f"{name} needs one finite angle, got {self.params}")
        elif name == "QFT":
            if len(self.params) != 1 or int(self.params[0]) < 1:
                raise InvalidCommand("QFT width must be >= 1")
        elif name not in BUILTIN and name not in _composites:
            raise InvalidCommand(f"unknown gate {name!r}")

    @property
    def is_composite(self) -> bool:
        return self.name in _composites

    @property
    def arity(self) -> int | None:
        """Number of targets the gate acts on, or None when unconstrained."""
        name = self.name
        if name in SINGLE_QUBIT or name in NON_UNITARY:
            return 1
        if name == "Swap":
            return 2
        if name == "QFT":
            return int(self.params[0])
        a = _composites.get(name)
        if a == WIDTH_PARAM:
            return int(self.params[0])
        return a

    @property
    def angle(self) -> float:
        return self.params[0]

    def __str__(self) -> str:
        s = self.name
        if self.params:
            s += "(" + ", ".join(f"{p:.6g}" if isinstance(p, float) else str(p) for p in self.params) + ")"
        return s + ("^-1" if self.inverse else "")


# Shorthand constructors. Gates are immutable so module-level instances are shared.
X = Gate("X")
Y = Gate("Y")
Z = Gate("Z")
H = Gate("H")
S = Gate("S")
Sdg = Gate("Sdg")
T = Gate("T")
Tdg = Gate("Tdg")
Swap = Gate("Swap")
Measure = Gate("Measure")
Allocate = Gate("Allocate")
Deallocate = Gate("Deallocate")


def Rx(theta: float) -> Gate:
    return Gate("Rx", (float(theta),))


def Ry(theta: float) -> Gate:
    return Gate("Ry", (float(theta),))


def Rz(theta: float) -> Gate:
    return Gate("Rz", (float(theta),))


def Phase(theta: float) -> Gate:
    return Gate("Phase", (float(theta),))


def QFT(width: int, inverse: bool = False) -> Gate:
    return Gate("QFT", (int(width),), inverse)


@dataclass(frozen=True, slots=True)
class Tag:
    """Annotation attached to a command.

    ``kind`` is ``"compute"``, ``"uncompute"`` or ``"loop"``. Loop tags carry
    the repetition ``count`` and an ``ident`` distinguishing separate loops
    with the same count.
    """

    kind: str
    count: int = 0
    ident: int = 0

    def __post_init__(self):
        if self.kind not in ("compute", "uncompute", "loop"):
            raise InvalidCommand(f"unknown tag kind {self.kind!r}")
        if self.kind == "loop" and self.count < 1:
            raise InvalidCommand("loop count must be >= 1")


COMPUTE = Tag("compute")
UNCOMPUTE = Tag("uncompute")


def Loop(count: int, ident: int = 0) -> Tag:
    return Tag("loop", int(count), ident)


def is_cu_tag(tag: Tag) -> bool:
    return tag.kind != "loop"


@dataclass(frozen=True, slots=True)
class Command:
    """One gate application.

    ``cbits`` lists qubits whose most recent measurement outcome must be 1
    for the command to act (classical control, produced by the deferred
    measurement rewrite). Controls are stored sorted.
    """

    gate: Gate
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    tags: tuple[Tag, ...] = ()
    cbits: tuple[int, ...] = field(default=())

    def __post_init__(self):
        targets, controls = self.targets, self.controls
        if type(targets) is not tuple:
            targets = tuple(targets)
            object.__setattr__(self, "targets", targets)
        if type(controls) is not tuple:
            controls = tuple(controls)
        if len(controls) > 1 and any(controls[i] > controls[i + 1] for i in range(len(controls) - 1)):
            controls = tuple(sorted(controls))
        object.__setattr__(self, "controls", controls)
        if type(self.tags) is not tuple:
            object.__setattr__(self, "tags", tuple(self.tags))
        n = len(targets) + len(controls)
        if n > 1 and len(set(targets + controls)) != n:
            raise InvalidCommand(f"qubit used twice in {self.gate}: targets={targets} controls={controls}")
        arity = self.gate.arity
        if arity is not None and len(targets) != arity:
            raise InvalidCommand(f"{self.gate} expects {arity} targets, got {len(targets)}")
        if not targets:
            raise InvalidCommand("command without targets")
        if controls and self.gate.name in NON_UNITARY:
            raise InvalidCommand(f"{self.gate.name} cannot be controlled")
        cu = sum(1 for t in self.tags if t.kind != "loop")
        if cu > 1:
            raise InvalidCommand("a command carries at most one compute/uncompute tag")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.targets + self.controls

    def with_controls(self, extra) -> Command:
        return Command(self.gate, self.targets, self.controls + tuple(extra), self.tags, self.cbits)

    def with_tags(self, tags) -> Command:
        return Command(self.gate, self.targets, self.controls, tuple(tags), self.cbits)

    def __str__(self) -> str:
        s = f"{self.gate} | {list(self.targets)}"
        if self.controls:
            s += f" ctrl={list(self.controls)}"
        if self.cbits:
            s += f" if={list(self.cbits)}"
        if self.tags:
            s += " [" + ",".join(t.kind if t.kind != "loop" else f"loop{t.count}" for t in self.tags) + "]"
        return s


def canonical_angle(theta: float) -> float:
    """Reduce to [0, 2pi); values within ANGLE_TOL of 2pi map to 0."""
    a = math.fmod(theta, TWO_PI)
    if a < 0:
        a += TWO_PI
    if TWO_PI - a < ANGLE_TOL:
        a = 0.0
    return a


def is_identity_angle(theta: float) -> bool:
    return canonical_angle(theta) < ANGLE_TOL


def inverse_gate(gate: Gate) -> Gate:
    name = gate.name
    if name in NON_UNITARY:
        raise NonInvertibleGate(f"{name} has no inverse")
    if name in _SELF_INVERSE:
        return gate
    if name in _DAGGER:
        return Gate(_DAGGER[name])
    if name in ROTATIONS:
        return Gate(name, (-gate.params[0],))
    return Gate(name, gate.params, not gate.inverse)


def inverse(cmd: Command) -> Command:
    """Command applying the adjoint unitary on the same qubits."""
    return Command(inverse_gate(cmd.gate), cmd.targets, cmd.controls, cmd.tags, cmd.cbits)


class GateClass(Enum):
    CNOT = "cnot"
    CLIFFORD1Q = "clifford1q"
    T = "t"
    RZ = "rz"
    MEASURE = "measure"
    BOOKKEEPING = "bookkeeping"
    OTHER = "other"


_CLIFFORD_FIXED = frozenset({"X", "Y", "Z", "H", "S", "Sdg"})
_QUARTER = math.pi / 4


def _angle_class(theta: float) -> GateClass:
    a = canonical_angle(theta)
    k = round(a / _QUARTER)
    if abs(a - k * _QUARTER) < ANGLE_TOL:
        return GateClass.CLIFFORD1Q if k % 2 == 0 else GateClass.T
    return GateClass.RZ


def classify(cmd: Command) -> GateClass:
    name = cmd.gate.name
    nc = len(cmd.controls)
    if name == "X" and nc == 1:
        return GateClass.CNOT
    if name == "Measure":
        return GateClass.MEASURE
    if name in BOOKKEEPING:
        return GateClass.BOOKKEEPING
    if nc:
        return GateClass.OTHER
    if name in _CLIFFORD_FIXED:
        return GateClass.CLIFFORD1Q
    if name == "T" or name == "Tdg":
        return GateClass.T
    if name in ROTATIONS:
        return _angle_class(cmd.gate.params[0])
    return GateClass.OTHER


MAX_MATRIX_WIDTH = 10

_FIXED_MATRICES = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "Sdg": np.array([[1, 0], [0, -1j]], dtype=complex),
    "T": np.array([[1, 0], [0, cmath.exp(1j * math.pi / 4)]], dtype=complex),
    "Tdg": np.array([[1, 0], [0, cmath.exp(-1j * math.pi / 4)]], dtype=complex),
    "Swap": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}


def _rotation(name: str, theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    if name == "Rx":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if name == "Ry":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if name == "Rz":
        return np.array([[cmath.exp(-0.5j * theta), 0], [0, cmath.exp(0.5j * theta)]], dtype=complex)
    return np.array([[1, 0], [0, cmath.exp(1j * theta)]], dtype=complex)


def dft_matrix(width: int) -> np.ndarray:
    dim = 1 << width
    jk = np.outer(np.arange(dim), np.arange(dim))
    return np.exp(2j * np.pi * jk / dim) / math.sqrt(dim)


def matrix(gate: Gate) -> np.ndarray:
    """Exact unitary of a non-composite gate on its own targets (little-endian)."""
    name = gate.name
    if name in NON_UNITARY:
        raise CompositeHasNoMatrix(f"{name} is not unitary")
    if gate.is_composite:
        raise CompositeHasNoMatrix(f"composite {name} has no direct matrix")
    if name in _FIXED_MATRICES:
        return _FIXED_MATRICES[name].copy()
    if name in ROTATIONS:
        return _rotation(name, gate.params[0])
    width = int(gate.params[0])
    if width > MAX_MATRIX_WIDTH:
        raise TooWide(f"QFT width {width} exceeds {MAX_MATRIX_WIDTH}")
    m = dft_matrix(width)
    return m.conj().T if gate.inverse else m
