"""Decomposition rules and the lowering stage.

A :class:`GateSetSpec` says which commands a backend accepts. The
:class:`DecomposeStage` rewrites every other command with the most specific
registered :class:`DecompositionRule` and recurses until only supported
commands remain. Rules never allocate qubits; gates with many controls are
lowered by recursion on the control count.
"""
from __future__ import annotations

import cmath
import math
from collections.abc import Callable, Iterable
from dataclasses import dataclass

import numpy as np

from .engine import Engine, Recorder
from .errors import NoRuleApplicable
from .ir import (ANGLE_TOL, NON_UNITARY, SINGLE_QUBIT, UNCOMPUTE, COMPUTE, WIDTH_PARAM, Command,
                 Gate, H, Phase, Ry, Rz, Swap, T, Tdg, X, canonical_angle, inverse, matrix,
                 register_composite_name)
from .meta import attach_controls


@dataclass(frozen=True)
class GateSetSpec:
    name: str
    supports: Callable[[Command], bool]

    def __call__(self, cmd: Command) -> bool:
        return self.supports(cmd)


def _is_target(cmd: Command) -> bool:
    name = cmd.gate.name
    nc = len(cmd.controls)
    if nc == 0:
        return name in SINGLE_QUBIT or name in NON_UNITARY
    return nc == 1 and name == "X"


_QFT_NAMES = frozenset({"QFT", "QFTNoSwap"})


def _is_igs(cmd: Command) -> bool:
    name = cmd.gate.name
    nc = len(cmd.controls)
    if name in SINGLE_QUBIT:
        return nc <= 1
    if nc:
        return False
    return name in NON_UNITARY or name == "Swap" or name in _QFT_NAMES


def _is_simulatable(cmd: Command) -> bool:
    name = cmd.gate.name
    return name in SINGLE_QUBIT or name in NON_UNITARY or name == "Swap"


TARGET = GateSetSpec("target", _is_target)
IGS = GateSetSpec("igs", _is_igs)
SIMULATABLE = GateSetSpec("simulatable", _is_simulatable)


# --------------------------------------------------------------------------
# composite registry

_bodies: dict[str, Callable[[Recorder, Gate, tuple[int, ...]], None]] = {}


def register_composite(name: str, arity: int | None, body: Callable[[Recorder, Gate, tuple], None]) -> None:
    """Register a composite gate.

    ``body(rec, gate, targets)`` emits the uncontrolled, non-inverted
    implementation into ``rec``; it may use compute/uncompute and control
    scopes but must not allocate.
    """
    register_composite_name(name, arity)
    _bodies[name] = body


def _swap_cu(cmd: Command) -> Command:
    tags = []
    for t in cmd.tags:
        if t.kind == "compute":
            t = UNCOMPUTE
        elif t.kind == "uncompute":
            t = COMPUTE
        tags.append(t)
    return inverse(cmd).with_tags(tags)


def expand_body(gate: Gate, targets: tuple[int, ...], naive: bool = False) -> list[Command]:
    """Uncontrolled expansion of a composite or QFT gate.

    ``naive`` is forwarded to control scopes opened inside the body.
    """
    name = gate.name
    if name == "QFT" or name == "QFTNoSwap":
        fwd = _qft_cascade(targets, swaps=(name == "QFT"))
    else:
        rec = Recorder(naive)
        _bodies[name](rec, Gate(name, gate.params), tuple(targets))
        fwd = rec.commands
    if not gate.inverse:
        return fwd
    return [_swap_cu(c) for c in reversed(fwd)]


def _qft_cascade(t: tuple[int, ...], swaps: bool) -> list[Command]:
    w = len(t)
    out = []
    for i in range(w - 1, -1, -1):
        out.append(Command(H, (t[i],)))
        for j in range(i - 1, -1, -1):
            out.append(Command(Phase(math.pi / (1 << (i - j))), (t[i],), (t[j],)))
    if swaps:
        for k in range(w // 2):
            out.append(Command(Swap, (t[k], t[w - 1 - k])))
    return out


def qft_nswap_body(rec, gate, targets):
    rec.send(_qft_cascade(targets, swaps=False))


register_composite("QFTNoSwap", WIDTH_PARAM, qft_nswap_body)


def QFTNoSwap(width: int, inverse: bool = False) -> Gate:
    """QFT without the terminal bit-reversal swaps (Draper convention)."""
    return Gate("QFTNoSwap", (int(width),), inverse)


# --------------------------------------------------------------------------
# rules

def _cnot(c: int, t: int) -> Command:
    return Command(X, (t,), (c,))


def rule_swap(cmd: Command, naive: bool = False) -> list[Command]:
    a, b = cmd.targets
    return [_cnot(a, b), _cnot(b, a), _cnot(a, b)]


def rule_controlled_swap(cmd: Command, naive: bool = False) -> list[Command]:
    a, b = cmd.targets
    return [_cnot(b, a), Command(X, (b,), cmd.controls + (a,)), _cnot(b, a)]


def rule_toffoli(cmd: Command, naive: bool = False) -> list[Command]:
    """Standard 7-T network with 6 CNOTs between two H gates."""
    a, b = cmd.controls
    c = cmd.targets[0]
    return [
        Command(H, (c,)),
        _cnot(b, c), Command(Tdg, (c,)),
        _cnot(a, c), Command(T, (c,)),
        _cnot(b, c), Command(Tdg, (c,)),
        _cnot(a, c), Command(T, (b,)), Command(T, (c,)),
        Command(H, (c,)),
        _cnot(a, b), Command(T, (a,)), Command(Tdg, (b,)),
        _cnot(a, b),
    ]


def rule_multi_controlled_x(cmd: Command, naive: bool = False) -> list[Command]:
    t = cmd.targets[0]
    return [Command(H, (t,)), Command(Phase(math.pi), (t,), cmd.controls), Command(H, (t,))]


def rule_controlled_phase(cmd: Command, naive: bool = False) -> list[Command]:
    half = cmd.gate.params[0] / 2
    c, = cmd.controls
    t = cmd.targets[0]
    return [Command(Phase(half), (c,)), Command(Phase(half), (t,)), _cnot(c, t),
            Command(Phase(-half), (t,)), _cnot(c, t)]


def rule_cc_phase(cmd: Command, naive: bool = False) -> list[Command]:
    """Phase with k >= 2 controls via two (k-1)-controlled X on the last control.

    For k = 2 this is three controlled phases of +-theta/2 and two CNOTs.
    """
    half = cmd.gate.params[0] / 2
    *rest, last = cmd.controls
    rest = tuple(rest)
    t = cmd.targets[0]
    return [
        Command(Phase(half), (t,), (last,)),
        Command(X, (last,), rest),
        Command(Phase(-half), (t,), (last,)),
        Command(X, (last,), rest),
        Command(Phase(half), (t,), rest),
    ]


rule_multi_controlled_phase = rule_cc_phase

_DIAGONAL_ANGLE = {"Z": math.pi, "S": math.pi / 2, "Sdg": -math.pi / 2, "T": math.pi / 4, "Tdg": -math.pi / 4}


def rule_controlled_diagonal(cmd: Command, naive: bool = False) -> list[Command]:
    return [Command(Phase(_DIAGONAL_ANGLE[cmd.gate.name]), cmd.targets, cmd.controls)]


def rule_controlled_rz(cmd: Command, naive: bool = False) -> list[Command]:
    theta = cmd.gate.params[0]
    *rest, last = cmd.controls
    out = [Command(Phase(theta), cmd.targets, cmd.controls)]
    out.append(Command(Phase(-theta / 2), (last,), tuple(rest)))
    return out


def zyz_decompose(u: np.ndarray) -> tuple[float, float, float, float]:
    """Return (delta, alpha, beta, gamma) with u = e^{i delta} Rz(alpha) Ry(beta) Rz(gamma)."""
    det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
    delta = cmath.phase(det) / 2
    v = u * cmath.exp(-1j * delta)
    beta = 2 * math.atan2(abs(v[1, 0]), abs(v[0, 0]))
    s = cmath.phase(v[1, 1]) if abs(v[1, 1]) > 1e-12 else 0.0
    d = cmath.phase(v[1, 0]) if abs(v[1, 0]) > 1e-12 else 0.0
    return delta, s + d, beta, s - d


def _rot(gate_fn, angle: float, t: int) -> list[Command]:
    if canonical_angle(angle) < ANGLE_TOL:
        return []
    return [Command(gate_fn(angle), (t,))]


def rule_controlled_1q(cmd: Command, naive: bool = False) -> list[Command]:
    """ABC construction: controlled-U from two controlled-X and uncontrolled rotations."""
    delta, alpha, beta, gamma = zyz_decompose(matrix(cmd.gate))
    t = cmd.targets[0]
    *rest, last = cmd.controls
    rest = tuple(rest)
    flip = Command(X, (t,), cmd.controls)
    out = []
    out += _rot(Rz, (gamma - alpha) / 2, t)                 # C
    out.append(flip)
    out += _rot(Rz, -(gamma + alpha) / 2, t)                # B
    out += _rot(Ry, -beta / 2, t)
    out.append(flip)
    out += _rot(Ry, beta / 2, t)                            # A
    out += _rot(Rz, alpha, t)
    if canonical_angle(delta) >= ANGLE_TOL:
        out.append(Command(Phase(delta), (last,), rest))
    return out


def rule_qft(cmd: Command, naive: bool = False) -> list[Command]:
    return expand_body(cmd.gate, cmd.targets, naive)


rule_composite = rule_qft


def rule_control_composite(cmd: Command, naive: bool = False) -> list[Command]:
    """Expand the body, then control every command that the scope rule allows."""
    body = expand_body(cmd.gate, cmd.targets, naive)
    return attach_controls(body, cmd.controls, naive)


@dataclass(frozen=True)
class DecompositionRule:
    name: str
    matches: Callable[[Command], bool]
    expand: Callable[[Command, bool], list[Command]]
    specificity: int = 0


def _nc(cmd):
    return len(cmd.controls)


RULES: list[DecompositionRule] = [
    DecompositionRule("swap", lambda c: c.gate.name == "Swap" and not c.controls, rule_swap, 2),
    DecompositionRule("controlled_swap", lambda c: c.gate.name == "Swap" and c.controls, rule_controlled_swap, 1),
    DecompositionRule("toffoli", lambda c: c.gate.name == "X" and _nc(c) == 2, rule_toffoli, 3),
    DecompositionRule("multi_controlled_x", lambda c: c.gate.name == "X" and _nc(c) >= 3,
                      rule_multi_controlled_x, 1),
    DecompositionRule("controlled_phase", lambda c: c.gate.name == "Phase" and _nc(c) == 1,
                      rule_controlled_phase, 3),
    DecompositionRule("cc_phase", lambda c: c.gate.name == "Phase" and _nc(c) == 2, rule_cc_phase, 3),
    DecompositionRule("multi_controlled_phase", lambda c: c.gate.name == "Phase" and _nc(c) >= 3,
                      rule_multi_controlled_phase, 1),
    DecompositionRule("controlled_diagonal", lambda c: c.gate.name in _DIAGONAL_ANGLE and _nc(c) >= 1,
                      rule_controlled_diagonal, 2),
    DecompositionRule("controlled_rz", lambda c: c.gate.name == "Rz" and _nc(c) >= 1, rule_controlled_rz, 2),
    DecompositionRule("controlled_1q", lambda c: c.gate.name in SINGLE_QUBIT and _nc(c) >= 1,
                      rule_controlled_1q, 0),
    DecompositionRule("qft", lambda c: c.gate.name == "QFT" and not c.controls, rule_qft, 2),
    DecompositionRule("composite", lambda c: c.gate.is_composite and not c.controls, rule_composite, 2),
    DecompositionRule("control_composite",
                      lambda c: (c.gate.is_composite or c.gate.name == "QFT") and c.controls,
                      rule_control_composite, 1),
]


def find_rule(cmd: Command, rules: Iterable[DecompositionRule] = RULES) -> DecompositionRule:
    best = None
    for r in rules:
        if r.matches(cmd) and (best is None or r.specificity > best.specificity):
            best = r
    if best is None:
        raise NoRuleApplicable(f"no decomposition for {cmd}")
    return best


def _inherit(parent: Command, children: list[Command]) -> list[Command]:
    ptags = parent.tags
    if not ptags and not parent.cbits:
        return children
    cu = [t for t in ptags if t.kind != "loop"]
    loops = tuple(t for t in ptags if t.kind == "loop")
    out = []
    for c in children:
        tags = c.tags
        if cu and not any(t.kind != "loop" for t in tags):
            tags = (cu[0],) + tags
        tags = tags + loops
        out.append(Command(c.gate, c.targets, c.controls, tags, c.cbits + parent.cbits))
    return out


def expand_once(cmd: Command, naive: bool = False) -> list[Command]:
    """One rewriting step; parent tags and classical controls are propagated."""
    return _inherit(cmd, find_rule(cmd).expand(cmd, naive))


class Lowerer:
    """Recursive lowering with a per-command memo of the fully lowered result."""

    def __init__(self, spec: GateSetSpec, naive: bool = False, cache_size: int = 50_000):
        self.spec = spec
        self.naive = naive
        self.cache_size = cache_size
        self._cache: dict[Command, tuple[Command, ...]] = {}

    def lower_into(self, cmd: Command, out: list[Command]) -> None:
        if self.spec.supports(cmd):
            out.append(cmd)
            return
        hit = self._cache.get(cmd)
        if hit is not None:
            out.extend(hit)
            return
        res: list[Command] = []
        for c in expand_once(cmd, self.naive):
            self.lower_into(c, res)
        if len(self._cache) >= self.cache_size:
            self._cache.clear()
        self._cache[cmd] = tuple(res)
        out.extend(res)

    def lower(self, cmds: Iterable[Command]) -> list[Command]:
        out: list[Command] = []
        for c in cmds:
            self.lower_into(c, out)
        return out


def lower(cmds: Iterable[Command], spec: GateSetSpec = TARGET, naive: bool = False) -> list[Command]:
    return Lowerer(spec, naive).lower(cmds)


class DecomposeStage(Engine):
    """Engine stage emitting only ``spec``-supported commands.

    ``naive_control=None`` inherits the pipeline's setting.
    """

    def __init__(self, spec: GateSetSpec = TARGET, naive_control: bool | None = None):
        super().__init__()
        self.spec = spec
        self.naive_control = naive_control
        self._lowerer: Lowerer | None = None

    def _get_lowerer(self) -> Lowerer:
        if self._lowerer is None:
            naive = self.naive_control
            if naive is None:
                naive = bool(self.main.naive_control) if self.main is not None else False
            self._lowerer = Lowerer(self.spec, naive)
        return self._lowerer

    def receive(self, cmds):
        low = self._get_lowerer()
        out: list[Command] = []
        for c in cmds:
            low.lower_into(c, out)
        self.send(out)
