"""Reversible arithmetic on quantum registers.

Registers are lists of qubit ids, little-endian. Constant addition follows
Draper: move to the Fourier basis with :func:`~qcflow.decompose.QFTNoSwap`,
add with one phase per qubit, come back. The modular adder and the
controlled modular multiplier follow Beauregard's 2n+3 qubit layout; the
basis changes and the sign test are placed in compute sections so an outer
control scope only needs to control the phase layers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .decompose import QFTNoSwap, register_composite
from .engine import Emitter
from .errors import ConstantOutOfRange, InvalidN, NotCoprime
from .ir import WIDTH_PARAM, Command, Gate, Phase, Swap, X, H
from .meta import Compute, Control, CustomUncompute, uncompute

QuReg = list  # list[int], little-endian


def modinv(a: int, N: int) -> int:
    if math.gcd(a, N) != 1:
        raise NotCoprime(f"gcd({a}, {N}) != 1")
    return pow(a, -1, N) if N > 1 else 0


def bits_for(N: int) -> int:
    """ceil(log2 N)."""
    return (N - 1).bit_length()


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def default_base(N: int) -> int:
    """Smallest a >= 2 coprime to N."""
    for a in range(2, N):
        if math.gcd(a, N) == 1:
            return a
    raise InvalidN(f"no base coprime to {N}")


@dataclass(frozen=True)
class ShorParams:
    N: int
    a: int
    n: int = field(init=False)

    def __post_init__(self):
        N, a = self.N, self.a
        if N < 3 or N % 2 == 0 or _is_prime(N):
            raise InvalidN(f"N={N} must be an odd composite >= 3")
        if not 2 <= a < N:
            raise ConstantOutOfRange(f"a={a} outside [2, N-1]")
        if math.gcd(a, N) != 1:
            raise NotCoprime(f"gcd({a}, {N}) != 1")
        object.__setattr__(self, "n", bits_for(N))

    @property
    def iterations(self) -> int:
        return 2 * self.n

    def multiplier(self, k: int) -> int:
        return pow(self.a, 1 << k, self.N)


def phi_add_const(eng: Emitter, c: int, reg) -> None:
    """Add ``c`` to a register held in the no-swap Fourier basis.

    Qubit ``reg[i]`` carries the phase of bit weight 2^(i+1), so adding c is
    one Phase(2 pi c / 2^(i+1)) per qubit.
    """
    w = len(reg)
    c %= 1 << w
    for i, q in enumerate(reg):
        eng.emit(Command(Phase(2 * math.pi * c / (1 << (i + 1))), (q,)))


def add_const(eng: Emitter, c: int, reg) -> None:
    """|b> -> |b + c mod 2^w> by a Fourier-space addition."""
    w = len(reg)
    with Compute(eng) as sec:
        eng.emit(Command(QFTNoSwap(w), tuple(reg)))
    phi_add_const(eng, c, reg)
    uncompute(eng, sec)


def sub_const(eng: Emitter, c: int, reg) -> None:
    add_const(eng, -c, reg)


def _add_mod_body(eng: Emitter, c: int, N: int, reg, anc: int) -> None:
    msb = reg[-1]
    add_const(eng, c, reg)
    with Compute(eng) as sec:
        sub_const(eng, N, reg)
        eng.emit(Command(X, (anc,), (msb,)))
        with Control(eng, anc):
            add_const(eng, N, reg)
    sub_const(eng, c, reg)
    with CustomUncompute(eng, sec):
        eng.emit(Command(X, (msb,)))
        eng.emit(Command(X, (anc,), (msb,)))
        eng.emit(Command(X, (msb,)))
    add_const(eng, c, reg)


def _check_mod_args(c: int, N: int, width: int) -> None:
    if N < 2:
        raise InvalidN(f"modulus {N} < 2")
    if not 0 <= c < N:
        raise ConstantOutOfRange(f"constant {c} not in [0, {N})")
    if N >= 1 << (width - 1):
        raise ConstantOutOfRange(f"register of {width} qubits too small for modulus {N}")


def add_const_mod_N(eng: Emitter, c: int, N: int, reg, ancilla: int, controls=()) -> None:
    """|b>|0> -> |b + c mod N>|0> for b < N; ``reg`` has one overflow qubit on top."""
    _check_mod_args(c, N, len(reg))
    gate = AddConstModN(c, N, len(reg))
    eng.emit(Command(gate, tuple(reg) + (ancilla,), tuple(controls)))


def _phi_add_body(rec, gate, targets):
    phi_add_const(rec, gate.params[1], targets)


def _add_mod_composite_body(rec, gate, targets):
    _, c, N = gate.params
    _add_mod_body(rec, c, N, list(targets[:-1]), targets[-1])


register_composite("PhiAdd", WIDTH_PARAM, _phi_add_body)
register_composite("AddConstModN", WIDTH_PARAM, _add_mod_composite_body)


def PhiAdd(c: int, width: int, inverse: bool = False) -> Gate:
    return Gate("PhiAdd", (int(width), int(c) % (1 << width)), inverse)


def AddConstModN(c: int, N: int, reg_width: int, inverse: bool = False) -> Gate:
    """Composite on ``reg_width`` register qubits plus one ancilla (last target)."""
    return Gate("AddConstModN", (int(reg_width) + 1, int(c), int(N)), inverse)


def mul_by_const_mod_N(eng, a: int, N: int, x, control: int | None = None) -> None:
    """|x> -> |a x mod N> for x < N, using a fresh (n+1)-qubit work register and one ancilla.

    ``eng`` must be able to allocate (a :class:`~qcflow.engine.Pipeline`).
    """
    if math.gcd(a, N) != 1:
        raise NotCoprime(f"gcd({a}, {N}) != 1")
    n = len(x)
    if N > 1 << n:
        raise ConstantOutOfRange(f"register of {n} qubits too small for N={N}")
    a %= N
    ainv = modinv(a, N)
    work = eng.allocate_qureg(n + 1)
    anc = eng.allocate_qubit()
    targets = tuple(work) + (anc,)
    ctx = Control(eng, control) if control is not None else None
    if ctx:
        ctx.__enter__()
    try:
        for i in range(n):
            eng.emit(Command(AddConstModN((a << i) % N, N, n + 1), targets, (x[i],)))
        for i in range(n):
            eng.emit(Command(Swap, (x[i], work[i])))
        for i in range(n):
            eng.emit(Command(AddConstModN((ainv << i) % N, N, n + 1, inverse=True), targets, (x[i],)))
    finally:
        if ctx:
            ctx.__exit__(None, None, None)
    eng.deallocate(work + [anc])


def shor_iteration(eng, params: ShorParams, k: int = 0, x=None, control: int | None = None):
    """One phase-estimation step: H on a control qubit, controlled multiply by a^(2^k), H.

    Allocates ``x`` (initialized to 1) and the control when not given.
    Returns ``(x, control)``.
    """
    if not 0 <= k < params.iterations:
        raise ValueError(f"iteration index {k} outside [0, {params.iterations})")
    if control is None:
        control = eng.allocate_qubit()
    if x is None:
        x = eng.allocate_qureg(params.n)
        eng.emit(Command(X, (x[0],)))
    eng.emit(Command(H, (control,)))
    mul_by_const_mod_N(eng, params.multiplier(k), params.N, x, control)
    eng.emit(Command(H, (control,)))
    return x, control
