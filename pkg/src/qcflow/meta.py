"""Meta-instructions that annotate the command stream for later stages.

Typical use mirrors the compute/action/uncompute pattern::

    with Control(eng, [c]):
        with Compute(eng) as section:
            ...             # U, tagged compute
        ...                 # V, the only part that receives control c
        uncompute(eng, section)   # U^-1, tagged uncompute

Control scopes leave commands tagged compute/uncompute uncontrolled unless the
engine runs with ``naive_control``. This is only sound when U^-1 V U reduces
to the identity whenever V is skipped; the annotating code is responsible for
that.
"""
from __future__ import annotations

import itertools
from collections.abc import Callable, Iterable, Sequence

from .engine import Context, Emitter, Engine
from .errors import ControlTargetsOverlap, DoubleUncompute, NonInvertibleInCompute, QcflowError
from .ir import (BOOKKEEPING, COMPUTE, NON_UNITARY, UNCOMPUTE, Command, Loop, inverse)

_loop_ids = itertools.count(1)


def _has_cu(cmd: Command) -> bool:
    for t in cmd.tags:
        if t.kind != "loop":
            return True
    return False


def retag(cmd: Command, tag) -> Command:
    """Replace any compute/uncompute tag of ``cmd`` by ``tag``."""
    tags = tuple(t for t in cmd.tags if t.kind == "loop")
    if tag is not None:
        tags = (tag,) + tags
    return cmd.with_tags(tags)


class ComputeSection:
    """Commands recorded inside a compute scope, in emission order."""

    def __init__(self):
        self.recorded: list[Command] = []
        self.uncomputed = False

    def __len__(self):
        return len(self.recorded)


class _ComputeContext(Context):
    def __init__(self, section: ComputeSection, tag=COMPUTE):
        self.section = section
        self.tag = tag

    def process(self, cmd):
        if cmd.gate.name in NON_UNITARY:
            if cmd.gate.name in BOOKKEEPING:
                raise NonInvertibleInCompute("allocate qubits outside compute sections")
            raise NonInvertibleInCompute(f"{cmd.gate.name} inside a compute section")
        if not _has_cu(cmd):
            cmd = cmd.with_tags((self.tag,) + cmd.tags)
        self.section.recorded.append(cmd)
        return (cmd,)


class Compute:
    """Context manager opening a compute section; yields the section."""

    def __init__(self, eng: Emitter):
        self.eng = eng
        self.section = ComputeSection()
        self._ctx = _ComputeContext(self.section)

    def __enter__(self) -> ComputeSection:
        self.eng.push_context(self._ctx)
        return self.section

    def __exit__(self, *exc):
        self.eng.pop_context(self._ctx)
        return False


class CustomUncompute:
    """Hand-written uncompute block for ``section``; commands are tagged uncompute.

    The block must restore whatever the compute section changed on the
    ancillas; nothing is generated automatically.
    """

    def __init__(self, eng: Emitter, section: ComputeSection):
        if section.uncomputed:
            raise DoubleUncompute("section already uncomputed")
        self.eng = eng
        self.section = section
        self._ctx = _ComputeContext(ComputeSection(), UNCOMPUTE)

    def __enter__(self):
        self.eng.push_context(self._ctx)
        return self

    def __exit__(self, *exc):
        self.eng.pop_context(self._ctx)
        self.section.uncomputed = True
        return False


def compute(eng: Emitter, body: Callable[[Emitter], None]) -> ComputeSection:
    with Compute(eng) as section:
        body(eng)
    return section


def uncompute(eng: Emitter, section: ComputeSection) -> None:
    """Emit the reverse-adjoint of ``section``, every command tagged uncompute."""
    if section.uncomputed:
        raise DoubleUncompute("section already uncomputed")
    section.uncomputed = True
    level = len(eng._contexts)
    for cmd in reversed(section.recorded):
        eng.route(retag(inverse(cmd), UNCOMPUTE), level)
    eng._after_emit()


class _ControlContext(Context):
    def __init__(self, controls: tuple[int, ...], naive: bool):
        self.controls = controls
        self.cset = frozenset(controls)
        self.naive = naive

    def process(self, cmd):
        name = cmd.gate.name
        if name in BOOKKEEPING:
            return (cmd,)
        if name == "Measure":
            raise QcflowError("cannot measure inside a control scope")
        if not self.naive and _has_cu(cmd):
            return (cmd,)
        cset = self.cset
        for q in cmd.targets:
            if q in cset:
                raise ControlTargetsOverlap(f"control qubit {q} is a target of {cmd.gate}")
        for q in cmd.controls:
            if q in cset:
                raise ControlTargetsOverlap(f"control qubit {q} already controls {cmd.gate}")
        return (Command(cmd.gate, cmd.targets, cmd.controls + self.controls, cmd.tags, cmd.cbits),)


class Control:
    """Context manager adding ``controls`` to every command emitted inside it."""

    def __init__(self, eng: Emitter, controls):
        if isinstance(controls, int):
            controls = [controls]
        controls = tuple(controls)
        if not controls:
            raise QcflowError("control scope needs at least one qubit")
        if len(set(controls)) != len(controls):
            raise ControlTargetsOverlap("repeated control qubit")
        self.eng = eng
        self._ctx = _ControlContext(controls, eng.naive_control)

    def __enter__(self):
        self.eng.push_context(self._ctx)
        return self

    def __exit__(self, *exc):
        self.eng.pop_context(self._ctx)
        return False


def with_control(eng: Emitter, controls, body: Callable[[Emitter], None]) -> None:
    with Control(eng, controls):
        body(eng)


def attach_controls(cmds: Iterable[Command], controls: Sequence[int], naive: bool) -> list[Command]:
    """Apply a control scope to an already-recorded command list."""
    ctx = _ControlContext(tuple(controls), naive)
    out = []
    for c in cmds:
        out.extend(ctx.process(c))
    return out


class _LoopContext(Context):
    buffers = True

    def __init__(self, count: int):
        self.count = count
        self.body: list[Command] = []

    def process(self, cmd):
        self.body.append(cmd)
        return ()

    def close(self, eng, level):
        body = self.body
        if self.count == 1:
            for c in body:
                eng.route(c, level)
        elif eng.supports_loops:
            tag = Loop(self.count, next(_loop_ids))
            for c in body:
                eng.route(c.with_tags(c.tags + (tag,)), level)
        else:
            for _ in range(self.count):
                for c in body:
                    eng.route(c, level)


class LoopScope:
    """Context manager repeating its body ``count`` times.

    Backends that declare loop support receive the body once, tagged
    ``Loop(count)``; otherwise the body is unrolled.
    """

    def __init__(self, eng: Emitter, count: int):
        if count < 1:
            raise QcflowError("loop count must be >= 1")
        self.eng = eng
        self._ctx = _LoopContext(int(count))

    def __enter__(self):
        self.eng.push_context(self._ctx)
        return self

    def __exit__(self, *exc):
        self.eng.pop_context(self._ctx)
        return False


def with_loop(eng: Emitter, count: int, body: Callable[[Emitter], None]) -> None:
    with LoopScope(eng, count):
        body(eng)


class _DeferRewriter:
    """Incremental form of the measure-early rewrite over a bounded buffer."""

    def __init__(self):
        self.buf: list = []          # entries: Command or [Measure, rewritten]
        self.base = 0                # absolute index of buf[0]
        self.last_use: dict[int, int] = {}

    def push(self, cmd: Command) -> None:
        if cmd.gate.name == "Measure" and not cmd.cbits:
            q = cmd.targets[0]
            j = self.last_use.get(q)
            if j is not None and j >= self.base:
                prev = self.buf[j - self.base]
                if isinstance(prev, Command) and q in prev.controls:
                    moved = Command(prev.gate, prev.targets,
                                    tuple(c for c in prev.controls if c != q),
                                    prev.tags, prev.cbits + (q,))
                    self.buf[j - self.base] = [cmd, moved]
                    return
        idx = self.base + len(self.buf)
        self.buf.append(cmd)
        for q in cmd.targets + cmd.controls + cmd.cbits:
            self.last_use[q] = idx

    def drain(self, keep: int = 0) -> list[Command]:
        n = max(0, len(self.buf) - keep)
        out = []
        for e in self.buf[:n]:
            if isinstance(e, list):
                out.extend(e)
            else:
                out.append(e)
        del self.buf[:n]
        self.base += n
        return out


def deferred_measurement(cmds: Iterable[Command]) -> list[Command]:
    """Move measurements ahead of the command that last used the qubit as a control.

    ``[CNOT(q->t), Measure q]`` becomes ``[Measure q, X t if q==1]``. Any
    intervening use of ``q`` blocks the rewrite.
    """
    rw = _DeferRewriter()
    for c in cmds:
        rw.push(c)
    return rw.drain()


class DeferredMeasurementStage(Engine):
    """Optional stage applying :func:`deferred_measurement` over a sliding window."""

    supports_loops = False

    def __init__(self, window: int = 64):
        super().__init__()
        self.window = window
        self._rw = _DeferRewriter()

    def receive(self, cmds):
        for c in cmds:
            self._rw.push(c)
        if len(self._rw.buf) > 2 * self.window:
            self.send(self._rw.drain(keep=self.window))

    def flush(self):
        self.send(self._rw.drain())
        super().flush()
