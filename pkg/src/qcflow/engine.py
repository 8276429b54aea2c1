"""Streaming engine chain.

Commands enter a :class:`Pipeline` through :meth:`Pipeline.emit` or
:meth:`Pipeline.send`, pass the open meta-instruction contexts (innermost
first), and are then forwarded in batches through the ordered compiler
stages to the terminal backend. Stages see commands only in the batches they
are given and drain their buffers on :meth:`Engine.flush`.
"""
from __future__ import annotations

from collections.abc import Iterable, Sequence

from .errors import DeadQubitUse, QcflowError
from .ir import Allocate, Command, Deallocate, Gate


class Engine:
    """A compiler stage. The default implementation forwards unchanged."""

    supports_loops = True

    def __init__(self):
        self.next_engine: Engine | None = None
        self.main: Pipeline | None = None

    def receive(self, cmds: list[Command]) -> None:
        self.send(cmds)

    def send(self, cmds: list[Command]) -> None:
        if cmds and self.next_engine is not None:
            self.next_engine.receive(cmds)

    def flush(self) -> None:
        if self.next_engine is not None:
            self.next_engine.flush()


class ListBackend(Engine):
    """Terminal stage that stores everything it receives."""

    supports_loops = True

    def __init__(self):
        super().__init__()
        self.commands: list[Command] = []
        self.flushes = 0

    def receive(self, cmds):
        self.commands.extend(cmds)

    def flush(self):
        self.flushes += 1


class Context:
    """A meta-instruction scope; transforms commands passing through it."""

    def process(self, cmd: Command) -> Sequence[Command]:
        return (cmd,)

    def close(self, eng: Emitter, level: int) -> None:
        """Called when the scope ends; ``level`` is its index in the stack."""


class Emitter:
    """Front end holding the stack of open meta-instruction contexts."""

    naive_control = False

    def __init__(self):
        self._contexts: list[Context] = []

    @property
    def supports_loops(self) -> bool:
        return False

    def push_context(self, ctx: Context) -> None:
        self._contexts.append(ctx)

    def pop_context(self, ctx: Context) -> None:
        if not self._contexts or self._contexts[-1] is not ctx:
            raise QcflowError("meta-instruction scopes closed out of order")
        self._contexts.pop()
        ctx.close(self, len(self._contexts))
        self._after_emit()

    def route(self, cmd: Command, level: int) -> None:
        """Pass ``cmd`` through contexts ``level-1 .. 0`` and deliver it."""
        if level == 0:
            self._deliver(cmd)
            return
        for out in self._contexts[level - 1].process(cmd):
            self.route(out, level - 1)

    def emit(self, cmd: Command) -> None:
        self._check(cmd)
        self.route(cmd, len(self._contexts))
        self._after_emit()

    def send(self, cmds: Iterable[Command]) -> None:
        level = len(self._contexts)
        for cmd in cmds:
            self._check(cmd)
            self.route(cmd, level)
        self._after_emit()

    def apply(self, gate: Gate, targets, controls=()) -> None:
        """Convenience wrapper: ``eng.apply(H, [q])``."""
        if isinstance(targets, int):
            targets = (targets,)
        self.emit(Command(gate, tuple(targets), tuple(controls)))

    def _check(self, cmd: Command) -> None:
        pass

    def _deliver(self, cmd: Command) -> None:
        raise NotImplementedError

    def _after_emit(self) -> None:
        pass


class Recorder(Emitter):
    """Emitter that collects the commands produced by a builder function.

    Used to expand composite gates: the body runs against a recorder and the
    resulting command list is returned to the caller.
    """

    def __init__(self, naive_control: bool = False):
        super().__init__()
        self.naive_control = naive_control
        self.commands: list[Command] = []

    def _deliver(self, cmd):
        self.commands.append(cmd)


class Pipeline(Emitter):
    """The main engine: qubit bookkeeping plus the ordered stage chain.

    ``stages`` are applied in order, ``backend`` terminates the chain. With
    ``naive_control`` the compute/uncompute exception of control scopes is
    disabled everywhere, including in composite expansion by downstream
    decomposition stages.
    """

    def __init__(self, stages: Sequence[Engine] = (), backend: Engine | None = None,
                 naive_control: bool = False):
        super().__init__()
        self.stages = list(stages)
        self.backend = backend if backend is not None else ListBackend()
        self.naive_control = naive_control
        chain = self.stages + [self.backend]
        for a, b in zip(chain, chain[1:]):
            a.next_engine = b
        for e in chain:
            e.main = self
        self.backend.next_engine = None
        self._first = chain[0]
        self.live_qubits: set[int] = set()
        self.next_id = 0
        self._outbox: list[Command] = []

    @property
    def supports_loops(self) -> bool:
        return all(e.supports_loops for e in self.stages + [self.backend])

    def allocate_qubit(self) -> int:
        if any(getattr(c, "buffers", False) for c in self._contexts):
            raise QcflowError("cannot allocate inside a loop scope")
        qid = self.next_id
        self.next_id += 1
        self.live_qubits.add(qid)
        self._first.receive([Command(Allocate, (qid,))])
        return qid

    def allocate_qureg(self, n: int) -> list[int]:
        return [self.allocate_qubit() for _ in range(n)]

    def deallocate(self, qubits) -> None:
        if isinstance(qubits, int):
            qubits = [qubits]
        cmds = []
        for q in qubits:
            if q not in self.live_qubits:
                raise DeadQubitUse(f"qubit {q} is not live")
            self.live_qubits.discard(q)
            cmds.append(Command(Deallocate, (q,)))
        self._first.receive(cmds)

    def flush(self) -> None:
        self._after_emit()
        self._first.flush()

    def _check(self, cmd):
        live = self.live_qubits
        for q in cmd.targets:
            if q not in live:
                raise DeadQubitUse(f"qubit {q} used by {cmd.gate} is not live")
        for q in cmd.controls:
            if q not in live:
                raise DeadQubitUse(f"control qubit {q} is not live")

    def _deliver(self, cmd):
        self._outbox.append(cmd)

    def _after_emit(self):
        if self._outbox:
            batch, self._outbox = self._outbox, []
            self._first.receive(batch)
