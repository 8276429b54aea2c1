"""Windowed peephole optimizer and the IGS compilation helper.

The optimizer keeps, for every qubit, the pending commands touching it in
arrival order. A new command is compared only with the command that is
currently last on *all* of its qubits; nothing is ever commuted. When a
qubit holds more than ``window`` pending commands its oldest one is released
together with whatever must precede it.
"""
from __future__ import annotations

import math
from collections import deque
from collections.abc import Iterable

from .decompose import IGS, TARGET, DecomposeStage, GateSetSpec
from .engine import Engine, ListBackend, Pipeline
from .ir import ANGLE_TOL, NON_UNITARY, ROTATIONS, Command, Gate, inverse_gate

FOUR_PI = 4.0 * math.pi


def _loops(cmd: Command) -> tuple:
    return tuple(t for t in cmd.tags if t.kind == "loop")


def is_identity(cmd: Command) -> bool:
    """True if the rotation is exactly the identity (a global phase at most when uncontrolled)."""
    g = cmd.gate
    if g.name not in ROTATIONS:
        return False
    theta = g.params[0]
    period = FOUR_PI if (cmd.controls and g.name != "Phase") else 2.0 * math.pi
    a = math.fmod(theta, period)
    if a < 0:
        a += period
    return a < ANGLE_TOL or period - a < ANGLE_TOL


def _same_qubits(a: Command, b: Command) -> bool:
    if a.controls != b.controls or a.cbits != b.cbits:
        return False
    if a.targets == b.targets:
        return True
    # Swap is symmetric in its targets
    return a.gate.name == "Swap" == b.gate.name and a.targets == b.targets[::-1]


def combine(a: Command, b: Command) -> list[Command] | None:
    """Rewrite the adjacent pair ``a`` then ``b``.

    Returns None when nothing applies, ``[]`` when the pair cancels and a
    one-element list for a merged rotation. Compute/uncompute tags are ignored
    in the comparison; loop tags must agree.
    """
    ga, gb = a.gate, b.gate
    if ga.name in NON_UNITARY or gb.name in NON_UNITARY:
        return None
    if not _same_qubits(a, b) or _loops(a) != _loops(b):
        return None
    if ga.name in ROTATIONS and ga.name == gb.name:
        merged = Command(Gate(ga.name, (ga.params[0] + gb.params[0],)), a.targets, a.controls,
                         a.tags, a.cbits)
        return [] if is_identity(merged) else [merged]
    if inverse_gate(ga) == gb:
        return []
    return None


class _Entry:
    __slots__ = ("cmd", "keys", "seq", "alive")

    def __init__(self, cmd, keys, seq):
        self.cmd = cmd
        self.keys = keys
        self.seq = seq
        self.alive = True


class OptimizerStage(Engine):
    """Cancels adjacent inverse pairs and merges rotations; identity rotations are dropped."""

    def __init__(self, window: int = 20):
        super().__init__()
        if window < 2:
            raise ValueError("optimizer window must be >= 2")
        self.window = window
        self._q: dict[int, deque[_Entry]] = {}
        self._seq = 0
        self._out: list[Command] = []

    def pending(self) -> int:
        return len({id(e) for dq in self._q.values() for e in dq})

    def _keys(self, cmd: Command) -> tuple[int, ...]:
        k = cmd.targets + cmd.controls
        if cmd.cbits:
            k = k + tuple(c for c in cmd.cbits if c not in k)
        return k

    def _push(self, cmd: Command) -> None:
        if is_identity(cmd):
            return
        keys = self._keys(cmd)
        qs = self._q
        dq0 = qs.get(keys[0])
        if dq0:
            prev = dq0[-1]
            if len(prev.keys) == len(keys) and all((qs.get(k) or (None,))[-1] is prev for k in keys):
                res = combine(prev.cmd, cmd)
                if res is not None:
                    if res:
                        prev.cmd = res[0]
                    else:
                        prev.alive = False
                        for k in prev.keys:
                            qs[k].pop()
                    return
        e = _Entry(cmd, keys, self._seq)
        self._seq += 1
        for k in keys:
            dq = qs.get(k)
            if dq is None:
                dq = qs[k] = deque()
            dq.append(e)
        if cmd.gate.name in NON_UNITARY:
            self._release(e)
            return
        for k in keys:
            dq = qs[k]
            while len(dq) > self.window:
                self._release(dq[0])

    def _release(self, e: _Entry) -> None:
        qs = self._q
        out = self._out
        stack = [e]
        while stack:
            top = stack[-1]
            if not top.alive:
                stack.pop()
                continue
            blocker = None
            for k in top.keys:
                head = qs[k][0]
                if head is not top:
                    blocker = head
                    break
            if blocker is None:
                for k in top.keys:
                    qs[k].popleft()
                top.alive = False
                out.append(top.cmd)
                stack.pop()
            else:
                stack.append(blocker)

    def receive(self, cmds):
        for c in cmds:
            self._push(c)
        if self._out:
            out, self._out = self._out, []
            self.send(out)

    def flush(self):
        seen = {}
        for dq in self._q.values():
            for e in dq:
                if e.alive:
                    seen[e.seq] = e
        self._q.clear()
        out = self._out
        self._out = []
        out.extend(seen[s].cmd for s in sorted(seen))
        self.send(out)
        super().flush()


def optimize(cmds: Iterable[Command], window: int = 20) -> list[Command]:
    """Run the optimizer over a finished command list."""
    back = ListBackend()
    opt = OptimizerStage(window)
    opt.next_engine = back
    opt.receive(list(cmds))
    opt.flush()
    return back.commands


def igs_stages(use_igs: bool, window: int = 20, final: GateSetSpec = TARGET) -> list[Engine]:
    if use_igs:
        return [DecomposeStage(IGS), OptimizerStage(window), DecomposeStage(final), OptimizerStage(window)]
    return [DecomposeStage(final), OptimizerStage(window)]


def compile_with_igs(circuit: Iterable[Command], use_igs: bool, window: int = 20,
                     naive_control: bool = False) -> list[Command]:
    """Lower ``circuit`` to the target set, optionally optimizing at the IGS level first."""
    back = ListBackend()
    pipe = Pipeline(igs_stages(use_igs, window), back, naive_control=naive_control)
    pipe._first.receive(list(circuit))
    pipe.flush()
    return back.commands
