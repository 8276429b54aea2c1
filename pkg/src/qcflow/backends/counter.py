"""Resource counting backend."""
from __future__ import annotations

from collections import Counter as _Counter
from dataclasses import dataclass, field

from ..engine import Engine
from ..ir import Command, GateClass, classify

CSV_HEADER = "N,n,variant,cnot,clifford1q,t,rz,depth,width"


@dataclass
class ResourceReport:
    counts: dict = field(default_factory=dict)       # GateClass -> int
    by_name: dict = field(default_factory=dict)      # gate name -> int
    total: int = 0
    depth: int = 0
    max_width: int = 0

    def count(self, cls: GateClass) -> int:
        return self.counts.get(cls, 0)

    @property
    def cnot(self) -> int:
        return self.count(GateClass.CNOT)

    @property
    def clifford1q(self) -> int:
        return self.count(GateClass.CLIFFORD1Q)

    @property
    def t(self) -> int:
        return self.count(GateClass.T)

    @property
    def rz(self) -> int:
        return self.count(GateClass.RZ)

    @property
    def other(self) -> int:
        return self.count(GateClass.OTHER)

    def scaled(self, k: int) -> ResourceReport:
        """Counts and depth multiplied by ``k`` (repeating the circuit k times); width unchanged."""
        return ResourceReport({c: v * k for c, v in self.counts.items()},
                              {g: v * k for g, v in self.by_name.items()},
                              self.total * k, self.depth * k, self.max_width)

    def csv_row(self, N, n, variant: str) -> str:
        return f"{N},{n},{variant},{self.cnot},{self.clifford1q},{self.t},{self.rz},{self.depth},{self.max_width}"


def _repeat(cmd: Command) -> int:
    k = 1
    for t in cmd.tags:
        if t.kind == "loop":
            k *= t.count
    return k


class CounterStage(Engine):
    """Counts commands by class and tracks depth plus the peak number of live qubits.

    Depth: a command's level is one more than the highest level on any of
    its qubits, classical controls included; Allocate and
    Deallocate cost nothing. A command tagged Loop(k) counts k times and adds
    k to the level, i.e. the loop body is treated as serial on its qubits.
    Qubits used without an Allocate are counted live from first use.
    Commands are forwarded so the counter can sit mid-pipeline.
    """

    def __init__(self):
        super().__init__()
        self.counts = _Counter()
        self.by_name = _Counter()
        self.total = 0
        self.level: dict[int, int] = {}
        self.depth = 0
        self.live: set[int] = set()
        self.max_width = 0

    def _touch(self, q):
        if q not in self.live:
            self.live.add(q)
            if len(self.live) > self.max_width:
                self.max_width = len(self.live)

    def receive(self, cmds):
        level = self.level
        for c in cmds:
            name = c.gate.name
            if name == "Allocate":
                self._touch(c.targets[0])
                continue
            if name == "Deallocate":
                self.live.discard(c.targets[0])
                level.pop(c.targets[0], None)
                continue
            k = _repeat(c)
            cls = classify(c)
            self.counts[cls] += k
            self.by_name[name] += k
            self.total += k
            qs = c.targets + c.controls + c.cbits
            lv = 0
            for q in qs:
                self._touch(q)
                v = level.get(q, 0)
                if v > lv:
                    lv = v
            lv += k
            for q in qs:
                level[q] = lv
            if lv > self.depth:
                self.depth = lv
        self.send(cmds)

    def report(self) -> ResourceReport:
        return ResourceReport(dict(self.counts), dict(self.by_name), self.total, self.depth, self.max_width)


def count_resources(cmds) -> ResourceReport:
    c = CounterStage()
    c.receive(list(cmds))
    return c.report()
