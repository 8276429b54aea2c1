"""Engine stage enforcing nearest-neighbour connectivity."""
from __future__ import annotations

from ..engine import Engine
from ..errors import CircuitTooWide, InvalidCommand
from ..ir import Command, Swap
from .placement import Grid, HardwareGraph, Linear, greedy_placement, snake_index, snake_position
from .routing import SwapSchedule, grid_route, oets_route


class MapperStage(Engine):
    """Rewrites logical qubits to graph positions, inserting Swap layers as needed.

    Works in rounds over a buffer of at most ``lookahead`` commands: emit
    everything executable in order (a command waits if an earlier waiting
    command shares a qubit), then compute a new placement from the remaining
    commands with :func:`greedy_placement`, route to it and emit the Swaps.
    Output commands act on positions; Allocate/Deallocate are consumed.
    ``placement`` holds the current logical -> position map.
    """

    supports_loops = False

    def __init__(self, graph: HardwareGraph, lookahead: int = 200):
        super().__init__()
        self.graph = graph
        self.lookahead = lookahead
        self.placement: dict[int, int] = {}
        self._buf: list[Command] = []
        self._measured_at: dict[int, int] = {}
        self.swaps = 0
        self.rounds = 0
        self._out: list[Command] = []

    # -- coordinates along the chain / snake -------------------------------

    def _lin(self, p: int) -> int:
        g = self.graph
        return snake_index(p, g.rows, g.cols) if isinstance(g, Grid) else p

    def _pos(self, i: int) -> int:
        g = self.graph
        return snake_position(i, g.rows, g.cols) if isinstance(g, Grid) else i

    def _allocate(self, q: int) -> None:
        if q in self.placement:
            return
        used = set(self.placement.values())
        for i in range(self.graph.size):
            p = self._pos(i)
            if p not in used:
                self.placement[q] = p
                return
        raise CircuitTooWide(f"more than {self.graph.size} live qubits")

    # -- stream ------------------------------------------------------------

    def receive(self, cmds):
        for c in cmds:
            name = c.gate.name
            if name == "Allocate":
                if not self._buf:
                    self._allocate(c.targets[0])
                else:
                    self._buf.append(c)
                continue
            if len(c.targets) + len(c.controls) > 2:
                raise InvalidCommand(f"mapper needs commands on at most two qubits, got {c}")
            self._buf.append(c)
            if len(self._buf) >= 4 * self.lookahead:
                while len(self._buf) >= self.lookahead:
                    self._round()
        self._drain_out()

    def flush(self):
        while self._buf:
            self._round()
        self._drain_out()
        super().flush()

    def _drain_out(self):
        if self._out:
            out, self._out = self._out, []
            self.send(out)

    def _phys(self, c: Command) -> Command:
        pl = self.placement
        cb = tuple(self._measured_at[b] for b in c.cbits)
        return Command(c.gate, tuple(pl[q] for q in c.targets), tuple(pl[q] for q in c.controls), c.tags, cb)

    def _execute_ready(self) -> None:
        """Emit buffered commands that can run now, preserving per-qubit order."""
        blocked: set[int] = set()
        keep = []
        adj = self.graph.adjacent
        pl = self.placement
        for c in self._buf:
            name = c.gate.name
            if name == "Allocate":
                q = c.targets[0]
                if q in blocked:
                    keep.append(c)
                else:
                    self._allocate(q)
                continue
            qs = c.targets + c.controls
            ok = not any(q in blocked for q in qs) and not any(b in blocked for b in c.cbits)
            if ok:
                for q in qs:
                    if q not in pl:
                        self._allocate(q)
                if len(qs) == 2 and not adj(pl[qs[0]], pl[qs[1]]):
                    ok = False
            if not ok:
                blocked.update(qs)
                keep.append(c)
                continue
            if name == "Deallocate":
                del pl[c.targets[0]]
                continue
            self._out.append(self._phys(c))
            if name == "Measure":
                self._measured_at[c.targets[0]] = pl[c.targets[0]]
        self._buf = keep

    def _round(self) -> None:
        self.rounds += 1
        self._execute_ready()
        if not self._buf:
            return
        window = self._buf[:self.lookahead]
        for c in window:
            for q in c.targets + c.controls:
                if q not in self.placement and c.gate.name not in ("Allocate",):
                    self._allocate(q)
        size = self.graph.size
        occupant = {p: q for q, p in self.placement.items()}
        # empty cells take part as placeholder items with negative ids
        current = {}
        for i in range(size):
            p = self._pos(i)
            current[occupant.get(p, -1 - p)] = i
        order = greedy_placement([c for c in window if c.gate.name not in ("Allocate", "Deallocate")], current)
        new = {item: self._pos(i) for i, item in enumerate(order)}
        old = {item: self._pos(i) for item, i in current.items()}
        sched = self.route(old, new)
        self._emit_schedule(sched, occupant)
        self._execute_ready()

    def route(self, old: dict, new: dict) -> SwapSchedule:
        """Linear: odd-even transposition. Grid: the shallower of three-phase
        routing and odd-even transposition along the snake."""
        g = self.graph
        lin = self._lin
        perm = [0] * g.size
        for item, p in old.items():
            perm[lin(p)] = lin(new[item])
        snake = oets_route(perm)
        if not isinstance(g, Grid):
            return snake
        snake = SwapSchedule([[(self._pos(i), self._pos(j)) for i, j in layer] for layer in snake.layers])
        three = grid_route(old, new, g.rows, g.cols)
        return min((three, snake), key=lambda s: (s.depth, s.swap_count))

    def _emit_schedule(self, sched: SwapSchedule, occupant: dict[int, int]) -> None:
        for layer in sched.layers:
            for p, q in layer:
                a, b = occupant.get(p), occupant.get(q)
                if a is None and b is None:
                    continue
                self._out.append(Command(Swap, (min(p, q), max(p, q))))
                self.swaps += 1
                if a is not None:
                    occupant[q] = a
                    self.placement[a] = q
                else:
                    occupant.pop(q, None)
                if b is not None:
                    occupant[p] = b
                    self.placement[b] = p
                else:
                    occupant.pop(p, None)

    def final_placement(self) -> dict[int, int]:
        return dict(self.placement)


def map_circuit(cmds, graph: HardwareGraph, lookahead: int = 200):
    """Map a finished command list; returns ``(mapped, final_placement, stage)``."""
    from ..engine import ListBackend
    stage = MapperStage(graph, lookahead)
    back = ListBackend()
    stage.next_engine = back
    stage.receive(list(cmds))
    stage.flush()
    return back.commands, stage.final_placement(), stage
