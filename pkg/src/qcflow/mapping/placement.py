"""Hardware graphs and greedy linear placement."""
from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass

from ..errors import TooManyQubits
from ..ir import BOOKKEEPING, Command


@dataclass(frozen=True)
class HardwareGraph:
    """Positions ``0 .. size-1`` with nearest-neighbour edges."""

    size: int

    def adjacent(self, p: int, q: int) -> bool:
        raise NotImplementedError

    def edges(self) -> list[tuple[int, int]]:
        return [(p, q) for p in range(self.size) for q in range(p + 1, self.size) if self.adjacent(p, q)]

    def degree(self, p: int) -> int:
        return sum(1 for q in range(self.size) if q != p and self.adjacent(p, q))


@dataclass(frozen=True)
class Linear(HardwareGraph):
    def adjacent(self, p, q):
        return abs(p - q) == 1


@dataclass(frozen=True, init=False)
class Grid(HardwareGraph):
    """r x c grid; position ``row * cols + col``."""

    rows: int
    cols: int

    def __init__(self, rows: int, cols: int):
        object.__setattr__(self, "size", rows * cols)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)

    def coords(self, p: int) -> tuple[int, int]:
        return divmod(p, self.cols)

    def position(self, row: int, col: int) -> int:
        return row * self.cols + col

    def adjacent(self, p, q):
        (r1, c1), (r2, c2) = self.coords(p), self.coords(q)
        return abs(r1 - r2) + abs(c1 - c2) == 1


def snake_position(i: int, rows: int, cols: int) -> int:
    """Grid position of the i-th cell along the snake (even rows left to right)."""
    r, k = divmod(i, cols)
    return r * cols + (k if r % 2 == 0 else cols - 1 - k)


def snake_index(p: int, rows: int, cols: int) -> int:
    r, k = divmod(p, cols)
    return r * cols + (k if r % 2 == 0 else cols - 1 - k)


def snake_embed(order, rows: int, cols: int) -> dict:
    """Place ``order`` along the snake; ``None`` entries leave the cell empty."""
    order = list(order)
    if len(order) > rows * cols:
        raise TooManyQubits(f"{len(order)} items on a {rows}x{cols} grid")
    return {q: snake_position(i, rows, cols) for i, q in enumerate(order) if q is not None}


def _two_qubit(cmd: Command):
    if cmd.gate.name in BOOKKEEPING:
        return None
    qs = cmd.targets + cmd.controls
    return qs if len(qs) == 2 else None


def greedy_placement(pending: Iterable[Command], current: Mapping[int, float]) -> list[int]:
    """Linear order putting interacting qubits next to each other.

    Two-qubit commands are taken in order and grow chains: a pair of unseen
    qubits starts a chain, a qubit at a chain end can take a new neighbour,
    two chain ends can be joined. A command that fits none of these is
    deferred and its qubits are frozen for the rest of the scan.

    ``current`` maps every item (qubits, and optionally placeholder items
    for empty positions) to its current linear coordinate. Chains and loose
    items are ordered by mean coordinate, each chain oriented so that its
    lower-coordinate end comes first.
    """
    current = dict(current)
    nxt = max(current.values(), default=-1) + 1
    chains: dict[int, list[int]] = {}
    chain_of: dict[int, int] = {}
    frozen: set[int] = set()
    cid = 0

    def ensure(q):
        nonlocal nxt
        if q not in current:
            current[q] = nxt
            nxt += 1

    for cmd in pending:
        qs = _two_qubit(cmd)
        if qs is None:
            for q in cmd.targets + cmd.controls:
                ensure(q)
            if len(cmd.targets + cmd.controls) > 2:
                frozen.update(cmd.targets + cmd.controls)
            continue
        a, b = qs
        ensure(a)
        ensure(b)
        if a in frozen or b in frozen:
            frozen.update(qs)
            continue
        ca, cb = chain_of.get(a), chain_of.get(b)
        if ca is None and cb is None:
            chains[cid] = [a, b]
            chain_of[a] = chain_of[b] = cid
            cid += 1
            continue
        if ca is not None and cb is not None:
            if ca == cb:
                ch = chains[ca]
                if abs(ch.index(a) - ch.index(b)) != 1:
                    frozen.update(qs)
                continue
            A, B = chains[ca], chains[cb]
            if a not in (A[0], A[-1]) or b not in (B[0], B[-1]):
                frozen.update(qs)
                continue
            if A[-1] != a:
                A.reverse()
            if B[0] != b:
                B.reverse()
            A.extend(B)
            for q in B:
                chain_of[q] = ca
            del chains[cb]
            continue
        if ca is None:
            a, b, ca = b, a, cb
        ch = chains[ca]
        if a == ch[-1]:
            ch.append(b)
        elif a == ch[0]:
            ch.insert(0, b)
        else:
            frozen.update(qs)
            continue
        chain_of[b] = ca

    items = []
    for ch in chains.values():
        if current[ch[0]] > current[ch[-1]]:
            ch.reverse()
        key = sum(current[q] for q in ch) / len(ch)
        items.append((key, min(ch), ch))
    for q in current:
        if q not in chain_of:
            items.append((current[q], q, [q]))
    items.sort(key=lambda t: (t[0], t[1]))
    return [q for _, _, ch in items for q in ch]
