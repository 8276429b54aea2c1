"""Swap-layer routing on lines and grids."""
from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

from ..errors import NotRegular, QcflowError


@dataclass
class SwapSchedule:
    """Layers of disjoint position pairs; each pair is swapped in one step."""

    layers: list[list[tuple[int, int]]] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def swap_count(self) -> int:
        return sum(len(layer) for layer in self.layers)

    def apply(self, arrangement: list) -> list:
        """Return a copy of ``arrangement`` (position -> item) after all swaps."""
        arr = list(arrangement)
        for layer in self.layers:
            for p, q in layer:
                arr[p], arr[q] = arr[q], arr[p]
        return arr

    def is_valid(self, graph=None) -> bool:
        for layer in self.layers:
            seen = set()
            for p, q in layer:
                if p in seen or q in seen:
                    return False
                seen.update((p, q))
                if graph is not None and not graph.adjacent(p, q):
                    return False
        return True


def _check_perm(perm: Sequence[int]) -> None:
    if sorted(perm) != list(range(len(perm))):
        raise QcflowError("routing request is not a permutation")


def oets_layers(perm: Sequence[int]) -> list[list[tuple[int, int]]]:
    """Odd-even transposition sort of the destination keys; line-local indices."""
    key = list(perm)
    n = len(key)
    layers = []
    for t in range(n):
        layer = []
        for i in range(t % 2, n - 1, 2):
            if key[i] > key[i + 1]:
                key[i], key[i + 1] = key[i + 1], key[i]
                layer.append((i, i + 1))
        if layer:
            layers.append(layer)
    return layers


def oets_route(perm: Sequence[int]) -> SwapSchedule:
    """Schedule moving the item at line position i to ``perm[i]``; at most n layers."""
    _check_perm(perm)
    return SwapSchedule(oets_layers(perm))


@dataclass
class BipartiteColumnGraph:
    """Multigraph between source columns (left) and destination columns (right).

    ``edges`` holds ``(u, v, label)`` triples, one per routed item.
    """

    n_left: int
    n_right: int
    edges: list[tuple[int, int, object]] = field(default_factory=list)

    def degree(self) -> int:
        """Common degree; raises NotRegular if the graph is not regular."""
        dl = [0] * self.n_left
        dr = [0] * self.n_right
        for u, v, _ in self.edges:
            dl[u] += 1
            dr[v] += 1
        degs = set(dl) | set(dr)
        if len(degs) != 1 or self.n_left != self.n_right:
            raise NotRegular(f"left degrees {dl}, right degrees {dr}")
        return degs.pop()


def _perfect_matching(cnt: list[list[int]], init: dict[int, int] | None = None) -> list[int]:
    """Kuhn's augmenting paths on the support of ``cnt``; returns match[u] = v.

    ``init`` is a partial matching u -> v that is kept as the starting point.
    """
    n = len(cnt)
    match_l = [-1] * n
    match_r = [-1] * n
    for u, v in (init or {}).items():
        if cnt[u][v] > 0 and match_r[v] < 0 and match_l[u] < 0:
            match_l[u] = v
            match_r[v] = u
    adj = [[v for v in range(n) if cnt[u][v] > 0] for u in range(n)]
    for u in range(n):
        if match_l[u] >= 0:
            continue
        seen = [False] * n
        parent = {}
        stack = [(u, iter(adj[u]))]
        found = -1
        while stack and found < 0:
            x, it = stack[-1]
            for v in it:
                if seen[v]:
                    continue
                seen[v] = True
                parent[v] = x
                if match_r[v] < 0:
                    found = v
                else:
                    stack.append((match_r[v], iter(adj[match_r[v]])))
                break
            else:
                stack.pop()
        if found < 0:
            raise NotRegular("no perfect matching; graph is not regular")
        v = found
        while True:
            x = parent[v]
            nv = match_l[x]
            match_l[x] = v
            match_r[v] = x
            if x == u:
                break
            v = nv
    return match_l


def matching_decomposition(g: BipartiteColumnGraph, rank=None) -> list[list[tuple[int, int, object]]]:
    """Split a d-regular bipartite multigraph into d perfect matchings.

    Each matching lists one edge per left node, ordered by left node.
    ``rank(k, label)`` (lower is better) optionally steers which edges end up
    in matching k; rank-0 edges seed the search.
    """
    d = g.degree()
    n = g.n_left
    cnt = [[0] * n for _ in range(n)]
    pool: dict[tuple[int, int], list] = {}
    for u, v, label in g.edges:
        cnt[u][v] += 1
        pool.setdefault((u, v), []).append(label)
    out = []
    for k in range(d):
        init = None
        if rank is not None:
            init = {}
            for (u, v), labels in pool.items():
                if labels and u not in init and any(rank(k, x) == 0 for x in labels):
                    init[u] = v
        m = _perfect_matching(cnt, init)
        layer = []
        for u, v in enumerate(m):
            cnt[u][v] -= 1
            labels = pool[(u, v)]
            i = 0 if rank is None else min(range(len(labels)), key=lambda j: rank(k, labels[j]))
            layer.append((u, v, labels.pop(i)))
        out.append(layer)
    return out


def _parallel_lines(lines: list[tuple[list[int], list[int]]]) -> list[list[tuple[int, int]]]:
    """Route several disjoint lines at once.

    Each entry is ``(positions, perm)``: physical positions along the line and
    the line-local destination of the item at each index.
    """
    merged: list[list[tuple[int, int]]] = []
    for positions, perm in lines:
        for t, layer in enumerate(oets_layers(perm)):
            if t == len(merged):
                merged.append([])
            merged[t].extend((positions[i], positions[j]) for i, j in layer)
    return merged


def grid_route(src: Mapping, dst: Mapping, rows: int, cols: int) -> SwapSchedule:
    """Three-phase routing on a rows x cols grid (position ``row * cols + col``).

    ``src`` and ``dst`` map the same items to positions. Cells empty in both
    are filled with placeholder items so that the request is a full
    permutation. Uses at most ``2 * rows + cols`` layers.
    """
    if set(src) != set(dst):
        raise QcflowError("source and destination place different items")
    size = rows * cols
    src, dst = dict(src), dict(dst)
    if len(set(src.values())) != len(src) or len(set(dst.values())) != len(dst):
        raise QcflowError("placement is not injective")
    free_s = sorted(set(range(size)) - set(src.values()))
    free_d = sorted(set(range(size)) - set(dst.values()))
    for k, (ps, pd) in enumerate(zip(free_s, free_d)):
        src[("_hole", k)] = ps
        dst[("_hole", k)] = pd

    # phase 1: inside each column, bring items to the row given by their matching
    g = BipartiteColumnGraph(cols, cols, [(src[q] % cols, dst[q] % cols, q) for q in src])

    def rank(k, q):
        # keep items in their row when possible, else move them to their final row
        if src[q] // cols == k:
            return 0
        return 1 if dst[q] // cols == k else 2

    row1 = {}
    for k, m in enumerate(matching_decomposition(g, rank)):
        for _, _, q in m:
            row1[q] = k
    layers: list[list[tuple[int, int]]] = []

    def column_lines(row_of_start, row_of_end):
        lines = []
        by_col: dict[int, list] = {}
        for q, (r, c) in row_of_start.items():
            by_col.setdefault(c, []).append((r, q))
        for c, items in by_col.items():
            perm = [0] * rows
            for r, q in items:
                perm[r] = row_of_end[q]
            lines.append(([r * cols + c for r in range(rows)], perm))
        return lines

    pos = {q: divmod(p, cols) for q, p in src.items()}
    layers += _parallel_lines(column_lines(pos, row1))
    pos = {q: (row1[q], c) for q, (r, c) in pos.items()}

    # phase 2: inside each row, move to the destination column
    lines = []
    by_row: dict[int, list] = {}
    for q, (r, c) in pos.items():
        by_row.setdefault(r, []).append((c, q))
    for r, items in by_row.items():
        perm = [0] * cols
        for c, q in items:
            perm[c] = dst[q] % cols
        lines.append(([r * cols + c for c in range(cols)], perm))
    layers += _parallel_lines(lines)
    pos = {q: (r, dst[q] % cols) for q, (r, c) in pos.items()}

    # phase 3: inside each column, move to the destination row
    layers += _parallel_lines(column_lines(pos, {q: dst[q] // cols for q in pos}))
    return SwapSchedule(layers)
