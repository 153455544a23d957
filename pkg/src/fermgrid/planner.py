"""Hall Row-Column-Row factorization and odd-even transposition networks.

Permutations here act on chain (snake) indices: the mode at chain position j
moves to position pi(j). The RCR plan factors the induced cell permutation
into a within-row stage, a within-column stage, and a second within-row
stage, via edge coloring of the L-regular bipartite multigraph between
source rows and destination rows (one edge per item).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, Gate, Grid, schedule_greedy
from .core import Permutation, snake_cell, snake_index


@dataclass(frozen=True)
class OetSchedule:
    """Rounds of disjoint adjacent transpositions realizing a target order.

    Round t compares pairs (0,1),(2,3),... for even t and (1,2),(3,4),...
    for odd t, swapping only where the local order disagrees with the target.
    """

    n: int
    rounds: tuple[tuple[tuple[int, int], ...], ...]

    @property
    def n_rounds(self) -> int:
        return len(self.rounds)


def oet_schedule(targets, n: int | None = None) -> OetSchedule:
    """Plan the swaps that sort `targets` (a permutation of 0..n-1) ascending."""
    keys = list(targets)
    if n is None:
        n = len(keys)
    if sorted(keys) != list(range(n)):
        raise ValueError("targets must be a permutation of 0..n-1")
    rounds: list[tuple[tuple[int, int], ...]] = []
    for t in range(n):
        if keys == sorted(keys):
            break
        start = t % 2
        swaps = []
        for i in range(start, n - 1, 2):
            if keys[i] > keys[i + 1]:
                keys[i], keys[i + 1] = keys[i + 1], keys[i]
                swaps.append((i, i + 1))
        rounds.append(tuple(swaps))
    # trim trailing empty rounds
    while rounds and not rounds[-1]:
        rounds.pop()
    assert keys == sorted(keys), "odd-even transposition failed to sort within n rounds"
    return OetSchedule(n, tuple(rounds))


# --- Hall three-stage plan ----------------------------------------------------


@dataclass(frozen=True)
class RcrPlan:
    """Per-line stage permutations: row_a[r][c], col[c][r], row_b[r][c] targets."""

    L: int
    row_a: tuple[tuple[int, ...], ...]
    col: tuple[tuple[int, ...], ...]
    row_b: tuple[tuple[int, ...], ...]

    def apply_cells(self, cell: tuple[int, int]) -> tuple[int, int]:
        """Destination cell of the item starting at `cell` (pure data movement)."""
        r, c = cell
        c1 = self.row_a[r][c]
        r2 = self.col[c1][r]
        c3 = self.row_b[r2][c1]
        return (r2, c3)


def _euler_split(edges: list[tuple[int, int, int]], L: int):
    """Split a d-regular bipartite multigraph into two d/2-regular halves.

    Edges are (left, right, id). Walks Eulerian circuits (all degrees even)
    and alternates edges between the halves; bipartiteness keeps the
    alternation consistent. Deterministic: adjacency sorted by edge id.
    """
    adj: list[list[tuple[int, int]]] = [[] for _ in range(2 * L)]  # vertex -> (edge idx, other)
    for idx, (u, v, _eid) in enumerate(edges):
        adj[u].append((idx, L + v))
        adj[L + v].append((idx, u))
    for lst in adj:
        lst.sort(key=lambda t: edges[t[0]][2])
    used = [False] * len(edges)
    ptr = [0] * (2 * L)
    half_a: list[tuple[int, int, int]] = []
    half_b: list[tuple[int, int, int]] = []
    for start in range(2 * L):
        while True:
            # find an unused edge at start
            while ptr[start] < len(adj[start]) and used[adj[start][ptr[start]][0]]:
                ptr[start] += 1
            if ptr[start] >= len(adj[start]):
                break
            # walk a circuit from start, alternating halves
            v = start
            side = 0
            while True:
                while ptr[v] < len(adj[v]) and used[adj[v][ptr[v]][0]]:
                    ptr[v] += 1
                if ptr[v] >= len(adj[v]):
                    break
                eidx, w = adj[v][ptr[v]]
                used[eidx] = True
                (half_a if side == 0 else half_b).append(edges[eidx])
                side ^= 1
                v = w
    return half_a, half_b


def _extract_perfect_matching(edges: list[tuple[int, int, int]], L: int):
    """One perfect matching of a regular bipartite multigraph (augmenting paths)."""
    adj: list[list[int]] = [[] for _ in range(L)]
    for idx, (u, _v, _eid) in enumerate(edges):
        adj[u].append(idx)
    for lst in adj:
        lst.sort(key=lambda i: edges[i][2])
    match_right: dict[int, int] = {}  # right vertex -> edge idx

    def try_assign(u: int, visited: set[int]) -> bool:
        for eidx in adj[u]:
            v = edges[eidx][1]
            if v in visited:
                continue
            visited.add(v)
            if v not in match_right or try_assign(edges[match_right[v]][0], visited):
                match_right[v] = eidx
                return True
        return False

    for u in range(L):
        if not try_assign(u, set()):
            raise AssertionError("regular bipartite multigraph must have a perfect matching")
    chosen = set(match_right.values())
    matching = [edges[i] for i in sorted(chosen)]
    rest = [e for i, e in enumerate(edges) if i not in chosen]
    return matching, rest


def _edge_color(edges: list[tuple[int, int, int]], L: int, degree: int) -> dict[int, int]:
    """Proper edge coloring with `degree` colors; returns edge id -> color."""
    if degree == 0:
        return {}
    if degree % 2 == 1:
        matching, rest = _extract_perfect_matching(edges, L)
        colors = _edge_color(rest, L, degree - 1)
        shifted = {eid: c + 1 for eid, c in colors.items()}
        for _u, _v, eid in matching:
            shifted[eid] = 0
        return shifted
    half_a, half_b = _euler_split(edges, L)
    ca = _edge_color(half_a, L, degree // 2)
    cb = _edge_color(half_b, L, degree // 2)
    out = dict(ca)
    for eid, c in cb.items():
        out[eid] = c + degree // 2
    return out


def hall_rcr_plan(pi: Permutation, L: int) -> RcrPlan:
    """Factor a chain permutation on the L x L grid into row / column / row stages.

    One edge per item joins its source row to its destination row; the
    L-regular bipartite multigraph is L-edge-colored (repeated Euler splits,
    perfect-matching extraction at odd degree) and the color becomes the
    intermediate column. Within each (source row, destination row) bundle the
    colors are reassigned to items in source-column order, which fixes
    already-placed items, so the identity maps to three identity stages.
    """
    n = L * L
    if len(pi) != n:
        raise ValueError(f"permutation has size {len(pi)}, expected {n}")
    # edge per item, id = source chain index for deterministic tie-breaks
    edges = []
    dest_cell = {}
    for j in range(n):
        r, c = snake_cell(j, L)
        r2, c2 = snake_cell(pi(j), L)
        dest_cell[(r, c)] = (r2, c2)
        edges.append((r, r2, j))
    coloring = _edge_color(edges, L, L)

    # canonical reassignment inside parallel-edge bundles: sort items by
    # source column, hand out the bundle's colors in ascending order
    bundles: dict[tuple[int, int], list[int]] = {}
    for u, v, eid in edges:
        bundles.setdefault((u, v), []).append(eid)
    color_of_item: dict[int, int] = {}
    for key, items in bundles.items():
        cols = sorted(coloring[e] for e in items)
        items_sorted = sorted(items, key=lambda j: snake_cell(j, L)[1])
        for j, col in zip(items_sorted, cols):
            color_of_item[j] = col

    row_a = [[-1] * L for _ in range(L)]
    col_stage = [[-1] * L for _ in range(L)]
    row_b = [[-1] * L for _ in range(L)]
    # intermediate occupancy: items land at (source row, color)
    for j in range(n):
        r, c = snake_cell(j, L)
        row_a[r][c] = color_of_item[j]
    for j in range(n):
        r, c = snake_cell(j, L)
        m = color_of_item[j]
        r2, c2 = dest_cell[(r, c)]
        col_stage[m][r] = r2
        row_b[r2][m] = c2
    plan = RcrPlan(
        L,
        tuple(tuple(row) for row in row_a),
        tuple(tuple(col) for col in col_stage),
        tuple(tuple(row) for row in row_b),
    )
    for line in (*plan.row_a, *plan.col, *plan.row_b):
        if sorted(line) != list(range(L)):
            raise AssertionError("stage is not a within-line permutation")
    return plan


# --- stage circuits -----------------------------------------------------------


def row_stage_circuit(stage: tuple[tuple[int, ...], ...], L: int, kind: str = "FSWAP") -> Circuit:
    """All L rows sorted in parallel by OET; horizontal gates are chain-local."""
    grid = Grid.square(L)
    schedules = [oet_schedule(stage[r], L) for r in range(L)]
    gates: list[Gate] = []
    for t in range(max((s.n_rounds for s in schedules), default=0)):
        for r in range(L):
            if t < schedules[r].n_rounds:
                for (i, j) in schedules[r].rounds[t]:
                    gates.append(Gate(kind, ((r, i), (r, j))))
    return schedule_greedy(gates, grid)


def bare_column_sort_circuit(stage: tuple[tuple[int, ...], ...], L: int, kind: str = "FSWAP") -> Circuit:
    """All L columns sorted in parallel with bare vertical swaps."""
    grid = Grid.square(L)
    schedules = [oet_schedule(stage[c], L) for c in range(L)]
    gates: list[Gate] = []
    for t in range(max((s.n_rounds for s in schedules), default=0)):
        for c in range(L):
            if t < schedules[c].n_rounds:
                for (i, j) in schedules[c].rounds[t]:
                    gates.append(Gate(kind, ((i, c), (j, c))))
    return schedule_greedy(gates, grid)


def column_round_pairs(stage: tuple[tuple[int, ...], ...], L: int) -> list[list[tuple[int, int]]]:
    """Per-round vertical swap pairs ((r, c) row indices) of the column sort."""
    schedules = [oet_schedule(stage[c], L) for c in range(L)]
    rounds = []
    for t in range(max((s.n_rounds for s in schedules), default=0)):
        this = []
        for c in range(L):
            if t < schedules[c].n_rounds:
                this.extend(((i, c), (j, c)) for (i, j) in schedules[c].rounds[t])
        rounds.append(this)
    return rounds


def chain_sort_circuit(pi: Permutation, L: int, kind: str = "FSWAP") -> Circuit:
    """1D baseline: OET along the full snake chain with local swaps."""
    n = L * L
    if len(pi) != n:
        raise ValueError("permutation size mismatch")
    grid = Grid.square(L)
    sched = oet_schedule(pi.map.tolist(), n)
    gates: list[Gate] = []
    for swaps in sched.rounds:
        for (i, j) in swaps:
            gates.append(Gate(kind, (snake_cell(i, L), snake_cell(j, L))))
    return schedule_greedy(gates, grid)


def segment_oet_gates(targets, offset: int, L: int, kind: str = "FSWAP") -> list[Gate]:
    """OET swap gates sorting a contiguous chain segment [offset, offset+len)."""
    sched = oet_schedule(list(targets))
    gates = []
    for swaps in sched.rounds:
        for (i, j) in swaps:
            gates.append(Gate(kind, (snake_cell(offset + i, L), snake_cell(offset + j, L))))
    return gates
