"""Ternary-tree fermion encodings and Hilbert-routed conversion circuits.

The chain, balanced, and accumulator encodings (JW, BK, Parity) are
binary-shaped ternary trees: qubit nodes form a binary tree via left/right
children, every middle child is a leaf, qubits are labeled in inorder, and
Majorana operators label the leaves left to right (the last leaf is unused).
Qubit q stores the parity of the mode occupations over the inorder interval
[subtree_lo(q), q], so conversions between encodings are CNOT circuits.

BK -> JW conversion proceeds in rounds of disjoint CNOTs whose inorder
intervals admit pairwise-disjoint aligned power-of-two containers of at most
twice the interval length; placing qubit i at Hilbert cell i turns those
containers into disjoint rectangles, so each round routes in parallel.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, replace

import numpy as np

from .circuit import Circuit, Gate, Grid, schedule_greedy
from .core import (
    Permutation,
    hilbert_cell_to_index,
    hilbert_index_to_cell,
    hilbert_shape,
    snake_cell,
    snake_index,
)
from .fperm import compile_fperm
from .planner import bare_column_sort_circuit, hall_rcr_plan, row_stage_circuit
from .verify import PauliString

ENCODINGS = ("jw", "bk", "parity")


@dataclass(frozen=True)
class TernaryTree:
    """Binary-shaped ternary tree on n qubit nodes labeled by inorder position."""

    n: int
    root: int
    left: tuple  # child qubit id or None (leaf)
    right: tuple

    def subtree_lo(self, q: int) -> int:
        lo = q
        while self.left[lo] is not None:
            lo = self.left[lo]
        return lo


def _spine_tree(n: int, rightward: bool) -> TernaryTree:
    left = [None] * n
    right = [None] * n
    if rightward:  # chain encoding: root 0, right spine
        for q in range(n - 1):
            right[q] = q + 1
        root = 0
    else:  # accumulator encoding: root n-1, left spine
        for q in range(1, n):
            left[q] = q - 1
        root = n - 1
    return TernaryTree(n, root, tuple(left), tuple(right))


def jw_tree(n: int) -> TernaryTree:
    return _spine_tree(n, rightward=True)


def parity_tree(n: int) -> TernaryTree:
    return _spine_tree(n, rightward=False)


def bk_tree(n: int) -> TernaryTree:
    """Balanced binary shape; requires n = 2^k - 1."""
    if n & (n + 1):
        raise ValueError("balanced tree needs n = 2^k - 1")
    left = [None] * n
    right = [None] * n

    def build(lo: int, hi: int) -> int | None:
        if lo > hi:
            return None
        mid = (lo + hi) // 2
        left[mid] = build(lo, mid - 1)
        right[mid] = build(mid + 1, hi)
        return mid

    root = build(0, n - 1)
    return TernaryTree(n, root, tuple(left), tuple(right))


def tree_for(encoding: str, n: int) -> TernaryTree:
    if encoding == "jw":
        return jw_tree(n)
    if encoding == "bk":
        return bk_tree(n)
    if encoding == "parity":
        return parity_tree(n)
    raise ValueError(f"unknown encoding {encoding!r}")


def majorana_strings(tree: TernaryTree) -> list[PauliString]:
    """Root-to-leaf path products for the 2n labeled leaves, left to right.

    The left, middle, and right branches below qubit q contribute X_q, Y_q,
    and Z_q. All path qubits are distinct, so every string is a plus-sign
    literal product.
    """
    n = tree.n
    strings: list[PauliString] = []

    def emit(path_x: int, path_z: int, q: int, branch: str) -> None:
        if branch == "X":
            path_x |= 1 << q
        elif branch == "Y":
            path_x |= 1 << q
            path_z |= 1 << q
        else:
            path_z |= 1 << q
        strings.append(PauliString(n, path_x, path_z, 0))

    def visit(q: int, px: int, pz: int) -> None:
        if tree.left[q] is not None:
            visit(tree.left[q], px | (1 << q), pz)
        else:
            emit(px, pz, q, "X")
        emit(px, pz, q, "Y")
        if tree.right[q] is not None:
            visit(tree.right[q], px, pz | (1 << q))
        else:
            emit(px, pz, q, "Z")

    visit(tree.root, 0, 0)
    assert len(strings) == 2 * n + 1
    return strings[: 2 * n]  # rightmost leaf unused


def encoding_matrix(tree: TernaryTree) -> np.ndarray:
    """GF(2) map E with stored bit b_q = XOR of occupations over [subtree_lo(q), q]."""
    n = tree.n
    E = np.zeros((n, n), dtype=np.uint8)
    for q in range(n):
        E[q, tree.subtree_lo(q) : q + 1] = 1
    return E


# --- conversion round plans -----------------------------------------------------


@dataclass(frozen=True)
class RoundGate:
    control: int
    target: int
    interval: tuple[int, int]
    container: tuple[int, int] | None = None


@dataclass(frozen=True)
class RoundPlan:
    k: int
    direction: str
    rounds: tuple[tuple[RoundGate, ...], ...]


def _local_plan(d: int, r: int, with_containers: bool):
    """Intervals (and containers) of sub-round r of a depth-d local subproblem."""
    if r == 1:
        j = (2 ** (d - 1) - 1, 2**d - 1)
        return [(j, (0, 2**d - 1) if with_containers else None)]
    half = 2 ** (d - 1)
    child = _local_plan(d - 1, r - 1, with_containers)
    out = list(child)
    for (a, b), cont in child:
        cc = (cont[0] + half, cont[1] + half) if cont else None
        out.append(((a + half, b + half), cc))
    return out


def bk_to_jw_rounds(k: int) -> RoundPlan:
    """Rounds of the balanced-to-chain conversion on N = 2^k - 1 qubits."""
    if k < 2:
        raise ValueError("need k >= 2")
    rounds = []
    for r in range(1, k):
        gates = []
        for i in range(0, k - r):
            beta = 0 if i == 0 else (1 << k) - (1 << (k - i))
            for (a, b), _ in _local_plan(k - 1 - i, r, False):
                gates.append(RoundGate(beta + a, beta + b, (beta + a, beta + b)))
        rounds.append(tuple(sorted(gates, key=lambda g: g.interval)))
    return RoundPlan(k, "bk_to_jw", tuple(rounds))


def dyadic_containers(plan: RoundPlan) -> RoundPlan:
    """Attach the inductive aligned-power-of-two containers to a balanced-to-chain plan."""
    if plan.direction != "bk_to_jw":
        raise ValueError("containers are defined for the bk_to_jw recursion")
    k = plan.k
    new_rounds = []
    for r_idx, gates in enumerate(plan.rounds):
        r = r_idx + 1
        cont_of = {}
        for i in range(0, k - r):
            beta = 0 if i == 0 else (1 << k) - (1 << (k - i))
            for (a, b), cont in _local_plan(k - 1 - i, r, True):
                cont_of[(beta + a, beta + b)] = (beta + cont[0], beta + cont[1])
        out = []
        for g in gates:
            cont = cont_of[g.interval]
            _validate_container(g.interval, cont, k)
            out.append(replace(g, container=cont))
        # pairwise disjointness of the round's containers
        spans = sorted(g.container for g in out)
        for (a1, b1), (a2, b2) in zip(spans, spans[1:]):
            if a2 <= b1:
                raise AssertionError(f"containers overlap: {(a1, b1)} {(a2, b2)}")
        new_rounds.append(tuple(out))
    return RoundPlan(k, plan.direction, tuple(new_rounds))


def _validate_container(interval, cont, k):
    a, b = interval
    ca, cb = cont
    size = cb - ca + 1
    if size & (size - 1) or ca % size != 0:
        raise AssertionError(f"container {cont} is not an aligned power of two")
    if not (ca <= a and b <= cb and 0 <= ca and cb <= (1 << k) - 1):
        raise AssertionError(f"container {cont} does not enclose {interval}")
    if not (b - a + 1) <= size <= 2 * (b - a + 1):
        raise AssertionError(f"container {cont} too large for {interval}")


def parity_to_bk_rounds(k: int) -> RoundPlan:
    """Accumulator-to-balanced conversion: the mirrored plan, rounds reversed."""
    base = bk_to_jw_rounds(k)
    n = (1 << k) - 1

    def m(i: int) -> int:
        return n - 1 - i

    rounds = []
    for gates in reversed(base.rounds):
        out = [
            RoundGate(m(g.interval[1]), m(g.interval[0]), (m(g.interval[1]), m(g.interval[0])))
            for g in gates
        ]
        rounds.append(tuple(sorted(out, key=lambda g: g.interval)))
    return RoundPlan(k, "parity_to_bk", tuple(rounds))


def max_interval_len(plan: RoundPlan, r: int) -> int:
    return max(g.interval[1] - g.interval[0] + 1 for g in plan.rounds[r - 1])


def apply_plan_gf2(plan: RoundPlan, E: np.ndarray) -> np.ndarray:
    """Row-reduce an encoding matrix through the plan's CNOTs (b_t += b_c)."""
    out = E.copy()
    for gates in plan.rounds:
        for g in gates:
            out[g.target, :] ^= out[g.control, :]
    return out


# --- Hilbert layout and routing -------------------------------------------------


def hilbert_grid(k: int) -> Grid:
    rows, cols = hilbert_shape(k)
    return Grid(rows, cols)


def hilbert_layout(k: int) -> dict[tuple[int, int], int]:
    """Cell -> qubit index; qubit i sits at curve cell i, last cell idle."""
    return {hilbert_index_to_cell(i, k): i for i in range(1 << k)}


def interval_rect(interval: tuple[int, int], k: int) -> tuple[int, int, int, int]:
    """Bounding box (r0, c0, r1, c1) of the curve image of an index interval."""
    cells = [hilbert_index_to_cell(i, k) for i in range(interval[0], interval[1] + 1)]
    rs = [c[0] for c in cells]
    cs = [c[1] for c in cells]
    return min(rs), min(cs), max(rs), max(cs)


def _l_path(a: tuple[int, int], b: tuple[int, int]) -> list[tuple[int, int]]:
    """Row-then-column lattice path from a to b, inclusive."""
    (r0, c0), (r1, c1) = a, b
    path = [(r0, c0)]
    step = 1 if c1 > c0 else -1
    for c in range(c0 + step, c1 + step, step) if c1 != c0 else []:
        path.append((r0, c))
    step = 1 if r1 > r0 else -1
    for r in range(r0 + step, r1 + step, step) if r1 != r0 else []:
        path.append((r, c1))
    return path


def route_round_on_hilbert(round_gates, k: int) -> Circuit:
    """Swap each CNOT's control next to its target inside the gate's region.

    The chain moves the control's qubit along a row-then-column path, fires
    the CNOT, and unwinds. With disjoint containers every gate of the round
    routes in parallel; without them the greedy scheduler serializes any
    overlaps (the net unitary is order-independent, gates commute or act on
    disjoint cells by construction of the emission order).
    """
    gates: list[Gate] = []
    for g in round_gates:
        region = g.container if g.container is not None else (0, (1 << k) - 1)
        rect = interval_rect(region, k)
        ca = hilbert_index_to_cell(g.control, k)
        cb = hilbert_index_to_cell(g.target, k)
        path = _l_path(ca, cb)
        for cell in path:
            if not (rect[0] <= cell[0] <= rect[2] and rect[1] <= cell[1] <= rect[3]):
                raise AssertionError(f"routing path escapes region {rect} at {cell}")
        chain = [Gate("SWAP", (path[i], path[i + 1])) for i in range(len(path) - 2)]
        gates.extend(chain)
        gates.append(Gate("CNOT", (path[-2] if len(path) > 1 else path[0], path[-1])))
        gates.extend(reversed(chain))
    return schedule_greedy(gates, hilbert_grid(k))


def convert_encoding_circuit(src: str, dst: str, k: int) -> Circuit:
    """CNOT/SWAP circuit conjugating src-encoding Majorana strings to dst's.

    Supported: bk -> jw, parity -> bk, parity -> jw (composition), and the
    identity conversions.
    """
    if src not in ENCODINGS or dst not in ENCODINGS:
        raise ValueError("encodings are 'jw', 'bk', 'parity'")
    grid = hilbert_grid(k)
    if src == dst:
        return Circuit(grid)
    plans: list[RoundPlan] = []
    if src == "parity":
        plans.append(parity_to_bk_rounds(k))
        if dst == "jw":
            plans.append(dyadic_containers(bk_to_jw_rounds(k)))
        elif dst != "bk":
            raise ValueError("parity converts to bk or jw")
    elif src == "bk" and dst == "jw":
        plans.append(dyadic_containers(bk_to_jw_rounds(k)))
    else:
        raise ValueError(f"conversion {src} -> {dst} not supported")
    gates: list[Gate] = []
    for plan in plans:
        for gatelist in plan.rounds:
            gates.extend(route_round_on_hilbert(gatelist, k).gates())
    circ = schedule_greedy(gates, grid)
    circ.metadata.update(kind="encoding-conversion", src=src, dst=dst, k=k)
    return circ


def routed_round_depths(k: int) -> list[tuple[int, int, int]]:
    """(round, max interval length, routed CNOT depth) per balanced-to-chain round."""
    from .circuit import metrics

    plan = dyadic_containers(bk_to_jw_rounds(k))
    out = []
    for r, gates in enumerate(plan.rounds, start=1):
        circ = route_round_on_hilbert(gates, k)
        out.append((r, max_interval_len(plan, r), metrics(circ).cnot_depth))
    return out


# --- the four-step pipeline -------------------------------------------------------


def hilbert_to_snake_relayout(k: int) -> Circuit:
    """Plain qubit relayout (SWAP routing, no phases) from curve order to snake order."""
    if k % 2 != 0:
        raise ValueError("square relayout needs even k")
    L = 1 << (k // 2)
    n = L * L
    perm = np.empty(n, dtype=np.int64)
    for i in range(n):
        cell = hilbert_index_to_cell(i, k)
        perm[snake_index(cell[0], cell[1], L)] = i
    plan = hall_rcr_plan(Permutation(perm), L)
    gates: list[Gate] = []
    gates.extend(row_stage_circuit(plan.row_a, L, kind="SWAP").gates())
    gates.extend(bare_column_sort_circuit(plan.col, L, kind="SWAP").gates())
    gates.extend(row_stage_circuit(plan.row_b, L, kind="SWAP").gates())
    return schedule_greedy(gates, Grid.square(L))


def fperm_under_encoding(pi: Permutation, encoding: str, k: int) -> Circuit:
    """Fermionic permutation in a non-chain encoding on the square curve layout.

    Converts to the chain encoding, relabels the physical layout from curve
    order to snake order, applies the grid compiler, and reverses both steps.
    Requires even k; the curve's last cell rides along as an idle qubit and
    the permutation is padded to fix it.
    """
    if k % 2 != 0:
        raise ValueError("the square pipeline needs even k")
    if encoding not in ENCODINGS:
        raise ValueError(f"unknown encoding {encoding!r}")
    L = 1 << (k // 2)
    n_modes = (1 << k) - 1
    if len(pi) != n_modes:
        raise ValueError(f"permutation must act on {n_modes} modes")
    padded = Permutation(np.concatenate([pi.map, [n_modes]]))

    conv = convert_encoding_circuit(encoding, "jw", k)
    relayout = hilbert_to_snake_relayout(k)
    fp = compile_fperm(padded, L)
    gates: list[Gate] = []
    gates.extend(conv.gates())
    gates.extend(relayout.gates())
    gates.extend(fp.gates())
    gates.extend(relayout.inverse().gates())
    gates.extend(conv.inverse().gates())
    circ = schedule_greedy(gates, Grid.square(L))
    circ.metadata.update(kind="fperm-under-encoding", encoding=encoding, k=k)
    return circ
