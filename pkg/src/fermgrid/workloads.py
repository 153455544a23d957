"""Benchmark pipelines: the 2D fermionic FFT and sparse-SYK Trotter steps.

Mode-index convention of the 2D transform: with t(x) = (x mod L) * L + x // L
the full circuit's single-excitation action is W[j, m] = w^(t(j) t(m)) / sqrt(N),
w = exp(-2 pi i / N) -- the N-point transform kernel read in column-major mode
labels. The vacuum is preserved with phase +1, which pins the many-body
unitary of this Gaussian circuit completely.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .circuit import Circuit, Gate, Grid, schedule_greedy
from .core import Permutation, invert, snake_cell, snake_index
from .fperm import compile_fperm, compile_fperm_1d
from .gamma import gamma_gates
from .planner import oet_schedule
from .verify import PauliString, jw_majorana

FFFT_VARIANTS = ("fswap_baseline", "fp_sandwich", "gamma_sandwich")


@dataclass(frozen=True)
class FfftConfig:
    L: int
    variant: str = "gamma_sandwich"

    def __post_init__(self):
        if self.L < 1 or self.L & (self.L - 1):
            raise ValueError("side must be a power of two")
        if self.variant not in FFFT_VARIANTS:
            raise ValueError(f"variant must be one of {FFFT_VARIANTS}")


# --- 1D transform on a contiguous chain segment ---------------------------------


def _oet_gates_on_cells(targets, cells, kind="FSWAP") -> list[Gate]:
    sched = oet_schedule(list(targets))
    out = []
    for swaps in sched.rounds:
        for (i, j) in swaps:
            out.append(Gate(kind, (cells[i], cells[j])))
    return out


def _two_mode_mixer(a, b) -> list[Gate]:
    # single-particle block (1/sqrt2) [[1, 1], [1, -1]] on modes (a, b)
    return [Gate("GIVENS", (a, b), math.pi / 4), Gate("Z", (b,))]


def _ffft_segment_gates(cells: list[tuple[int, int]]) -> list[Gate]:
    """Radix-2 transform over the modes laid along `cells` (a chain segment).

    Recursively: route even modes to the front half and odd modes to the back
    (fermionic odd-even transposition network), transform both halves, twiddle
    the back half, interleave so butterfly partners are adjacent, mix each
    pair, and un-interleave. All two-mode gates act on neighboring cells.
    """
    n = len(cells)
    if n <= 1:
        return []
    h = n // 2
    gates: list[Gate] = []
    part = [p // 2 if p % 2 == 0 else h + p // 2 for p in range(n)]
    gates += _oet_gates_on_cells(part, cells)
    gates += _ffft_segment_gates(cells[:h])
    gates += _ffft_segment_gates(cells[h:])
    for k in range(h):
        theta = -2.0 * math.pi * k / n
        if theta % (2 * math.pi) != 0.0:
            gates.append(Gate("PHASE", (cells[h + k],), theta))
    interleave = [2 * p if p < h else 2 * (p - h) + 1 for p in range(n)]
    gates += _oet_gates_on_cells(interleave, cells)
    for k in range(h):
        gates += _two_mode_mixer(cells[2 * k], cells[2 * k + 1])
    uninterleave = [p // 2 if p % 2 == 0 else h + p // 2 for p in range(n)]
    gates += _oet_gates_on_cells(uninterleave, cells)
    return gates


def build_ffft_1d_local(L: int) -> Circuit:
    """Chain transform on one row of L modes; single-particle action = DFT_L."""
    if L < 1 or L & (L - 1):
        raise ValueError("length must be a power of two")
    cells = [(0, b) for b in range(L)]
    return schedule_greedy(_ffft_segment_gates(cells), Grid(1, L))


# --- 2D pipeline -----------------------------------------------------------------


def _row_cells(r: int, L: int) -> list[tuple[int, int]]:
    return [snake_cell(r * L + b, L) for b in range(L)]


def _col_cells(c: int, L: int) -> list[tuple[int, int]]:
    return [(r, c) for r in range(L)]


def _row_stage_gates(L: int) -> list[Gate]:
    """Parallel row transforms with outputs straightened to grid columns.

    Odd rows run in reversed chain order, so a fermionic row reversal after
    the transform lands output k at grid column k on every row.
    """
    gates: list[Gate] = []
    for r in range(L):
        cells = _row_cells(r, L)
        gates += _ffft_segment_gates(cells)
        if r % 2 == 1:
            gates += _oet_gates_on_cells([L - 1 - b for b in range(L)], cells)
    return gates


def _twiddle_gates(L: int) -> list[Gate]:
    N = L * L
    gates = []
    for r in range(L):
        for kc in range(L):
            theta = -2.0 * math.pi * (r * kc) / N
            if theta % (2 * math.pi) != 0.0:
                gates.append(Gate("PHASE", ((r, kc),), theta))
    return gates


def _bare_column_gates(L: int) -> list[Gate]:
    gates: list[Gate] = []
    for c in range(L):
        gates += _ffft_segment_gates(_col_cells(c, L))
    return gates


def output_transpose_perm(L: int) -> Permutation:
    """Final routing: the mode at cell (r, c) moves to chain index r + L c."""
    n = L * L
    m = np.empty(n, dtype=np.int64)
    for r in range(L):
        for c in range(L):
            m[snake_index(r, c, L)] = r + L * c
    return Permutation(m)


def column_gather_perm(L: int) -> Permutation:
    """Routing that lines grid column c up as chain segment [cL, cL + L)."""
    n = L * L
    m = np.empty(n, dtype=np.int64)
    for r in range(L):
        for c in range(L):
            m[snake_index(r, c, L)] = c * L + r
    return Permutation(m)


def _fswap_conjugated_column_gates(L: int) -> list[Gate]:
    """Column stage with every vertical layer made chain-local by 1D routing.

    For each entangling layer of the bare column circuit, a chain permutation
    riffles the two touched rows so every vertical pair becomes chain-adjacent,
    the layer's gates fire there, and the riffle unwinds. Single-qubit layers
    pass through. This is the no-batching baseline: the routing repeats per
    layer instead of being absorbed once.
    """
    n = L * L
    bare = schedule_greedy(_bare_column_gates(L), Grid.square(L))
    gates: list[Gate] = []
    for layer in bare.layers:
        two_q = [g for g in layer if len(g.qubits) == 2]
        if not two_q:
            gates.extend(layer)
            continue
        sigma = np.arange(n, dtype=np.int64)
        packed: list[tuple[Gate, int]] = []
        for g in two_q:
            (r, c), (r2, c2) = g.qubits
            assert r2 == r + 1 and c2 == c, "column stage gates are vertical"
            j1 = snake_index(r, c, L)
            j2 = snake_index(r + 1, c, L)
            slot = r * L + 2 * (j1 - r * L)
            sigma[j1] = slot
            sigma[j2] = slot + 1
            packed.append((g, slot))
        perm = Permutation(sigma)
        fwd = _oet_gates_on_cells(
            [int(x) for x in perm.map], [snake_cell(j, L) for j in range(n)]
        )
        gates += fwd
        for g, slot in packed:
            gates.append(Gate(g.kind, (snake_cell(slot, L), snake_cell(slot + 1, L)), g.param))
        back = _oet_gates_on_cells(
            [int(x) for x in invert(perm).map], [snake_cell(j, L) for j in range(n)]
        )
        gates += back
    return gates


def build_ffft_2d(config: FfftConfig) -> Circuit:
    """Row transforms, twiddles, the wrapped column stage, and a final transpose."""
    L = config.L
    grid = Grid.square(L)
    gates: list[Gate] = []
    gates += _row_stage_gates(L)
    gates += _twiddle_gates(L)
    if config.variant == "gamma_sandwich":
        gates += gamma_gates(L)
        gates += _bare_column_gates(L)
        gates += gamma_gates(L)
        gates += list(compile_fperm(output_transpose_perm(L), L).gates())
    elif config.variant == "fp_sandwich":
        gather = column_gather_perm(L)
        gates += list(compile_fperm(gather, L).gates())
        for c in range(L):
            gates += _ffft_segment_gates([snake_cell(c * L + i, L) for i in range(L)])
        gates += list(compile_fperm(invert(gather), L).gates())
        gates += list(compile_fperm(output_transpose_perm(L), L).gates())
    else:  # fswap_baseline
        gates += _fswap_conjugated_column_gates(L)
        gates += list(compile_fperm_1d(output_transpose_perm(L), L).gates())
    circ = schedule_greedy(gates, grid)
    circ.metadata.update(kind="ffft2d", variant=config.variant, L=L)
    return circ


# --- transform oracles -------------------------------------------------------------


def dft_matrix(n: int) -> np.ndarray:
    w = np.exp(-2j * math.pi / n)
    j, k = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    return w ** (j * k) / math.sqrt(n)


def ffft_target_matrix(L: int) -> np.ndarray:
    """The documented single-particle target of build_ffft_2d."""
    N = L * L
    t = np.array([(x % L) * L + x // L for x in range(N)])
    D = dft_matrix(N)
    return D[np.ix_(t, t)]


def creation_matrices(n_modes: int) -> list[np.ndarray]:
    out = []
    for m in range(n_modes):
        g0 = jw_majorana(2 * m, n_modes).to_matrix()
        g1 = jw_majorana(2 * m + 1, n_modes).to_matrix()
        out.append((g0 - 1j * g1) / 2)
    return out


def quadratic_hamiltonian_unitary(W: np.ndarray) -> np.ndarray:
    """Many-body Gaussian unitary with single-particle action W and vacuum fixed."""
    n = W.shape[0]
    h = -1j * scipy.linalg.logm(W)
    a_dag = creation_matrices(n)
    H = np.zeros((2**n, 2**n), dtype=complex)
    for m in range(n):
        for k in range(n):
            if abs(h[m, k]) > 1e-15:
                H += h[m, k] * (a_dag[m] @ a_dag[k].conj().T)
    return scipy.linalg.expm(1j * H)


# --- sparse SYK ---------------------------------------------------------------------


@dataclass(frozen=True)
class SykTerm:
    majoranas: tuple[int, int, int, int]
    coupling: float


@dataclass
class SykInstance:
    N: int
    k: float
    seed: int
    terms: list[SykTerm] = field(default_factory=list)
    dt: float = 0.1

    def to_json(self) -> str:
        return json.dumps(
            {
                "N": self.N,
                "k": self.k,
                "seed": self.seed,
                "dt": self.dt,
                "terms": [{"q": list(t.majoranas), "J": t.coupling} for t in self.terms],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "SykInstance":
        obj = json.loads(text)
        terms = [SykTerm(tuple(t["q"]), float(t["J"])) for t in obj["terms"]]
        return cls(obj["N"], obj["k"], obj["seed"], terms, obj.get("dt", 0.1))


def _unrank_quartet(rank: int) -> tuple[int, int, int, int]:
    # colexicographic unranking of a 4-subset
    out = []
    r = rank
    for size in (4, 3, 2, 1):
        v = size - 1
        while math.comb(v + 1, size) <= r:
            v += 1
        out.append(v)
        r -= math.comb(v, size)
    return tuple(sorted(out))


def sample_syk_terms(N: int, k: float, seed: int) -> SykInstance:
    """Independent Bernoulli quartets at rate k*2N/C(2N,4), Gaussian couplings.

    The count is drawn binomially and that many distinct quartets are sampled
    uniformly, which reproduces the per-quartet Bernoulli process exactly.
    Couplings have variance 6/N^3.
    """
    if N < 2:
        raise ValueError("need at least two modes")
    M = math.comb(2 * N, 4)
    p = min(1.0, k * 2 * N / M)
    rng = np.random.default_rng(np.random.SeedSequence([seed, N]))
    count = int(rng.binomial(M, p))
    ranks: set[int] = set()
    while len(ranks) < count:
        need = count - len(ranks)
        for v in rng.integers(0, M, size=max(2 * need, 8)):
            if len(ranks) < count:
                ranks.add(int(v))
    quartets = sorted(_unrank_quartet(r) for r in ranks)
    sigma = math.sqrt(6.0 / N**3)
    couplings = rng.normal(0.0, sigma, size=count)
    terms = [SykTerm(q, float(j)) for q, j in zip(quartets, couplings)]
    return SykInstance(N, k, seed, terms)


def term_modes(term: SykTerm) -> tuple[int, ...]:
    return tuple(sorted({idx // 2 for idx in term.majoranas}))


def color_terms(terms: list[SykTerm]) -> list[list[SykTerm]]:
    """Greedy first-fit groups of mode-disjoint terms, in input order."""
    groups: list[list[SykTerm]] = []
    used_modes: list[set[int]] = []
    for t in terms:
        modes = set(term_modes(t))
        for g, used in zip(groups, used_modes):
            if not (modes & used):
                g.append(t)
                used |= modes
                break
        else:
            groups.append([t])
            used_modes.append(set(modes))
    return groups


def packing_permutation(group: list[SykTerm], N: int) -> Permutation:
    """Send each term's modes to consecutive chain positions, terms packed first."""
    order: list[int] = []
    seen: set[int] = set()
    for t in group:
        for m in term_modes(t):
            if m in seen:
                raise ValueError("group terms must be mode-disjoint")
            seen.add(m)
            order.append(m)
    order.extend(m for m in range(N) if m not in seen)
    perm = np.empty(N, dtype=np.int64)
    for pos, m in enumerate(order):
        perm[m] = pos
    return Permutation(perm)


def _packed_term_pauli(term: SykTerm, pi: Permutation, N: int) -> PauliString:
    p = PauliString(N)
    for idx in term.majoranas:
        m, alpha = divmod(idx, 2)
        p = p * jw_majorana(2 * pi(m) + alpha, N)
    if p.k % 2 != 0:
        raise AssertionError("Majorana quartet must be Hermitian")
    return p


def _pauli_rotation_gates(p: PauliString, angle: float, L: int) -> list[Gate]:
    """exp(-i angle/2 * P) via basis changes, a CNOT ladder, and one RZ."""
    support = sorted(
        j for j in range(p.n) if ((p.x >> j) | (p.z >> j)) & 1
    )
    if not support:
        return []
    sign = 1 if p.k % 4 == 0 else -1
    cells = [snake_cell(j, L) for j in support]
    pre: list[Gate] = []
    post: list[Gate] = []
    for j, cell in zip(support, cells):
        xb, zb = (p.x >> j) & 1, (p.z >> j) & 1
        if xb and zb:  # Y: conjugate with H S^dg ... S H
            pre += [Gate("Z", (cell,)), Gate("S", (cell,)), Gate("H", (cell,))]
            post += [Gate("H", (cell,)), Gate("S", (cell,))]
        elif xb:
            pre.append(Gate("H", (cell,)))
            post.append(Gate("H", (cell,)))
    ladder = [Gate("CNOT", (cells[i], cells[i + 1])) for i in range(len(cells) - 1)]
    return (
        pre
        + ladder
        + [Gate("RZ", (cells[-1],), sign * angle)]
        + list(reversed(ladder))
        + list(reversed(post))
    )


def build_trotter_step(instance: SykInstance) -> Circuit:
    """One first-order product-formula step: per color group, route, rotate, unroute."""
    N = instance.N
    L = math.isqrt(N)
    if L * L != N or L < 2:
        raise ValueError("circuit construction needs N = L^2 with L >= 2")
    groups = color_terms(instance.terms)
    gates: list[Gate] = []
    fp_gates = 0
    for group in groups:
        pi = packing_permutation(group, N)
        fwd = list(compile_fperm(pi, L).gates())
        back = list(compile_fperm(invert(pi), L).gates())
        rot: list[Gate] = []
        for t in group:
            p = _packed_term_pauli(t, pi, N)
            rot += _pauli_rotation_gates(p, 2.0 * t.coupling * instance.dt, L)
        gates += fwd + rot + back
        fp_gates += len(fwd) + len(back)
    circ = schedule_greedy(gates, Grid.square(L))
    circ.metadata.update(kind="syk-trotter", N=N, groups=len(groups))
    return circ


def trotter_depth_split(instance: SykInstance) -> tuple[int, int]:
    """(routing CNOT depth, rotation CNOT depth) summed over groups."""
    from .circuit import metrics

    N = instance.N
    L = math.isqrt(N)
    groups = color_terms(instance.terms)
    fp_depth = 0
    rot_depth = 0
    for group in groups:
        pi = packing_permutation(group, N)
        fp_depth += metrics(compile_fperm(pi, L)).cnot_depth
        fp_depth += metrics(compile_fperm(invert(pi), L)).cnot_depth
        rot: list[Gate] = []
        for t in group:
            p = _packed_term_pauli(t, pi, N)
            rot += _pauli_rotation_gates(p, 2.0 * t.coupling * instance.dt, L)
        rot_depth += metrics(schedule_greedy(rot, Grid.square(L))).cnot_depth
    return fp_depth, rot_depth


def trotter_oracle_unitary(instance: SykInstance) -> np.ndarray:
    """Ordered product of exact term exponentials (dense; small N only)."""
    N = instance.N
    if N > 5:
        raise ValueError("dense oracle is for desk-scale N only")
    U = np.eye(2**N, dtype=complex)
    for group in color_terms(instance.terms):
        for t in group:
            prod = np.eye(2**N, dtype=complex)
            for idx in t.majoranas:
                prod = prod @ jw_majorana(idx, N).to_matrix()
            U = scipy.linalg.expm(-1j * t.coupling * instance.dt * prod) @ U
    return U
