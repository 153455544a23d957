"""GF(2) phase polynomials and the ancilla-free diagonal converter circuit.

The diagonal unitary built here flips the sign of a basis state |s> by
(-1)^f(s), where f is a fixed degree-2 polynomial in the grid occupations.
Conjugating a round of bare vertical swaps by this unitary supplies exactly
the chain-parity corrections a fermionic column permutation needs, for every
vertical neighbor pair simultaneously, so one application before and one
after an entire column sort promotes it to the fermionic column permutation.

The circuit uses four phases: a vertical CNOT cascade into the column-suffix
parity basis, pipelined row sweeps producing the parity-basis part of f, the
inverse cascade, and pipelined sweeps producing the original-basis part.
Each sweep is a forward prefix-parity CNOT cascade along one row with
trailing gate gadgets riding the wavefront at fixed column offsets, followed
by the mirrored undo cascade with its own trailing gadgets.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, Gate, Grid, schedule_greedy
from .core import snake_index

# gadget kinds
G_SKIP_MINUS = "skip-"
G_SKIP_PLUS = "skip+"
G_CROSS = "cross"
G_SAME = "same"
G_Z = "zfix"


# --- bit grids and the phase polynomial oracle --------------------------------


def as_bitgrid(s, L: int) -> np.ndarray:
    """Coerce to an L x L uint8 array of occupations s[r, c]."""
    a = np.asarray(s, dtype=np.uint8) & 1
    if a.shape != (L, L):
        raise ValueError(f"expected {L}x{L} bit grid, got {a.shape}")
    return a


def suffix_parity(s: np.ndarray) -> np.ndarray:
    """Column-suffix parities: out[r, c] = XOR of s[r', c] over r' >= r."""
    return (np.cumsum(s[::-1, :], axis=0)[::-1, :] & 1).astype(np.uint8)


def bits_to_grid(bits: int, L: int) -> np.ndarray:
    """Chain-ordered basis label -> grid occupation array."""
    g = np.zeros((L, L), dtype=np.uint8)
    for r in range(L):
        for c in range(L):
            g[r, c] = (bits >> snake_index(r, c, L)) & 1
    return g


def T(x, y) -> int:
    """Triangular cross product: XOR over p < c of x[p] * y[c]."""
    xa = np.asarray(x, dtype=np.uint8) & 1
    ya = np.asarray(y, dtype=np.uint8) & 1
    if xa.shape != ya.shape:
        raise ValueError("row length mismatch")
    prefix = np.concatenate(([0], np.cumsum(xa.astype(np.int64))[:-1]))  # sum of x[p], p < c
    return int(np.sum(prefix * ya)) & 1


def f_D(s: np.ndarray) -> int:
    """Original-basis part: even rows paired with the odd row below."""
    L = s.shape[0]
    acc = 0
    for r in range(0, L, 2):
        below = s[r + 1] if r + 1 <= L - 1 else np.zeros(L, dtype=np.uint8)
        acc ^= T(s[r], s[r]) ^ T(s[r], below)
    return acc


def f_B(st: np.ndarray) -> int:
    """Parity-basis part: skip-row terms two apart plus same-row terms for r >= 2."""
    L = st.shape[0]
    acc = 0
    for r in range(0, L, 2):
        if r + 2 <= L - 1:
            acc ^= T(st[r], st[r + 2])
        if r >= 2:
            acc ^= T(st[r], st[r])
    return acc


def gamma_phase_oracle(s, L: int) -> int:
    """f(s) evaluated directly from the polynomial definition."""
    grid = as_bitgrid(s, L)
    return f_B(suffix_parity(grid)) ^ f_D(grid)


def gamma_phase_oracle_bits(bits: int, L: int) -> int:
    return gamma_phase_oracle(bits_to_grid(bits, L), L)


# --- the symbolic polynomial and the parity-encoding check --------------------


@dataclass
class PhasePolynomial:
    """Degree-2 GF(2) polynomial over grid-cell variables.

    Quadratic monomials are unordered pairs of (basis, r, c) variables where
    basis 's' is the original occupation and 't' its column-suffix parity.
    """

    L: int
    quad: set = field(default_factory=set)
    lin: set = field(default_factory=set)
    constant: int = 0

    def add_quad(self, u, v) -> None:
        if u == v:
            raise ValueError("diagonal monomials reduce to linear terms")
        key = (u, v) if u <= v else (v, u)
        if key in self.quad:
            self.quad.discard(key)
        else:
            self.quad.add(key)

    def evaluate(self, s) -> int:
        grid = as_bitgrid(s, self.L)
        st = suffix_parity(grid)

        def val(var):
            basis, r, c = var
            return int(grid[r, c] if basis == "s" else st[r, c])

        acc = self.constant
        for u, v in self.quad:
            acc ^= val(u) & val(v)
        for u in self.lin:
            acc ^= val(u)
        return acc & 1


@functools.lru_cache(maxsize=64)
def gamma_polynomial(L: int) -> PhasePolynomial:
    """The converter's phase polynomial with monomials listed explicitly."""
    poly = PhasePolynomial(L)
    for r in range(0, L, 2):
        # original basis: same-row and row-below cross terms
        for p in range(L):
            for c in range(p + 1, L):
                poly.add_quad(("s", r, p), ("s", r, c))
        if r + 1 <= L - 1:
            for p in range(L):
                for c in range(p + 1, L):
                    poly.add_quad(("s", r, p), ("s", r + 1, c))
        # parity basis
        if r + 2 <= L - 1:
            for p in range(L):
                for c in range(p + 1, L):
                    poly.add_quad(("t", r, p), ("t", r + 2, c))
        if r >= 2:
            for p in range(L):
                for c in range(p + 1, L):
                    poly.add_quad(("t", r, p), ("t", r, c))
    return poly


def _cell_mask(r: int, c: int, L: int) -> int:
    return 1 << snake_index(r, c, L)


def _var_mask(var, L: int) -> int:
    """Chain bitmask of a variable as a linear form over original occupations."""
    basis, r, c = var
    if basis == "s":
        return _cell_mask(r, c, L)
    m = 0
    for rp in range(r, L):
        m |= _cell_mask(rp, c, L)
    return m


@dataclass(frozen=True)
class PairCheck:
    cell: tuple[int, int]
    delta_mask: int
    delta_const: int
    parity_mask: int

    @property
    def ok(self) -> bool:
        return self.delta_mask == self.parity_mask and self.delta_const == 0


def check_parity_encoding(L: int, poly: PhasePolynomial | None = None) -> list[PairCheck]:
    """Symbolic check that flipping any vertical pair changes f by the chain parity.

    For each vertical neighbor pair, the difference f(s) xor f(s + e_j + e_k)
    is an affine form in s (f is quadratic); it is computed monomial by
    monomial and compared, as a linear form over original occupations, with
    the parity of the chain sites strictly between the pair.
    """
    if poly is None:
        poly = gamma_polynomial(L)
    # index quadratic monomials by variable
    by_var: dict[tuple, list[tuple]] = {}
    for u, v in poly.quad:
        by_var.setdefault(u, []).append(v)
        by_var.setdefault(v, []).append(u)

    out = []
    for r0 in range(L - 1):
        for c0 in range(L):
            flips = {("s", r0, c0), ("s", r0 + 1, c0), ("t", r0 + 1, c0)}
            mask = 0
            const = 0
            seen_pairs = set()
            for u in flips:
                for v in by_var.get(u, ()):  # all monomials containing u
                    key = (u, v) if u <= v else (v, u)
                    if key in seen_pairs:
                        continue
                    seen_pairs.add(key)
                    u_f, v_f = key[0] in flips, key[1] in flips
                    if u_f and v_f:
                        mask ^= _var_mask(key[0], L) ^ _var_mask(key[1], L)
                        const ^= 1
                    elif u_f:
                        mask ^= _var_mask(key[1], L)
                    else:
                        mask ^= _var_mask(key[0], L)
            for u in poly.lin:
                if u in flips:
                    const ^= 1
            j = snake_index(r0, c0, L)
            k = snake_index(r0 + 1, c0, L)
            assert j < k
            pmask = ((1 << k) - 1) & ~((1 << (j + 1)) - 1)
            out.append(PairCheck((r0, c0), mask, const, pmask))
    return out


# --- the pipelined sweep primitive --------------------------------------------


def _gadget_gates(kind: str, r: int, c: int, L: int) -> list[Gate]:
    """Gates of one gadget at anchor column c on sweep row r, clipped to the grid."""
    gates: list[Gate] = []

    def incol(col: int) -> bool:
        return 0 <= col <= L - 1

    if kind in (G_SKIP_MINUS, G_SKIP_PLUS):
        sgn = -1 if kind == G_SKIP_MINUS else 1
        if incol(c):
            gates.append(Gate("CZ", ((r + 1, c), (r + 2, c))))
        if incol(c + sgn):
            gates.append(Gate("CNOT", ((r, c + sgn), (r + 1, c + sgn))))
        if incol(c + 2 * sgn):
            gates.append(Gate("CZ", ((r + 1, c + 2 * sgn), (r + 2, c + 2 * sgn))))
        if incol(c + 3 * sgn):
            gates.append(Gate("CNOT", ((r, c + 3 * sgn), (r + 1, c + 3 * sgn))))
    elif kind == G_CROSS:
        if incol(c):
            gates.append(Gate("CZ", ((r, c), (r + 1, c))))
    elif kind == G_SAME:
        if incol(c - 1) and incol(c):
            gates.append(Gate("CZ", ((r, c - 1), (r, c))))
    elif kind == G_Z:
        if incol(c) and (L - 1 - c) % 2 == 1:
            gates.append(Gate("Z", ((r, c),)))
    else:
        raise ValueError(kind)
    return gates


def _gadget_t_range(kind: str, delta: int, L: int) -> tuple[int, int]:
    """Step range over which a gadget has at least one in-grid gate."""
    if kind == G_SKIP_MINUS:
        lo_c, hi_c = 0, L + 2
    elif kind == G_SKIP_PLUS:
        lo_c, hi_c = -3, L - 1
    elif kind == G_SAME:
        lo_c, hi_c = 1, L - 1
    else:  # cross, zfix
        lo_c, hi_c = 0, L - 1
    return lo_c - delta, hi_c - delta


def pipe_sweep(
    r: int,
    fwd: list[tuple[int, str]],
    undo: list[tuple[int, str]],
    L: int,
) -> dict[str, dict[int, list[Gate]]]:
    """Stepwise schedule of one pipelined sweep along row r.

    Returns {"fwd": {t: gates}, "undo": {t: gates}}. The forward leg fires the
    cascade CNOT (r,t)->(r,t+1) for 0 <= t <= L-2 together with each forward
    gadget's gates at anchor t+delta; the undo leg mirrors it with t
    decreasing. Steps with no in-grid gate are dropped. Forward offsets must
    be negative and undo offsets positive.
    """
    if any(d >= 0 for d, _ in fwd) or any(d <= 0 for d, _ in undo):
        raise ValueError("forward offsets are negative, undo offsets positive")

    def leg(gadgets: list[tuple[int, str]]) -> dict[int, list[Gate]]:
        t_lo, t_hi = 0, L - 2
        for d, kind in gadgets:
            g_lo, g_hi = _gadget_t_range(kind, d, L)
            t_lo, t_hi = min(t_lo, g_lo), max(t_hi, g_hi)
        steps: dict[int, list[Gate]] = {}
        for t in range(t_lo, t_hi + 1):
            gs: list[Gate] = []
            if 0 <= t <= L - 2:
                gs.append(Gate("CNOT", ((r, t), (r, t + 1))))
            for d, kind in gadgets:
                gs.extend(_gadget_gates(kind, r, t + d, L))
            if gs:
                steps[t] = gs
        return steps

    return {"fwd": leg(fwd), "undo": leg(undo)}


def _merge_sweeps(sweeps: list[dict[str, dict[int, list[Gate]]]]) -> list[list[Gate]]:
    """Lockstep-merge parallel sweeps into global step layers, fwd then undo."""
    layers: list[list[Gate]] = []
    for legname, reverse in (("fwd", False), ("undo", True)):
        all_t = sorted({t for sw in sweeps for t in sw[legname]}, reverse=reverse)
        for t in all_t:
            layer: list[Gate] = []
            for sw in sweeps:
                layer.extend(sw[legname].get(t, ()))
            if layer:
                layers.append(layer)
    return layers


def _assert_disjoint(layers: list[list[Gate]]) -> None:
    for layer in layers:
        seen = set()
        for g in layer:
            for q in g.qubits:
                if q in seen:
                    raise AssertionError(f"schedule conflict at qubit {q}")
                seen.add(q)


def gamma_step_layers(L: int) -> list[list[Gate]]:
    """The four-phase stepwise schedule, conflict-checked layer by layer."""
    if L < 2:
        raise ValueError("grid side must be at least 2")
    layers: list[list[Gate]] = []

    # Phase 1: enter the column-suffix parity basis (bottom-up cascades)
    for r in range(L - 2, -1, -1):
        layers.append([Gate("CNOT", ((r + 1, c), (r, c))) for c in range(L)])

    # Phase 2: parity-basis sweeps in two batches by r mod 4
    for batch_rem in (0, 2):
        sweeps = []
        for r in range(batch_rem, L, 4):
            if r % 2 != 0:
                continue
            fwd, undo = [], []
            if r + 2 <= L - 1:
                fwd.append((-1, G_SKIP_MINUS))
                undo.append((+1, G_SKIP_PLUS))
            if r >= 2:
                fwd.append((-5, G_SAME))
                undo.append((+5, G_Z))
            if fwd or undo:
                sweeps.append(pipe_sweep(r, fwd, undo, L))
        layers.extend(_merge_sweeps(sweeps))

    # Phase 3: exit the parity basis (top-down cascades)
    for r in range(0, L - 1):
        layers.append([Gate("CNOT", ((r + 1, c), (r, c))) for c in range(L)])

    # Phase 4: original-basis sweeps, all even rows in parallel; the odd-L
    # final row runs its same-row-only sweep alongside (it touches no other row)
    sweeps = []
    for r in range(0, L - 1, 2):
        sweeps.append(
            pipe_sweep(r, [(-2, G_CROSS), (-3, G_SAME)], [(+2, G_CROSS), (+3, G_Z)], L)
        )
    if L % 2 == 1:
        sweeps.append(pipe_sweep(L - 1, [(-3, G_SAME)], [(+3, G_Z)], L))
    layers.extend(_merge_sweeps(sweeps))

    _assert_disjoint(layers)
    return layers


@functools.lru_cache(maxsize=64)
def gamma_gates(L: int) -> tuple[Gate, ...]:
    """Flat program-order gate sequence of the converter."""
    return tuple(g for layer in gamma_step_layers(L) for g in layer)


def build_gamma(L: int) -> Circuit:
    """The diagonal converter as a greedily layered circuit."""
    circ = schedule_greedy(gamma_gates(L), Grid.square(L))
    circ.metadata["kind"] = "gamma"
    circ.metadata["L"] = L
    return circ
