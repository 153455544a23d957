"""Independent verification oracles.

Basis-state phase simulation for the {CNOT, CZ, Z, X, S, FSWAP, SWAP} class,
dense statevector simulation for the full alphabet at small qubit counts,
stabilizer Pauli conjugation, the fermionic-permutation phase oracle, and a
Pauli-frame Monte Carlo sampler for the depolarizing noise model.

Qubit bit order: basis label s has bit j = (s >> j) & 1. Kets in docstrings
and tests are written |s_0 s_1 ... s_{n-1}>. Circuits act on grid cells; a
layout maps each cell to its bit index (snake order by default).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, Grid, Metrics, decomposed_gates, schedule_greedy
from .core import Permutation

PHASE_CLASS = frozenset({"CNOT", "CZ", "Z", "X", "S", "FSWAP", "SWAP"})
CLIFFORD = frozenset({"CNOT", "CZ", "Z", "X", "S", "H", "FSWAP", "SWAP"})


class GateClassError(ValueError):
    """A gate outside the class supported by the requested simulator."""


def snake_layout(grid: Grid) -> dict[tuple[int, int], int]:
    """Cell -> bit index, boustrophedon over the grid rectangle."""
    layout = {}
    for r in range(grid.rows):
        for c in range(grid.cols):
            layout[(r, c)] = r * grid.cols + (c if r % 2 == 0 else grid.cols - 1 - c)
    return layout


@dataclass(frozen=True)
class PhaseState:
    """A computational basis state with a phase in {1, i, -1, -i} = i^k."""

    bits: int
    iphase: int  # power of i, mod 4

    @property
    def phase(self) -> complex:
        return 1j ** (self.iphase % 4)


# --- basis-state phase simulation -------------------------------------------


def simulate_phase_circuit(circuit: Circuit, s: int, layout=None) -> PhaseState:
    """Exact action of a phase-class circuit on basis state |s>."""
    bits = np.array([[(s >> j) & 1 for j in range(circuit.grid.n_qubits)]], dtype=np.uint8)
    out, ph = phase_simulate_batch(circuit, bits, layout)
    val = 0
    for j in range(out.shape[1]):
        val |= int(out[0, j]) << j
    return PhaseState(val, int(ph[0]) % 4)


def phase_simulate_batch(circuit: Circuit, bits: np.ndarray, layout=None):
    """Vectorized phase-class simulation over a batch of basis states.

    bits: (shots, n_qubits) uint8 array, column j = bit j. Returns the
    transformed bits array (copy) and an int8 array of i-phase powers.
    """
    if layout is None:
        layout = snake_layout(circuit.grid)
    b = bits.copy()
    ph = np.zeros(b.shape[0], dtype=np.int64)
    for g in circuit.gates():
        k = g.kind
        if k not in PHASE_CLASS:
            raise GateClassError(f"{k} is not in the basis-phase gate class")
        if k == "CNOT":
            c, t = (layout[q] for q in g.qubits)
            b[:, t] ^= b[:, c]
        elif k == "CZ":
            a, bq = (layout[q] for q in g.qubits)
            ph += 2 * (b[:, a] & b[:, bq])
        elif k == "Z":
            (q,) = (layout[q] for q in g.qubits)
            ph += 2 * b[:, q]
        elif k == "S":
            (q,) = (layout[q] for q in g.qubits)
            ph += b[:, q]
        elif k == "X":
            (q,) = (layout[q] for q in g.qubits)
            b[:, q] ^= 1
        elif k == "SWAP":
            a, bq = (layout[q] for q in g.qubits)
            b[:, [a, bq]] = b[:, [bq, a]]
        elif k == "FSWAP":
            a, bq = (layout[q] for q in g.qubits)
            ph += 2 * (b[:, a] & b[:, bq])
            b[:, [a, bq]] = b[:, [bq, a]]
    return b, (ph % 4).astype(np.int8)


# --- fermionic permutation oracle -------------------------------------------


def fperm_oracle(pi: Permutation, s: int) -> PhaseState:
    """Literal evaluation: CZ phases on all occupied inversion pairs, then permute.

    Bit i of the input moves to bit pi(i); the phase is (-1)^(number of pairs
    i < j with pi(i) > pi(j) and s_i = s_j = 1).
    """
    n = len(pi)
    bits = np.array([[(s >> j) & 1 for j in range(n)]], dtype=np.uint8)
    out, ph = fperm_oracle_batch(pi, bits)
    val = 0
    for j in range(n):
        val |= int(out[0, j]) << j
    return PhaseState(val, int(ph[0]) % 4)


def fperm_oracle_batch(pi: Permutation, bits: np.ndarray):
    """Vectorized F_pi action on a batch of basis states."""
    n = len(pi)
    m = pi.map
    ph = np.zeros(bits.shape[0], dtype=np.int64)
    for i in range(n):
        later = np.nonzero(m[i + 1 :] < m[i])[0] + i + 1
        if later.size:
            ph += bits[:, i].astype(np.int64) * bits[:, later].astype(np.int64).sum(axis=1)
    out = np.empty_like(bits)
    out[:, m] = bits
    return out, ((2 * ph) % 4).astype(np.int8)


def full_fswap_oracle(j: int, k: int, s: int, n: int) -> PhaseState:
    """Parity-corrected fermionic swap of chain sites j < k on basis state s."""
    if not 0 <= j < k < n:
        raise ValueError("need 0 <= j < k < n")
    sj, sk = (s >> j) & 1, (s >> k) & 1
    p = 0
    for l in range(j + 1, k):
        p ^= (s >> l) & 1
    phase = (sj & sk) ^ ((sj ^ sk) & p)
    out = s & ~((1 << j) | (1 << k)) | (sk << j) | (sj << k)
    return PhaseState(out, 2 * phase)


# --- Pauli strings and Clifford conjugation ----------------------------------


def _g_exponent(x1: int, z1: int, x2: int, z2: int) -> int:
    # i-power from multiplying single-qubit literals (AG04 rowsum g function)
    if x1 == 0 and z1 == 0:
        return 0
    if x1 == 1 and z1 == 1:
        return z2 - x2
    if x1 == 1 and z1 == 0:
        return z2 * (2 * x2 - 1)
    return x2 * (1 - 2 * z2)


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass
class PauliString:
    """i^k times a tensor of literal I/X/Y/Z factors, encoded as x/z bitmasks.

    A qubit with x-bit and z-bit both set carries a literal Y. Hermitian
    strings have even k (sign +1 for k = 0, -1 for k = 2).
    """

    n: int
    x: int = 0
    z: int = 0
    k: int = 0  # power of i, mod 4

    def __post_init__(self):
        self.k %= 4

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n)

    @classmethod
    def from_label(cls, label: str, sign: complex = 1) -> "PauliString":
        """Build from a string like 'XIZY' (character j acts on qubit j)."""
        x = z = 0
        for j, ch in enumerate(label):
            if ch == "X":
                x |= 1 << j
            elif ch == "Z":
                z |= 1 << j
            elif ch == "Y":
                x |= 1 << j
                z |= 1 << j
            elif ch != "I":
                raise ValueError(f"bad Pauli letter {ch!r}")
        k = {1: 0, 1j: 1, -1: 2, -1j: 3}[sign]
        return cls(len(label), x, z, k)

    def label(self) -> str:
        out = []
        for j in range(self.n):
            xb, zb = (self.x >> j) & 1, (self.z >> j) & 1
            out.append("IXZY"[xb + 2 * zb] if xb + 2 * zb != 3 else "Y")
        return "".join(out)

    @property
    def sign(self) -> complex:
        return 1j ** (self.k % 4)

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n != other.n:
            raise ValueError("size mismatch")
        k = self.k + other.k
        both = (self.x | self.z) & (other.x | other.z)
        v = both
        while v:
            j = (v & -v).bit_length() - 1
            v &= v - 1
            k += _g_exponent(
                (self.x >> j) & 1, (self.z >> j) & 1, (other.x >> j) & 1, (other.z >> j) & 1
            )
        return PauliString(self.n, self.x ^ other.x, self.z ^ other.z, k % 4)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliString)
            and (self.n, self.x, self.z, self.k % 4) == (other.n, other.x, other.z, other.k % 4)
        )

    def commutes_with(self, other: "PauliString") -> bool:
        return (_popcount(self.x & other.z) + _popcount(self.z & other.x)) % 2 == 0

    def to_matrix(self) -> np.ndarray:
        X = np.array([[0, 1], [1, 0]], dtype=complex)
        Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
        Z = np.array([[1, 0], [0, -1]], dtype=complex)
        I2 = np.eye(2, dtype=complex)
        m = np.array([[1]], dtype=complex)
        for j in range(self.n):
            xb, zb = (self.x >> j) & 1, (self.z >> j) & 1
            sigma = [I2, X, Z, Y][xb + 2 * zb]
            m = np.kron(sigma, m)  # qubit j is the low bit
        return self.sign * m


def jw_majorana(idx: int, n_modes: int) -> PauliString:
    """JW image of Majorana 2j (X_j Z-string) or 2j+1 (Y_j Z-string)."""
    j, alpha = divmod(idx, 2)
    if not 0 <= j < n_modes:
        raise ValueError("Majorana index out of range")
    low = (1 << j) - 1
    x = 1 << j
    z = low | (x if alpha else 0)
    return PauliString(n_modes, x, z, 0)


def _conj_gate(p: PauliString, kind: str, qubits: tuple[int, ...]) -> PauliString:
    """In-place-style conjugation of p by one Clifford gate (returns p mutated)."""
    x, z, k = p.x, p.z, p.k
    if kind == "CNOT":
        a, b = qubits
        xa, za = (x >> a) & 1, (z >> a) & 1
        xb, zb = (x >> b) & 1, (z >> b) & 1
        if xa & zb & (xb ^ za ^ 1):
            k += 2
        if xa:
            x ^= 1 << b
        if zb:
            z ^= 1 << a
    elif kind == "CZ":
        a, b = qubits
        xa, za = (x >> a) & 1, (z >> a) & 1
        xb, zb = (x >> b) & 1, (z >> b) & 1
        if xa & xb & (za ^ zb):
            k += 2
        if xb:
            z ^= 1 << a
        if xa:
            z ^= 1 << b
    elif kind == "H":
        (q,) = qubits
        xq, zq = (x >> q) & 1, (z >> q) & 1
        if xq & zq:
            k += 2
        if xq != zq:
            x ^= 1 << q
            z ^= 1 << q
    elif kind == "S":
        (q,) = qubits
        xq, zq = (x >> q) & 1, (z >> q) & 1
        if xq & zq:
            k += 2
        if xq:
            z ^= 1 << q
    elif kind == "X":
        (q,) = qubits
        if (z >> q) & 1:
            k += 2
    elif kind == "Z":
        (q,) = qubits
        if (x >> q) & 1:
            k += 2
    elif kind == "SWAP":
        a, b = qubits
        for mask_name in ("x", "z"):
            m = x if mask_name == "x" else z
            ba, bb = (m >> a) & 1, (m >> b) & 1
            if ba != bb:
                m ^= (1 << a) | (1 << b)
            if mask_name == "x":
                x = m
            else:
                z = m
    elif kind == "FSWAP":
        p2 = _conj_gate(PauliString(p.n, x, z, k), "CZ", qubits)
        return _conj_gate(p2, "SWAP", qubits)
    else:
        raise GateClassError(f"{kind} is not Clifford")
    return PauliString(p.n, x, z, k % 4)


def conjugate_pauli(circuit: Circuit, p: PauliString, layout=None) -> PauliString:
    """Image C p C^dagger of p under conjugation by the circuit unitary C."""
    if layout is None:
        layout = snake_layout(circuit.grid)
    out = PauliString(p.n, p.x, p.z, p.k)
    for g in circuit.gates():
        if g.kind not in CLIFFORD:
            raise GateClassError(f"{g.kind} is not Clifford")
        out = _conj_gate(out, g.kind, tuple(layout[q] for q in g.qubits))
    return out


class CliffordTableau:
    """Generator images C X_q C^dg, C Z_q C^dg for bulk conjugation by a circuit."""

    def __init__(self, n: int):
        self.n = n
        self.ximg = [PauliString(n, x=1 << q) for q in range(n)]
        self.zimg = [PauliString(n, z=1 << q) for q in range(n)]

    @classmethod
    def from_circuit(cls, circuit: Circuit, layout=None) -> "CliffordTableau":
        if layout is None:
            layout = snake_layout(circuit.grid)
        n = circuit.grid.n_qubits
        tab = cls(n)
        gates = [(g.kind, tuple(layout[q] for q in g.qubits)) for g in circuit.gates()]
        # Process in reverse: after consuming the suffix S of the circuit, the
        # stored images are S gen S^dg; prepending gate h maps gen through
        # h gen h^dg first, then through the current images.
        for kind, qubits in reversed(gates):
            if kind not in CLIFFORD:
                raise GateClassError(f"{kind} is not Clifford")
            updates = []
            for q in qubits:
                bx = _conj_gate(PauliString(n, x=1 << q), kind, qubits)
                bz = _conj_gate(PauliString(n, z=1 << q), kind, qubits)
                updates.append((q, tab._apply(bx), tab._apply(bz)))
            for q, ix, iz in updates:
                tab.ximg[q] = ix
                tab.zimg[q] = iz
        return tab

    def _apply(self, p: PauliString) -> PauliString:
        acc = PauliString(self.n, k=(p.k + _popcount(p.x & p.z)) % 4)
        v = p.x | p.z
        while v:
            j = (v & -v).bit_length() - 1
            v &= v - 1
            if (p.x >> j) & 1:
                acc = acc * self.ximg[j]
            if (p.z >> j) & 1:
                acc = acc * self.zimg[j]
        return acc

    def conjugate(self, p: PauliString) -> PauliString:
        return self._apply(p)


def check_majorana_permutation(circuit: Circuit, pi: Permutation, L: int) -> list[bool]:
    """Whether C gamma_{2j+a} C^dg = gamma_{2 pi(j)+a} with sign +1 for all 2N Majoranas."""
    n = L * L
    tab = CliffordTableau.from_circuit(circuit)
    results = []
    for idx in range(2 * n):
        j, alpha = divmod(idx, 2)
        got = tab.conjugate(jw_majorana(idx, n))
        want = jw_majorana(2 * pi(j) + alpha, n)
        results.append(got == want)
    return results


# --- dense statevector simulation --------------------------------------------


def _u1(kind: str, param) -> np.ndarray:
    if kind == "Z":
        return np.diag([1, -1]).astype(complex)
    if kind == "X":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if kind == "H":
        return np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    if kind == "S":
        return np.diag([1, 1j])
    if kind == "RZ":
        return np.diag([np.exp(-1j * param / 2), np.exp(1j * param / 2)])
    if kind == "PHASE":
        return np.diag([1, np.exp(1j * param)])
    raise ValueError(kind)


def _u2(kind: str, param) -> np.ndarray:
    # basis order |ab| with the gate's first qubit as the high bit
    if kind == "CNOT":
        return np.array(
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
        )
    if kind == "CZ":
        return np.diag([1, 1, 1, -1]).astype(complex)
    if kind == "SWAP":
        return np.array(
            [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
        )
    if kind == "FSWAP":
        return np.array(
            [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, -1]], dtype=complex
        )
    if kind == "GIVENS":
        c, s = math.cos(param), math.sin(param)
        return np.array(
            [[1, 0, 0, 0], [0, c, -s, 0], [0, s, c, 0], [0, 0, 0, 1]], dtype=complex
        )
    raise ValueError(kind)


def statevector_simulate(circuit: Circuit, state: np.ndarray, layout=None) -> np.ndarray:
    """Dense evolution of an amplitude vector (full gate alphabet, n <= 20)."""
    n = circuit.grid.n_qubits
    if n > 20:
        raise ValueError(f"{n} qubits exceeds the dense simulation limit of 20")
    if state.shape != (1 << n,):
        raise ValueError("state dimension mismatch")
    if layout is None:
        layout = snake_layout(circuit.grid)
    psi = state.astype(complex).copy()
    for g in circuit.gates():
        qs = tuple(layout[q] for q in g.qubits)
        if len(qs) == 1:
            psi = _apply1(psi, _u1(g.kind, g.param), qs[0], n)
        else:
            psi = _apply2(psi, _u2(g.kind, g.param), qs[0], qs[1], n)
    return psi


def _apply1(psi, u, q, n):
    v = psi.reshape(1 << (n - 1 - q), 2, 1 << q)
    s0, s1 = v[:, 0, :].copy(), v[:, 1, :].copy()
    v[:, 0, :] = u[0, 0] * s0 + u[0, 1] * s1
    v[:, 1, :] = u[1, 0] * s0 + u[1, 1] * s1
    return psi


def _apply2(psi, u, a, b, n):
    # index (bit_a, bit_b) -> row 2*bit_a + bit_b of u
    hi, lo = max(a, b), min(a, b)
    v = psi.reshape(1 << (n - 1 - hi), 2, 1 << (hi - lo - 1), 2, 1 << lo)
    blocks = {}
    for ba in (0, 1):
        for bb in (0, 1):
            bh, bl = (ba, bb) if a == hi else (bb, ba)
            blocks[(ba, bb)] = v[:, bh, :, bl, :].copy()
    for ba in (0, 1):
        for bb in (0, 1):
            acc = sum(
                u[2 * ba + bb, 2 * ca + cb] * blocks[(ca, cb)]
                for ca in (0, 1)
                for cb in (0, 1)
            )
            bh, bl = (ba, bb) if a == hi else (bb, ba)
            v[:, bh, :, bl, :] = acc
    return psi


def circuit_unitary(circuit: Circuit, layout=None) -> np.ndarray:
    """Full 2^n x 2^n unitary (small n only)."""
    n = circuit.grid.n_qubits
    dim = 1 << n
    u = np.zeros((dim, dim), dtype=complex)
    for s in range(dim):
        e = np.zeros(dim, dtype=complex)
        e[s] = 1
        u[:, s] = statevector_simulate(circuit, e, layout)
    return u


def basis_index(bits_le: str) -> int:
    """Index of |s_0 s_1 ...> written low bit first."""
    return int(bits_le[::-1], 2)


# --- noise model --------------------------------------------------------------


@dataclass(frozen=True)
class NoiseParams:
    p2q: float
    shots: int = 10**6

    def __post_init__(self):
        if not 0 <= self.p2q < 1:
            raise ValueError("need 0 <= p2q < 1")

    @property
    def p_idle(self) -> float:
        return 0.1 * self.p2q


def estimate_fidelity(m: Metrics, p2q: float) -> float:
    """Multiplicative model (1-p2q)^G (1-p_idle)^I with p_idle = p2q / 10."""
    return (1.0 - p2q) ** m.gate_count * (1.0 - 0.1 * p2q) ** m.idle_slots


@dataclass(frozen=True)
class FrameSampleResult:
    success_probability: float
    standard_error: float
    shots: int


def pauli_frame_sample(
    circuit: Circuit, noise: NoiseParams, seed: int = 0, layout=None
) -> FrameSampleResult:
    """Monte Carlo success probability of the echo protocol under depolarizing noise.

    Protocol: run the CNOT-compiled circuit with two-qubit depolarizing noise
    at rate p2q after every entangling gate and single-qubit depolarizing
    noise at rate p_idle on every idle qubit of every entangling layer, then
    the noiseless inverse, then measure all qubits. Success = all-zeros
    outcome, i.e. the propagated frame has no X/Y component. Frames are
    conjugated by the inverse of the prefix unitary, so only injected errors
    are tracked and shots without errors are free.
    """
    if layout is None:
        layout = snake_layout(circuit.grid)
    n = circuit.grid.n_qubits

    # Walk compiled layers, maintaining images U^dg P U of the generators and
    # snapshotting the x-masks the sampler needs at each entangling layer.
    compiled = schedule_greedy(decomposed_gates(circuit), circuit.grid)
    ximg = [PauliString(n, x=1 << q) for q in range(n)]
    zimg = [PauliString(n, z=1 << q) for q in range(n)]

    gate_slots: list[tuple[int, int, int, int]] = []  # x-masks of Xa, Za, Xb, Zb images
    idle_slots: list[tuple[int, int]] = []  # (Ximg_x, Zimg_x) per idle qubit slot
    for layer in compiled.layers:
        entangling = [g for g in layer if len(g.qubits) == 2]
        # inverse-prefix update: images of h^dg gen h composed with current map
        for g in layer:
            if g.kind not in CLIFFORD:
                raise GateClassError(f"{g.kind} is not Clifford")
            qs = tuple(layout[q] for q in g.qubits)
            new_x = {}
            new_z = {}
            for q in qs:
                # h^dg X_q h and h^dg Z_q h; every alphabet gate has h^dg = h
                # up to S, whose x/z action matches S^dg for mask purposes.
                bx = _conj_gate(PauliString(n, x=1 << q), g.kind, qs)
                bz = _conj_gate(PauliString(n, z=1 << q), g.kind, qs)
                new_x[q] = _frame_compose(bx, ximg, zimg, n)
                new_z[q] = _frame_compose(bz, ximg, zimg, n)
            for q in qs:
                ximg[q] = new_x[q]
                zimg[q] = new_z[q]
        if entangling:
            active = set()
            for g in entangling:
                a, b = (layout[q] for q in g.qubits)
                active.update((a, b))
                gate_slots.append((ximg[a].x, zimg[a].x, ximg[b].x, zimg[b].x))
            for q in range(n):
                if q not in active:
                    idle_slots.append((ximg[q].x, zimg[q].x))

    G, I = len(gate_slots), len(idle_slots)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed))
    shots = noise.shots
    if noise.p2q == 0:
        return FrameSampleResult(1.0, 0.0, shots)

    n2 = rng.binomial(G, noise.p2q, size=shots)
    ni = rng.binomial(I, noise.p_idle, size=shots) if I else np.zeros(shots, dtype=int)
    successes = 0
    for shot in range(shots):
        k2, ki = int(n2[shot]), int(ni[shot])
        if k2 == 0 and ki == 0:
            successes += 1
            continue
        frame_x = 0
        if k2:
            slots = rng.choice(G, size=k2, replace=False)
            kinds = rng.integers(1, 16, size=k2)
            for slot, pk in zip(slots, kinds):
                xa, za, xb, zb = int(pk) & 1, (int(pk) >> 1) & 1, (int(pk) >> 2) & 1, (int(pk) >> 3) & 1
                mx_a, mz_a, mx_b, mz_b = gate_slots[int(slot)]
                if xa:
                    frame_x ^= mx_a
                if za:
                    frame_x ^= mz_a
                if xb:
                    frame_x ^= mx_b
                if zb:
                    frame_x ^= mz_b
        if ki:
            slots = rng.choice(I, size=ki, replace=False)
            kinds = rng.integers(1, 4, size=ki)
            for slot, pk in zip(slots, kinds):
                mx, mz = idle_slots[int(slot)]
                if int(pk) & 1:
                    frame_x ^= mx
                if int(pk) >> 1:
                    frame_x ^= mz
        if frame_x == 0:
            successes += 1
    p_hat = successes / shots
    se = math.sqrt(max(p_hat * (1 - p_hat), 1e-300) / shots)
    return FrameSampleResult(p_hat, se, shots)


def _frame_compose(p: PauliString, ximg, zimg, n) -> PauliString:
    acc = PauliString(n, k=(p.k + _popcount(p.x & p.z)) % 4)
    v = p.x | p.z
    while v:
        j = (v & -v).bit_length() - 1
        v &= v - 1
        if (p.x >> j) & 1:
            acc = acc * ximg[j]
        if (p.z >> j) & 1:
            acc = acc * zimg[j]
    return acc
