"""Gate-level IR for grid-local circuits: greedy layering, CNOT compilation, metrics.

Cells are (row, column) pairs on a rectangular grid. Two-qubit gates must act
on edge-adjacent cells. Single-qubit gates are free: they occupy scheduling
slots but only layers containing a two-qubit gate count toward depth.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple

TWO_QUBIT_KINDS = frozenset({"CNOT", "CZ", "FSWAP", "SWAP", "GIVENS"})
ONE_QUBIT_KINDS = frozenset({"Z", "X", "H", "S", "RZ", "PHASE"})
GATE_KINDS = TWO_QUBIT_KINDS | ONE_QUBIT_KINDS
PARAM_KINDS = frozenset({"RZ", "PHASE", "GIVENS"})

Cell = tuple[int, int]


class Gate(NamedTuple):
    kind: str
    qubits: tuple[Cell, ...]
    param: float | None = None

    def validate(self) -> None:
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        want = 2 if self.kind in TWO_QUBIT_KINDS else 1
        if len(self.qubits) != want:
            raise ValueError(f"{self.kind} expects {want} qubit(s), got {self.qubits}")
        if self.kind in PARAM_KINDS:
            if self.param is None or not math.isfinite(self.param):
                raise ValueError(f"{self.kind} needs a finite angle")
        elif self.param is not None:
            raise ValueError(f"{self.kind} takes no angle")
        if want == 2:
            (r0, c0), (r1, c1) = self.qubits
            if abs(r0 - r1) + abs(c0 - c1) != 1:
                raise ValueError(f"{self.kind} on non-adjacent cells {self.qubits}")


def gate(kind: str, *qubits: Cell, param: float | None = None) -> Gate:
    g = Gate(kind, tuple(qubits), param)
    g.validate()
    return g


@dataclass(frozen=True)
class Grid:
    """Rectangle of qubits; an L x L data block optionally padded with ancilla columns."""

    rows: int
    cols: int

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid must be nonempty")

    @classmethod
    def square(cls, L: int, extra_ancilla_columns: int = 0) -> "Grid":
        return cls(L, L + extra_ancilla_columns)

    @property
    def n_qubits(self) -> int:
        return self.rows * self.cols

    def contains(self, cell: Cell) -> bool:
        r, c = cell
        return 0 <= r < self.rows and 0 <= c < self.cols

    def cells(self) -> Iterator[Cell]:
        for r in range(self.rows):
            for c in range(self.cols):
                yield (r, c)


@dataclass
class Circuit:
    """Ordered layers of gates; within a layer all gates touch disjoint qubits."""

    grid: Grid
    layers: list[list[Gate]] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for layer in self.layers:
            self._check_layer(layer)

    def _check_layer(self, layer: list[Gate]) -> None:
        seen: set[Cell] = set()
        for g in layer:
            g.validate()
            for q in g.qubits:
                if not self.grid.contains(q):
                    raise ValueError(f"qubit {q} outside grid {self.grid}")
                if q in seen:
                    raise ValueError(f"qubit {q} used twice in one layer")
                seen.add(q)

    def gates(self) -> Iterator[Gate]:
        for layer in self.layers:
            yield from layer

    @property
    def n_gates(self) -> int:
        return sum(len(layer) for layer in self.layers)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.grid != self.grid:
            raise ValueError("grid mismatch")
        return Circuit(
            self.grid,
            [list(l) for l in self.layers] + [list(l) for l in other.layers],
        )

    def inverse(self) -> "Circuit":
        """Reversed circuit with every gate inverted (alphabet is closed under inverse)."""
        flat: list[Gate] = []
        for layer in reversed(self.layers):
            for g in layer:
                if g.kind in PARAM_KINDS:
                    flat.append(Gate(g.kind, g.qubits, -g.param))
                elif g.kind == "S":
                    flat.append(Gate("Z", g.qubits))
                    flat.append(Gate("S", g.qubits))
                else:
                    flat.append(g)  # self-inverse
        return schedule_greedy(flat, self.grid)


def schedule_greedy(gates: Iterable[Gate], grid: Grid) -> Circuit:
    """As-soon-as-possible layering of a dependency-ordered gate list.

    Two-qubit gates are packed into entangling layers: each lands in the
    earliest layer where both its qubits are free, respecting per-qubit
    program order. Single-qubit gates are free: they ride in singles-only
    sub-layers between the entangling layers they separate, never advancing
    the entangling clock. Deterministic in the input order.
    """
    eclock: dict[Cell, int] = {}
    elayers: list[list[Gate]] = []
    # region k holds singles that execute after entangling layer k-1 and
    # before entangling layer k; each region is a list of disjoint sub-layers
    regions: dict[int, list[list[Gate]]] = {}
    region_busy: dict[int, list[set[Cell]]] = {}

    for g in gates:
        if len(g.qubits) == 2:
            layer = max(eclock.get(g.qubits[0], 0), eclock.get(g.qubits[1], 0))
            while len(elayers) <= layer:
                elayers.append([])
            elayers[layer].append(g)
            for q in g.qubits:
                eclock[q] = layer + 1
        else:
            (q,) = g.qubits
            k = eclock.get(q, 0)
            subs = regions.setdefault(k, [])
            busy = region_busy.setdefault(k, [])
            for i, cells in enumerate(busy):
                if q not in cells:
                    subs[i].append(g)
                    cells.add(q)
                    break
            else:
                subs.append([g])
                busy.append({q})

    layers: list[list[Gate]] = []
    for k in range(len(elayers) + 1):
        layers.extend(regions.get(k, ()))
        if k < len(elayers):
            layers.append(elayers[k])
    # drop empty entangling layers that can appear at the tail
    return Circuit(grid, [l for l in layers if l])


# --- CNOT compilation -------------------------------------------------------


def _sdg(q: Cell) -> list[Gate]:
    return [Gate("Z", (q,)), Gate("S", (q,))]


def _ry(q: Cell, angle: float) -> list[Gate]:
    # Ry(t) = S H RZ(t) H Sdg, time-ordered left to right below
    return [*_sdg(q), Gate("H", (q,)), Gate("RZ", (q,), angle), Gate("H", (q,)), Gate("S", (q,))]


def _decompose_gate(g: Gate) -> list[Gate]:
    """Expand one gate into CNOTs and single-qubit gates (exact unitary, no global phase)."""
    if g.kind == "CNOT" or g.kind in ONE_QUBIT_KINDS:
        return [g]
    a, b = g.qubits
    if g.kind == "CZ":
        return [Gate("H", (b,)), Gate("CNOT", (a, b)), Gate("H", (b,))]
    if g.kind == "SWAP":
        return [Gate("CNOT", (a, b)), Gate("CNOT", (b, a)), Gate("CNOT", (a, b))]
    if g.kind == "FSWAP":
        # FSWAP = (H x I) CNOT(a->b) CNOT(b->a) (I x H); two CNOT layers
        return [
            Gate("H", (b,)),
            Gate("CNOT", (b, a)),
            Gate("CNOT", (a, b)),
            Gate("H", (a,)),
        ]
    if g.kind == "GIVENS":
        # Rotation by t in the single-occupation block:
        #   |01> -> cos t |01> + sin t |10>,  |10> -> -sin t |01> + cos t |10>.
        # Canonical class (t/2, t/2, 0), hence exactly two CNOTs: conjugate
        # CX (Ry(t) x Ry(t)) CX so that Y0X1 -> X0X1 and Z0Y1 -> Y0Y1, then
        # rotate the i-phases away with S on the second qubit.
        t = g.param
        seq: list[Gate] = [Gate("S", (b,))]
        seq.extend(_sdg(a))
        seq.append(Gate("H", (a,)))
        seq.append(Gate("CNOT", (a, b)))
        seq.extend(_ry(a, t))
        seq.extend(_ry(b, t))
        seq.append(Gate("CNOT", (a, b)))
        seq.append(Gate("H", (a,)))
        seq.append(Gate("S", (a,)))
        seq.extend(_sdg(b))
        return seq
    raise ValueError(f"unknown gate kind {g.kind!r}")


def decomposed_gates(circuit: Circuit) -> Iterator[Gate]:
    for g in circuit.gates():
        yield from _decompose_gate(g)


def decompose_to_cnot(circuit: Circuit) -> Circuit:
    """Compile to the {CNOT + single-qubit} alphabet and re-layer greedily."""
    return schedule_greedy(decomposed_gates(circuit), circuit.grid)


# --- Metrics ----------------------------------------------------------------


@dataclass(frozen=True)
class Metrics:
    cnot_depth: int
    gate_count: int  # two-qubit gates after CNOT compilation
    idle_slots: int  # idle qubit incidences over entangling layers
    qubits: int

    @property
    def spacetime(self) -> int:
        return self.qubits * self.cnot_depth


def metrics(circuit: Circuit) -> Metrics:
    """Resource metrics of the CNOT-compiled circuit.

    Streams the compiled gates through an incremental scheduler, so large
    circuits are never materialized in compiled form.
    """
    return metrics_from_gates(decomposed_gates(circuit), circuit.grid)


def metrics_from_gates(gates: Iterable[Gate], grid: Grid) -> Metrics:
    """Streamed metrics under the same two-track schedule as schedule_greedy.

    Idle slots count, per entangling layer, the qubits not acted on by any
    two-qubit gate of that layer (single-qubit gates are instantaneous).
    """
    eclock: dict[Cell, int] = {}
    active_per_layer: dict[int, int] = {}
    g2 = 0
    for g in gates:
        if len(g.qubits) != 2:
            continue
        layer = max(eclock.get(g.qubits[0], 0), eclock.get(g.qubits[1], 0))
        for q in g.qubits:
            eclock[q] = layer + 1
        active_per_layer[layer] = active_per_layer.get(layer, 0) + 2
        g2 += 1
    q = grid.n_qubits
    depth = len(active_per_layer)
    idle = sum(q - a for a in active_per_layer.values())
    return Metrics(cnot_depth=depth, gate_count=g2, idle_slots=idle, qubits=q)


def entangling_depth(circuit: Circuit) -> int:
    """Layer count of the circuit as-is, over layers holding a 2-qubit gate."""
    return sum(1 for layer in circuit.layers if any(len(g.qubits) == 2 for g in layer))


# --- JSON persistence -------------------------------------------------------

SCHEMA_VERSION = 1


def circuit_to_json(circuit: Circuit, manifest: dict | None = None) -> str:
    if circuit.grid.cols < circuit.grid.rows:
        raise ValueError("JSON schema covers square grids with optional ancilla columns")
    obj = {
        "version": SCHEMA_VERSION,
        "L": circuit.grid.rows,
        "extra_ancilla_columns": circuit.grid.cols - circuit.grid.rows,
        "layers": [[_gate_to_obj(g) for g in layer] for layer in circuit.layers],
    }
    if manifest is not None:
        obj["manifest"] = manifest
    return json.dumps(obj)


def _gate_to_obj(g: Gate) -> dict:
    o = {"g": g.kind, "q": [[r, c] for (r, c) in g.qubits]}
    if g.param is not None:
        o["theta"] = float(g.param)
    return o


def circuit_from_json(text: str) -> Circuit:
    obj = json.loads(text)
    if obj.get("version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported circuit schema version {obj.get('version')}")
    grid = Grid.square(obj["L"], obj.get("extra_ancilla_columns", 0))
    layers = []
    for layer in obj["layers"]:
        layers.append(
            [Gate(o["g"], tuple((r, c) for r, c in o["q"]), o.get("theta")) for o in layer]
        )
    meta = {"manifest": obj["manifest"]} if "manifest" in obj else {}
    return Circuit(grid, layers, metadata=meta)
