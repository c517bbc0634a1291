"""Exact embedding of all-to-all circuits into an (n+1) x n lattice.

Qubit q of the source circuit lives at (0, q).  Rows 1..n are ancilla held
in |1>.  Every CZ layer becomes seven lattice layers: the support of the
i-th gate is swapped down column-wise into row i (three layers), the gate
runs as one contiguous row CZ whose bystanders are |1> (one layer), and the
swap is undone (three layers).  A CNOT between rows of one column is a
single column Toffoli controlled through the |1> qubits in between.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import (
    Circuit,
    CircuitBuilder,
    CircuitError,
    GeneralizedToffoli,
    Layer,
    Layout,
    ensure_valid,
    toffoli_to_layers,
)

LAYERS_PER_CZ_LAYER = 7


@dataclass(frozen=True)
class RowAssignment:
    """Ancilla row used for each CZ gate of one layer (gates in sorted order)."""

    supports: tuple[tuple[int, ...], ...]
    rows: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(set(self.rows)) != len(self.rows):
            raise CircuitError("row assignment must be injective")
        if any(r < 1 for r in self.rows):
            raise CircuitError("gates run in ancilla rows >= 1")

    def row_of(self, support: tuple[int, ...]) -> int:
        return self.rows[self.supports.index(support)]


def assign_rows(layer: Layer, n: int) -> RowAssignment:
    if len(layer.czs) > n:
        raise CircuitError(f"layer has {len(layer.czs)} gates but only {n} ancilla rows")
    sups = sorted((g.support for g in layer.czs), key=lambda s: (s[0], s))
    return RowAssignment(tuple(sups), tuple(range(1, len(sups) + 1)))


def _lattice(n: int) -> Layout:
    return Layout.lattice(n + 1, n)


def _column_cnot(layout: Layout, col: int, from_row: int, to_row: int) -> GeneralizedToffoli:
    if from_row == to_row:
        raise CircuitError("gadget rows must differ")
    lo, hi = sorted((from_row, to_row))
    controls = [layout.qid(r, col) for r in range(lo, hi + 1) if r != to_row]
    return GeneralizedToffoli.of(controls, layout.qid(to_row, col))


def long_range_cnot_gadget(col: int, from_row: int, to_row: int, *, layout: Layout) -> tuple[Layer, Layer]:
    """CNOT(from -> to) within one column, valid when every qubit strictly
    between the two rows is |1>: a Toffoli controlled on the source and all
    intermediates.  Returned as the (H.CZ, H) layer pair."""
    if layout.kind != "lattice":
        raise CircuitError("gadget needs a lattice layout")
    return toffoli_to_layers(_column_cnot(layout, col, from_row, to_row))


def _emit_swaps(b: CircuitBuilder, lay: Layout, moves: list[tuple[int, int]]) -> None:
    """Swap (0, col) with (row, col) for every (col, row) in three layers."""
    for down in (True, False, True):
        tofs = []
        for col, row in moves:
            g = _column_cnot(lay, col, 0, row) if down else _column_cnot(lay, col, row, 0)
            tofs.append((g.controls, g.target))
        b.layer(toffolis=tofs)


def _emit_layer(b: CircuitBuilder, layer: Layer, n: int) -> None:
    lay = b.layout
    for g in layer.singles:
        b.single(lay.qid(0, g.target), g.matrix)
    if not layer.czs:
        return
    ra = assign_rows(layer, n)
    moves = [(q, row) for sup, row in zip(ra.supports, ra.rows) for q in sup]
    _emit_swaps(b, lay, moves)
    b.layer(czs=[[lay.qid(row, c) for c in range(sup[0], sup[-1] + 1)] for sup, row in zip(ra.supports, ra.rows)])
    _emit_swaps(b, lay, moves)


def embed_layer_2d(layer: Layer, n: int) -> Circuit:
    """Seven-layer lattice fragment equal to ``layer`` on row 0 (0 layers if it has no CZ)."""
    for g in layer.czs:
        if any(not 0 <= q < n for q in g.support):
            raise CircuitError("gate support outside the n source qubits")
    b = CircuitBuilder(_lattice(n), inputs=range(n), ancilla=[(q, "one") for q in range(n, n * (n + 1))])
    _emit_layer(b, layer, n)
    return b.build()


def embed_circuit_2d(c: Circuit) -> Circuit:
    """Lattice circuit of depth 7 * depth(c) acting as ``c`` on row 0."""
    ensure_valid(c)
    if c.layout.kind != "all_to_all":
        raise CircuitError(f"expected all_to_all layout, got {c.layout.kind}")
    n = c.layout.n
    inits = c.ancilla_init()
    b = CircuitBuilder(
        _lattice(n),
        inputs=c.inputs,
        ancilla=[(q, "one" if v else "zero") for q, v in sorted(inits.items())]
        + [(q, "one") for q in range(n, n * (n + 1))],
    )
    for layer in c.layers:
        _emit_layer(b, layer, n)
    return b.build()


def ancilla_qubits(compiled: Circuit) -> list[int]:
    """The n*n qubits of rows 1..n."""
    n = compiled.layout.n
    return list(range(n, n * (n + 1)))


@dataclass(frozen=True)
class EmbeddingCheck:
    min_fidelity: float
    max_ancilla_leak: float
    trials: int
    seed: int | None


def verify_embedding(source: Circuit, compiled: Circuit, *, trials: int = 10, seed: int | None = None) -> EmbeddingCheck:
    """Compare the compiled circuit with the source unitary on random row-0 states.

    Fidelity is taken against (U psi) tensor |1...1>, so it also certifies
    that every ancilla returns to |1>.  The lattice state stays a short sum
    of basis states, so the sparse engine is used.
    """
    from .metrics import sparse_overlap
    from .simulator import SparseState, StateVector, circuit_unitary, evolve_sparse

    n = source.layout.n
    N = compiled.num_qubits
    row0 = list(range(n))
    rest = [0] * n + [1] * (N - n)
    U = circuit_unitary(source)
    rng = np.random.default_rng(seed)
    worst, leak = 1.0, 0.0
    for _ in range(trials):
        psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        psi /= np.linalg.norm(psi)
        start = SparseState.from_product(StateVector.from_amps(psi), row0, rest)
        out = evolve_sparse(compiled, start, validate=False)
        want = SparseState.from_product(StateVector.from_amps(U @ psi), row0, rest)
        worst = min(worst, float(abs(sparse_overlap(want, out)) ** 2))
        mask = (1 << (N - n)) - 1
        kept = sum(abs(a) ** 2 for k, a in out.terms.items() if k & mask == mask)
        leak = max(leak, float(1.0 - kept))
    return EmbeddingCheck(worst, leak, trials, seed)
