"""Circuit intermediate representation.

A circuit is a sequence of layers.  Each layer applies single-qubit unitaries
first and then a set of multi-qubit CZ gates with pairwise disjoint supports.
The depth of a circuit is the number of layers that contain at least one CZ.

Qubits are integers.  On a lattice with ``rows`` rows and ``n`` columns the
qubit at (row, col) has id ``row * n + col`` (zero based, row major).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from . import gates

UNITARY_TOL = 1e-10

KINDS = ("all_to_all", "line", "lattice")
INITS = ("zero", "one")


class CircuitError(ValueError):
    """Raised for malformed circuits or invalid circuit operations."""


@dataclass(frozen=True)
class Layout:
    kind: str
    n: int
    rows: int = 1

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise CircuitError(f"unknown layout kind {self.kind!r}")
        if self.n < 1 or self.rows < 1:
            raise CircuitError("layout dimensions must be >= 1")
        if self.kind != "lattice" and self.rows != 1:
            raise CircuitError(f"{self.kind} layout has a single row")

    @classmethod
    def all_to_all(cls, n: int) -> Layout:
        return cls("all_to_all", n)

    @classmethod
    def line(cls, n: int) -> Layout:
        return cls("line", n)

    @classmethod
    def lattice(cls, rows: int, cols: int) -> Layout:
        return cls("lattice", cols, rows)

    @property
    def cols(self) -> int:
        return self.n

    @property
    def num_qubits(self) -> int:
        return self.n * self.rows

    def qid(self, row: int, col: int) -> int:
        if not (0 <= row < self.rows and 0 <= col < self.n):
            raise CircuitError(f"coordinate ({row}, {col}) outside layout")
        return row * self.n + col

    def coord(self, q: int) -> tuple[int, int]:
        if not 0 <= q < self.num_qubits:
            raise CircuitError(f"qubit {q} outside layout")
        return divmod(q, self.n)

    def locality_violation(self, support: Sequence[int]) -> str | None:
        """Return a description of why ``support`` is not local, or None."""
        qs = sorted(support)
        if self.kind == "all_to_all" or len(qs) <= 1:
            return None
        if self.kind == "line":
            if qs[-1] - qs[0] != len(qs) - 1:
                return "non-contiguous support on line"
            return None
        coords = [self.coord(q) for q in qs]
        rws = {r for r, _ in coords}
        cls_ = {c for _, c in coords}
        if len(rws) == 1:
            cs = sorted(c for _, c in coords)
            if cs[-1] - cs[0] != len(cs) - 1:
                return "non-contiguous support within row"
            return None
        if len(cls_) == 1:
            rs = sorted(r for r, _ in coords)
            if rs[-1] - rs[0] != len(rs) - 1:
                return "non-contiguous support within column"
            return None
        return "support spans neither a single row nor a single column"


def _as_matrix_tuple(m) -> tuple[complex, complex, complex, complex]:
    a = np.asarray(m, dtype=complex)
    if a.shape != (2, 2):
        raise CircuitError(f"single-qubit matrix must be 2x2, got shape {a.shape}")
    return tuple(complex(v) for v in a.reshape(-1))  # type: ignore[return-value]


@dataclass(frozen=True)
class SingleQubitGate:
    target: int
    u: tuple[complex, complex, complex, complex]

    @classmethod
    def of(cls, target: int, matrix) -> SingleQubitGate:
        return cls(int(target), _as_matrix_tuple(matrix))

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.u, dtype=complex).reshape(2, 2)

    def unitarity_error(self) -> float:
        m = self.matrix
        return float(np.max(np.abs(m.conj().T @ m - gates.I2)))

    def dagger(self) -> SingleQubitGate:
        return SingleQubitGate.of(self.target, self.matrix.conj().T)


@dataclass(frozen=True)
class MultiCZGate:
    support: tuple[int, ...]

    @classmethod
    def of(cls, qubits: Iterable[int]) -> MultiCZGate:
        return cls(tuple(sorted(int(q) for q in qubits)))


@dataclass(frozen=True)
class GeneralizedToffoli:
    controls: tuple[int, ...]
    target: int

    @classmethod
    def of(cls, controls: Iterable[int], target: int) -> GeneralizedToffoli:
        cs = tuple(sorted(int(q) for q in controls))
        if int(target) in cs:
            raise CircuitError("Toffoli target must not be a control")
        return cls(cs, int(target))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(sorted(self.controls + (self.target,)))


@dataclass(frozen=True)
class Layer:
    singles: tuple[SingleQubitGate, ...] = ()
    czs: tuple[MultiCZGate, ...] = ()

    @property
    def has_cz(self) -> bool:
        return len(self.czs) > 0

    def is_empty(self) -> bool:
        return not self.singles and not self.czs


@dataclass(frozen=True)
class Circuit:
    layout: Layout
    inputs: tuple[int, ...] = ()
    ancilla: tuple[tuple[int, str], ...] = ()
    layers: tuple[Layer, ...] = ()

    @property
    def num_qubits(self) -> int:
        return self.layout.num_qubits

    @property
    def depth(self) -> int:
        return sum(1 for layer in self.layers if layer.has_cz)

    def ancilla_init(self) -> dict[int, int]:
        """Initial bit of every non-input qubit (unlisted qubits default to zero)."""
        listed = {q: (1 if init == "one" else 0) for q, init in self.ancilla}
        ins = set(self.inputs)
        return {q: listed.get(q, 0) for q in range(self.num_qubits) if q not in ins}

    def initial_bits(self, input_bits: Sequence[int] | str | None = None) -> list[int]:
        """Full computational-basis initial state for the given input bits."""
        xs = _parse_bits(input_bits, len(self.inputs))
        bits = [0] * self.num_qubits
        for q, b in self.ancilla_init().items():
            bits[q] = b
        for q, b in zip(self.inputs, xs):
            bits[q] = b
        return bits

    def cz_count(self) -> int:
        return sum(len(layer.czs) for layer in self.layers)

    def cz_layers(self) -> list[int]:
        """Indices into ``layers`` of the layers that contain CZ gates."""
        return [i for i, layer in enumerate(self.layers) if layer.has_cz]

    def with_layers(self, layers: Iterable[Layer]) -> Circuit:
        return replace(self, layers=tuple(layers))


def _parse_bits(bits: Sequence[int] | str | None, length: int) -> list[int]:
    if bits is None:
        return [0] * length
    if isinstance(bits, str):
        out = [int(ch) for ch in bits if ch in "01"]
    else:
        out = [int(b) for b in bits]
    if len(out) != length:
        raise CircuitError(f"expected {length} input bits, got {len(out)}")
    if any(b not in (0, 1) for b in out):
        raise CircuitError("input bits must be 0 or 1")
    return out


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    message: str
    layer: int | None = None
    gate: object = None

    def __str__(self) -> str:
        where = "" if self.layer is None else f"layer {self.layer}: "
        return f"{where}{self.message}" + ("" if self.gate is None else f" ({self.gate})")


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def messages(self) -> list[str]:
        return [str(v) for v in self.violations]


def validate(c: Circuit) -> ValidationReport:
    """Check every structural invariant; violations are collected, never raised."""
    rep = ValidationReport()
    nq = c.num_qubits
    add = rep.violations.append

    seen: set[int] = set()
    for q in c.inputs:
        if not 0 <= q < nq:
            add(Violation(f"input qubit {q} out of range"))
        if q in seen:
            add(Violation(f"input qubit {q} listed twice"))
        seen.add(q)
    anc_seen: set[int] = set()
    for q, init in c.ancilla:
        if not 0 <= q < nq:
            add(Violation(f"ancilla qubit {q} out of range"))
        if init not in INITS:
            add(Violation(f"ancilla qubit {q} has invalid init {init!r}"))
        if q in seen:
            add(Violation(f"qubit {q} is both input and ancilla"))
        if q in anc_seen:
            add(Violation(f"ancilla qubit {q} listed twice"))
        anc_seen.add(q)

    for li, layer in enumerate(c.layers):
        targets: set[int] = set()
        for g in layer.singles:
            if not 0 <= g.target < nq:
                add(Violation(f"single-qubit target {g.target} out of range", li, g))
            if g.target in targets:
                add(Violation(f"two single-qubit gates on qubit {g.target}", li, g))
            targets.add(g.target)
            if not np.all(np.isfinite(g.matrix)) or g.unitarity_error() > UNITARY_TOL:
                add(Violation("single-qubit matrix is not unitary", li, g))
        used: set[int] = set()
        for g in layer.czs:
            sup = g.support
            if not sup:
                add(Violation("empty CZ support", li, g))
                continue
            if len(set(sup)) != len(sup):
                add(Violation("repeated qubit in CZ support", li, g))
            if any(not 0 <= q < nq for q in sup):
                add(Violation("CZ support out of range", li, g))
                continue
            if used.intersection(sup):
                add(Violation("overlapping CZ supports in one layer", li, g))
            used.update(sup)
            why = c.layout.locality_violation(sup)
            if why:
                add(Violation(why, li, g))
    return rep


def ensure_valid(c: Circuit) -> Circuit:
    rep = validate(c)
    if not rep.ok:
        raise CircuitError("invalid circuit: " + "; ".join(rep.messages()[:5]))
    return c


# ---------------------------------------------------------------------------
# gate conversions


def toffoli_to_layers(g: GeneralizedToffoli) -> tuple[Layer, Layer]:
    """H on the target, CZ on controls and target, H on the target."""
    h = SingleQubitGate.of(g.target, gates.H)
    return (Layer((h,), (MultiCZGate.of(g.support),)), Layer((h,), ()))


def cz_to_toffoli(g: MultiCZGate) -> tuple[SingleQubitGate, GeneralizedToffoli, SingleQubitGate]:
    """CZ(S) = H_t Toffoli(S - t -> t) H_t with t the last support element."""
    if not g.support:
        raise CircuitError("empty CZ support")
    t = g.support[-1]
    h = SingleQubitGate.of(t, gates.H)
    return (h, GeneralizedToffoli.of(g.support[:-1], t), h)


def toffoli_convert(g: GeneralizedToffoli | MultiCZGate):
    if isinstance(g, GeneralizedToffoli):
        return toffoli_to_layers(g)
    if isinstance(g, MultiCZGate):
        return cz_to_toffoli(g)
    raise TypeError(f"cannot convert {type(g).__name__}")


# ---------------------------------------------------------------------------
# structural operations


def compose(a: Circuit, b: Circuit) -> Circuit:
    """Run ``a`` then ``b``.  The result keeps ``a``'s input/ancilla declaration."""
    if a.layout != b.layout:
        raise CircuitError(f"layout mismatch: {a.layout} vs {b.layout}")
    return replace(a, layers=a.layers + b.layers)


def inverse(c: Circuit) -> Circuit:
    out: list[Layer] = []
    for layer in reversed(c.layers):
        if layer.czs:
            out.append(Layer((), layer.czs))
        if layer.singles:
            out.append(Layer(tuple(g.dagger() for g in layer.singles), ()))
    return normalize(replace(c, layers=tuple(out)))


def _merge_singles(first: Sequence[SingleQubitGate], then: Sequence[SingleQubitGate]) -> tuple[SingleQubitGate, ...]:
    acc: dict[int, np.ndarray | SingleQubitGate] = {g.target: g for g in first}
    for g in then:
        prev = acc.get(g.target)
        if prev is None:
            acc[g.target] = g
        else:
            pm = prev.matrix if isinstance(prev, SingleQubitGate) else prev
            acc[g.target] = SingleQubitGate.of(g.target, g.matrix @ pm)
    return tuple(acc[q] for q in sorted(acc))  # type: ignore[misc]


def normalize(c: Circuit) -> Circuit:
    """Drop empty layers and fold singles-only layers into the following layer."""
    out: list[Layer] = []
    pending: tuple[SingleQubitGate, ...] = ()
    for layer in c.layers:
        if layer.is_empty():
            continue
        if not layer.czs:
            pending = _merge_singles(pending, layer.singles)
            continue
        singles = _merge_singles(pending, layer.singles) if pending else layer.singles
        out.append(Layer(singles, layer.czs))
        pending = ()
    if pending:
        out.append(Layer(pending, ()))
    return replace(c, layers=tuple(out))


def relabel(c: Circuit, layout: Layout, mapping: dict[int, int] | Sequence[int]) -> Circuit:
    """Move every qubit ``q`` of ``c`` to ``mapping[q]`` on a new layout."""
    m = (lambda q: mapping[q]) if isinstance(mapping, dict) else (lambda q: mapping[q])
    layers = tuple(
        Layer(
            tuple(SingleQubitGate(m(g.target), g.u) for g in layer.singles),
            tuple(MultiCZGate.of(m(q) for q in g.support) for g in layer.czs),
        )
        for layer in c.layers
    )
    return Circuit(
        layout,
        tuple(m(q) for q in c.inputs),
        tuple((m(q), init) for q, init in c.ancilla),
        layers,
    )


def erase(c: Circuit, layer: int, gate: MultiCZGate) -> Circuit:
    """Remove one CZ gate (replace it by identity)."""
    if not 0 <= layer < len(c.layers) or gate not in c.layers[layer].czs:
        raise CircuitError(f"gate {gate.support} not found in layer {layer}")
    L = c.layers[layer]
    new = Layer(L.singles, tuple(g for g in L.czs if g != gate))
    return c.with_layers(c.layers[:layer] + (new,) + c.layers[layer + 1:])


# ---------------------------------------------------------------------------
# builder


class CircuitBuilder:
    """Accumulates gates into layers.

    Single-qubit gates are buffered per qubit and multiplied together, so an
    H that closes one Toffoli and an H that opens the next cancel exactly.
    Each call to :meth:`layer` closes one CZ layer.
    """

    def __init__(self, layout: Layout, inputs: Sequence[int] = (), ancilla: Sequence[tuple[int, str]] = ()):
        self.layout = layout
        self.inputs = tuple(inputs)
        self.ancilla = tuple(ancilla)
        self._layers: list[Layer] = []
        self._pending: dict[int, np.ndarray] = {}

    def single(self, q: int, m) -> CircuitBuilder:
        m = np.asarray(m, dtype=complex)
        prev = self._pending.get(q)
        self._pending[q] = m if prev is None else m @ prev
        return self

    def x(self, q: int) -> CircuitBuilder:
        return self.single(q, gates.X)

    def h(self, q: int) -> CircuitBuilder:
        return self.single(q, gates.H)

    def _flush(self) -> tuple[SingleQubitGate, ...]:
        out = []
        for q in sorted(self._pending):
            m = self._pending[q]
            if not gates.is_identity(m):
                out.append(SingleQubitGate.of(q, m))
        self._pending = {}
        return tuple(out)

    def layer(
        self,
        czs: Iterable[Iterable[int]] = (),
        toffolis: Iterable[tuple[Iterable[int], int]] = (),
        negated: Iterable[int] = (),
    ) -> CircuitBuilder:
        """Emit one CZ layer.

        ``toffolis`` are (controls, target) pairs lowered to H-CZ-H.  Qubits in
        ``negated`` are wrapped in X before and after, turning them into
        controls on |0>.
        """
        neg = list(negated)
        for q in neg:
            self.x(q)
        supports = [tuple(s) for s in czs]
        targets = []
        for ctrls, t in toffolis:
            g = GeneralizedToffoli.of(ctrls, t)
            supports.append(g.support)
            targets.append(g.target)
        for t in targets:
            self.h(t)
        singles = self._flush()
        self._layers.append(Layer(singles, tuple(MultiCZGate.of(s) for s in supports if s)))
        for t in targets:
            self.h(t)
        for q in neg:
            self.x(q)
        return self

    def cnots(self, pairs: Iterable[tuple[int, int]]) -> CircuitBuilder:
        return self.layer(toffolis=[((c,), t) for c, t in pairs])

    def extend(self, layers: Iterable[Layer]) -> CircuitBuilder:
        """Append existing layers verbatim (pending singles are applied first)."""
        for layer in layers:
            for g in layer.singles:
                self.single(g.target, g.matrix)
            if layer.czs:
                singles = self._flush()
                self._layers.append(Layer(singles, layer.czs))
        return self

    def build(self) -> Circuit:
        tail = self._flush()
        layers = list(self._layers)
        if tail:
            layers.append(Layer(tail, ()))
        return Circuit(self.layout, self.inputs, self.ancilla, tuple(layers))
