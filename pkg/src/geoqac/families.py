"""Seeded circuit families used by the experiments and tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gates
from .circuit import Circuit, CircuitBuilder, Layer, Layout, MultiCZGate, SingleQubitGate

LINE_FAMILY_SIZE = 12
LINE_FAMILY_N = (4, 6)


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _singles(rng: np.random.Generator, qubits, prob: float = 1.0) -> tuple[SingleQubitGate, ...]:
    return tuple(SingleQubitGate.of(q, gates.random_unitary(rng)) for q in qubits if rng.random() < prob)


def _interval_czs(rng: np.random.Generator, lo: int, hi: int, max_support: int, cz_prob: float) -> list[MultiCZGate]:
    """Random disjoint intervals inside [lo, hi) turned into CZ gates."""
    out = []
    q = lo
    while q < hi:
        w = int(rng.integers(1, max_support + 1))
        sup = tuple(range(q, min(q + w, hi)))
        if len(sup) >= 2 and rng.random() < cz_prob:
            out.append(MultiCZGate.of(sup))
        q += w
    return out


def random_line_circuit(
    n_inputs: int,
    depth: int,
    seed=None,
    *,
    ancilla: int = 0,
    max_support: int = 3,
    cz_prob: float = 0.6,
) -> Circuit:
    """Line circuit of exactly ``depth`` CZ layers with Haar single-qubit gates.

    Inputs sit on the first ``n_inputs`` positions, ancilla in |0> after them.
    """
    rng = _rng(seed)
    n = n_inputs + ancilla
    if n < 2 and depth > 0:
        raise ValueError("need at least two qubits for a CZ layer")
    layers = []
    for _ in range(depth):
        czs = _interval_czs(rng, 0, n, max_support, cz_prob)
        if not czs:
            start = int(rng.integers(0, n - 1))
            czs = [MultiCZGate.of((start, start + 1))]
        layers.append(Layer(_singles(rng, range(n)), tuple(czs)))
    layers.append(Layer(_singles(rng, range(n)), ()))
    return Circuit(Layout.line(n), tuple(range(n_inputs)), tuple((q, "zero") for q in range(n_inputs, n)), tuple(layers))


def random_all_to_all(n: int, depth: int, seed=None, *, cz_prob: float = 0.7) -> Circuit:
    """All-to-all circuit of exactly ``depth`` CZ layers over arbitrary qubit subsets."""
    rng = _rng(seed)
    layers = []
    for _ in range(depth):
        perm = [int(q) for q in rng.permutation(n)]
        czs = []
        i = 0
        while i < n:
            w = int(rng.integers(1, n + 1))
            grp = perm[i : i + w]
            if len(grp) >= 2 and rng.random() < cz_prob:
                czs.append(MultiCZGate.of(grp))
            i += w
        if not czs and n >= 2:
            czs = [MultiCZGate.of(perm[:2])]
        layers.append(Layer(_singles(rng, range(n)), tuple(czs)))
    layers.append(Layer(_singles(rng, range(n)), ()))
    return Circuit(Layout.all_to_all(n), tuple(range(n)), (), tuple(layers))


@dataclass(frozen=True)
class FamilyMember:
    name: str
    circuit: Circuit
    n: int
    d: int
    seed: int


def parity_line_family(depth: int, *, size: int = LINE_FAMILY_SIZE, seed: int = 0) -> list[FamilyMember]:
    """Shipped depth-``depth`` line family for the parity bound experiment.

    Each member has n data inputs followed by the target input b; the output
    is read on b.  Members alternate between n = 4 and n = 6.
    """
    if depth not in (1, 2):
        raise ValueError("shipped families exist for depth 1 and 2")
    out = []
    for i in range(size):
        n = LINE_FAMILY_N[i % len(LINE_FAMILY_N)]
        s = seed * 1000 + 100 * depth + i
        c = random_line_circuit(n + 1, depth, s, max_support=2 + i % 3)
        out.append(FamilyMember(f"line-d{depth}-{i}", c, n, depth, s))
    return out


@dataclass(frozen=True)
class ErasureInstance:
    circuit: Circuit
    layer: int
    gate: MultiCZGate
    cones: tuple[int, ...]
    k: int


def erasure_instance(k: int, seed=None, *, extra: int = 1) -> ErasureInstance:
    """Separable line circuit whose last CZ covers the forward cones of k inputs.

    Input i owns a block of 1-3 qubits (input first, |0> ancilla after);
    random single-qubit gates and block-local CZs keep each cone in its
    block.  ``extra`` further inputs live to the right of the covering gate.
    """
    if k < 1:
        raise ValueError("k must be positive")
    rng = _rng(seed)
    sizes = [int(rng.integers(1, 4)) for _ in range(k)]
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(int).tolist()
    width = sum(sizes)
    if width < 2:
        sizes[0] = 2
        width = 2
    n = width + extra
    inputs = tuple(starts) + tuple(range(width, n))
    anc = tuple((q, "zero") for q in range(width) if q not in starts)
    layers = []
    for _ in range(int(rng.integers(1, 3))):
        czs = [MultiCZGate.of(range(s0, s0 + m)) for s0, m in zip(starts, sizes) if m >= 2 and rng.random() < 0.8]
        if extra >= 2 and rng.random() < 0.5:
            czs.append(MultiCZGate.of(range(width, n)))
        layers.append(Layer(_singles(rng, range(n)), tuple(czs)))
    gate = MultiCZGate.of(range(width))
    layers.append(Layer(_singles(rng, range(n)), (gate,)))
    c = Circuit(Layout.line(n), inputs, anc, tuple(layers))
    return ErasureInstance(c, len(layers) - 1, gate, tuple(starts), k)


def product_erasure_instance(k: int) -> ErasureInstance:
    """k inputs under Hadamards followed by CZ on all of them."""
    if k < 2:
        raise ValueError("need k >= 2 for a CZ")
    b = CircuitBuilder(Layout.line(k), inputs=range(k))
    for q in range(k):
        b.h(q)
    b.layer(czs=[range(k)])
    c = b.build()
    return ErasureInstance(c, 0, MultiCZGate.of(range(k)), tuple(range(k)), k)


def nekomata_circuit(n: int) -> Circuit:
    """Produces (|x>|0> + |x-bar>|1>)/sqrt(2): an ancilla in |+> flips every input."""
    if n < 1:
        raise ValueError("n must be positive")
    b = CircuitBuilder(Layout.all_to_all(n + 1), inputs=range(n), ancilla=[(n, "zero")])
    b.h(n)
    for q in range(n):
        b.cnots([(n, q)])
    return b.build()
