"""Exact statevector simulation.

Qubit 0 is the most significant bit of a basis index, so a dense vector
reshaped to ``[2] * n`` has axis ``q`` for qubit ``q``.

Two engines share the same gate semantics:

* the dense engine keeps all ``2**n`` amplitudes (qubit cap 22 by default);
* the sparse engine keeps only nonzero amplitudes in a dict keyed by
  basis index.  It is used for wide circuits whose states stay close to
  computational basis states, such as the compiled and recursive
  constructions run on basis inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .circuit import Circuit, CircuitError, Layer, ensure_valid

DEFAULT_QUBIT_CAP = 22
SPARSE_PRUNE = 1e-13
SPARSE_MAX_TERMS = 1 << 22


class SimulationError(RuntimeError):
    """Raised when a circuit cannot be simulated under the configured limits."""


# ---------------------------------------------------------------------------
# dense engine


@dataclass
class StateVector:
    num_qubits: int
    amps: np.ndarray

    @classmethod
    def basis(cls, bits: Sequence[int]) -> StateVector:
        n = len(bits)
        v = np.zeros(1 << n, dtype=complex)
        v[bits_to_index(bits)] = 1.0
        return cls(n, v)

    @classmethod
    def from_amps(cls, amps, normalize: bool = False) -> StateVector:
        a = np.asarray(amps, dtype=complex).reshape(-1)
        n = int(round(np.log2(a.size)))
        if 1 << n != a.size:
            raise ValueError("amplitude vector length must be a power of two")
        if normalize:
            a = a / np.linalg.norm(a)
        return cls(n, a.copy())

    def copy(self) -> StateVector:
        return StateVector(self.num_qubits, self.amps.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def amplitude(self, bits: Sequence[int]) -> complex:
        return complex(self.amps[bits_to_index(bits)])

    def tensor(self, other: StateVector) -> StateVector:
        return StateVector(self.num_qubits + other.num_qubits, np.kron(self.amps, other.amps))


def bits_to_index(bits: Sequence[int]) -> int:
    idx = 0
    for b in bits:
        idx = (idx << 1) | int(b)
    return idx


def index_to_bits(idx: int, n: int) -> list[int]:
    return [(idx >> (n - 1 - q)) & 1 for q in range(n)]


def apply_single(psi: np.ndarray, n: int, q: int, m: np.ndarray) -> None:
    """In-place 2x2 gate on qubit ``q`` of a dense vector."""
    v = psi.reshape(1 << q, 2, 1 << (n - q - 1))
    m00, m01, m10, m11 = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    if m01 == 0 and m10 == 0:
        if m00 != 1:
            v[:, 0, :] *= m00
        if m11 != 1:
            v[:, 1, :] *= m11
        return
    if m00 == 0 and m11 == 0:
        a = v[:, 0, :].copy()
        np.multiply(v[:, 1, :], m01, out=v[:, 0, :])
        np.multiply(a, m10, out=v[:, 1, :])
        return
    a = v[:, 0, :].copy()
    v[:, 0, :] *= m00
    v[:, 0, :] += m01 * v[:, 1, :]
    v[:, 1, :] *= m11
    v[:, 1, :] += m10 * a


def apply_cz(psi: np.ndarray, n: int, support: Sequence[int]) -> None:
    """In-place phase flip of the amplitudes whose support bits are all one."""
    view = psi.reshape((2,) * n)
    sup = set(support)
    idx = tuple(1 if k in sup else slice(None) for k in range(n))
    view[idx] *= -1


def apply_layer(psi: np.ndarray, n: int, layer: Layer) -> None:
    for g in layer.singles:
        apply_single(psi, n, g.target, g.matrix)
    for g in layer.czs:
        apply_cz(psi, n, g.support)


def _check_cap(c: Circuit, qubit_cap: int) -> None:
    if c.num_qubits > qubit_cap:
        raise SimulationError(f"circuit has {c.num_qubits} qubits, cap is {qubit_cap}")


def evolve(c: Circuit, state: StateVector, *, qubit_cap: int = DEFAULT_QUBIT_CAP, validate: bool = True) -> StateVector:
    """Apply ``c`` to an arbitrary dense state (returns a new state)."""
    if validate:
        ensure_valid(c)
    _check_cap(c, qubit_cap)
    if state.num_qubits != c.num_qubits:
        raise SimulationError("state and circuit qubit counts differ")
    psi = state.amps.astype(complex, copy=True)
    for layer in c.layers:
        apply_layer(psi, c.num_qubits, layer)
    return StateVector(c.num_qubits, psi)


def run(
    c: Circuit,
    input_bits: Sequence[int] | str | None = None,
    *,
    qubit_cap: int = DEFAULT_QUBIT_CAP,
    validate: bool = True,
) -> StateVector:
    """Dense output state of ``c`` on |input_bits> with ancilla at their initial values."""
    if validate:
        ensure_valid(c)
    _check_cap(c, qubit_cap)
    start = StateVector.basis(c.initial_bits(input_bits))
    return evolve(c, start, qubit_cap=qubit_cap, validate=False)


def circuit_unitary(c: Circuit, *, max_qubits: int = 10) -> np.ndarray:
    """Full unitary of ``c`` on all its qubits (column k = image of basis state k)."""
    n = c.num_qubits
    if n > max_qubits:
        raise SimulationError(f"unitary of {n} qubits exceeds limit {max_qubits}")
    dim = 1 << n
    cols = np.eye(dim, dtype=complex)
    out = np.empty((dim, dim), dtype=complex)
    for k in range(dim):
        psi = cols[:, k].copy()
        for layer in c.layers:
            apply_layer(psi, n, layer)
        out[:, k] = psi
    return out


# ---------------------------------------------------------------------------
# sparse engine


@dataclass
class SparseState:
    """State stored as a map from basis index to amplitude.

    Indices are Python integers, so there is no limit on the qubit count.
    """

    num_qubits: int
    terms: dict[int, complex]

    @classmethod
    def basis(cls, bits: Sequence[int]) -> SparseState:
        return cls(len(bits), {bits_to_index(bits): 1.0 + 0j})

    @classmethod
    def from_product(cls, sub: StateVector, qubits: Sequence[int], rest_bits: Sequence[int]) -> SparseState:
        """Place ``sub`` on ``qubits``; every other qubit takes its bit from ``rest_bits``."""
        n = len(rest_bits)
        qs = set(qubits)
        base = 0
        for q in range(n):
            if q not in qs and rest_bits[q]:
                base |= 1 << (n - 1 - q)
        k = len(qubits)
        terms: dict[int, complex] = {}
        for j in np.flatnonzero(np.abs(sub.amps) > 0):
            idx = base
            for pos, q in enumerate(qubits):
                if (int(j) >> (k - 1 - pos)) & 1:
                    idx |= 1 << (n - 1 - q)
            terms[idx] = complex(sub.amps[j])
        return cls(n, terms)

    def copy(self) -> SparseState:
        return SparseState(self.num_qubits, dict(self.terms))

    def norm(self) -> float:
        return float(np.sqrt(sum(abs(a) ** 2 for a in self.terms.values())))

    def amplitude(self, bits: Sequence[int]) -> complex:
        return self.terms.get(bits_to_index(bits), 0j)

    def to_dense(self, qubit_cap: int = DEFAULT_QUBIT_CAP) -> StateVector:
        if self.num_qubits > qubit_cap:
            raise SimulationError("state too large for dense conversion")
        v = np.zeros(1 << self.num_qubits, dtype=complex)
        for k, a in self.terms.items():
            v[k] = a
        return StateVector(self.num_qubits, v)

    def marginal_one(self, q: int) -> float:
        bit = 1 << (self.num_qubits - 1 - q)
        return float(sum(abs(a) ** 2 for k, a in self.terms.items() if k & bit))


def _sparse_single(st: SparseState, q: int, m: np.ndarray) -> None:
    bit = 1 << (st.num_qubits - 1 - q)
    m00, m01, m10, m11 = (complex(v) for v in m.reshape(-1))
    if m01 == 0 and m10 == 0:
        st.terms = {k: a * (m11 if k & bit else m00) for k, a in st.terms.items()}
        return
    if m00 == 0 and m11 == 0:
        st.terms = {k ^ bit: a * (m01 if k & bit else m10) for k, a in st.terms.items()}
        return
    out: dict[int, complex] = {}
    for k, a in st.terms.items():
        k0, k1 = k & ~bit, k | bit
        if k & bit:
            out[k0] = out.get(k0, 0j) + m01 * a
            out[k1] = out.get(k1, 0j) + m11 * a
        else:
            out[k0] = out.get(k0, 0j) + m00 * a
            out[k1] = out.get(k1, 0j) + m10 * a
    st.terms = {k: a for k, a in out.items() if abs(a) > SPARSE_PRUNE}
    if len(st.terms) > SPARSE_MAX_TERMS:
        raise SimulationError("sparse state grew beyond the term limit")


def _sparse_cz(st: SparseState, support: Sequence[int]) -> None:
    mask = 0
    for q in support:
        mask |= 1 << (st.num_qubits - 1 - q)
    for k in st.terms:
        if k & mask == mask:
            st.terms[k] = -st.terms[k]


def evolve_sparse(c: Circuit, state: SparseState, *, validate: bool = True) -> SparseState:
    if validate:
        ensure_valid(c)
    if state.num_qubits != c.num_qubits:
        raise SimulationError("state and circuit qubit counts differ")
    st = state.copy()
    layers = c.layers
    early: set[int] = set()
    for i, layer in enumerate(layers):
        # Each CZ is applied together with the singles around it on its own
        # support (this layer's and the next layer's).  Operations on disjoint
        # qubits commute, and the H-CZ-H pattern of a Toffoli then never
        # leaves more than one qubit in superposition at a time.
        singles = {g.target: g for g in layer.singles if g.target not in early}
        nxt = {g.target: g for g in layers[i + 1].singles} if i + 1 < len(layers) else {}
        early = set()
        for g in layer.czs:
            for q in g.support:
                s = singles.pop(q, None)
                if s is not None:
                    _sparse_single(st, q, s.matrix)
            _sparse_cz(st, g.support)
            for q in g.support:
                if q in nxt:
                    _sparse_single(st, q, nxt[q].matrix)
                    early.add(q)
        for q, s in singles.items():
            _sparse_single(st, q, s.matrix)
    return st


def run_sparse(c: Circuit, input_bits: Sequence[int] | str | None = None, *, validate: bool = True) -> SparseState:
    if validate:
        ensure_valid(c)
    return evolve_sparse(c, SparseState.basis(c.initial_bits(input_bits)), validate=False)


def run_any(c: Circuit, input_bits=None, *, qubit_cap: int = DEFAULT_QUBIT_CAP) -> StateVector | SparseState:
    """Dense result when the circuit fits under the cap, sparse otherwise."""
    if c.num_qubits <= qubit_cap:
        return run(c, input_bits, qubit_cap=qubit_cap)
    return run_sparse(c, input_bits)


def basis_outcome(state: StateVector | SparseState, tol: float = 1e-10) -> list[int] | None:
    """Bits of the basis state that ``state`` equals (up to phase), else None."""
    if isinstance(state, SparseState):
        big = [(k, abs(a) ** 2) for k, a in state.terms.items() if abs(a) ** 2 > tol]
        if len(big) != 1 or abs(big[0][1] - 1.0) > tol:
            return None
        return index_to_bits(big[0][0], state.num_qubits)
    p = state.probabilities()
    k = int(np.argmax(p))
    if abs(p[k] - 1.0) > tol:
        return None
    return index_to_bits(k, state.num_qubits)

# ---------------------------------------------------------------------------
# output functions


def prob_one(state: StateVector | SparseState, q: int) -> float:
    if isinstance(state, SparseState):
        return state.marginal_one(q)
    n = state.num_qubits
    v = state.probabilities().reshape(1 << q, 2, 1 << (n - q - 1))
    return float(v[:, 1, :].sum())


def f_eval(c: Circuit, x, output_qubit: int, *, qubit_cap: int = DEFAULT_QUBIT_CAP) -> float:
    """Probability that measuring ``output_qubit`` after ``c`` on input ``x`` gives 1."""
    return prob_one(run(c, x, qubit_cap=qubit_cap), output_qubit)


@dataclass
class SuccessProfile:
    table: dict[tuple[int, ...], float]
    value: float
    target: str
    exact: bool
    samples: int
    seed: int | None = None
    output_qubit: int = -1

    def __post_init__(self) -> None:
        for x, p in self.table.items():
            if not -1e-12 <= p <= 1 + 1e-12:
                raise ValueError(f"f_C({x}) = {p} outside [0, 1]")


def default_output_qubit(c: Circuit, arity: int) -> int:
    """Target qubit convention: the input after the function's arguments, else the last qubit."""
    if len(c.inputs) > arity:
        return c.inputs[arity]
    return c.num_qubits - 1


def avg_success(
    c: Circuit,
    f: Callable[[tuple[int, ...]], int],
    *,
    arity: int | None = None,
    output_qubit: int | None = None,
    samples: int | None = None,
    seed: int | None = None,
    max_exact_inputs: int = 16,
    qubit_cap: int = DEFAULT_QUBIT_CAP,
) -> SuccessProfile:
    """Agreement probability E_x[f(x) f_C(x) + (1 - f(x))(1 - f_C(x))].

    The function reads the first ``arity`` declared inputs; remaining
    inputs are held at 0.
    """
    ensure_valid(c)
    if arity is None:
        arity = getattr(f, "arity", len(c.inputs))
    if arity > len(c.inputs):
        raise CircuitError("function arity exceeds the number of circuit inputs")
    oq = default_output_qubit(c, arity) if output_qubit is None else output_qubit
    pad = [0] * (len(c.inputs) - arity)
    name = getattr(f, "name", getattr(f, "__name__", "f"))

    if arity <= max_exact_inputs and samples is None:
        xs = [tuple((k >> (arity - 1 - j)) & 1 for j in range(arity)) for k in range(1 << arity)]
        exact = True
    else:
        if samples is None:
            raise SimulationError(f"{arity} inputs exceed the exact-enumeration cap; pass samples and seed")
        rng = np.random.default_rng(seed)
        xs = [tuple(int(b) for b in rng.integers(0, 2, size=arity)) for _ in range(samples)]
        exact = False
    table: dict[tuple[int, ...], float] = {}
    total = 0.0
    for x in xs:
        if x not in table:
            table[x] = prob_one(run(c, list(x) + pad, qubit_cap=qubit_cap, validate=False), oq)
        p = table[x]
        fx = int(f(x))
        total += fx * p + (1 - fx) * (1 - p)
    return SuccessProfile(table, total / len(xs), name, exact, len(xs), seed, oq)
