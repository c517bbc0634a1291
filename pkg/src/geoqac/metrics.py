"""Reduced states and distance measures."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .simulator import SparseState, StateVector

MAX_DIM = 1024
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
ZERO_ROW_TOL = 1e-14


class MetricError(ValueError):
    pass


@dataclass
class ReducedDensity:
    kept: tuple[int, ...]
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))


def partial_trace(state: StateVector | SparseState, keep: Sequence[int]) -> ReducedDensity:
    """Reduced density matrix on ``keep`` (in the given order)."""
    keep = tuple(int(q) for q in keep)
    n = state.num_qubits
    if len(set(keep)) != len(keep) or any(not 0 <= q < n for q in keep):
        raise MetricError("keep must be distinct qubits of the state")
    k = len(keep)
    if (1 << k) > MAX_DIM:
        raise MetricError(f"cannot keep {k} qubits (dimension cap {MAX_DIM})")
    if isinstance(state, SparseState):
        return _partial_trace_sparse(state, keep)
    rest = [q for q in range(n) if q not in keep]
    psi = state.amps.reshape((2,) * n).transpose(list(keep) + rest).reshape(1 << k, -1)
    return ReducedDensity(keep, psi @ psi.conj().T)


def _partial_trace_sparse(st: SparseState, keep: tuple[int, ...]) -> ReducedDensity:
    n, k = st.num_qubits, len(keep)
    bits = [1 << (n - 1 - q) for q in keep]
    kmask = sum(bits)
    cols: dict[int, int] = {}
    entries = []
    for idx, amp in st.terms.items():
        row = 0
        for b in bits:
            row = (row << 1) | (1 if idx & b else 0)
        col = cols.setdefault(idx & ~kmask, len(cols))
        entries.append((row, col, amp))
    m = np.zeros((1 << k, max(len(cols), 1)), dtype=complex)
    for row, col, amp in entries:
        m[row, col] += amp
    return ReducedDensity(keep, m @ m.conj().T)


# ---------------------------------------------------------------------------
# Hermitian eigensolver


def _round_robin(m: int) -> list[list[tuple[int, int]]]:
    """Pairings of 0..m-1 (m even) such that every pair appears in exactly one round."""
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        rounds.append([tuple(sorted((players[i], players[m - 1 - i]))) for i in range(m // 2)])
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _off_norm(a: np.ndarray) -> float:
    return float(np.sqrt(max(np.sum(np.abs(a) ** 2) - np.sum(np.abs(np.diag(a)) ** 2), 0.0)))


def jacobi_eigvalsh(a: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.

    Each sweep visits all index pairs in round-robin order; pairs within a
    round are disjoint, so their rotations are applied together.  Rows and
    columns whose entries are all below ``ZERO_ROW_TOL`` times the largest
    entry are treated as zero and removed first; each such row moves the
    spectrum by at most that amount.
    """
    a = np.array(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise MetricError("matrix must be square")
    dim = a.shape[0]
    if dim > MAX_DIM:
        raise MetricError(f"dimension {dim} exceeds cap {MAX_DIM}")
    if dim and np.max(np.abs(a - a.conj().T)) > 1e-8 * max(1.0, np.max(np.abs(a))):
        raise MetricError("matrix is not Hermitian")
    a = 0.5 * (a + a.conj().T)
    cut = ZERO_ROW_TOL * max(np.max(np.abs(a)) if dim else 0.0, 1e-300)
    live = np.flatnonzero(np.max(np.abs(a), axis=1, initial=0.0) > cut)
    zeros = np.zeros(dim - live.size)
    a = a[np.ix_(live, live)]
    m = a.shape[0]
    if m <= 1:
        return np.sort(np.concatenate([np.real(np.diag(a)), zeros]))
    pad = m % 2
    if pad:
        a = np.pad(a, ((0, 1), (0, 1)))
    size = a.shape[0]
    rounds = [np.array(r, dtype=np.int64) for r in _round_robin(size)]
    scale = max(np.linalg.norm(a), 1e-300)
    for _ in range(max_sweeps):
        if _off_norm(a) <= tol * scale:
            break
        for pairs in rounds:
            p, q = pairs[:, 0], pairs[:, 1]
            apq = a[p, q]
            mag = np.abs(apq)
            act = mag > 1e-300
            if not np.any(act):
                continue
            p, q, apq, mag = p[act], q[act], apq[act], mag[act]
            e = apq / mag
            app, aqq = a[p, p].real, a[q, q].real
            theta = 0.5 * np.arctan2(2.0 * mag, app - aqq)
            c, s = np.cos(theta), np.sin(theta)
            ce = np.conj(e)
            # J restricted to (p, q): [[c, -s], [ce*s, ce*c]]
            colp, colq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = colp * c + colq * (ce * s)
            a[:, q] = -colp * s + colq * (ce * c)
            rowp, rowq = a[p, :].copy(), a[q, :].copy()
            a[p, :] = c[:, None] * rowp + (e * s)[:, None] * rowq
            a[q, :] = -s[:, None] * rowp + (e * c)[:, None] * rowq
    else:
        if _off_norm(a) > tol * scale * 10:
            raise MetricError("Jacobi iteration did not converge")
    vals = np.real(np.diag(a))
    if pad:
        vals = vals[:-1]
    return np.sort(np.concatenate([vals, zeros]))


# ---------------------------------------------------------------------------
# distances


def _matrix(x) -> np.ndarray:
    return x.matrix if isinstance(x, ReducedDensity) else np.asarray(x, dtype=complex)


def trace_distance(a: ReducedDensity | np.ndarray, b: ReducedDensity | np.ndarray) -> float:
    """Unnormalized trace norm ||a - b||_1 (ranges over [0, 2] for states)."""
    if isinstance(a, ReducedDensity) and isinstance(b, ReducedDensity) and a.kept != b.kept:
        raise MetricError("reduced states are over different qubit sets")
    ma, mb = _matrix(a), _matrix(b)
    if ma.shape != mb.shape:
        raise MetricError(f"dimension mismatch {ma.shape} vs {mb.shape}")
    return float(np.sum(np.abs(jacobi_eigvalsh(ma - mb))))


def _amps(s) -> np.ndarray:
    if isinstance(s, StateVector):
        return s.amps
    if isinstance(s, SparseState):
        raise MetricError("use sparse_overlap for sparse states")
    return np.asarray(s, dtype=complex).reshape(-1)


def overlap(a, b) -> complex:
    if isinstance(a, SparseState) and isinstance(b, SparseState):
        return sparse_overlap(a, b)
    va, vb = _amps(a), _amps(b)
    if va.shape != vb.shape:
        raise MetricError("state dimension mismatch")
    return complex(np.vdot(va, vb))


def sparse_overlap(a: SparseState, b: SparseState) -> complex:
    if a.num_qubits != b.num_qubits:
        raise MetricError("state dimension mismatch")
    small, big = (a, b) if len(a.terms) <= len(b.terms) else (b, a)
    total = sum(np.conj(a.terms[k]) * b.terms[k] for k in small.terms if k in big.terms)
    return complex(total)


def fidelity(a, b) -> float:
    """Pure-state fidelity |<a|b>|^2."""
    return float(min(1.0, abs(overlap(a, b)) ** 2))


def _aligned_gap(a, b) -> tuple[float, float]:
    """(1 - |<a|b>|, |<a|b>|) with the first entry computed as ||b - e^{i phi} a||^2 / 2,
    which keeps its accuracy when the states nearly coincide."""
    o = overlap(a, b)
    ph = o / abs(o) if abs(o) > 0 else 1.0
    if isinstance(a, SparseState) and isinstance(b, SparseState):
        keys = set(a.terms) | set(b.terms)
        r2 = sum(abs(b.terms.get(k, 0) - ph * a.terms.get(k, 0)) ** 2 for k in keys)
    else:
        r2 = float(np.sum(np.abs(_amps(b) - ph * _amps(a)) ** 2))
    return min(1.0, max(0.0, r2 / 2)), min(1.0, abs(o))


def pure_trace_distance(a, b) -> float:
    """||a><a| - b><b|||_1 = 2 sqrt(1 - |<a|b>|^2)."""
    gap, m = _aligned_gap(a, b)
    return float(2.0 * np.sqrt(gap * (1.0 + m)))


def tv_distance(p: Mapping | Sequence[float] | np.ndarray, q: Mapping | Sequence[float] | np.ndarray, tol: float = 1e-9) -> float:
    """Total-variation distance between two normalized distributions."""
    if isinstance(p, Mapping) or isinstance(q, Mapping):
        if not (isinstance(p, Mapping) and isinstance(q, Mapping)):
            raise MetricError("both distributions must be mappings or both arrays")
        keys = sorted(set(p) | set(q), key=repr)
        pa = np.array([p.get(k, 0.0) for k in keys], dtype=float)
        qa = np.array([q.get(k, 0.0) for k in keys], dtype=float)
    else:
        pa, qa = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
        if pa.shape != qa.shape:
            raise MetricError("distributions over different universes")
    for v in (pa, qa):
        if np.any(v < -tol) or abs(v.sum() - 1.0) > tol:
            raise MetricError("distribution is not normalized")
    return float(min(1.0, 0.5 * np.sum(np.abs(pa - qa))))


def marginal_distribution(state: StateVector | SparseState, qubits: Sequence[int]) -> np.ndarray:
    """Computational-basis outcome distribution on ``qubits`` (first listed = most significant)."""
    rho = partial_trace(state, qubits)
    p = np.real(np.diag(rho.matrix)).clip(min=0.0)
    return p / p.sum()
