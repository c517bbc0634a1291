"""Analytic bounds and the experiments that compare circuits against them."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .boolean import BooleanFunction
from .circuit import Circuit, CircuitError, ensure_valid
from .lightcone import backward_disjoint_select
from .metrics import MetricError, marginal_distribution, tv_distance
from .restriction import _inputs_for, restriction_pipeline_1d
from .simulator import DEFAULT_QUBIT_CAP, avg_success, circuit_unitary, run_any

REPORT_TOL = 1e-9
MAJORITY_CONSTANT = 0.045
CSV_COLUMNS = ("suite", "name", "n", "d", "epsilon", "analytic", "empirical", "satisfied", "seed")


@dataclass
class BoundReport:
    name: str
    params: dict[str, Any]
    analytic: float
    empirical: float
    seed: int | None = None
    suite: str = ""
    extras: dict[str, Any] = field(default_factory=dict)

    @property
    def satisfied(self) -> bool:
        return self.empirical <= self.analytic + REPORT_TOL

    def to_dict(self) -> dict[str, Any]:
        return {
            "suite": self.suite,
            "name": self.name,
            "params": dict(self.params),
            "analytic": self.analytic,
            "empirical": self.empirical,
            "satisfied": self.satisfied,
            "seed": self.seed,
            "extras": dict(self.extras),
        }

    def csv_row(self) -> dict[str, Any]:
        p = self.params
        return {
            "suite": self.suite,
            "name": self.name,
            "n": p.get("n", ""),
            "d": p.get("d", ""),
            "epsilon": "" if p.get("epsilon") is None else p["epsilon"],
            "analytic": repr(float(self.analytic)),
            "empirical": repr(float(self.empirical)),
            "satisfied": str(self.satisfied).lower(),
            "seed": "" if self.seed is None else self.seed,
        }


def reports_to_csv(reports: Iterable[BoundReport]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()


# ---------------------------------------------------------------------------
# closed forms


def _check_nd(n: int, d: int) -> None:
    if n < 1 or d < 1:
        raise ValueError("n and d must be at least 1")


def parity_bound(n: int, d: int) -> float:
    """1/2 + 4 sqrt(2) d 2^(-n^(1/d) / 6)."""
    _check_nd(n, d)
    return 0.5 + 4 * math.sqrt(2) * d * 2.0 ** (-(n ** (1 / d)) / 6)


def contiguous_parity_bound(n: int, d: int) -> float:
    """1/2 + 8 d n 2^(-n / (10 d))."""
    _check_nd(n, d)
    return 0.5 + 8 * d * n * 2.0 ** (-n / (10 * d))


def majority_bound(n: int, d: int) -> float:
    """1 - 0.045 / sqrt(n) + 2 sqrt(2d) 2^(-n^(1/d) / 6)."""
    _check_nd(n, d)
    return 1 - MAJORITY_CONSTANT / math.sqrt(n) + 2 * math.sqrt(2 * d) * 2.0 ** (-(n ** (1 / d)) / 6)


_BOUNDS = {"parity": parity_bound, "contiguous": contiguous_parity_bound, "majority": majority_bound}


def bound_experiment(
    c: Circuit,
    target: BooleanFunction,
    bound: str = "parity",
    *,
    seed: int | None = None,
    samples: int | None = None,
    qubit_cap: int = DEFAULT_QUBIT_CAP,
) -> BoundReport:
    """Average agreement of the circuit's output with ``target`` against an analytic bound."""
    if bound not in _BOUNDS:
        raise ValueError(f"unknown bound {bound!r}; choose from {sorted(_BOUNDS)}")
    n, d = target.arity, max(c.depth, 1)
    prof = avg_success(c, target, samples=samples, seed=seed, qubit_cap=qubit_cap)
    return BoundReport(
        f"{bound}-bound",
        {"n": n, "d": d, "target": target.name},
        _BOUNDS[bound](n, d),
        prof.value,
        seed,
        extras={"exact": prof.exact, "output_qubit": prof.output_qubit},
    )


# ---------------------------------------------------------------------------
# approximation gaps


def tv_gap(
    c: Circuit,
    c2: Circuit,
    outputs: Sequence[int],
    *,
    d: int | None = None,
    epsilon: float | None = None,
    samples: int | None = None,
    seed: int | None = None,
    qubit_cap: int = DEFAULT_QUBIT_CAP,
) -> BoundReport:
    """E_x of the TV distance between the two circuits' measurement
    distributions on ``outputs``; compared with 8 d epsilon."""
    if c.layout != c2.layout or c.inputs != c2.inputs:
        raise CircuitError("circuits must share layout and inputs")
    outputs = list(outputs)
    if not outputs or any(not 0 <= q < c.num_qubits for q in outputs):
        raise MetricError("outputs must be qubits of the circuit")
    d = c.depth if d is None else d
    total = 0.0
    xs = _inputs_for(len(c.inputs), samples, seed)
    for x in xs:
        p = marginal_distribution(run_any(c, x, qubit_cap=qubit_cap), outputs)
        q = marginal_distribution(run_any(c2, x, qubit_cap=qubit_cap), outputs)
        total += tv_distance(p, q)
    analytic = 8 * d * epsilon if epsilon is not None else 0.0
    return BoundReport("tv-gap", {"n": len(c.inputs), "d": d, "epsilon": epsilon}, analytic, total / len(xs), seed)


def _is_unitary(u: np.ndarray, tol: float = 1e-8) -> bool:
    return u.ndim == 2 and u.shape[0] == u.shape[1] and np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=tol)


def unitary_phase_gap(U: np.ndarray, V: np.ndarray) -> tuple[np.ndarray, float]:
    """Diagonal phase D from diag(V^dag U) and the gap ||U - V D||_F^2 / N."""
    U, V = np.asarray(U, dtype=complex), np.asarray(V, dtype=complex)
    if U.shape != V.shape:
        raise MetricError("unitaries have different dimensions")
    if U.shape[0] > 1 << 10:
        raise MetricError("dimension exceeds 2^10")
    if not (_is_unitary(U) and _is_unitary(V)):
        raise MetricError("inputs must be unitary")
    w = np.einsum("ij,ij->j", V.conj(), U)
    mag = np.abs(w)
    phases = np.where(mag > 1e-12, w / np.where(mag > 1e-12, mag, 1.0), 1.0)
    D = np.diag(phases)
    gap = float(np.sum(np.abs(U - V * phases[None, :]) ** 2) / U.shape[0])
    return D, gap


def unitary_gap(c: Circuit, c2: Circuit, *, d: int | None = None, epsilon: float | None = None, seed: int | None = None) -> BoundReport:
    """Circuit-level phase gap compared with 16 d epsilon."""
    U, V = circuit_unitary(c), circuit_unitary(c2)
    _, gap = unitary_phase_gap(U, V)
    d = c.depth if d is None else d
    analytic = 16 * d * epsilon if epsilon is not None else 0.0
    return BoundReport("unitary-gap", {"n": len(c.inputs), "d": d, "epsilon": epsilon}, analytic, gap, seed)


# ---------------------------------------------------------------------------
# input-dependent cat states


def _outcome_probs(state, qubits: Sequence[int], targets: Sequence[Sequence[int]]) -> list[float]:
    p = marginal_distribution(state, qubits)
    out = []
    for bits in targets:
        k = 0
        for b in bits:
            k = (k << 1) | b
        out.append(float(p[k]))
    return out


def cat_product(
    c: Circuit,
    register: Sequence[int] | None = None,
    *,
    samples: int | None = None,
    seed: int | None = None,
    qubit_cap: int = DEFAULT_QUBIT_CAP,
) -> float:
    """E_x[ Pr(register reads x) * Pr(register reads not-x) ]; the register
    defaults to the input qubits and x ranges over all inputs."""
    reg = list(c.inputs if register is None else register)
    pos = {q: i for i, q in enumerate(c.inputs)}
    if any(q not in pos for q in reg):
        raise CircuitError("register must consist of input qubits")
    xs = _inputs_for(len(c.inputs), samples, seed)
    total = 0.0
    for x in xs:
        bits = [x[pos[q]] for q in reg]
        st = run_any(c, x, qubit_cap=qubit_cap)
        a, b = _outcome_probs(st, reg, [bits, [1 - v for v in bits]])
        total += a * b
    return total / len(xs)


def nekomata_distance(
    c: Circuit,
    *,
    epsilon: float | None = None,
    samples: int | None = None,
    seed: int | None = None,
) -> BoundReport:
    """Cat-product quantity of ``c``.

    Without ``epsilon`` the analytic value is the exact-cat value 1/4.
    With ``epsilon`` on a line layout the restriction pipeline supplies a
    set T of inputs with disjoint backward cones, and the analytic value is
    4^-|T| + 32 d epsilon.  The implied lower bound on the distance to any
    family of input-dependent cat states is reported in ``extras``.
    """
    ensure_valid(c)
    q = cat_product(c, samples=samples, seed=seed)
    d = c.depth
    extras: dict[str, Any] = {}
    if epsilon is None:
        analytic = 0.25
    else:
        out = restriction_pipeline_1d(c, epsilon)
        T = backward_disjoint_select(out.approx_circuit, out.surviving_set)
        analytic = 4.0 ** (-len(T)) + 32 * d * epsilon
        extras = {
            "T": list(T),
            "approx_product": cat_product(out.approx_circuit, T, samples=samples, seed=seed),
            "distance_lower_bound": 0.125 - 2.0 ** (-2 * len(T) - 1) - 16 * d * epsilon,
        }
    extras["distance_from_product"] = (0.25 - q) / 2
    return BoundReport("nekomata", {"n": len(c.inputs), "d": d, "epsilon": epsilon}, analytic, q, seed, extras=extras)
