"""Restriction pipelines: erase heavy gates, keep a separable subset of inputs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .circuit import Circuit, Layer, MultiCZGate, ensure_valid
from .lightcone import (
    AnalysisError,
    SeparabilityCertificate,
    backward_lightcone,
    check_separable,
    erase_gate,
    forward_cones,
    structure_select_1d,
)
from .metrics import jacobi_eigvalsh, partial_trace, pure_trace_distance
from .simulator import DEFAULT_QUBIT_CAP, run, run_any

MAX_EXACT_INPUTS = 12
DEFAULT_SAMPLES = 256


@dataclass(frozen=True)
class ErasedGate:
    layer: int
    support: tuple[int, ...]
    weight: int


@dataclass
class RestrictionOutcome:
    approx_circuit: Circuit
    surviving_set: tuple[int, ...]
    erased_gates: list[ErasedGate]
    epsilon: float | None
    s: int
    analytic_error_bound: float
    empirical_error: float | None = None
    certificate: SeparabilityCertificate | None = None
    seed: int | None = None
    extras: dict[str, Any] = field(default_factory=dict)

    @property
    def size_bound(self) -> int:
        """Integer form of the guaranteed survivor count ceil(n / s^d)."""
        n, d = len(self.approx_circuit.inputs), self.approx_circuit.depth
        return math.ceil(n / self.s**d) if d else n

    def to_dict(self) -> dict[str, Any]:
        out = {
            "epsilon": self.epsilon,
            "s": self.s,
            "surviving_set": list(self.surviving_set),
            "erased_gates": [{"layer": g.layer, "support": list(g.support), "weight": g.weight} for g in self.erased_gates],
            "analytic_error_bound": self.analytic_error_bound,
            "empirical_error": self.empirical_error,
            "separable": None if self.certificate is None else self.certificate.separable,
            "seed": self.seed,
        }
        out.update(self.extras)
        return out


# ---------------------------------------------------------------------------
# empirical errors


def _inputs_for(n_in: int, samples: int | None, seed: int | None) -> list[tuple[int, ...]]:
    if n_in <= MAX_EXACT_INPUTS and samples is None:
        return [tuple((k >> (n_in - 1 - j)) & 1 for j in range(n_in)) for k in range(1 << n_in)]
    rng = np.random.default_rng(seed)
    return [tuple(int(b) for b in rng.integers(0, 2, n_in)) for _ in range(samples or DEFAULT_SAMPLES)]


def output_distance(
    a: Circuit,
    b: Circuit,
    *,
    samples: int | None = None,
    seed: int | None = None,
    qubit_cap: int = DEFAULT_QUBIT_CAP,
) -> float:
    """E_x || rho_a^x - rho_b^x ||_1 over full output states (exact for <= 12 inputs)."""
    if a.layout != b.layout or a.inputs != b.inputs:
        raise AnalysisError("circuits must share layout and inputs")
    xs = _inputs_for(len(a.inputs), samples, seed)
    total = 0.0
    for x in xs:
        total += pure_trace_distance(run_any(a, x, qubit_cap=qubit_cap), run_any(b, x, qubit_cap=qubit_cap))
    return total / len(xs)


def erasure_error(c: Circuit, layer: int, gate: MultiCZGate, **kw) -> float:
    """Empirical cost of replacing one CZ gate with the identity."""
    return output_distance(c, erase_gate(c, layer, gate), **kw)


def corrected_erasure_bound(k: int) -> float:
    """Erasure cost bound 4 * 2^(-k/2) for a gate covering k separable cones.

    For a pure state and projector P, ||P|psi><psi|||_1 = sqrt(<psi|P|psi>),
    so the square root cannot be dropped.
    """
    return 4.0 * 2.0 ** (-k / 2)


def stated_erasure_bound(k: int) -> float:
    return 4.0 * 2.0 ** (-k)


# ---------------------------------------------------------------------------
# general-input pipeline


def threshold_s(n: int, epsilon: float) -> int:
    if not 0 < epsilon < 1:
        raise AnalysisError("epsilon must lie in (0, 1)")
    return max(1, math.ceil(math.log2(n / epsilon)))


def restriction_pipeline_1d(
    c: Circuit,
    epsilon: float,
    *,
    empirical: bool = False,
    samples: int | None = None,
    seed: int | None = None,
) -> RestrictionOutcome:
    """Layer by layer, erase every CZ meeting >= s input cones, then keep a
    subset whose cones stay disjoint through the layer."""
    ensure_valid(c)
    if c.layout.kind != "line":
        raise AnalysisError(f"restriction pipeline needs a line layout, got {c.layout.kind}")
    n = len(c.inputs)
    if n == 0:
        raise AnalysisError("circuit has no inputs")
    s = threshold_s(n, epsilon)
    sel_s = max(s, 3)
    keep = list(c.inputs)
    erased: list[ErasedGate] = []
    done: list[Layer] = []
    sizes = [len(keep)]
    for li, layer in enumerate(c.layers):
        prefix = c.with_layers(done)
        if not layer.czs:
            done.append(layer)
            continue
        cones = forward_cones(prefix, keep)
        kept_czs = []
        for g in layer.czs:
            w = sum(1 for cone in cones.values() if cone & set(g.support))
            if w >= s:
                erased.append(ErasedGate(li, g.support, w))
            else:
                kept_czs.append(g)
        new_layer = Layer(layer.singles, tuple(kept_czs))
        keep = list(structure_select_1d(prefix, keep, new_layer, sel_s).kept)
        sizes.append(len(keep))
        done.append(new_layer)
    approx = c.with_layers(done)
    cert = check_separable(approx, keep)
    if not cert:
        raise AnalysisError(f"pipeline output not separable (witness {cert.witness})")
    d = c.depth
    out = RestrictionOutcome(
        approx,
        tuple(sorted(keep)),
        erased,
        epsilon,
        s,
        16.0 * d * epsilon,
        certificate=cert,
        seed=seed,
        extras={
            "kind": "restriction_1d",
            "n": n,
            "d": d,
            "subset_sizes": sizes,
            "size_bound": math.ceil(n / s**d) if d else n,
            "erasure_bound_sqrt": sum(corrected_erasure_bound(max(g.weight - 2, 0)) for g in erased),
        },
    )
    if empirical:
        out.empirical_error = output_distance(c, approx, samples=samples, seed=seed)
    return out


# ---------------------------------------------------------------------------
# contiguous-input pipeline


def mixedness_error(c: Circuit, region: Sequence[int], *, qubit_cap: int = DEFAULT_QUBIT_CAP) -> float:
    """max |E_x Tr_{region^c} rho^x - 2^{-|region|} Id| over all inputs x."""
    region = sorted(region)
    if not region:
        return 0.0
    n_in = len(c.inputs)
    if n_in > MAX_EXACT_INPUTS:
        raise AnalysisError("mixedness check enumerates all inputs; too many inputs")
    acc = None
    for x in _inputs_for(n_in, None, None):
        m = partial_trace(run(c, x, qubit_cap=qubit_cap, validate=False), region).matrix
        acc = m if acc is None else acc + m
    acc = acc / (1 << n_in)
    dim = 1 << len(region)
    return float(np.max(np.abs(acc - np.eye(dim) / dim)))


def contiguous_restriction(
    c: Circuit,
    s: int,
    *,
    check_mixed: bool = False,
    empirical: bool = False,
    samples: int | None = None,
    seed: int | None = None,
) -> RestrictionOutcome:
    """Contiguous-input variant: track an interval I_t of inputs whose averaged
    reduced state stays maximally mixed.

    A gate whose support holds >= s qubits of I_t is erased; the qubits of
    gates straddling the boundary of I_t are then dropped from it.
    """
    ensure_valid(c)
    if c.layout.kind != "line":
        raise AnalysisError(f"contiguous restriction needs a line layout, got {c.layout.kind}")
    if s < 1:
        raise AnalysisError("s must be positive")
    ins = sorted(c.inputs)
    if not ins or ins[-1] - ins[0] != len(ins) - 1:
        raise AnalysisError("inputs are not contiguous")
    n = len(ins)
    cur = set(ins)
    erased: list[ErasedGate] = []
    done: list[Layer] = []
    sizes = [len(cur)]
    mixed: list[float] = []
    if check_mixed:
        mixed.append(mixedness_error(c.with_layers(()), sorted(cur)))
    t = 0
    for li, layer in enumerate(c.layers):
        if not layer.czs:
            done.append(layer)
            continue
        t += 1
        kept = []
        for g in layer.czs:
            w = len(cur.intersection(g.support))
            if w >= s:
                erased.append(ErasedGate(li, g.support, w))
            else:
                kept.append(g)
        for g in kept:
            inside = cur.intersection(g.support)
            if inside and len(inside) < len(g.support):
                cur -= inside
        done.append(Layer(layer.singles, tuple(kept)))
        sizes.append(len(cur))
        if check_mixed:
            mixed.append(mixedness_error(c.with_layers(done), sorted(cur)))
    approx = c.with_layers(done)
    region = sorted(cur)
    if region and region[-1] - region[0] != len(region) - 1:
        raise AnalysisError("surviving interval lost contiguity")
    growth = 0
    for q in range(approx.num_qubits):
        growth = max(growth, len(backward_lightcone(approx, q).set & cur))
    out = RestrictionOutcome(
        approx,
        tuple(region),
        erased,
        None,
        s,
        4.0 * t * n * 2.0 ** (-s / 2),
        seed=seed,
        extras={
            "kind": "contiguous",
            "n": n,
            "d": t,
            "interval_sizes": sizes,
            "size_bound": n - 2 * t * s,
            "backward_growth": growth,
            "backward_growth_bound": 2 * t * s,
            "mixedness_errors": mixed,
        },
    )
    if empirical:
        out.empirical_error = output_distance(c, approx, samples=samples, seed=seed)
    return out


def spectral_sum(c: Circuit, X: Iterable[int], fixed: Sequence[int] | None = None) -> np.ndarray:
    """Eigenvalues of sum_x Tr_{S_X^c}[rho^(x)] with the other inputs held at ``fixed``."""
    X = sorted(set(X))
    others = [q for q in c.inputs if q not in X]
    fixed = list(fixed) if fixed is not None else [0] * len(others)
    cone = sorted(set().union(*forward_cones(c, X).values())) if X else []
    acc = None
    for k in range(1 << len(X)):
        vals = dict(zip(others, fixed))
        vals.update({q: (k >> (len(X) - 1 - j)) & 1 for j, q in enumerate(X)})
        x = [vals[q] for q in c.inputs]
        m = partial_trace(run(c, x, validate=False), cone).matrix
        acc = m if acc is None else acc + m
    return jacobi_eigvalsh(acc)
