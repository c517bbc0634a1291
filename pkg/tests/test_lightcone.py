from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import cone_by_paths
from geoqac.circuit import Circuit, Layer, Layout, MultiCZGate
from geoqac.families import random_all_to_all, random_line_circuit
from geoqac.lightcone import (
    AnalysisError,
    backward_disjoint_select,
    backward_lightcone,
    check_separable,
    erase_gate,
    forward_lightcone,
    gate_weight,
    independent_set,
    independent_set_deg2,
    structure_select_1d,
    width2_structure_select,
)
from geoqac.restriction import spectral_sum
from geoqac.synthesis import appendix_d_counterexample, parity_line


def _czs(layout, *layers, inputs=None):
    ls = tuple(Layer((), tuple(MultiCZGate.of(s) for s in sups)) for sups in layers)
    ins = tuple(range(layout.num_qubits)) if inputs is None else tuple(inputs)
    return Circuit(layout, ins, (), ls)


def test_chain_propagation():
    c = _czs(Layout.line(4), [(0, 1)], [(1, 2)])
    assert forward_lightcone(c, 0).members == (0, 1, 2)
    assert backward_lightcone(c, 2).members == (0, 1, 2)


def test_untouched_qubit():
    c = _czs(Layout.line(4), [(0, 1)])
    assert forward_lightcone(c, 3).members == (3,)
    assert backward_lightcone(c, 3).members == (3,)


def test_upto_layer_and_monotonicity():
    c = random_line_circuit(8, 4, seed=2)
    for q in range(8):
        prev = {q}
        for t in range(len(c.layers) + 1):
            cur = forward_lightcone(c, q, t).set
            assert prev <= cur
            prev = cur


def test_parity_line_output_cone_is_everything():
    for n in (2, 3, 4, 5):
        c = parity_line(n)
        assert backward_lightcone(c, c.inputs[n]).members == tuple(range(n + 1))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 8), st.integers(0, 4), st.booleans())
def test_incremental_cones_match_path_enumeration(seed, n, depth, line):
    if line:
        c = random_line_circuit(n, depth, seed)
    else:
        c = random_all_to_all(n, depth, seed)
    for q in range(n):
        assert set(forward_lightcone(c, q).members) == cone_by_paths(c, q)
        assert set(backward_lightcone(c, q).members) == cone_by_paths(c, q, backward=True)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_forward_backward_duality(seed):
    c = random_all_to_all(6, 3, seed)
    fwd = {i: forward_lightcone(c, i).set for i in range(6)}
    bwd = {j: backward_lightcone(c, j).set for j in range(6)}
    for i, j in itertools.product(range(6), repeat=2):
        assert (j in fwd[i]) == (i in bwd[j])


def test_line_cones_are_intervals():
    for seed in range(20):
        c = random_line_circuit(8, 3, seed)
        for q in range(8):
            assert forward_lightcone(c, q).is_interval()


def test_gate_weight_examples():
    c = _czs(Layout.line(5), [(0, 1, 2)], [(3, 4)])
    assert gate_weight(c, 0, MultiCZGate.of((0, 1, 2)), range(5)) == 3
    assert gate_weight(c, 1, MultiCZGate.of((3, 4)), [0, 1]) == 0
    with pytest.raises(AnalysisError):
        gate_weight(c, 0, MultiCZGate.of((3, 4)), range(5))


def test_counterexample_final_gate_weight():
    # only the k even-column inputs reach row 1; the odd ones stay put
    for k in (2, 3):
        D, _, _ = appendix_d_counterexample(k, 0.5)
        gate = D.layers[-1].czs[0]
        assert gate_weight(D, len(D.layers) - 1, gate, D.inputs) == k


def test_check_separable_examples():
    c = Circuit(Layout.line(3), (0, 1, 2))
    assert check_separable(c, [0, 1, 2])
    cz = _czs(Layout.line(2), [(0, 1)])
    cert = check_separable(cz, [0, 1])
    assert not cert and cert.witness == (0, 1)


def test_independent_set_path_and_edgeless():
    assert independent_set_deg2([0, 1, 2, 3], [(0, 1), (1, 2), (2, 3)]) == {0, 2}
    assert independent_set_deg2([4, 7, 9]) == {4, 7, 9}


def test_independent_set_rejects():
    with pytest.raises(AnalysisError, match="degree"):
        independent_set_deg2(range(4), [(0, 1), (0, 2), (0, 3)])
    with pytest.raises(AnalysisError, match="cycle"):
        independent_set_deg2(range(3), [(0, 1), (1, 2), (2, 0)])


def _random_forest(rng, n):
    order = list(rng.permutation(n))
    edges, cur = [], [order[0]]
    for v in order[1:]:
        if rng.random() < 0.7:
            edges.append((int(cur[-1]), int(v)))
            cur.append(v)
        else:
            cur = [v]
    return edges


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 12))
def test_independent_set_on_random_paths(seed, n):
    rng = np.random.default_rng(seed)
    edges = _random_forest(rng, n)
    s = independent_set_deg2(range(n), edges)
    assert all(not (u in s and v in s) for u, v in edges)
    assert len(s) >= math.ceil(n / 2)
    assert s == independent_set_deg2(range(n), edges)


def test_general_independent_set_bipartite_and_greedy():
    grid = [(0, 1), (1, 2), (3, 4), (4, 5), (0, 3), (1, 4), (2, 5)]
    s = independent_set(range(6), grid)
    assert all(not (u in s and v in s) for u, v in grid) and len(s) == 3
    tri = [(0, 1), (1, 2), (0, 2), (2, 3)]
    s = independent_set(range(4), tri)
    assert all(not (u in s and v in s) for u, v in tri) and len(s) == 2


def test_structure_empty_layer_keeps_all():
    c = Circuit(Layout.line(5), tuple(range(5)))
    assert structure_select_1d(c, range(5), Layer(), 3).kept == tuple(range(5))


def test_structure_good_gate_keeps_one():
    c = Circuit(Layout.line(6), tuple(range(6)))
    L = Layer((), (MultiCZGate.of((0, 1, 2)),))
    sel = structure_select_1d(c, range(6), L, 3)
    assert sel.kept == (0, 3, 4, 5)
    assert sel.good == {(0, 1, 2): 0}
    assert sel.certificate


def test_structure_chain_of_four():
    c = _czs(Layout.line(8), [(0, 1), (2, 3), (4, 5), (6, 7)], inputs=[0, 2, 4, 6])
    L = Layer((), (MultiCZGate.of((1, 2)), MultiCZGate.of((3, 4)), MultiCZGate.of((5, 6))))
    sel = structure_select_1d(c, [0, 2, 4, 6], L, 3)
    assert sel.a2 == (0, 2, 4, 6)
    assert sel.kept == (0, 4)


def test_structure_preconditions_reported():
    c = Circuit(Layout.line(6), tuple(range(6)))
    with pytest.raises(AnalysisError, match="s must be"):
        structure_select_1d(c, range(6), Layer(), 2)
    L = Layer((), (MultiCZGate.of(range(5)),))
    with pytest.raises(AnalysisError, match="meets 5"):
        structure_select_1d(c, range(6), L, 3)
    bad = _czs(Layout.line(3), [(0, 1)])
    with pytest.raises(AnalysisError, match="not I-separable"):
        structure_select_1d(bad, [0, 1], Layer(), 3)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 5))
def test_structure_select_certifies_and_meets_bound(seed, s):
    rng = np.random.default_rng(seed)
    n = 10
    c = random_line_circuit(n, 1, rng, max_support=2)
    I = list(structure_select_1d(c.with_layers(()), range(n), c.layers[0], s).kept)
    prefix = c
    L = Layer((), tuple(MultiCZGate.of(sup) for sup in _random_intervals(rng, n, 4)))
    cones = {i: forward_lightcone(prefix, i).set for i in I}
    if any(sum(1 for i in I if cones[i] & set(g.support)) > s for g in L.czs):
        return
    sel = structure_select_1d(prefix, I, L, s)
    assert sel.certificate
    assert len(sel.kept) >= math.ceil(len(I) / s)


def _random_intervals(rng, n, w):
    q, out = 0, []
    while q < n:
        k = int(rng.integers(1, w + 1))
        if k >= 2 and q + k <= n:
            out.append(tuple(range(q, q + k)))
        q += k
    return out


def test_width2_column_layer_keeps_half():
    lay = Layout.lattice(2, 6)
    c = Circuit(lay, tuple(range(12)))
    L = Layer((), tuple(MultiCZGate.of((lay.qid(0, j), lay.qid(1, j))) for j in range(6)))
    sel = width2_structure_select(c, range(12), L, 3)
    assert len(sel.kept) >= 6
    assert sel.certificate


def test_width2_row_layer_in_row_cones():
    lay = Layout.lattice(2, 6)
    c = Circuit(lay, tuple(range(12)))
    L = Layer((), tuple(MultiCZGate.of((lay.qid(r, j), lay.qid(r, j + 1))) for r in (0, 1) for j in (0, 2, 4)))
    sel = width2_structure_select(c, range(12), L, 2)
    assert len(sel.kept) >= math.ceil(12 / (2 * 2))
    assert sel.certificate


def test_width2_mixed_layer_on_grown_cones():
    lay = Layout.lattice(2, 8)
    prep = [tuple(lay.qid(0, j) for j in (0, 1)), (lay.qid(1, 3), lay.qid(1, 4))]
    c = _czs(lay, prep)
    I = [lay.qid(0, 0), lay.qid(1, 3), lay.qid(0, 5), lay.qid(1, 6), lay.qid(0, 7)]
    c = Circuit(lay, tuple(range(16)), (), c.layers)
    L = Layer((), (
        MultiCZGate.of((lay.qid(0, 1), lay.qid(0, 2))),
        MultiCZGate.of((lay.qid(0, 4), lay.qid(1, 4))),
        MultiCZGate.of((lay.qid(1, 5), lay.qid(1, 6), lay.qid(1, 7))),
    ))
    sel = width2_structure_select(c, I, L, 3)
    assert sel.certificate
    assert len(sel.kept) >= math.ceil(len(I) / (8 * 9))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_width2_random_layers_certify(seed):
    rng = np.random.default_rng(seed)
    lay = Layout.lattice(2, 8)
    used, czs = set(), []
    for _ in range(6):
        if rng.random() < 0.5:
            r, a, w = int(rng.integers(2)), int(rng.integers(0, 7)), int(rng.integers(2, 4))
            sup = [lay.qid(r, x) for x in range(a, min(a + w, 8))]
        else:
            col = int(rng.integers(8))
            sup = [lay.qid(0, col), lay.qid(1, col)]
        if used.isdisjoint(sup):
            used |= set(sup)
            czs.append(MultiCZGate.of(sup))
    c = Circuit(lay, tuple(range(16)))
    sel = width2_structure_select(c, range(16), Layer((), tuple(czs)), 3)
    assert sel.certificate
    assert len(sel.kept) >= math.ceil(16 / 72)


def test_width2_rejects_other_shapes():
    with pytest.raises(AnalysisError):
        width2_structure_select(Circuit(Layout.lattice(3, 3)), [0], Layer(), 3)


def test_backward_disjoint_examples():
    c = Circuit(Layout.line(8), tuple(range(8)))
    assert backward_disjoint_select(c, [1, 3, 5, 7]) == (1, 5)
    assert backward_disjoint_select(c, [4]) == (4,)


def test_backward_disjoint_on_pipeline_like_sets():
    for seed in range(10):
        c = random_line_circuit(10, 2, seed)
        I = [i for i in range(10) if all(not (forward_lightcone(c, i).set & forward_lightcone(c, j).set) for j in range(10) if j != i)]
        if not I:
            continue
        T = backward_disjoint_select(c, I)
        assert len(T) >= math.ceil(len(I) / 2)
        cones = [backward_lightcone(c, t).set for t in T]
        assert all(not (a & b) for a, b in itertools.combinations(cones, 2))


def test_erase_gate_removes_gate():
    c = _czs(Layout.line(3), [(0, 1)], [(1, 2)])
    e = erase_gate(c, 0, MultiCZGate.of((0, 1)))
    assert forward_lightcone(e, 0).members == (0,)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_separable_spectral_sum_below_identity(seed):
    rng = np.random.default_rng(seed)
    c = random_line_circuit(6, 2, rng, ancilla=1, max_support=2)
    singles = [i for i in c.inputs if all(not (forward_lightcone(c, i).set & forward_lightcone(c, j).set) for j in c.inputs if j != i)]
    X = singles[:3]
    cone = set().union(*(forward_lightcone(c, i).set for i in X)) if X else set()
    if not X or len(cone) > 8:
        return
    ev = spectral_sum(c, X, [int(b) for b in rng.integers(0, 2, len(c.inputs) - len(X))])
    assert ev.max() <= 1 + 1e-9
