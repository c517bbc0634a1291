from __future__ import annotations

import json
import math

import pytest

from geoqac import codec
from geoqac.circuit import Circuit, Layer, Layout, MultiCZGate
from geoqac.families import erasure_instance, product_erasure_instance, random_all_to_all, random_line_circuit
from geoqac.lightcone import AnalysisError, backward_disjoint_select, check_separable
from geoqac.restriction import (
    contiguous_restriction,
    corrected_erasure_bound,
    erasure_error,
    mixedness_error,
    output_distance,
    restriction_pipeline_1d,
    stated_erasure_bound,
    threshold_s,
)
from geoqac.synthesis import appendix_d_counterexample


def test_threshold_is_base_two_ceiling():
    assert threshold_s(10, 0.05) == 8
    assert threshold_s(8, 0.999) == 4
    assert threshold_s(2, 0.5) == 2
    with pytest.raises(AnalysisError):
        threshold_s(4, 1.0)


def test_supports_of_two_never_erased():
    c = random_line_circuit(8, 1, seed=1, max_support=2)
    out = restriction_pipeline_1d(c, 0.9)
    assert out.erased_gates == []
    assert out.certificate


def test_pipeline_n8_s3_survivors():
    # s = ceil(log2(8 / eps)) cannot reach 3 at n = 8 for eps < 1, so the smallest threshold is 4
    c = Circuit(Layout.line(8), tuple(range(8)), (), (Layer((), (MultiCZGate.of((0, 1, 2)), MultiCZGate.of((3, 4, 5)))),))
    out = restriction_pipeline_1d(c, 0.999)
    assert out.s == 4
    assert len(out.surviving_set) >= math.ceil(8 / out.s)
    assert out.certificate


def test_pipeline_erases_heavy_gate():
    c = Circuit(Layout.line(6), tuple(range(6)), (), (Layer((), (MultiCZGate.of(range(6)),)),))
    out = restriction_pipeline_1d(c, 0.99, empirical=True)
    assert out.s == 3
    assert [(g.layer, g.support, g.weight) for g in out.erased_gates] == [(0, tuple(range(6)), 6)]
    assert out.surviving_set == tuple(range(6))
    # a CZ on basis inputs only adds a phase
    assert out.empirical_error == pytest.approx(0.0, abs=1e-12)


def test_pipeline_rejects_non_line():
    with pytest.raises(AnalysisError, match="line layout"):
        restriction_pipeline_1d(random_all_to_all(3, 1, 0), 0.1)


@pytest.mark.parametrize("seed", range(4))
def test_pipeline_empirical_error_within_bound(seed):
    c = random_line_circuit(8, 2, seed, max_support=4)
    out = restriction_pipeline_1d(c, 0.5, empirical=True)
    assert out.certificate
    assert len(out.surviving_set) >= out.extras["size_bound"]
    assert out.empirical_error <= out.analytic_error_bound + 1e-9
    T = backward_disjoint_select(out.approx_circuit, out.surviving_set)
    assert len(T) >= math.ceil(len(out.surviving_set) / 2)


def test_report_roundtrips_through_codec(tmp_path):
    c = random_line_circuit(6, 2, 3)
    out = restriction_pipeline_1d(c, 0.05, seed=9)
    p = tmp_path / "r.json"
    codec.save(out.approx_circuit, p, restriction_report=out.to_dict())
    doc = json.loads(p.read_text())
    assert doc["restriction_report"]["seed"] == 9
    assert doc["restriction_report"]["separable"] is True
    assert codec.load(p) == out.approx_circuit


def test_contiguous_identity_layers():
    c = Circuit(Layout.line(5), tuple(range(5)))
    out = contiguous_restriction(c, 2, check_mixed=True)
    assert out.surviving_set == tuple(range(5))
    assert out.erased_gates == []
    assert out.extras["mixedness_errors"] == [0.0]


def test_contiguous_base_case_is_maximally_mixed():
    c = random_line_circuit(4, 0, seed=0, ancilla=1)
    assert mixedness_error(c.with_layers(()), [0, 1, 2, 3]) < 1e-12


def test_contiguous_straddling_gates():
    n = 10
    layers = (
        Layer((), (MultiCZGate.of((n - 1, n)),)),
        Layer((), (MultiCZGate.of((n - 2, n - 1)), MultiCZGate.of((n, n + 1)))),
    )
    c = Circuit(Layout.line(n + 2), tuple(range(n)), ((n, "zero"), (n + 1, "zero")), layers)
    out = contiguous_restriction(c, 2, check_mixed=True)
    assert len(out.surviving_set) >= n - 8
    assert out.surviving_set == tuple(range(n - 2))
    assert max(out.extras["mixedness_errors"]) < 1e-12


@pytest.mark.parametrize("seed", range(4))
def test_contiguous_conditions_hold(seed):
    c = random_line_circuit(7, 2, seed, ancilla=1)
    out = contiguous_restriction(c, 3, check_mixed=True, empirical=True)
    assert max(out.extras["mixedness_errors"]) < 1e-10
    assert out.extras["backward_growth"] <= out.extras["backward_growth_bound"]
    assert len(out.surviving_set) >= out.extras["size_bound"]


def test_contiguous_rejects_gapped_inputs():
    c = Circuit(Layout.line(4), (0, 2))
    with pytest.raises(AnalysisError, match="contiguous"):
        contiguous_restriction(c, 2)


def test_erasure_on_phase_only_gate_is_free():
    # ancilla fixed in |1>: the gate only adds a global phase to each branch
    c = Circuit(Layout.line(2), (), ((0, "one"), (1, "one")), (Layer((), (MultiCZGate.of((0, 1)),)),))
    assert erasure_error(c, 0, MultiCZGate.of((0, 1))) == pytest.approx(0.0, abs=1e-12)


def test_hadamard_pair_exceeds_stated_erasure_bound():
    inst = product_erasure_instance(2)
    err = erasure_error(inst.circuit, inst.layer, inst.gate)
    assert err == pytest.approx(math.sqrt(3), abs=1e-12)
    assert err > stated_erasure_bound(2)
    assert err <= corrected_erasure_bound(2)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_erasure_instances_are_separable_and_covered(k):
    for seed in range(5):
        inst = erasure_instance(k, seed)
        pre = inst.circuit.with_layers(inst.circuit.layers[:-1] + (Layer(inst.circuit.layers[-1].singles, ()),))
        cert = check_separable(pre, inst.cones)
        assert cert
        assert all(cone <= set(inst.gate.support) for cone in cert.cones.values())


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_erasure_within_square_root_bound(k):
    for seed in range(8):
        inst = erasure_instance(k, 1000 + 17 * k + seed)
        err = erasure_error(inst.circuit, inst.layer, inst.gate)
        assert err <= corrected_erasure_bound(k) + 1e-9


def test_counterexample_erasure_exceeds_one():
    for k in (2, 3):
        D, C, _ = appendix_d_counterexample(k, 1 - 1 / k)
        gate = D.layers[-1].czs[0]
        assert erasure_error(D, len(D.layers) - 1, gate, samples=8, seed=1) > 0
        assert output_distance(D, C, samples=None) > 0


def test_output_distance_sampling_is_seeded():
    c = random_line_circuit(13, 1, seed=4)
    d = random_line_circuit(13, 1, seed=5)
    a = output_distance(c, d, samples=4, seed=2)
    b = output_distance(c, d, samples=4, seed=2)
    assert a == b
    assert 0 < a <= 2
