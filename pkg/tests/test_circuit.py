from __future__ import annotations

import itertools
import json

import numpy as np
import pytest

from geoqac import gates
from geoqac.circuit import (
    Circuit,
    CircuitBuilder,
    CircuitError,
    GeneralizedToffoli,
    Layer,
    Layout,
    MultiCZGate,
    SingleQubitGate,
    compose,
    erase,
    inverse,
    normalize,
    toffoli_convert,
    validate,
)
from geoqac.codec import SchemaError, codec_roundtrip, loads
from geoqac.families import random_all_to_all
from geoqac.simulator import StateVector, circuit_unitary, evolve, run
from geoqac.synthesis import cat_1d, parity_line


def _cz_circuit(layout, *supports):
    return Circuit(layout, layers=tuple(Layer((), (MultiCZGate.of(s),)) for s in supports))


def test_layout_sizes():
    assert Layout.line(4).num_qubits == 4
    assert Layout.all_to_all(3).num_qubits == 3
    lat = Layout.lattice(2, 3)
    assert lat.num_qubits == 6
    assert lat.qid(1, 2) == 5
    assert lat.coord(4) == (1, 1)


@pytest.mark.parametrize("bad", [lambda: Layout.line(0), lambda: Layout.lattice(0, 3)])
def test_layout_rejects_empty(bad):
    with pytest.raises(CircuitError):
        bad()


def test_line_contiguous_support_is_valid():
    assert validate(_cz_circuit(Layout.line(4), (0, 1, 2))).ok


def test_line_gap_is_reported():
    rep = validate(_cz_circuit(Layout.line(4), (0, 2)))
    assert not rep.ok
    assert "non-contiguous support on line" in rep.messages()[0]


def test_lattice_diagonal_is_reported():
    lat = Layout.lattice(3, 3)
    rep = validate(_cz_circuit(lat, (lat.qid(1, 1), lat.qid(2, 2))))
    assert "support spans neither a single row nor a single column" in rep.messages()[0]


def test_lattice_row_and_column_supports_are_valid():
    lat = Layout.lattice(3, 4)
    assert validate(_cz_circuit(lat, [lat.qid(1, c) for c in range(4)])).ok
    assert validate(_cz_circuit(lat, [lat.qid(r, 2) for r in range(3)])).ok


def test_overlapping_and_disjointness_checks():
    c = Circuit(Layout.line(3), layers=(Layer((), (MultiCZGate.of((0, 1)), MultiCZGate.of((1, 2)))),))
    assert any("overlapping" in m for m in validate(c).messages())
    c2 = Circuit(Layout.line(3), inputs=(0,), ancilla=((0, "zero"),))
    assert any("both input and ancilla" in m for m in validate(c2).messages())


def test_non_unitary_single_is_reported():
    g = SingleQubitGate.of(0, [[1, 0], [0, 1.001]])
    assert not validate(Circuit(Layout.line(1), layers=(Layer((g,), ()),))).ok


def test_depth_counts_only_cz_layers():
    c = _cz_circuit(Layout.line(3), (0, 1), (1, 2))
    assert c.depth == 2
    c2 = c.with_layers(c.layers + (Layer((SingleQubitGate.of(0, gates.H),), ()),))
    assert c2.depth == 2


def test_toffoli_single_control_is_cnot():
    first, second = toffoli_convert(GeneralizedToffoli.of([0], 1))
    c = Circuit(Layout.line(2), layers=(first, second))
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    assert np.allclose(circuit_unitary(c), cnot, atol=1e-12)


def test_single_qubit_cz_is_z():
    c = _cz_circuit(Layout.line(1), (0,))
    assert np.allclose(circuit_unitary(c), gates.Z)


def test_toffoli_matches_standard_matrix():
    first, second = toffoli_convert(GeneralizedToffoli.of([0, 1], 2))
    U = circuit_unitary(Circuit(Layout.line(3), layers=(first, second)))
    T = np.eye(8)
    T[[6, 7]] = T[[7, 6]]
    assert np.allclose(U, T, atol=1e-12)


@pytest.mark.parametrize("size", [1, 2, 3, 4])
def test_cz_to_toffoli_roundtrip_is_unitary_preserving(size):
    g = MultiCZGate.of(range(size))
    h, tof, h2 = toffoli_convert(g)
    first, second = toffoli_convert(tof)
    ref = circuit_unitary(_cz_circuit(Layout.all_to_all(size), range(size)))
    conv = Circuit(Layout.all_to_all(size), layers=(Layer((h,), ()),) + (first, second) + (Layer((h2,), ()),))
    assert np.max(np.abs(circuit_unitary(conv) - ref)) < 1e-12


def test_compose_with_empty_and_depth_additivity():
    c = parity_line(3)
    assert compose(c, c.with_layers(())) == c
    a = _cz_circuit(Layout.line(3), (0, 1), (1, 2))
    b = _cz_circuit(Layout.line(3), (0, 1), (1, 2), (0, 1, 2))
    assert compose(a, b).depth == 5


def test_compose_layout_mismatch():
    with pytest.raises(CircuitError):
        compose(Circuit(Layout.line(2)), Circuit(Layout.line(3)))


def test_parity_then_inverse_is_identity_on_basis():
    c = parity_line(3)
    cc = compose(c, inverse(c))
    for bits in itertools.product((0, 1), repeat=4):
        st = run(cc, list(bits))
        assert abs(st.amplitude(c.initial_bits(list(bits)))) ** 2 == pytest.approx(1.0, abs=1e-10)


def test_inverse_of_hadamard_layer():
    lay = Layer((SingleQubitGate.of(0, gates.H), SingleQubitGate.of(1, gates.H)), ())
    c = Circuit(Layout.line(2), layers=(lay,))
    assert np.allclose(circuit_unitary(inverse(c)), circuit_unitary(c))


def test_inverse_is_involution():
    c = normalize(random_all_to_all(3, 2, seed=4))
    cc = inverse(inverse(c))
    assert len(cc.layers) == len(c.layers)
    assert np.allclose(circuit_unitary(cc), circuit_unitary(c), atol=1e-12)
    for L1, L2 in zip(cc.layers, c.layers):
        assert L1.czs == L2.czs


def test_random_circuit_times_inverse_on_random_states():
    rng = np.random.default_rng(7)
    c = random_all_to_all(3, 2, seed=11)
    cc = compose(c, inverse(c))
    for _ in range(10):
        v = rng.normal(size=8) + 1j * rng.normal(size=8)
        v /= np.linalg.norm(v)
        out = evolve(cc, StateVector.from_amps(v))
        assert abs(np.vdot(v, out.amps)) ** 2 == pytest.approx(1.0, abs=1e-10)


def test_erase_removes_exactly_one_gate():
    c = _cz_circuit(Layout.line(3), (0, 1), (1, 2))
    e = erase(c, 1, MultiCZGate.of((1, 2)))
    assert e.depth == 1
    with pytest.raises(CircuitError):
        erase(c, 0, MultiCZGate.of((1, 2)))


def test_builder_merges_adjacent_hadamards():
    b = CircuitBuilder(Layout.line(3))
    b.cnots([(0, 1)])
    b.cnots([(2, 1)])
    c = b.build()
    # the H closing the first CNOT cancels the H opening the second
    assert all(g.target != 1 for g in c.layers[1].singles)


def test_codec_empty_line_roundtrip():
    c = Circuit(Layout.line(1))
    assert codec_roundtrip(codec_roundtrip(c)) == c


def test_codec_cat_roundtrip_and_validates():
    c = cat_1d(8)
    back = codec_roundtrip(codec_roundtrip(c))
    assert back == c
    assert validate(back).ok


def test_codec_missing_layout_names_field():
    doc = json.loads(codec_roundtrip(cat_1d(2)))
    del doc["layout"]
    with pytest.raises(SchemaError, match="layout"):
        loads(json.dumps(doc))


def test_codec_rejects_garbage():
    with pytest.raises(SchemaError):
        loads(b"{not json")
