from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geoqac.boolean import by_name, constant, dictator, from_table, majority, parity
from geoqac.fourier import (
    FourierError,
    balanced_assignment_prob,
    fwht,
    majority_weight1_closed,
    spectrum,
    weight,
    weight_at_most,
)


def _direct_coefficient(table, n, subset):
    # straight from the definition, no transform
    acc = 0.0
    for k, x in enumerate(itertools.product((0, 1), repeat=n)):
        chi = (-1) ** sum(x[i] for i in subset)
        acc += (1 - 2 * int(table[k])) * chi
    return acc / 2**n


def test_fwht_small():
    assert np.allclose(fwht([1, 0, 0, 0]), [1, 1, 1, 1])
    assert np.allclose(fwht([1, 1, 1, 1]), [4, 0, 0, 0])
    with pytest.raises(FourierError):
        fwht([1, 2, 3])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.data())
def test_spectrum_matches_definition(n, data):
    table = data.draw(st.lists(st.integers(0, 1), min_size=2**n, max_size=2**n))
    spec = spectrum(from_table("t", table), n)
    for r in range(n + 1):
        for S in itertools.combinations(range(n), r):
            assert spec.coefficient(S) == pytest.approx(_direct_coefficient(table, n, S), abs=1e-12)
    assert spec.total() == pytest.approx(1.0)


def test_parity_spectrum_is_top_character():
    for n in range(1, 11):
        spec = spectrum(parity(n))
        assert spec.coefficient(range(n)) == pytest.approx(1.0)
        if n >= 2:
            assert weight_at_most(spec, 1) == pytest.approx(0.0, abs=1e-12)


def test_constant_spectrum():
    # f = 0 encodes as the +1 constant; f = 1 as -1
    assert spectrum(constant(3, 0)).coefficient(()) == pytest.approx(1.0)
    assert spectrum(constant(3, 1)).coefficient(()) == pytest.approx(-1.0)
    assert weight(spectrum(constant(3, 1)), 0) == pytest.approx(1.0)


def test_dictator_weight_one():
    spec = spectrum(dictator(4, 2))
    assert spec.coefficient((2,)) == pytest.approx(1.0)
    assert weight(spec, 1) == pytest.approx(1.0)


def test_maj3_level_one_weight():
    spec = spectrum(majority(3))
    assert weight(spec, 1) == pytest.approx(0.75, abs=1e-15)
    assert weight(spec, 3) == pytest.approx(0.25, abs=1e-15)
    for i in range(3):
        assert spec.coefficient((i,)) == pytest.approx(0.5)


def test_by_name_aliases():
    assert by_name("maj", 5).truth_table().tolist() == majority(5).truth_table().tolist()
    assert by_name("par", 3).truth_table().tolist() == parity(3).truth_table().tolist()


@pytest.mark.parametrize("n", [1, 3, 5, 7, 9, 11, 13])
def test_majority_closed_form_matches_enumeration(n):
    assert weight(spectrum(majority(n)), 1) == pytest.approx(majority_weight1_closed(n), abs=1e-12)


def test_majority_closed_form_values():
    assert majority_weight1_closed(3) == 0.75
    assert majority_weight1_closed(5) == 720 / 1024 == 0.703125
    vals = [majority_weight1_closed(n) for n in range(3, 41, 2)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    # limit 2/pi from above
    assert all(v > 2 / math.pi for v in vals)
    with pytest.raises(FourierError):
        majority_weight1_closed(4)


@pytest.mark.parametrize("n", [3, 5, 7, 9])
def test_majority_low_degree_weight_at_most_three_quarters(n):
    assert weight_at_most(spectrum(majority(n)), 1) <= 0.75 + 1e-12


def test_balanced_assignment_values():
    assert balanced_assignment_prob(2) == 0.5
    assert balanced_assignment_prob(4) == 0.375
    for m in range(2, 101, 2):
        assert balanced_assignment_prob(m) >= 0.7 / math.sqrt(m)
    with pytest.raises(FourierError):
        balanced_assignment_prob(3)


def test_balanced_assignment_matches_counting():
    for m in (2, 4, 6, 8):
        hits = sum(1 for x in itertools.product((0, 1), repeat=m) if sum(x) == m // 2)
        assert balanced_assignment_prob(m) == hits / 2**m


def test_spectrum_rejects_large_n():
    with pytest.raises(FourierError):
        spectrum(lambda x: 0, 17)
