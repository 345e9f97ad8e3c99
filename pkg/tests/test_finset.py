import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _support import finsets
from fentropy.finset import (
    EMPTY,
    FINSET,
    INTEGER,
    CyclicGroup,
    FinSet,
    FiniteSupportMeasure,
    MeasureFormatError,
    TableGroup,
    check_generating,
    convolution_power,
    convolve,
    delta,
    expected_size_and_max,
    geometric_bar,
    load_measure,
    measure,
    measure_from_dict,
    measure_to_dict,
    save_measure,
    size_and_max,
    symdiff,
    uniform,
)


def atoms_close(mu, nu, tol=1e-12):
    a, b = dict(mu.atoms), dict(nu.atoms)
    keys = set(a) | set(b)
    return all(abs(a.get(k, 0.0) - b.get(k, 0.0)) <= tol for k in keys)


# ---------------------------------------------------------------- FinSet


def test_symdiff_examples():
    assert symdiff(FinSet([1, 2]), FinSet([2, 3])) == FinSet([1, 3])
    t = FinSet([4, 9])
    assert symdiff(t, EMPTY) == t
    assert symdiff(t, t) == EMPTY


def test_size_and_max_examples():
    assert size_and_max(FinSet([3, 7])) == (2, 7)
    assert size_and_max(EMPTY) == (0, 0)
    assert size_and_max(FinSet([1])) == (1, 1)


def test_finset_rejects_nonpositive():
    with pytest.raises(ValueError):
        FinSet([0, 2])
    with pytest.raises(ValueError):
        FinSet.from_mask(1)


def test_finset_large_elements_and_iteration():
    t = FinSet([1000, 3, 70])
    assert t.elements == (3, 70, 1000)
    assert 70 in t and 71 not in t and 0 not in t
    assert t.max == 1000 and len(t) == 3
    assert FinSet([2, 2, 2]) == FinSet([2])


@given(finsets, finsets, finsets)
def test_group_axioms(a, b, c):
    assert (a ^ b) ^ c == a ^ (b ^ c)
    assert a ^ b == b ^ a
    assert a ^ EMPTY == a
    assert a ^ a == EMPTY
    assert set(a ^ b) == set(a) ^ set(b)


@given(finsets)
def test_hash_consistent_with_eq(a):
    assert hash(FinSet(a.elements)) == hash(a)


# ---------------------------------------------------------------- measures


def test_measure_validation():
    with pytest.raises(ValueError):
        FiniteSupportMeasure(((1, 0.5), (2, 0.4)), INTEGER)
    with pytest.raises(ValueError):
        FiniteSupportMeasure(((1, 0.5), (1, 0.5)), INTEGER)
    with pytest.raises(ValueError):
        FiniteSupportMeasure(((1, 1.5), (2, -0.5)), INTEGER)
    # merging helper accepts repeats
    mu = measure([(1, 0.25), (1, 0.25), (2, 0.5)], INTEGER)
    assert dict(mu.atoms) == {1: 0.5, 2: 0.5}


def test_convolve_examples():
    assert convolve(delta(1, INTEGER), delta(1, INTEGER)).atoms == ((2, 1.0),)
    one = FinSet([1])
    assert convolve(delta(one, FINSET), delta(one, FINSET)).atoms == ((EMPTY, 1.0),)
    # the four product pairs: {1}{1} -> {}, {1}{2} -> {1,2}, {2}{1} -> {1,2}, {2}{2} -> {}
    mu = uniform([FinSet([1]), FinSet([2])], FINSET)
    sq = convolve(mu, mu)
    assert dict(sq.atoms) == {EMPTY: 0.5, FinSet([1, 2]): 0.5}


def test_convolve_group_mismatch():
    with pytest.raises(ValueError):
        convolve(delta(1, INTEGER), delta(1, CyclicGroup(3)))


def test_convolve_cyclic_and_table():
    z3 = CyclicGroup(3)
    mu = measure([(1, 0.5), (2, 0.5)], z3)
    sq = convolve(mu, mu)
    assert atoms_close(sq, measure([(2, 0.25), (0, 0.5), (1, 0.25)], z3))
    klein = TableGroup(((0, 1, 2, 3), (1, 0, 3, 2), (2, 3, 0, 1), (3, 2, 1, 0)))
    nu = uniform([1, 2], klein)
    assert atoms_close(convolve(nu, nu), measure([(0, 0.5), (3, 0.5)], klein))


def test_table_group_validation():
    with pytest.raises(ValueError):
        TableGroup(((0, 1), (0, 1)))
    with pytest.raises(ValueError):
        # a Latin square that is not associative
        TableGroup(((0, 1, 2, 3, 4), (1, 0, 3, 4, 2), (2, 4, 0, 1, 3), (3, 2, 4, 0, 1), (4, 3, 1, 2, 0)))


_int_measures = st.lists(
    st.tuples(st.integers(-4, 4), st.floats(0.01, 1.0)), min_size=1, max_size=4
).map(lambda pairs: measure([(g, w / sum(w for _, w in pairs)) for g, w in pairs], INTEGER))

_finset_measures = st.lists(
    st.tuples(st.frozensets(st.integers(1, 6), max_size=3), st.floats(0.01, 1.0)), min_size=1, max_size=4
).map(lambda pairs: measure([(FinSet(t), w / sum(w for _, w in pairs)) for t, w in pairs], FINSET))


@given(_int_measures, _int_measures, _int_measures)
def test_convolve_associative_integers(a, b, c):
    assert atoms_close(convolve(convolve(a, b), c), convolve(a, convolve(b, c)))


@given(_finset_measures, _finset_measures, _finset_measures)
def test_convolve_associative_finsets(a, b, c):
    assert atoms_close(convolve(convolve(a, b), c), convolve(a, convolve(b, c)))


def test_geometric_bar_examples():
    mu = delta(1, INTEGER)
    assert geometric_bar(mu, 0).atoms == ((0, 1.0),)
    bar = geometric_bar(mu, 2)
    # (1/2 d0 + 1/4 d1 + 1/8 d2) / (7/8)
    assert atoms_close(bar, measure([(0, 4 / 7), (1, 2 / 7), (2, 1 / 7)], INTEGER), 1e-15)
    assert bar.tail == 1 / 8


@settings(max_examples=30, deadline=None)
@given(_finset_measures, st.integers(0, 60))
def test_geometric_bar_normalized(mu, n):
    bar = geometric_bar(mu, n)
    assert abs(math.fsum(w for _, w in bar.atoms) - 1.0) <= 1e-12
    assert bar.tail == 2.0 ** (-n - 1)


def test_geometric_bar_matches_power_sum():
    mu = measure([(1, 0.3), (-2, 0.7)], INTEGER)
    n = 6
    direct: dict = {}
    for k in range(n + 1):
        for g, w in convolution_power(mu, k).atoms:
            direct[g] = direct.get(g, 0.0) + 2.0 ** (-k - 1) * w / (1 - 2.0 ** (-n - 1))
    assert atoms_close(geometric_bar(mu, n), measure(direct.items(), INTEGER), 1e-14)


def test_check_generating_examples():
    assert check_generating(delta(1, INTEGER), 2) is False
    assert check_generating(measure([(1, 0.5), (-1, 0.5)], INTEGER), 1) is True
    mu = uniform([FinSet([1]), FinSet([2])], FINSET)
    target = [EMPTY, FinSet([1]), FinSet([2]), FinSet([1, 2])]
    assert check_generating(mu, 2, target) is True
    assert check_generating(mu, 1, target) is False


def test_check_generating_finite_groups():
    assert check_generating(delta(1, CyclicGroup(5)), 5) is True
    assert check_generating(delta(1, CyclicGroup(5)), 4) is False
    assert check_generating(delta(2, CyclicGroup(4)), 10) is False
    # even steps both ways only reach 2Z
    assert check_generating(measure([(2, 0.5), (-2, 0.5)], INTEGER), 3) is False


def test_expected_size_and_max_examples():
    assert expected_size_and_max(delta(EMPTY, FINSET)) == (0.0, 0.0)
    assert expected_size_and_max(delta(FinSet([2]), FINSET)) == (1.0, 2.0)
    mu = measure([(FinSet([1]), 0.5), (FinSet([1, 3]), 0.5)], FINSET)
    assert expected_size_and_max(mu) == (1.5, 2.0)


@given(_finset_measures)
def test_expected_size_at_most_expected_max(mu):
    size, top = expected_size_and_max(mu)
    assert size <= top + 1e-12


# ---------------------------------------------------------------- file format


def test_measure_file_roundtrip(tmp_path):
    for mu in (
        measure([(FinSet([1]), 0.5), (FinSet([1, 2]), 0.5)], FINSET),
        measure([(1, 0.25), (-1, 0.75)], INTEGER),
        measure([(1, 0.5), (2, 0.5)], CyclicGroup(5)),
    ):
        path = tmp_path / "mu.json"
        save_measure(mu, path)
        back = load_measure(path)
        assert back.group == mu.group and atoms_close(back, mu, 0.0)


def test_measure_file_tolerance():
    doc = {"group": "integer", "atoms": [{"g": 1, "w": 0.5}, {"g": 2, "w": 0.5 + 5e-10}]}
    mu = measure_from_dict(doc)
    assert abs(math.fsum(w for _, w in mu.atoms) - 1) < 1e-15
    doc["atoms"][1]["w"] = 0.5 + 1e-8
    with pytest.raises(MeasureFormatError):
        measure_from_dict(doc)


@pytest.mark.parametrize(
    "doc",
    [
        {"group": "free", "atoms": [{"g": 1, "w": 1.0}]},
        {"group": "integer"},
        {"group": "integer", "atoms": []},
        {"group": "integer", "atoms": [{"g": 1.5, "w": 1.0}]},
        {"group": "finset", "atoms": [{"g": [2, 1], "w": 1.0}]},
        {"group": "finset", "atoms": [{"g": [0], "w": 1.0}]},
        {"group": "cyclic", "atoms": [{"g": 1, "w": 1.0}]},
        {"group": "cyclic", "n": 3, "atoms": [{"g": 1, "w": 0.5}, {"g": 4, "w": 0.5}]},
        {"group": "integer", "atoms": [{"g": 1, "w": -0.5}, {"g": 2, "w": 1.5}]},
    ],
)
def test_malformed_measure_documents(doc):
    with pytest.raises(MeasureFormatError):
        measure_from_dict(doc)


def test_measure_to_dict_is_json():
    mu = measure([(FinSet([3, 1]), 1.0)], FINSET)
    assert json.loads(json.dumps(measure_to_dict(mu))) == {"group": "finset", "atoms": [{"g": [1, 3], "w": 1.0}]}
