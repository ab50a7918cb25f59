"""Count vectors, type enumeration, and the replacement metric."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genbound.errors import InputError, ResourceLimitError
from genbound.types_core import (
    Alphabet,
    CountVector,
    SourceDistribution,
    dataset_distance,
    enumerate_types,
    load_loss_csv,
    load_source_csv,
    num_types,
    num_types_upper_bound,
    sigma_sub_gaussian,
    type_enumeration_cap,
    type_index,
    type_of,
    type_probability,
)

count_vectors = st.integers(2, 4).flatmap(
    lambda m: st.lists(st.integers(0, 12), min_size=m, max_size=m)
).filter(lambda c: sum(c) >= 1).map(lambda c: CountVector(tuple(c)))


def paired_counts(max_symbols=4, max_count=12):
    """Two count vectors over the same alphabet with equal totals."""

    def fix_total(pair):
        a, b = pair
        total = max(sum(a), sum(b), 1)
        a = list(a)
        b = list(b)
        for vec in (a, b):
            i = 0
            while sum(vec) < total:
                vec[i % len(vec)] += 1
                i += 1
            while sum(vec) > total:
                j = max(range(len(vec)), key=vec.__getitem__)
                vec[j] -= 1
        return CountVector(tuple(a)), CountVector(tuple(b))

    return st.integers(2, max_symbols).flatmap(
        lambda m: st.tuples(
            st.lists(st.integers(0, max_count), min_size=m, max_size=m),
            st.lists(st.integers(0, max_count), min_size=m, max_size=m),
        )
    ).map(fix_total).filter(lambda p: p[0].n >= 1)


class TestAlphabet:
    def test_size_floor(self):
        with pytest.raises(InputError):
            Alphabet(1)

    def test_labels_must_match_size(self):
        with pytest.raises(InputError):
            Alphabet(2, labels=("a", "b", "c"))

    def test_default_symbol_names(self):
        assert Alphabet(3).symbol_names() == ("0", "1", "2")
        assert Alphabet(2, labels=("heads", "tails")).symbol_names() == (
            "heads", "tails",
        )


class TestCountVector:
    def test_rejects_negative(self):
        with pytest.raises(InputError):
            CountVector((3, -1))

    def test_rejects_empty_dataset(self):
        with pytest.raises(InputError):
            CountVector((0, 0))

    def test_rejects_single_symbol(self):
        with pytest.raises(InputError):
            CountVector((4,))

    def test_frequencies_sum_to_one(self):
        s = CountVector((3, 1, 4))
        np.testing.assert_allclose(s.frequencies().sum(), 1.0)
        assert s.n == 8
        assert s.alphabet_size == 3

    def test_csv_field_round_trip(self):
        s = CountVector((0, 7, 3))
        assert CountVector.from_csv_field(s.to_csv_field()) == s

    def test_csv_field_rejects_junk(self):
        with pytest.raises(InputError):
            CountVector.from_csv_field("1;2")


class TestSourceDistribution:
    def test_rejects_unnormalized(self):
        with pytest.raises(InputError):
            SourceDistribution([0.5, 0.6])

    def test_rejects_negative_mass(self):
        with pytest.raises(InputError):
            SourceDistribution([1.2, -0.2])

    def test_uniform(self):
        src = SourceDistribution.uniform(4)
        np.testing.assert_allclose(src.probs, 0.25)

    def test_probs_read_only(self):
        src = SourceDistribution.uniform(2)
        with pytest.raises(ValueError):
            src.probs[0] = 0.9


def test_type_of_counts_symbols():
    s = type_of([0, 1, 1, 2, 1], Alphabet(3))
    assert s == CountVector((1, 3, 1))


def test_type_of_rejects_out_of_range():
    with pytest.raises(InputError):
        type_of([0, 3], Alphabet(3))


def test_type_of_rejects_empty():
    with pytest.raises(InputError):
        type_of([], Alphabet(2))


def test_distance_counts_replacements():
    # one replacement: swap a z0 for a z1
    assert dataset_distance(CountVector((3, 1)), CountVector((2, 2))) == 1
    assert dataset_distance(CountVector((4, 0, 0)), CountVector((0, 2, 2))) == 4


def test_distance_rejects_mismatched_totals():
    with pytest.raises(InputError):
        dataset_distance(CountVector((2, 1)), CountVector((2, 2)))


@given(paired_counts())
def test_distance_symmetry_and_identity(pair):
    a, b = pair
    d = dataset_distance(a, b)
    assert d == dataset_distance(b, a)
    assert (d == 0) == (a == b)
    assert isinstance(d, int)


@given(st.tuples(paired_counts(), st.randoms(use_true_random=False)))
def test_distance_triangle(args):
    (a, b), rng = args
    # build c by shuffling a's mass around, keeping the total
    counts = list(a.counts)
    for _ in range(rng.randrange(4)):
        i = rng.randrange(len(counts))
        j = rng.randrange(len(counts))
        if counts[i] > 0:
            counts[i] -= 1
            counts[j] += 1
    c = CountVector(tuple(counts))
    assert dataset_distance(a, b) <= dataset_distance(a, c) + dataset_distance(c, b)


def test_num_types_small_values():
    assert num_types(2, 4) == 5
    assert num_types(3, 4) == 15
    assert num_types(2, 1) == 2


@given(st.integers(2, 8), st.integers(1, 50))
def test_num_types_upper_bound_claim(m, n):
    exact = num_types(m, n)
    cap = num_types_upper_bound(m, n)
    assert exact <= cap
    assert (exact == cap) == (m == 2)


def test_enumerate_types_matches_count_and_order():
    types = list(enumerate_types(3, 4))
    assert len(types) == num_types(3, 4)
    assert types == sorted(types, key=lambda s: s.counts)
    assert all(s.n == 4 for s in types)
    for i, s in enumerate(types):
        assert type_index(s) == i


def test_enumeration_cap_enforced():
    with pytest.raises(ResourceLimitError) as err:
        list(enumerate_types(4, 100, cap=10))
    assert "GENBOUND_TYPE_CAP" in str(err.value)


def test_cap_env_var(monkeypatch):
    monkeypatch.setenv("GENBOUND_TYPE_CAP", "123")
    assert type_enumeration_cap() == 123
    monkeypatch.setenv("GENBOUND_TYPE_CAP", "not-a-number")
    with pytest.raises(InputError):
        type_enumeration_cap()


def test_type_probability_binomial_case():
    src = SourceDistribution([0.3, 0.7])
    s = CountVector((2, 3))
    expected = math.comb(5, 2) * 0.3**2 * 0.7**3
    assert math.isclose(type_probability(s, src), expected, rel_tol=1e-12)


def test_type_probability_zero_outside_support():
    src = SourceDistribution([1.0, 0.0])
    assert type_probability(CountVector((1, 1)), src) == 0.0
    assert type_probability(CountVector((2, 0)), src) == 1.0


@given(
    st.integers(2, 3),
    st.integers(1, 9),
    st.lists(st.floats(0.01, 1.0), min_size=3, max_size=3),
)
@settings(max_examples=50)
def test_type_probabilities_sum_to_one(m, n, raw):
    total = math.fsum(raw[:m])
    src = SourceDistribution([x / total for x in raw[:m]])
    mass = math.fsum(type_probability(s, src) for s in enumerate_types(m, n))
    assert math.isclose(mass, 1.0, abs_tol=1e-12)


def test_type_probability_large_n_stays_finite():
    # big multinomial coefficients must not overflow to inf
    src = SourceDistribution.uniform(2)
    s = CountVector((600, 600))
    p = type_probability(s, src)
    assert 0.0 < p < 1.0


def test_sigma_from_loss_range():
    table = np.array([[0.0, 1.0], [0.25, 0.75]])
    assert sigma_sub_gaussian(table) == 0.5
    assert sigma_sub_gaussian(np.array([[0.4, 0.4]])) == 0.0


def test_sigma_rejects_bad_tables():
    with pytest.raises(InputError):
        sigma_sub_gaussian(np.array([1.0, 2.0]))
    with pytest.raises(InputError):
        sigma_sub_gaussian(np.array([[np.inf, 0.0]]))


def test_source_csv_round_trip(tmp_path):
    path = tmp_path / "source.csv"
    path.write_text("z0,z1,z2\n0.2,0.3,0.5\n")
    src, labels = load_source_csv(str(path))
    assert labels == ("z0", "z1", "z2")
    np.testing.assert_allclose(src.probs, [0.2, 0.3, 0.5])


def test_loss_csv_round_trip(tmp_path):
    path = tmp_path / "loss.csv"
    path.write_text("z0,z1\n0.0,1.0\n1.0,0.0\n0.5,0.5\n")
    table, labels = load_loss_csv(str(path))
    assert labels == ("z0", "z1")
    assert table.shape == (3, 2)
    assert sigma_sub_gaussian(table) == 0.5


def test_source_csv_rejects_bad_row(tmp_path):
    path = tmp_path / "source.csv"
    path.write_text("z0,z1\n0.9,0.2\n")
    with pytest.raises(InputError):
        load_source_csv(str(path))
