from collections import Counter

import pytest
from hypothesis import given, strategies as st

from mlfactor.prng import Prng, splitmix64


def test_xoshiro_reference_vector():
    # Published first outputs of xoshiro256** from state {1, 2, 3, 4}.
    rng = Prng.from_state([1, 2, 3, 4])
    assert [rng.next_u64() for _ in range(4)] == [11520, 0, 1509978240, 1215971899390074240]


def test_splitmix_reference_vector():
    assert splitmix64(0)[1] == 0xE220A8397B1DCDAF


def test_same_seed_same_stream():
    a, b = Prng(99), Prng(99)
    assert [a.next_u64() for _ in range(50)] == [b.next_u64() for _ in range(50)]
    assert Prng(1).next_u64() != Prng(2).next_u64()


@given(st.integers(-(2**70), 2**70), st.integers(0, 2**130))
def test_uniform_int_in_range(lo, span):
    rng = Prng(lo ^ span)
    for _ in range(5):
        assert lo <= rng.uniform_int(lo, lo + span) <= lo + span


def test_uniform_int_unbiased_small_range():
    rng = Prng(7)
    counts = Counter(rng.uniform_int(0, 5) for _ in range(60_000))
    assert set(counts) == set(range(6))
    # chi-square, 5 degrees of freedom; 20.5 is the 0.999 quantile
    chi2 = sum((c - 10_000) ** 2 / 10_000 for c in counts.values())
    assert chi2 < 20.5


def test_uniform_int_empty_range():
    with pytest.raises(ValueError):
        Prng(0).uniform_int(3, 2)


def test_shuffle_is_permutation_and_deterministic():
    a, b = list(range(100)), list(range(100))
    Prng(5).shuffle(a)
    Prng(5).shuffle(b)
    assert a == b and sorted(a) == list(range(100)) and a != list(range(100))


def test_random_unit_interval():
    rng = Prng(3)
    xs = [rng.random() for _ in range(1000)]
    assert all(0.0 <= x < 1.0 for x in xs)
