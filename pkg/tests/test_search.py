import itertools
import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from mlfactor.fermat import DomainError
from mlfactor.neuralnet import TrainConfig
from mlfactor.prng import Prng
from mlfactor.search import (
    RSA_260,
    Decision,
    SearchConfig,
    Status,
    TrainedClassifierProvider,
    Verdict,
    decide,
    estimate_success_probability,
    factor_ml_binary_search,
    midpoint,
    probe_lawrence,
)
from mlfactor.semigen import RatioInterval, random_prime_pair

N_LAWRENCE = 748543215795445052722625573101291605706283989


def cfg(lo=1, hi=16, **kw):
    return SearchConfig(RatioInterval(lo, hi), **kw)


def test_midpoint_examples():
    assert midpoint(RatioInterval(1, 3)) == 2
    assert midpoint(RatioInterval(2, 3)) == Fraction(5, 2)
    c = Fraction(210381, 144089)
    eps = Fraction(1, 10**6)
    assert midpoint(RatioInterval(c - eps, c + eps)) == c


def test_probe_lawrence_examples():
    res = probe_lawrence(N_LAWRENCE, Fraction(210381, 144089), cfg())
    assert res.succeeded and res.factor == 33059500175075655435169
    assert res.iterations == 1269  # see test_fermat for the count derivation
    assert probe_lawrence(15, Fraction(1), cfg()).factor == 3


def test_probe_lawrence_far_ratio_fails():
    n, p, q = random_prime_pair(100, RatioInterval(1, Fraction(101, 100)), Prng(8))
    res = probe_lawrence(n, Fraction(7), cfg(max_iter_lawrence=2000))
    assert not res.succeeded and res.factor == 1


def test_probe_uses_bounded_denominator():
    c = Fraction(2**70 + 1, 2**70)
    res = probe_lawrence(15, c, cfg(max_den_lawrence=2**10))
    assert res.ratio.denominator <= 2**10


def test_fifteen_factored_at_depth_zero(fixed_factory):
    never = fixed_factory(Verdict(1.0, False), Verdict(1.0, False))
    out = factor_ml_binary_search(15, cfg(1, 4), never)
    assert out.status is Status.FACTORED and out.factor in (3, 5)
    assert len(out.trace) == 1 and out.trace[0].midpoint == Fraction(5, 2)
    assert out.trace[0].lawrence_result.iterations == 1


def semiprimes_64(count, seed):
    rng = Prng(seed)
    return [random_prime_pair(64, RatioInterval(1, 16), rng) for _ in range(count)]


@pytest.mark.parametrize("n,p,q", semiprimes_64(10, 77))
def test_oracle_search_factors_and_keeps_ratio_inside(n, p, q, oracle_factory):
    oracle = oracle_factory(p, q)
    out = factor_ml_binary_search(n, cfg(max_depth=32), oracle)
    assert out.status is Status.FACTORED
    assert 1 < out.factor < n and n % out.factor == 0
    r = Fraction(p, q)
    for step in out.trace:
        assert step.interval.lo < r < step.interval.hi
    for a, b in zip(out.trace, out.trace[1:]):
        assert b.interval.width == a.interval.width / 2


def test_forced_conflict(fixed_factory):
    n, p, q = random_prime_pair(64, RatioInterval(8, 16), Prng(1))
    stub = fixed_factory(Verdict(0.9, False), Verdict(0.9, False))
    out = factor_ml_binary_search(n, cfg(1, 2, max_iter_lawrence=10), stub)
    assert out.status is Status.STOPPED_CONFLICT and out.factor is None
    assert len(out.trace) == 1 and out.trace[0].decision is Decision.STOP_CONFLICT
    assert (out.trace[0].c_lower, out.trace[0].c_upper) == (False, False)


def test_forced_low_confidence(fixed_factory):
    n, p, q = random_prime_pair(64, RatioInterval(8, 16), Prng(1))
    stub = fixed_factory(Verdict(0.6, True), Verdict(0.55, False))
    out = factor_ml_binary_search(n, cfg(1, 2, p_min=0.7, max_iter_lawrence=10), stub)
    assert out.status is Status.STOPPED_LOW_CONFIDENCE
    assert out.trace[0].p_lower == 0.6 and out.trace[0].p_upper == 0.55


def test_depth_exhausted(fixed_factory):
    n, p, q = random_prime_pair(64, RatioInterval(8, 16), Prng(1))
    stub = fixed_factory(Verdict(0.9, True), Verdict(0.8, False))
    out = factor_ml_binary_search(n, cfg(1, 2, max_iter_lawrence=10, max_depth=3), stub)
    assert out.status is Status.DEPTH_EXHAUSTED and len(out.trace) == 3
    assert all(s.decision is Decision.DESCEND_LOWER for s in out.trace)


def test_decision_table_exhaustive():
    accs = [0.4, 0.6, 0.8]
    for cl, cu, pl, pu in itertools.product([False, True], [False, True], accs, accs):
        d = decide(cl, cu, pl, pu, p_min=0.5)
        if min(pl, pu) < 0.5:
            assert d is Decision.STOP_CONFIDENCE
        elif not cl and not cu:
            assert d is Decision.STOP_CONFLICT
        elif cl and not cu:
            assert d is Decision.DESCEND_LOWER
        elif cu and not cl:
            assert d is Decision.DESCEND_UPPER
        else:
            assert d is (Decision.DESCEND_UPPER if pu > pl else Decision.DESCEND_LOWER)


def test_both_true_tie_goes_lower():
    assert decide(True, True, 0.7, 0.7, 0.5) is Decision.DESCEND_LOWER
    assert decide(True, True, 0.7, 0.8, 0.5) is Decision.DESCEND_UPPER


def test_rejects_even_and_prime():
    with pytest.raises(DomainError, match="even"):
        factor_ml_binary_search(16, cfg())
    with pytest.raises(DomainError, match="prime"):
        factor_ml_binary_search(2**61 - 1, cfg())


def test_trace_json(oracle_factory):
    n, p, q = semiprimes_64(1, 5)[0]
    out = factor_ml_binary_search(n, cfg(max_depth=32), oracle_factory(p, q))
    doc = json.loads(out.dumps())
    assert doc["status"] == "Factored" and doc["factor"] == str(out.factor)
    assert len(doc["trace"]) == len(out.trace)
    first = doc["trace"][0]
    assert first["interval"] == ["1/1", "16/1"] and first["midpoint"] == "17/2"


def test_trained_provider_smoke():
    n, p, q = random_prime_pair(40, RatioInterval(2, 4), Prng(3))
    c = cfg(1, 8, n_train=200, max_iter_lawrence=1, max_depth=2,
            train_cfg=TrainConfig(max_epochs=3, batch_size=64), seed=5)
    provider = TrainedClassifierProvider(c, n.bit_length())
    out = factor_ml_binary_search(n, c, provider)
    assert out.status in set(Status)
    assert 1 <= len(out.trace) <= 2
    for step in out.trace:
        if step.decision is not Decision.FACTORED:
            assert 0.0 <= step.p_lower <= 1.0 and 0.0 <= step.p_upper <= 1.0
    assert (0, "lower") in provider.reports and (0, "upper") in provider.reports


def test_estimate_examples():
    assert estimate_success_probability(1.0, 500) == 1.0
    assert estimate_success_probability(0.5, 2) == 0.5
    assert RSA_260.bit_length() == 862 and len(str(RSA_260)) == 260
    assert estimate_success_probability(0.975, 862) == pytest.approx(1.8e-5, rel=0.02)
    with pytest.raises(ValueError):
        estimate_success_probability(0.0, 10)


@given(st.floats(0.01, 1.0), st.floats(0.01, 1.0), st.integers(1, 4096), st.integers(1, 4096))
def test_estimate_monotone(p1, p2, b1, b2):
    lo, hi = sorted((p1, p2))
    assert estimate_success_probability(lo, b1) <= estimate_success_probability(hi, b1)
    short, long_ = sorted((b1, b2))
    assert estimate_success_probability(lo, long_) <= estimate_success_probability(lo, short)
