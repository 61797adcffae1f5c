import numpy as np
import pytest
from scipy import stats

from maxplus_fj.algebra import mp_equal
from maxplus_fj.service import (Deterministic, Erlang, Exponential, ServiceSampler, Uniform,
                                distribution_from_dict, mean_T, variance_vector)

N = 100_000


@pytest.mark.parametrize("dist, mean, var", [
    (Deterministic(2.5), 2.5, 0.0),
    (Exponential(2.0), 2.0, 4.0),
    (Uniform(0, 2), 1.0, 1 / 3),
    (Erlang(4, 2.0), 2.0, 1.0),
])
def test_closed_form_moments(dist, mean, var):
    assert dist.mean() == pytest.approx(mean)
    assert dist.variance() == pytest.approx(var)


@pytest.mark.parametrize("dist", [Exponential(1.0), Exponential(0.3), Uniform(0.5, 3), Erlang(3, 1.5)])
def test_empirical_moments_within_4se(dist):
    x = ServiceSampler([dist], seed=5).draw(N)[:, 0]
    assert np.all(x >= 0)
    se_mean = np.sqrt(dist.variance() / N)
    assert abs(x.mean() - dist.mean()) < 4 * se_mean
    dev = x - x.mean()
    s2 = dev.var(ddof=1)
    se_var = np.sqrt((np.mean(dev ** 4) - s2 ** 2) / N)
    assert abs(s2 - dist.variance()) < 4 * se_var


def test_next_T_deterministic():
    s = ServiceSampler([Deterministic(1), Deterministic(2)], seed=0)
    for k in range(1, 4):
        assert mp_equal(s.next_T(), [[1, -np.inf], [-np.inf, 2]])
        assert s.epoch == k


def test_exponential_sample_mean():
    x = ServiceSampler([Exponential(1.0)], seed=9).draw(N)[:, 0]
    assert abs(x.mean() - 1.0) < 3 / np.sqrt(N)


def test_same_seed_same_stream():
    services = [Exponential(1.0), Uniform(0, 1), Erlang(2, 1.0)]
    a, b = ServiceSampler(services, 42), ServiceSampler(services, 42)
    for _ in range(5):
        assert np.array_equal(a.next_taus(), b.next_taus())
    assert not np.array_equal(ServiceSampler(services, 43).draw(10), a.replay().draw(10))


def test_consumption_pattern_does_not_change_stream():
    services = [Exponential(1.0), Erlang(3, 2.0)]
    whole = ServiceSampler(services, 7).draw(3000)
    s = ServiceSampler(services, 7)
    parts = np.vstack([s.draw(1), s.draw(1500), s.draw(1499)])
    assert np.array_equal(whole, parts)


def test_adding_a_node_keeps_other_streams():
    base = ServiceSampler([Exponential(1.0), Uniform(0, 1)], 3).draw(500)
    more = ServiceSampler([Exponential(1.0), Uniform(0, 1), Exponential(2.0)], 3).draw(500)
    assert np.array_equal(base, more[:, :2])


def test_streams_differ_and_are_independent():
    s = ServiceSampler([Uniform(0, 1), Uniform(0, 1)], 11).draw(N)
    counts, _, _ = np.histogram2d(s[:, 0], s[:, 1], bins=10, range=[[0, 1], [0, 1]])
    _, pvalue, _, _ = stats.chi2_contingency(counts)
    assert pvalue > 1e-3
    r0 = ServiceSampler([Uniform(0, 1)], 11, stream=0).draw(5)
    r1 = ServiceSampler([Uniform(0, 1)], 11, stream=1).draw(5)
    assert not np.array_equal(r0, r1)


def test_mean_T_and_variance_vector():
    services = [Deterministic(3.0), Exponential(2.0), Uniform(0, 2)]
    assert mp_equal(mean_T(services), np.where(np.eye(3, dtype=bool), np.diag([3.0, 2.0, 1.0]), -np.inf))
    assert np.allclose(variance_vector(services), [0.0, 4.0, 1 / 3])


@pytest.mark.parametrize("bad", [
    lambda: Deterministic(-1),
    lambda: Exponential(0),
    lambda: Uniform(2, 1),
    lambda: Uniform(-1, 1),
    lambda: Erlang(0, 1),
    lambda: Erlang(1.5, 1),
])
def test_invalid_parameters(bad):
    with pytest.raises(ValueError):
        bad()


def test_descriptor_round_trip():
    for d in [Deterministic(1.5), Exponential(2.0), Uniform(0.1, 0.9), Erlang(3, 1.2)]:
        assert distribution_from_dict(d.to_dict()) == d
    with pytest.raises(ValueError, match="unexpected"):
        distribution_from_dict({"kind": "exponential", "mean": 1, "rate": 2})
