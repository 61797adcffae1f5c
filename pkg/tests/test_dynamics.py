import itertools

import numpy as np
import pytest

from maxplus_fj.algebra import EPS, DimensionError, diag, identity, madd, mp_equal, mp_power, otimes, leq
from maxplus_fj.dynamics import (build_A, epoch_matrices, product_family, run_trajectory, step,
                                 transposed_product)
from maxplus_fj.network import NetworkSpec, compile_network, random_dag
from maxplus_fj.service import Deterministic, Exponential, ServiceSampler, Uniform

from conftest import naive_otimes


def test_build_A_tandem(det_tandem):
    assert mp_equal(build_A(diag([1, 2]), det_tandem), [[1, EPS], [3, 2]])


def test_build_A_arc_free():
    net = compile_network(NetworkSpec(3, (), (Deterministic(1),) * 3))
    T = diag([1, 2, 3])
    assert mp_equal(build_A(T, net), T)


def test_build_A_diamond(det_diamond):
    A = build_A(diag([1, 1, 1, 1]), det_diamond)
    assert A[3, 0] == 3
    # node j reaches node i, or i == j
    assert mp_equal(A, [[1, EPS, EPS, EPS], [2, 1, EPS, EPS], [2, EPS, 1, EPS], [3, 2, 2, 1]])


def test_build_A_rejects_bad_input(det_tandem):
    with pytest.raises(DimensionError):
        build_A(diag([1, 2, 3]), det_tandem)
    with pytest.raises(ValueError):
        build_A([[1, 0], [0, 1]], det_tandem)


@pytest.mark.parametrize("seed", range(30))
def test_build_A_equivalent_forms(seed):
    """(T⊗G^T)^j ⊗ T = T ⊗ (G^T⊗T)^j, and A is their ⊕ over j <= p."""
    rng = np.random.default_rng(seed)
    net = compile_network(random_dag(int(rng.integers(1, 7)), 0.5, rng))
    T = diag(rng.uniform(0, 3, net.n))
    Gt = net.support.T
    left = right = total = T
    for j in range(1, net.p + 1):
        left = otimes(otimes(T, Gt), left)
        right = otimes(right, otimes(Gt, T))
        assert mp_equal(left, right, 1e-12)
        total = np.maximum(total, left)
    A = build_A(T, net)
    assert mp_equal(A, total, 1e-12)
    assert np.all(np.diag(A) == np.diag(T))


def test_step():
    A = np.array([[1, EPS], [3, 2]])
    assert np.array_equal(step([0.0, 0.0], A), [1.0, 3.0])
    x = np.array([0.5, -2.0, 7.0])
    assert np.array_equal(step(x, identity(3)), x)
    with pytest.raises(DimensionError):
        step([0.0], A)


def test_step_keeps_finite(exp_diamond):
    T = ServiceSampler(exp_diamond.services, 1).next_T()
    assert np.all(np.isfinite(step(np.array([1.0, -4, 0, 2]), build_A(T, exp_diamond))))


def test_deterministic_tandem_closed_form(det_tandem):
    # x_1(k) = k and x_2(k) = 2k + 1 from x(0) = 0
    r = run_trajectory(det_tandem, ServiceSampler(det_tandem.services, 0), 100)
    k = np.arange(1, 101)
    assert np.array_equal(r.norms, 2 * k + 1)
    assert np.array_equal(r.final_x, [100, 201])
    assert r.gamma_hat == pytest.approx(2 + 1 / 100)
    assert r.gamma_offset == 2.0


def test_single_exponential_node():
    net = compile_network(NetworkSpec(1, (), (Exponential(1.0),)))
    K = 100_000
    r = run_trajectory(net, ServiceSampler(net.services, 3), K)
    assert abs(r.gamma_hat - 1.0) < 3 / np.sqrt(K)


def test_one_step_trajectory(exp_diamond):
    x0 = np.array([0.0, 1.0, -1.0, 2.0])
    s = ServiceSampler(exp_diamond.services, 8)
    r = run_trajectory(exp_diamond, s, 1, x0=x0)
    A1 = build_A(s.replay().next_T(), exp_diamond)
    assert r.norms[0] == np.max(step(x0, A1))


def test_trajectory_rejects_bad_x0(det_tandem):
    s = ServiceSampler(det_tandem.services, 0)
    with pytest.raises(ValueError):
        run_trajectory(det_tandem, s, 5, x0=[0.0, np.inf])
    with pytest.raises(DimensionError):
        run_trajectory(det_tandem, s, 5, x0=[0.0])
    with pytest.raises(ValueError):
        run_trajectory(det_tandem, s, 0)


@pytest.mark.parametrize("seed", range(10))
def test_norm_nondecreasing(seed):
    net = compile_network(random_dag(5, 0.5, seed, services=Uniform(0, 2)))
    x0 = np.random.default_rng(seed).uniform(-3, 3, net.n)
    r = run_trajectory(net, ServiceSampler(net.services, seed), 300, x0=x0)
    assert np.all(np.diff(r.norms) >= 0)


def test_tracked_product_matches_naive(exp_diamond):
    s = ServiceSampler(exp_diamond.services, 4)
    r = run_trajectory(exp_diamond, s, 12, track_product=True)
    As = epoch_matrices(exp_diamond, s.replay().draw(12))
    P = As[0].T
    for A in As[1:]:
        P = naive_otimes(P, A.T)
    assert mp_equal(r.product, P, 1e-9)
    # A_k = A(k) ⊗ ... ⊗ A(1), transposed
    Ak = As[0]
    for A in As[1:]:
        Ak = otimes(A, Ak)
    assert mp_equal(r.product, Ak.T, 1e-9)


def test_product_family(exp_tandem):
    s = ServiceSampler(exp_tandem.services, 2)
    As = epoch_matrices(exp_tandem, s.replay().draw(5))
    assert mp_equal(product_family(exp_tandem, s, 4, 5), As[4].T)
    assert mp_equal(product_family(exp_tandem, s, 0, 2), otimes(As[0].T, As[1].T))
    with pytest.raises(ValueError):
        product_family(exp_tandem, s, 3, 3)


def test_deterministic_product_is_power(det_diamond):
    s = ServiceSampler(det_diamond.services, 0)
    A = build_A(diag([1, 1, 1, 1]), det_diamond)
    assert mp_equal(product_family(det_diamond, s, 0, 6), mp_power(A.T, 6))


@pytest.mark.parametrize("seed", range(20))
def test_subadditivity(seed):
    rng = np.random.default_rng(seed)
    net = compile_network(random_dag(int(rng.integers(1, 6)), 0.6, rng, services=Exponential(1.0)))
    k = 8
    As = epoch_matrices(net, ServiceSampler(net.services, seed).draw(k))
    for l, r, kk in itertools.combinations(range(k + 1), 3):
        lhs = transposed_product(As, l, kk)
        assert leq(lhs, madd(transposed_product(As, l, r), transposed_product(As, r, kk)), 1e-9)


def test_smallest_split(exp_tandem):
    As = epoch_matrices(exp_tandem, ServiceSampler(exp_tandem.services, 1).draw(2))
    assert leq(otimes(As[0].T, As[1].T), madd(As[0].T, As[1].T))
