import math

import numpy as np
import pytest

from hybstab.errors import ThetaOutOfRange
from hybstab.lyapunov import (
    LocalLyapunov,
    P_LOCAL,
    SetA,
    alpha,
    c_local,
    example_backstepping_data,
    max_v_on_A,
    phi_sub,
    theta1,
    v_local,
    v_local_gradient,
    v_sub,
    w_coords,
    xi,
)

THETA = 0.06


def _v_oracle(theta, x):
    # independent path: explicit matrices instead of expanded scalar terms
    T = np.array([[1.0, -theta], [0.0, 1.0]])
    w = T @ np.asarray(x, dtype=float)
    return float(w @ P_LOCAL @ w)


def test_v_local_hand_values():
    assert v_local(THETA, [0.0, 0.0]) == 0.0
    assert v_local(THETA, [2.0, 0.0]) == pytest.approx(10.0, rel=1e-15)
    v_edge = v_local(THETA, [0.2, -0.55152])
    assert v_edge == pytest.approx(0.030807, abs=1e-5)


def test_v_local_matches_matrix_oracle():
    rng = np.random.default_rng(21)
    for _ in range(2000):
        x = rng.uniform(-8.0, 8.0, size=2)
        np.testing.assert_allclose(v_local(THETA, x), _v_oracle(THETA, x),
                                   rtol=1e-13, atol=1e-15)


def test_v_local_positive_definite():
    rng = np.random.default_rng(22)
    for theta in (0.01, 0.06, 0.11):
        x = rng.uniform(-50.0, 50.0, size=(100000, 2))
        vals = v_local(theta, x)
        keep = np.linalg.norm(x, axis=1) > 1e-12
        assert np.all(vals[keep] > 0.0)


def test_v_local_gradient_matches_finite_difference():
    rng = np.random.default_rng(23)
    for _ in range(200):
        x = rng.uniform(-5.0, 5.0, size=2)
        g = v_local_gradient(THETA, x)
        for i in range(2):
            e = np.zeros(2)
            e[i] = 1e-6
            fd = (v_local(THETA, x + e) - v_local(THETA, x - e)) / 2e-6
            assert g[i] == pytest.approx(fd, rel=1e-7, abs=1e-7)


def test_p_local_eigenvalues_closed_form():
    expected = np.array([(3.0 - math.sqrt(8.0)) / 2.0,
                         (3.0 + math.sqrt(8.0)) / 2.0])
    np.testing.assert_allclose(np.linalg.eigvalsh(P_LOCAL), expected,
                               rtol=1e-12)
    assert np.all(expected > 0.0)


def test_c_local_value_and_domain():
    assert c_local(THETA) == pytest.approx(0.0390824, abs=5e-6)
    for bad in (0.0, -0.02, theta1(), theta1() + 1e-3, 0.118462 + 1e-3):
        with pytest.raises(ThetaOutOfRange):
            c_local(bad)


def test_c_local_positive_on_grid():
    grid = np.arange(1e-4, theta1() - 1e-4 + 1e-12, 1e-4)
    vals = np.array([c_local(float(t)) for t in grid])
    assert np.all(np.isfinite(vals)) and np.all(vals > 0.0)


def test_theta1_value_and_root_property():
    t1 = theta1()
    assert t1 == pytest.approx(0.118462, abs=1e-5)
    assert xi(t1) == pytest.approx(0.0, abs=1e-9)
    assert xi(0.0) == -2.0
    # independent oracle: xi expands to a quartic in theta
    roots = np.roots([1440.0, 9768.0, 2308.0, -396.0, -2.0])
    real = np.sort(roots.real[np.abs(roots.imag) < 1e-10])
    smallest_pos = real[real > 0.0][0]
    assert t1 == pytest.approx(smallest_pos, abs=1e-9)


def test_local_lyapunov_wrapper():
    L = LocalLyapunov(THETA)
    assert L.theta == THETA
    assert 0.0 < L.theta_max == theta1()
    x = np.array([0.3, -0.7])
    assert L.value(x) == v_local(THETA, x)
    np.testing.assert_allclose(L.gradient(x), v_local_gradient(THETA, x))
    assert L.level() == c_local(THETA)


def test_w_coords_inverse():
    rng = np.random.default_rng(24)
    for _ in range(500):
        x = rng.uniform(-10.0, 10.0, size=2)
        w = w_coords(THETA, x)
        back = np.array([w[0] + THETA * w[1], w[1]])
        np.testing.assert_allclose(back, x, rtol=0.0, atol=1e-14)


def test_sub_lyapunov_and_alpha():
    assert v_sub(0.0) == 0.0 and alpha(0.0) == 0.0
    assert v_sub(0.2) == pytest.approx(0.02, rel=1e-15)
    assert alpha(1.0) == pytest.approx(3.4912, rel=1e-15)
    s = np.linspace(0.0, 5.0, 11)
    np.testing.assert_allclose(alpha(s), 3.4912 * s, rtol=1e-15)


def test_phi_sub_hand_values():
    assert phi_sub(THETA, 0.0) == 0.0
    assert phi_sub(THETA, 0.2) == pytest.approx(-0.55152, rel=1e-12)
    assert phi_sub(THETA, -0.2) == pytest.approx(0.54672, rel=1e-12)


def test_exact_identity_on_wide_interval():
    # L_{f1}V1 along x2 = phi1(x1) cancels alpha(V1) exactly
    x1 = np.linspace(-10.0, 10.0, 10000)
    resid = x1 * (x1 + phi_sub(THETA, x1) + THETA * x1 ** 2) \
        + alpha(v_sub(x1))
    assert np.all(np.abs(resid) <= 1e-12 * (1.0 + x1 ** 2))


def test_set_a_membership():
    A = SetA(THETA)
    assert A.x1_bound == pytest.approx(0.2, rel=1e-15)
    assert A.contains([0.1, phi_sub(THETA, 0.1)])
    assert A.contains([0.2, phi_sub(THETA, 0.2)])
    assert not A.contains([0.21, phi_sub(THETA, 0.21)])
    assert not A.contains([0.1, phi_sub(THETA, 0.1) + 1e-6])
    curve = A.curve(101)
    assert curve.shape == (101, 2)
    np.testing.assert_allclose(curve[0], [-0.2, phi_sub(THETA, -0.2)],
                               rtol=1e-14)
    np.testing.assert_allclose(curve[-1], [0.2, phi_sub(THETA, 0.2)],
                               rtol=1e-14)


def test_max_v_on_a_headline_value():
    value, arg = max_v_on_A(THETA)
    assert value == pytest.approx(0.030807, abs=1e-5)
    assert arg == pytest.approx(0.2, abs=1e-4)


def test_max_v_on_a_brackets_grid_and_stays_in_set():
    value, arg = max_v_on_A(THETA)
    x1 = np.linspace(-0.2, 0.2, 20001)
    grid_max = float(np.max(v_local(THETA, np.stack(
        [x1, phi_sub(THETA, x1)], axis=-1))))
    assert value >= grid_max
    assert SetA(THETA).contains([arg, phi_sub(THETA, arg)])
    assert value >= 0.0


def test_max_v_on_a_small_theta_limit():
    # theta -> 0: endpoint evaluation with theta = 0 coordinates
    w_end = np.array([0.2, -0.54912])
    expected = float(w_end @ P_LOCAL @ w_end)
    value, _ = max_v_on_A(1e-6)
    assert value == pytest.approx(expected, abs=1e-5)


def test_max_v_on_a_rejects_bad_theta():
    with pytest.raises(ThetaOutOfRange):
        max_v_on_A(theta1() + 0.01)


def test_backstepping_data_example():
    # the certificate callables take x1 as a length-(n-1) vector
    bd = example_backstepping_data(THETA)
    assert bd.eps == 0.89 and bd.m == 0.02
    for s in (-0.4, 0.0, 1.3):
        x1 = np.array([s])
        assert bd.v1(x1) == pytest.approx(0.5 * s ** 2, rel=1e-15)
        assert bd.phi1(x1) == pytest.approx(phi_sub(THETA, s), rel=1e-15)
        assert bd.psi(x1, 0.7) == pytest.approx(THETA * (1.0 + abs(s)),
                                                rel=1e-15)
    assert bd.alpha(2.0) == pytest.approx(2.0 * 3.4912, rel=1e-15)


def test_backstepping_data_validation():
    bd = example_backstepping_data(THETA)
    with pytest.raises(ValueError):
        type(bd)(v1=bd.v1, phi1=bd.phi1, alpha=bd.alpha, psi=bd.psi,
                 eps=1.2, m=bd.m)
    with pytest.raises(ValueError):
        type(bd)(v1=bd.v1, phi1=bd.phi1, alpha=bd.alpha, psi=bd.psi,
                 eps=bd.eps, m=-1.0)
