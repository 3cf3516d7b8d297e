"""Model parameters, drift fields, coupling builders, targets and payoffs."""

import math

import numpy as np
import pytest

from spinctrl import manifold, model
from spinctrl.errors import ConfigError

E1 = [1.0, 0.0, 0.0]
E2 = [0.0, 1.0, 0.0]
E3 = [0.0, 0.0, 1.0]


def params_for(n=1, alpha=0.0, nu=1.0, lam=1.0, delta=0.0, c_ext=1.0,
               horizon=0.5, exchange=None, d_blocks=None):
    return model.ModelParams(n, alpha, nu, lam, delta, c_ext, horizon,
                             exchange=exchange, d_blocks=d_blocks)


# -- coupling builders -------------------------------------------------------


def test_two_spin_exchange_hand_value():
    q = model.exchange_two_spin(0.7)
    m = np.array(E1 + E2)
    expected = 0.7 * np.array([1.0, -1.0, 0.0, -1.0, 1.0, 0.0])
    assert np.allclose(q @ m, expected, atol=1e-15)
    assert np.allclose(q, q.T)
    assert np.linalg.eigvalsh(q).min() > -1e-12


def test_ring_exchange_laplacian_structure():
    q = model.exchange_ring(5)
    m = np.tile([0.3, -0.5, 0.7], 5)
    # ring Laplacian annihilates spin-constant configurations
    assert np.allclose(q @ m, 0.0, atol=1e-14)
    rng = np.random.default_rng(0)
    v = rng.normal(size=15)
    vb = v.reshape(5, 3)
    expected = 2.0 * vb - np.roll(vb, 1, axis=0) - np.roll(vb, -1, axis=0)
    assert np.allclose((q @ v).reshape(5, 3), expected, atol=1e-13)
    with pytest.raises(ConfigError):
        model.exchange_ring(2)


def test_params_reject_bad_exchange():
    with pytest.raises(ConfigError):
        params_for(n=1, exchange=-np.eye(3))  # negative definite
    bad = np.eye(3)
    bad[0, 1] = 0.5
    with pytest.raises(ConfigError):
        params_for(n=1, exchange=bad)  # asymmetric
    with pytest.raises(ConfigError):
        params_for(n=2, exchange=np.eye(3))  # wrong shape


def test_params_reject_bad_scalars():
    with pytest.raises(ConfigError):
        params_for(lam=0.0)
    with pytest.raises(ConfigError):
        params_for(alpha=-0.1)
    with pytest.raises(ConfigError):
        params_for(horizon=0.0)


def test_q_apply_matches_dense_and_zero_check():
    p = params_for(n=2, exchange=model.exchange_two_spin(1.0),
                   d_blocks=[[0.5, 1.0, 2.0], [0.0, 0.0, 1.0]])
    rng = np.random.default_rng(1)
    v = rng.normal(size=6)
    assert np.allclose(p.q_apply(v), p.q_dense() @ v, atol=1e-13)
    assert not p.q_is_zero()
    assert params_for(n=2, exchange=model.exchange_zero(2)).q_is_zero()


def test_q_apply_two_spin_example():
    p = params_for(n=2, alpha=0.0, exchange=model.exchange_two_spin(1.0))
    m = np.array(E1 + E2)
    assert np.allclose(p.q_apply(m), [1.0, -1.0, 0.0, -1.0, 1.0, 0.0], atol=1e-15)


def test_beta_values():
    assert params_for().beta == pytest.approx(1.0)
    spin3 = params_for(n=3, alpha=0.1, nu=0.3, lam=1e-3, c_ext=0.1,
                       exchange=model.exchange_ring(3))
    assert spin3.beta == pytest.approx(112.2222222222, rel=1e-9)
    spin10 = params_for(n=10, alpha=1.0, nu=0.5, lam=1.0, c_ext=1.0,
                        exchange=model.exchange_ring(10))
    assert spin10.beta == pytest.approx(8.0)
    with pytest.raises(ConfigError):
        params_for(nu=0.0).beta


# -- drift fields ------------------------------------------------------------


def test_drift_f_trivial_and_orthogonal():
    p = params_for(n=2, alpha=0.7, exchange=model.exchange_zero(2))
    m = np.array(E1 + E3)
    assert np.allclose(p.drift_f(m, np.zeros(6)), 0.0, atol=1e-15)
    rng = np.random.default_rng(2)
    for _ in range(10):
        mm = manifold.random_config(rng, 2)
        f = p.drift_f(mm, rng.normal(size=6))
        assert np.allclose(np.einsum("ij,ij->i", manifold.as_blocks(mm),
                                     manifold.as_blocks(f)), 0.0, atol=1e-13)


def test_drift_f_anisotropy_hand_value():
    d = [[2.0, 3.0, 5.0]]
    p = params_for(n=1, alpha=0.0, d_blocks=d)
    m = np.array([1.0, 1.0, 0.0]) / math.sqrt(2.0)
    dm = np.array(d[0]) * m
    assert np.allclose(p.drift_f(m, np.zeros(3)), -np.cross(m, dm), atol=1e-14)


def test_drift_matches_dense_sigma_route():
    # blockdiag(sigma(m_i)) (-Qm + C u) against the cross-product route
    rng = np.random.default_rng(3)
    p = params_for(n=3, alpha=0.4, c_ext=0.8, exchange=model.exchange_ring(3),
                   d_blocks=[[-5.0, 1.0, 3.5]] * 3)
    for _ in range(10):
        m = manifold.random_config(rng, 3)
        u = rng.normal(size=9)
        h = -p.q_apply(m) + p.c_ext * u
        dense = np.concatenate(
            [manifold.sigma_block(m[3 * i : 3 * i + 3], p.alpha) @ h[3 * i : 3 * i + 3]
             for i in range(3)]
        )
        assert np.allclose(p.drift_f(m, u), dense, atol=1e-12)
        assert np.allclose(p.drift_b(m),
                           -np.concatenate(
                               [manifold.sigma_block(m[3 * i : 3 * i + 3], p.alpha)
                                @ (-p.q_apply(m)[3 * i : 3 * i + 3]) for i in range(3)]),
                           atol=1e-12)


def test_drift_b_trivial_cases():
    assert np.allclose(params_for(n=2).drift_b(np.array(E1 + E2)), 0.0)
    # Qm parallel to m blockwise: isotropic per-spin diagonal
    p = params_for(n=2, alpha=0.3, d_blocks=[[2.0, 2.0, 2.0], [0.5, 0.5, 0.5]])
    rng = np.random.default_rng(4)
    m = manifold.random_config(rng, 2)
    assert np.allclose(p.drift_b(m), 0.0, atol=1e-14)


def test_abar_duality():
    p = params_for(n=3, alpha=0.25, exchange=model.exchange_ring(3),
                   d_blocks=[[1.0, 0.5, 0.0]] * 3)
    assert np.allclose(params_for(n=1).abar(np.array(E1)), 0.0)
    p0 = params_for(n=1, alpha=0.0, d_blocks=[[1.0, 2.0, 3.0]])
    m1 = np.array(E2)
    assert np.allclose(p0.abar(m1), -p0.q_apply(m1), atol=1e-15)
    rng = np.random.default_rng(5)
    for _ in range(20):
        m = manifold.random_config(rng, 3)
        lhs = np.cross(manifold.as_blocks(m), manifold.as_blocks(p.abar(m))).reshape(-1)
        assert np.allclose(lhs + p.drift_b(m), 0.0, atol=1e-12)


def test_a_ctrl_duality():
    p = params_for(n=2, alpha=0.6, c_ext=0.3, exchange=model.exchange_two_spin(0.9))
    rng = np.random.default_rng(6)
    m0 = np.array(E1 + E3)
    assert np.allclose(
        params_for(n=2, alpha=0.0, c_ext=0.3).a_ctrl(m0, np.ones(6)), 0.3 * np.ones(6)
    )
    for _ in range(20):
        m = manifold.random_config(rng, 2)
        u = rng.normal(size=6)
        lhs = np.cross(manifold.as_blocks(m), manifold.as_blocks(p.a_ctrl(m, u))).reshape(-1)
        assert np.allclose(lhs, p.drift_f(m, u), atol=1e-12)


def test_lagrangian_values():
    m = np.array(E1)
    assert params_for(delta=1.0).lagrangian(m, np.zeros(3), m) == 0.0
    u = np.array([1.0, 1.0, 1.0])
    assert params_for(lam=2.0).lagrangian(m, u, m) == pytest.approx(3.0)
    p = params_for(delta=1.0, lam=0.002)
    assert p.lagrangian(m, np.zeros(3), -np.asarray(m)) == pytest.approx(4.0)


# -- target profiles ---------------------------------------------------------


def test_constant_target():
    t = model.TargetProfile("constant", 2, 0.5, vectors=[E3, E1])
    assert np.array_equal(t.eval(0.0), np.array(E3 + E1))
    assert np.array_equal(t.eval(0.37), t.eval(0.0))
    grid = t.grid_values(np.linspace(0.0, 0.5, 6))
    assert grid.shape == (6, 6)


def test_rotating_switch_target():
    t = model.TargetProfile("rotating-switch", 3, 0.5, vectors=[E1, E1, E1],
                            switch_spins=(1,))
    assert np.allclose(t.eval(0.0), np.array(E1 + [-1.0, 0.0, 0.0] + E1), atol=1e-15)
    mid = t.eval(0.25)
    assert np.allclose(mid[3:6], [0.0, 1.0, 0.0], atol=1e-15)
    assert np.allclose(t.eval(0.5)[3:6], E1, atol=1e-15)
    # non-switch spins hold their vector
    assert np.array_equal(mid[:3], E1) and np.array_equal(mid[6:], E1)


def test_tabulated_target_interpolates_and_renormalizes():
    times = np.array([0.0, 1.0])
    table = np.array([E1, E2], dtype=float)
    t = model.TargetProfile("tabulated", 1, 1.0, times=times, table=table)
    mid = t.eval(0.5)
    assert np.allclose(mid, np.array([1.0, 1.0, 0.0]) / math.sqrt(2.0), atol=1e-15)
    with pytest.raises(ConfigError):
        model.TargetProfile("tabulated", 1, 1.0, times=np.array([0.0, 1.0]),
                            table=np.zeros((3, 3)))
    with pytest.raises(ConfigError):
        model.TargetProfile("spiral", 1, 1.0, vectors=[E1])


# -- terminal payoffs --------------------------------------------------------


def test_quadratic_tracking_payoff():
    ref = np.array(E3)
    pay = model.TerminalPayoff("quadratic-tracking", m_ref=ref)
    assert pay.h(np.array(E3), beta=2.0) == 0.0
    assert pay.h(-ref, beta=2.0) == pytest.approx(2.0)
    m = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, -1.0]])
    got = pay.log_wt_batch(m, beta=3.0)
    assert np.allclose(got, [-3.0 * 1.0, -3.0 * 2.0])


def test_log_harmonic_payoffs():
    p1 = model.TerminalPayoff("log-harmonic-1")
    assert p1.log_wt(np.array(E3), beta=2.0) == pytest.approx(math.log(3.0))
    assert p1.h(np.array(E3), beta=2.0) == pytest.approx(-math.log(3.0) / 2.0)
    p2 = model.TerminalPayoff("log-harmonic-2", scale=0.5)
    m = np.array(E3 + E3)
    assert p2.log_wt(m, beta=1.0) == pytest.approx(math.log(0.5 * 4.0))
    with pytest.raises(ConfigError):
        model.TerminalPayoff("log-harmonic-1", scale=0.0)


def test_custom_payoff():
    pay = model.TerminalPayoff("custom", h_fn=lambda m: float(m[0]) ** 2)
    m = np.array([0.5, 0.0, 0.0])
    assert pay.h(m, beta=1.0) == pytest.approx(0.25)
    assert pay.log_wt(m, beta=4.0) == pytest.approx(-1.0)
    with pytest.raises(ConfigError):
        model.TerminalPayoff("custom")
    with pytest.raises(ConfigError):
        model.TerminalPayoff("mystery")
