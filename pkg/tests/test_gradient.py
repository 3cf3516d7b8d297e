"""Stencil gradient estimators and the feedback law."""

import math

import numpy as np
import pytest

from spinctrl import manifold, model
from spinctrl.errors import NumericalFailure
from spinctrl.feynman_kac import EstimatorConfig, estimate_w
from spinctrl.gradient import (
    estimate_gradient,
    exact_gradient_provider,
    feedback_control,
)
from spinctrl.integrator import Partition
from spinctrl.rng import NS_ESTIMATOR, SeedPolicy

E1 = np.array([1.0, 0.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])

TEST1 = model.ModelParams(1, 1.0, 1.0, 1.0, 0.0, 1.0, 0.5)
PAYOFF1 = model.TerminalPayoff("log-harmonic-1")
FLAT = model.TerminalPayoff("custom", h_fn=lambda m: 0.0)
CTX = (NS_ESTIMATOR, 0, 0, 0)


def grad(method, m, policy, samples=512, part=None, hbar=None, t=0.0):
    part = part or Partition(0.5, 10)
    cfg = EstimatorConfig(samples=samples, hbar=hbar, method=method)
    return estimate_gradient(TEST1, PAYOFF1, None, part, t, m, cfg, policy,
                             context_base=CTX)


def test_constant_functional_gives_exact_zero():
    part = Partition(0.5, 10)
    cfg_b = EstimatorConfig(samples=64, method="B")
    cfg_a = EstimatorConfig(samples=64, method="A")
    for cfg in (cfg_b, cfg_a):
        est = estimate_gradient(TEST1, FLAT, None, part, 0.0, E3, cfg, SeedPolicy(1),
                                context_base=CTX)
        assert np.array_equal(est.grad_w, np.zeros(3))
        assert np.array_equal(est.grad_W, np.zeros(3))
        assert est.normal_fraction == 0.0


def test_terminal_time_gradient_is_deterministic_stencil():
    # at t = T no paths run; the stencil differentiates the terminal w itself
    part = Partition(0.5, 10)
    hbar = 1e-3
    for method in ("A", "B"):
        est = grad(method, E1, SeedPolicy(2), part=part, hbar=hbar, t=0.5)
        manual = np.empty(3)
        for l in range(3):
            wp = manifold.perturb_renormalized(E1, 0, l, hbar, +1)[2] + 2.0
            wm = manifold.perturb_renormalized(E1, 0, l, hbar, -1)[2] + 2.0
            manual[l] = (wp - wm) / (2.0 * hbar)
        assert np.allclose(est.grad_w, manual, rtol=1e-12, atol=1e-12)
        assert est.w_at_point.value == pytest.approx(2.0)


def test_method_a_matches_per_point_estimates():
    part = Partition(0.5, 10)
    policy = SeedPolicy(3)
    cfg = EstimatorConfig(samples=256, hbar=0.05, method="A")
    est = estimate_gradient(TEST1, PAYOFF1, None, part, 0.0, E3, cfg, policy,
                            context_base=CTX)
    values = []
    for idx in range(7):  # centre + 6 stencil points share Method A's contexts
        if idx == 0:
            point = E3
        else:
            i, l, sgn = 0, (idx - 1) // 2, +1 if (idx - 1) % 2 == 0 else -1
            point = manifold.perturb_renormalized(E3, i, l, 0.05, sgn)
        values.append(estimate_w(TEST1, PAYOFF1, None, part, 0.0, point, cfg, policy,
                                 context=CTX + (idx,)).value)
    manual = np.array([(values[1 + 2 * l] - values[2 + 2 * l]) / 0.1 for l in range(3)])
    assert np.allclose(est.grad_w, manual, rtol=1e-11, atol=1e-13)
    assert est.w_at_point.value == values[0]


def test_grad_W_is_scaled_grad_w():
    est = grad("B", E1, SeedPolicy(4))
    expected = -est.grad_w / (TEST1.beta * est.w_at_point.value)
    assert np.allclose(est.grad_W, expected, rtol=1e-12)


def test_method_b_common_noise_kills_absorbed_axis():
    # the perturbation along the spin renormalizes away; with shared walks
    # the quotient for that axis is exactly zero
    est = grad("B", E1, SeedPolicy(5), samples=128)
    assert est.grad_w[0] == 0.0
    assert est.normal_fraction == 0.0


def test_method_b_beats_method_a_on_pointwise_error():
    exact = -math.exp(-0.5) / 4.0 * E3  # grad W of the closed form at (0, e1)
    errs = {"A": [], "B": []}
    for seed in range(10):
        for method in ("A", "B"):
            est = grad(method, E1, SeedPolicy(100 + seed), samples=512)
            errs[method].append(float(np.sum((est.grad_W - exact) ** 2)))
    assert np.mean(errs["B"]) < np.mean(errs["A"])


def test_statistical_error_scales_inversely_with_hbar():
    # Method A noise on the quotient is ~ se(w)/hbar: doubling hbar halves it
    spread = {}
    for hbar in (0.05, 0.1):
        vals = []
        for rep in range(12):
            est = estimate_gradient(
                TEST1, PAYOFF1, None, Partition(0.5, 10), 0.0, E3,
                EstimatorConfig(samples=256, hbar=hbar, method="A"),
                SeedPolicy(7), context_base=(NS_ESTIMATOR, 9, rep, 0))
            vals.append(est.grad_w[0])  # exact value is 0 at the pole
        spread[hbar] = np.std(vals)
    ratio = spread[0.05] / spread[0.1]
    assert 1.4 < ratio < 2.9, f"spread ratio {ratio}"


def test_gradient_determinism_and_stream_separation():
    a = grad("B", E3, SeedPolicy(8))
    b = grad("B", E3, SeedPolicy(8))
    assert np.array_equal(a.grad_w, b.grad_w)
    other = estimate_gradient(TEST1, PAYOFF1, None, Partition(0.5, 10), 0.0, E3,
                              EstimatorConfig(samples=512, method="B"), SeedPolicy(8),
                              context_base=(NS_ESTIMATOR, 1, 0, 0))
    assert not np.array_equal(a.grad_w, other.grad_w)


def test_total_underflow_raises():
    doomed = model.TerminalPayoff("custom", h_fn=lambda m: 1.0,
                                  log_wt_fn=lambda m, beta: -800.0)
    cfg = EstimatorConfig(samples=16, method="B")
    with pytest.raises(NumericalFailure):
        estimate_gradient(TEST1, doomed, None, Partition(0.5, 5), 0.0, E3, cfg,
                          SeedPolicy(9), context_base=CTX)


def test_feedback_control_values():
    p = model.ModelParams(1, 0.0, 1.0, 0.5, 0.0, 2.0, 0.5)
    u = feedback_control(p, E3, E1)
    assert np.allclose(u, (2.0 / 0.5) * np.array([0.0, 1.0, 0.0]), atol=1e-15)
    assert np.array_equal(feedback_control(p, E3, np.zeros(3)), np.zeros(3))


def test_feedback_control_orthogonality_and_norm():
    rng = np.random.default_rng(10)
    p = model.ModelParams(4, 0.3, 1.0, 2.0, 0.0, 0.7, 0.5)
    for _ in range(20):
        m = manifold.random_config(rng, 4)
        grad_vec = rng.normal(size=12)
        u = feedback_control(p, m, grad_vec)
        mb, ub = manifold.as_blocks(m), manifold.as_blocks(u)
        assert np.max(np.abs(np.einsum("ij,ij->i", mb, ub))) < 1e-12
        g = manifold.as_blocks(manifold.tangent_project(m, grad_vec))
        expected = (p.c_ext / p.lam) * math.sqrt(1.0 + p.alpha**2) * np.linalg.norm(g, axis=1)
        assert np.allclose(np.linalg.norm(ub, axis=1), expected, rtol=1e-12)


def test_exact_gradient_provider_wraps_feedback():
    exact_grad = lambda t, m: np.array([0.0, 1.0, 0.0]) * math.exp(t)
    provider = exact_gradient_provider(TEST1, exact_grad)
    u = provider(0.3, E3)
    assert np.allclose(u, feedback_control(TEST1, E3, exact_grad(0.3, E3)))
