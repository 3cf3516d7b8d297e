"""Finite-difference manifold gradient of w and the feedback law.

The stencil perturbs each spin along each ambient axis and renormalizes,
d_{l,i} = [w(m^+_{h,i,l}) - w(m^-_{h,i,l})] / (2h).  Two estimators:

  Method A: every stencil point (and the centre) gets an independent walk
            set; the difference of two independent means.
  Method B: one walk set is shared by the centre and all 6N stencil points;
            the difference quotient is formed per sample and averaged, so
            the common noise cancels in the difference.

Both then form grad W = -grad w / (beta w) with the centre estimate of w;
the ratio is taken in a common-scale representation, immune to how deep in
the exponential tail w sits.  The feedback law projects grad W blockwise
onto the tangent space (the stencil probes ambient axes; the discarded
normal part is a diagnostic) and applies

    u_i = (c_ext/lambda) * (m_i x g_i - alpha g_i),

which is blockwise orthogonal to m by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import manifold
from .errors import NumericalFailure
from .feynman_kac import (
    LOG_TINY,
    EstimatorConfig,
    WEstimate,
    gl_nodes,
    grid_index,
    log_functionals_for_batch,
    reduce_log_functionals,
    run_sample_paths,
    tree_sum,
)
from .integrator import Partition
from .model import ModelParams, TargetProfile, TerminalPayoff
from .rng import NS_ESTIMATOR, SeedPolicy, signed_batch


@dataclass
class GradientEstimate:
    """Raw stencil gradient of w plus the transformed gradient of W.

    grad_w keeps the ambient difference quotients d_{l,i}; grad_W is
    -grad_w/(beta w) formed at common scale.  normal_fraction measures the
    blockwise-normal share of grad_W that feedback_control discards.
    """

    grad_w: np.ndarray
    w_at_point: WEstimate
    grad_W: np.ndarray
    method: str
    hbar: float
    normal_fraction: float


def _stencil_points(m: np.ndarray, hbar: float) -> list[np.ndarray]:
    """Centre followed by (spin, axis, +/-) perturbations, fixed order.

    Index 1 + 2*(3*i + l) is the +h point of (i, l), the next its partner.
    """
    points = [np.asarray(m, dtype=float)]
    for i in range(manifold.n_spins(m)):
        for l in range(3):
            points.append(manifold.perturb_renormalized(m, i, l, hbar, +1))
            points.append(manifold.perturb_renormalized(m, i, l, hbar, -1))
    return points


def _normal_fraction(m: np.ndarray, grad: np.ndarray) -> float:
    tangent = manifold.tangent_project(m, grad)
    normal = grad - tangent
    denom = float(np.linalg.norm(tangent))
    if denom == 0.0:
        return 0.0 if float(np.linalg.norm(normal)) == 0.0 else math.inf
    return float(np.linalg.norm(normal)) / denom


def estimate_gradient(
    params: ModelParams,
    payoff: TerminalPayoff,
    target: Optional[TargetProfile],
    partition: Partition,
    t: float,
    m: np.ndarray,
    cfg: EstimatorConfig,
    policy: SeedPolicy,
    context_base: tuple = (NS_ESTIMATOR, 0, 0, 0),
) -> GradientEstimate:
    """Stencil gradient at (t, m) by the configured method.

    context_base names this estimation event; stream ids for the stencil
    walk sets are appended to it (a single shared id for Method B, one per
    stencil point for Method A).
    """
    ell = grid_index(partition, t)
    steps = partition.n_steps - ell
    m = np.asarray(m, dtype=float)
    dim = m.size
    hbar = cfg.hbar_value
    points = _stencil_points(m, hbar)
    target_grid = (
        target.grid_values(partition.times[ell:])
        if (params.delta != 0.0 and target is not None)
        else None
    )
    gl_x, gl_w = gl_nodes(cfg.quad_points)
    n_pairs = cfg.samples // 2

    def log_h_for(start: np.ndarray, xi: np.ndarray) -> np.ndarray:
        if steps == 0:
            log_wt = payoff.log_wt(start, params.beta)
            return np.full(xi.shape[0], log_wt)
        finals, integrals = run_sample_paths(
            params, start, xi, partition.tau, target_grid, gl_x, gl_w, cfg.threads
        )
        return log_functionals_for_batch(params, payoff, finals, integrals)

    if cfg.method == "B":
        base = policy.walk_pairs(context_base + (0,), n_pairs, max(steps, 1), dim, partition.tau)
        xi = signed_batch(base)
        log_h = np.stack([log_h_for(p, xi) for p in points])
        return _assemble_method_b(params, m, log_h, hbar, cfg)

    # Method A: fresh stream per stencil point, centre included
    log_h = np.stack(
        [
            log_h_for(
                point,
                signed_batch(
                    policy.walk_pairs(
                        context_base + (idx,), n_pairs, max(steps, 1), dim, partition.tau
                    )
                ),
            )
            for idx, point in enumerate(points)
        ]
    )
    return _assemble_method_a(params, m, log_h, hbar, cfg)


def _assemble_method_a(params, m, log_h, hbar, cfg) -> GradientEstimate:
    centre = reduce_log_functionals(log_h[0])
    estimates = [centre] + [reduce_log_functionals(row) for row in log_h[1:]]
    scale = max(e.log_value for e in estimates)
    scaled = np.array([math.exp(e.log_value - scale) for e in estimates])
    d_scaled = (scaled[1::2] - scaled[2::2]) / (2.0 * hbar)
    return _finish(params, m, centre, d_scaled, scaled[0], scale, hbar, cfg)


def _assemble_method_b(params, m, log_h, hbar, cfg) -> GradientEstimate:
    centre = reduce_log_functionals(log_h[0])
    flagged = ~(log_h >= LOG_TINY)
    if flagged.all(axis=1).any():
        raise NumericalFailure(
            "all samples of a stencil-point estimate underflowed; "
            "see the overflow-regime remedies on the centre estimator"
        )
    scale = float(log_h[~flagged].max())
    scaled = np.where(flagged, 0.0, np.exp(log_h - scale))
    quotients = (scaled[1::2] - scaled[2::2]) / (2.0 * hbar)  # (3N, M)
    pair_avg = 0.5 * (quotients[:, 0::2] + quotients[:, 1::2])
    d_scaled = np.array([tree_sum(row) for row in pair_avg]) / pair_avg.shape[1]
    centre_scaled = math.exp(centre.log_value - scale)
    return _finish(params, m, centre, d_scaled, centre_scaled, scale, hbar, cfg)


def _finish(params, m, centre, d_scaled, w_scaled, scale, hbar, cfg) -> GradientEstimate:
    grad_W = -d_scaled / (params.beta * w_scaled)
    with np.errstate(under="ignore"):
        grad_w = d_scaled * math.exp(scale)
    return GradientEstimate(
        grad_w=grad_w,
        w_at_point=centre,
        grad_W=grad_W,
        method=cfg.method,
        hbar=hbar,
        normal_fraction=_normal_fraction(m, grad_W),
    )


def feedback_control(params: ModelParams, m: np.ndarray, grad_W: np.ndarray) -> np.ndarray:
    """Feedback law u = (c_ext/lambda) (m x g - alpha g), g the tangent part.

    Blockwise orthogonal to m exactly: |<u_i, m_i>| stays at rounding level,
    and |u_i| = (c_ext/lambda) sqrt(1+alpha^2) |g_i| for unit m_i.
    """
    g = manifold.tangent_project(m, np.asarray(grad_W, dtype=float))
    mb = manifold.as_blocks(m)
    gb = manifold.as_blocks(g)
    u = (params.c_ext / params.lam) * (np.cross(mb, gb) - params.alpha * gb)
    return u.reshape(-1)


def exact_gradient_provider(params: ModelParams, grad_W_fn):
    """Wrap an analytic grad W into a (t, m) -> u feedback provider."""

    def provider(t: float, m: np.ndarray) -> np.ndarray:
        return feedback_control(params, m, grad_W_fn(t, m))

    return provider
