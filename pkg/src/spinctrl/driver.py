"""The closed control loop: estimate, act, step, repeat.

Per grid time t_l the loop (i) estimates grad W at the current state and
forms the feedback, (ii) takes the first midpoint stage, (iii) re-estimates
grad W at the blockwise-normalized stage average and feeds that control to
the second stage.  Estimator walk sets are fresh per grid time, per
evaluation point (state vs midpoint) and, for Method A, per stencil point;
the outer trajectory walk lives in its own stream namespace, so matched
A/B comparisons can share it exactly.

A total-underflow failure inside any estimate aborts the run with the grid
position and the standard remedies attached; that is the documented
behaviour in the small-lambda*nu^2 overflow regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import manifold
from .errors import NumericalFailure
from .feynman_kac import EstimatorConfig, gl_nodes, running_cost_integral
from .gradient import GradientEstimate, estimate_gradient, feedback_control
from .integrator import ControlledStep, Partition, step_controlled
from .model import ModelParams, TargetProfile, TerminalPayoff
from .rng import NS_ESTIMATOR, SeedPolicy


@dataclass
class ControlledRun:
    """Everything one controlled trajectory produced.

    w_* arrays hold the centre estimates at the state / midpoint evaluation
    of each step (NaN for oracle runs, which never estimate).
    """

    partition: Partition
    states: np.ndarray          # (J+1, 3N)
    u_state: np.ndarray         # (J, 3N)
    u_mid: np.ndarray           # (J, 3N)
    w_state: np.ndarray         # (J,)
    w_state_se: np.ndarray
    w_mid: np.ndarray
    w_mid_se: np.ndarray
    flagged_state: np.ndarray
    flagged_mid: np.ndarray
    master_seed: int
    method: str
    samples: int
    backend: str


@dataclass
class CostBreakdown:
    """Realized cost split into its three nonnegative parts."""

    tracking: float
    control: float
    terminal: float

    @property
    def total(self) -> float:
        return self.tracking + self.control + self.terminal


class _EstimatingProvider:
    """Feedback provider that runs the gradient estimator per query.

    step_controlled queries twice per step, first at the state, then at the
    normalized midpoint; the query parity picks the stream context, keeping
    the whole run a pure function of (scenario, config, master seed).
    """

    def __init__(self, params, payoff, target, partition, cfg, policy, run_id):
        self.params = params
        self.payoff = payoff
        self.target = target
        self.partition = partition
        self.cfg = cfg
        self.policy = policy
        self.run_id = run_id
        self.ell = 0
        self.calls_this_step = 0
        self.records: list[GradientEstimate] = []

    def __call__(self, t: float, m: np.ndarray) -> np.ndarray:
        point_id = self.calls_this_step
        self.calls_this_step += 1
        context = (NS_ESTIMATOR, self.run_id, self.ell, point_id)
        estimate = estimate_gradient(
            self.params, self.payoff, self.target, self.partition,
            t, m, self.cfg, self.policy, context_base=context,
        )
        self.records.append(estimate)
        return feedback_control(self.params, m, estimate.grad_W)


def run_algorithm(
    params: ModelParams,
    m0: np.ndarray,
    payoff: TerminalPayoff,
    target: Optional[TargetProfile],
    partition: Partition,
    cfg: EstimatorConfig,
    policy: SeedPolicy,
    u_provider: Optional[Callable[[float, np.ndarray], np.ndarray]] = None,
    run_id: int = 0,
    progress: Optional[Callable[[int, int], None]] = None,
) -> ControlledRun:
    """Roll the controlled trajectory over the whole grid.

    With u_provider=None the Monte-Carlo feedback loop runs; passing a
    provider (an exact gradient, or zero control) reuses the identical
    stepping path, which is what the oracle-equivalence check leans on.
    """
    from . import backends  # late import: backend may be selected after import

    m0 = np.asarray(m0, dtype=float)
    manifold.validate_spin_config(m0)
    dim = m0.size
    j_steps = partition.n_steps
    outer = policy.outer_walk(j_steps, dim, partition.tau, run_id=run_id)

    estimating = u_provider is None
    provider = (
        _EstimatingProvider(params, payoff, target, partition, cfg, policy, run_id)
        if estimating
        else u_provider
    )

    states = np.empty((j_steps + 1, dim))
    states[0] = m0
    u_state = np.empty((j_steps, dim))
    u_mid = np.empty((j_steps, dim))
    w_state = np.full(j_steps, np.nan)
    w_state_se = np.full(j_steps, np.nan)
    w_mid = np.full(j_steps, np.nan)
    w_mid_se = np.full(j_steps, np.nan)
    flagged_state = np.zeros(j_steps)
    flagged_mid = np.zeros(j_steps)

    m = m0.copy()
    times = partition.times
    for ell in range(j_steps):
        if estimating:
            provider.ell = ell
            provider.calls_this_step = 0
        try:
            m, step = step_controlled(
                params, m, float(times[ell]), outer.xi[ell], partition.tau, provider
            )
        except NumericalFailure as exc:
            raise NumericalFailure(
                f"run aborted at grid index {ell} (t = {times[ell]:.6g}): {exc}"
            ) from exc
        states[ell + 1] = m
        u_state[ell] = step.u_state
        u_mid[ell] = step.u_mid
        if estimating:
            ge_state, ge_mid = provider.records[-2], provider.records[-1]
            w_state[ell] = ge_state.w_at_point.value
            w_state_se[ell] = ge_state.w_at_point.std_error
            w_mid[ell] = ge_mid.w_at_point.value
            w_mid_se[ell] = ge_mid.w_at_point.std_error
            flagged_state[ell] = ge_state.w_at_point.flagged_fraction
            flagged_mid[ell] = ge_mid.w_at_point.flagged_fraction
        if progress is not None:
            progress(ell + 1, j_steps)

    return ControlledRun(
        partition=partition,
        states=states,
        u_state=u_state,
        u_mid=u_mid,
        w_state=w_state,
        w_state_se=w_state_se,
        w_mid=w_mid,
        w_mid_se=w_mid_se,
        flagged_state=flagged_state,
        flagged_mid=flagged_mid,
        master_seed=policy.master_seed,
        method=cfg.method if estimating else "oracle",
        samples=cfg.samples if estimating else 0,
        backend=backends.backend_name(),
    )


def zero_control(t: float, m: np.ndarray) -> np.ndarray:
    return np.zeros_like(np.asarray(m, dtype=float))


def realized_cost(
    run: ControlledRun,
    params: ModelParams,
    target: Optional[TargetProfile],
    payoff: TerminalPayoff,
    quad_points: int = 2,
) -> CostBreakdown:
    """Cost of the realised trajectory under the original Lagrangian.

    Tracking: Gauss-Legendre on the affine interpolants of states and
    target grid values; control: piecewise-constant per step (value held at
    the state-point evaluation); terminal: payoff in original units.
    """
    tau = run.partition.tau
    if params.delta != 0.0 and target is not None:
        target_grid = target.grid_values(run.partition.times)
        tracking = params.delta * running_cost_integral(
            run.states, target_grid, tau, quad_points
        )
    else:
        tracking = 0.0
    control = 0.5 * params.lam * tau * float(np.einsum("ji,ji->", run.u_state, run.u_state))
    terminal = payoff.h(run.states[-1], params.beta)
    return CostBreakdown(tracking=tracking, control=control, terminal=terminal)


def err_metric(states_exact: np.ndarray, states_approx: np.ndarray) -> np.ndarray:
    """Squared configuration distance per grid time, err(t_j) = |a_j - b_j|^2."""
    if states_exact.shape != states_approx.shape:
        raise ValueError("trajectory shapes differ")
    d = states_exact - states_approx
    return np.einsum("ji,ji->j", d, d)


def orthogonality_angles(states: np.ndarray, controls: np.ndarray) -> np.ndarray:
    """|<m_i, u_i>| / (|m_i| |u_i|) per step and spin; 0 where u_i = 0.

    states has one more row than controls; the control of step l is paired
    with the state it was computed at.
    """
    mb = states[:-1].reshape(controls.shape[0], -1, 3)
    ub = controls.reshape(controls.shape[0], -1, 3)
    dots = np.abs(np.einsum("jik,jik->ji", mb, ub))
    norms = np.linalg.norm(mb, axis=2) * np.linalg.norm(ub, axis=2)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(norms > 0.0, dots / norms, 0.0)
    return out
