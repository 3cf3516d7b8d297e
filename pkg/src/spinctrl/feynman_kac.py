"""Monte-Carlo evaluation of the transformed value function.

The linearised equation has the stochastic representation

    w(t, m) = E[ exp(-beta h(M(T))) * exp(-beta delta Int_t^T |M(r) - mtilde(r)|^2 dr) ]

along the uncontrolled process M started at (t, m).  Paths are realised by
the midpoint scheme on one of the batch backends; the time integral uses
composite Gauss-Legendre quadrature on the piecewise-affine interpolants of
both the path and the target grid values (2 points per step integrate the
piecewise-quadratic integrand exactly).

All per-sample functionals are accumulated in log space.  A sample whose
exponent falls below the representable range is flagged and contributes 0
to the mean, and the flagged fraction is reported; an estimate where every
sample flags is a hard numerical failure (the known small-lambda*nu^2
overflow regime of the exponential transform).

Reductions over the sample axis use a fixed pairwise tree, so estimates are
bit-identical across runs and worker counts; the antithetic pair structure
(sample 2p+1 negates the walk of sample 2p) is baked into the sample order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import backends
from .errors import ConfigError, NumericalFailure
from .integrator import Partition
from .model import ModelParams, TargetProfile, TerminalPayoff
from .rng import NS_ESTIMATOR, SeedPolicy, signed_batch

LOG_TINY = float(np.log(np.finfo(np.float64).tiny))  # about -708.396


@dataclass
class EstimatorConfig:
    """Knobs of one estimator invocation.

    samples is the total sample count M (even, >= 2; antithetic pairs M/2);
    hbar = None means the default stencil width 1/sqrt(M).  threads only
    partitions the batch; it never changes results.
    """

    samples: int
    hbar: Optional[float] = None
    quad_points: int = 2
    method: str = "B"
    threads: int = 1

    def __post_init__(self):
        if self.samples < 2 or self.samples % 2:
            raise ConfigError("samples must be even and >= 2")
        if self.hbar is not None and self.hbar <= 0:
            raise ConfigError("hbar must be positive")
        if self.quad_points < 1:
            raise ConfigError("quad_points must be >= 1")
        if self.method not in ("A", "B"):
            raise ConfigError("method must be 'A' or 'B'")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    @property
    def hbar_value(self) -> float:
        return self.hbar if self.hbar is not None else 1.0 / math.sqrt(self.samples)


@dataclass
class WEstimate:
    """Antithetic Monte-Carlo estimate of w at one (t, m).

    value = exp(log_value) may underflow to 0 for extreme exponents even
    when the estimate itself is fine; downstream ratios use log_value.
    std_error is the sample std of the antithetic-pair averages divided by
    sqrt(M/2) (0 when only one pair was drawn).
    """

    value: float
    log_value: float
    std_error: float
    samples_used: int
    flagged_fraction: float


def gl_nodes(n_points: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights mapped to [0, 1], weights summing to 1."""
    x, w = np.polynomial.legendre.leggauss(n_points)
    return 0.5 * (x + 1.0), 0.5 * w


def tree_sum(values: np.ndarray) -> float:
    """Fixed pairwise-tree sum, independent of chunking and thread count."""
    acc = np.asarray(values, dtype=float).copy()
    while acc.size > 1:
        half = acc.size // 2
        head = acc[: 2 * half : 2] + acc[1 : 2 * half : 2]
        acc = np.concatenate([head, acc[2 * half :]]) if acc.size % 2 else head
    return float(acc[0]) if acc.size else 0.0


def target_interpolant_nodes(target_grid: np.ndarray, gl_x: np.ndarray) -> np.ndarray:
    """Target values at the quadrature nodes of every step, (S, q, 3N)."""
    lo = target_grid[:-1]
    hi = target_grid[1:]
    return (1.0 - gl_x)[None, :, None] * lo[:, None, :] + gl_x[None, :, None] * hi[:, None, :]


def running_cost_integral(
    path_states: np.ndarray,
    target_states: np.ndarray,
    tau: float,
    n_points: int = 2,
) -> float:
    """Int |m(r) - mtilde(r)|^2 dr on the affine interpolants of both grids.

    Reference implementation; the backends accumulate the same sum inside
    the path loop.
    """
    if path_states.shape != target_states.shape:
        raise ValueError("path and target grids must have matching shapes")
    gl_x, gl_w = gl_nodes(n_points)
    total = 0.0
    for j in range(path_states.shape[0] - 1):
        for x, w in zip(gl_x, gl_w):
            d = (1.0 - x) * (path_states[j] - target_states[j]) + x * (
                path_states[j + 1] - target_states[j + 1]
            )
            total += w * tau * float(d @ d)
    return total


def path_functional_log_h(
    params: ModelParams,
    payoff: TerminalPayoff,
    path_states: np.ndarray,
    target_states: np.ndarray,
    tau: float,
    n_points: int = 2,
) -> float:
    """log of the per-path integrand H (terminal factor times running factor)."""
    log_t = payoff.log_wt(path_states[-1], params.beta)
    if params.delta == 0.0:
        return log_t
    integral = running_cost_integral(path_states, target_states, tau, n_points)
    return log_t - params.beta * params.delta * integral


# ---------------------------------------------------------------------------
# batched path dispatch


def run_sample_paths(
    params: ModelParams,
    start: np.ndarray,
    xi: np.ndarray,
    tau: float,
    target_grid: Optional[np.ndarray],
    gl_x: np.ndarray,
    gl_w: np.ndarray,
    threads: int = 1,
    want_states: bool = False,
):
    """Run a batch of sampler paths on the active backend, in thread chunks.

    xi has shape (B, S, 3N); target_grid is the (S+1, 3N) stack of target
    values on the tail grid, or None when delta = 0 (integral skipped).
    Chunking only slices the batch axis, so any thread count produces the
    same bits.  Returns (finals, integrals[, states]).
    """
    batch, steps, dim = xi.shape
    backend = backends.active_backend()
    q_matrix = None if params.q_is_zero() else params.q_dense()
    target_nodes = (
        None if target_grid is None else target_interpolant_nodes(target_grid, gl_x)
    )
    finals = np.empty((batch, dim))
    integrals = np.empty(batch)
    states = np.empty((batch, steps + 1, dim)) if want_states else None

    def run_chunk(lo: int, hi: int) -> None:
        backend.run_paths(
            start,
            xi[lo:hi],
            q_matrix,
            params.alpha,
            params.nu,
            tau,
            target_nodes,
            gl_x,
            gl_w,
            finals[lo:hi],
            integrals[lo:hi],
            None if states is None else states[lo:hi],
        )

    n_workers = max(1, min(threads, batch))
    if n_workers == 1:
        run_chunk(0, batch)
    else:
        bounds = np.linspace(0, batch, n_workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            futures = [
                pool.submit(run_chunk, int(bounds[i]), int(bounds[i + 1]))
                for i in range(n_workers)
                if bounds[i] < bounds[i + 1]
            ]
            for fut in futures:
                fut.result()

    if want_states:
        return finals, integrals, states
    return finals, integrals


# ---------------------------------------------------------------------------
# reduction and the point estimator


def reduce_log_functionals(log_h: np.ndarray) -> WEstimate:
    """Antithetic-pair reduction of per-sample log-functionals.

    Samples below the representable exponent range are flagged and enter
    the mean as 0.  Internally everything is scaled by the largest exponent
    so ratios formed downstream (gradient over value) never touch the
    underflow boundary themselves.
    """
    log_h = np.asarray(log_h, dtype=float)
    n = log_h.size
    if n < 2 or n % 2:
        raise ValueError("need an even number of samples")
    flagged = ~(log_h >= LOG_TINY)  # catches NaN as flagged too
    n_flagged = int(flagged.sum())
    if n_flagged == n:
        raise NumericalFailure(
            "all Monte-Carlo samples underflowed the exponential transform "
            "(value function vanished numerically); decrease beta*delta "
            "(larger lambda*nu^2, smaller delta or c_ext), increase samples, "
            "or shorten the horizon"
        )
    scale = float(log_h[~flagged].max())
    scaled = np.where(flagged, 0.0, np.exp(log_h - scale))
    pair_avg = 0.5 * (scaled[0::2] + scaled[1::2])
    n_pairs = pair_avg.size
    mean_s = tree_sum(pair_avg) / n_pairs
    if mean_s <= 0.0:
        raise NumericalFailure("estimator mean collapsed to zero after flagging")
    if n_pairs > 1:
        var_s = tree_sum((pair_avg - mean_s) ** 2) / (n_pairs - 1)
        se_s = math.sqrt(var_s / n_pairs)
    else:
        se_s = 0.0
    log_value = scale + math.log(mean_s)
    std_error = 0.0 if se_s == 0.0 else math.exp(scale + math.log(se_s))
    return WEstimate(
        value=math.exp(log_value) if log_value >= LOG_TINY else 0.0,
        log_value=log_value,
        std_error=std_error,
        samples_used=n,
        flagged_fraction=n_flagged / n,
    )


def log_functionals_for_batch(
    params: ModelParams,
    payoff: TerminalPayoff,
    finals: np.ndarray,
    integrals: np.ndarray,
) -> np.ndarray:
    log_h = payoff.log_wt_batch(finals, params.beta)
    if params.delta != 0.0:
        log_h = log_h - params.beta * params.delta * integrals
    return log_h


def grid_index(partition: Partition, t: float) -> int:
    """Index ell with t = t_ell, rejecting off-grid times."""
    ell = int(round(t / partition.tau))
    if not 0 <= ell <= partition.n_steps or abs(t - ell * partition.tau) > 1e-9 * partition.horizon:
        raise ConfigError(f"t = {t} is not a grid time of {partition}")
    return ell


def estimate_w(
    params: ModelParams,
    payoff: TerminalPayoff,
    target: Optional[TargetProfile],
    partition: Partition,
    t: float,
    m: np.ndarray,
    cfg: EstimatorConfig,
    policy: SeedPolicy,
    context: tuple = (NS_ESTIMATOR, 0, 0, 0, 0),
) -> WEstimate:
    """Plain Feynman-Kac point estimate of w(t, m) with antithetic pairs."""
    ell = grid_index(partition, t)
    steps = partition.n_steps - ell
    if steps == 0:
        log_wt = payoff.log_wt(m, params.beta)
        return WEstimate(math.exp(log_wt), log_wt, 0.0, cfg.samples, 0.0)
    dim = np.asarray(m).size
    pairs = policy.walk_pairs(context, cfg.samples // 2, steps, dim, partition.tau)
    xi = signed_batch(pairs)
    target_grid = (
        target.grid_values(partition.times[ell:])
        if (params.delta != 0.0 and target is not None)
        else None
    )
    gl_x, gl_w = gl_nodes(cfg.quad_points)
    finals, integrals = run_sample_paths(
        params, np.asarray(m, dtype=float), xi, partition.tau,
        target_grid, gl_x, gl_w, threads=cfg.threads,
    )
    log_h = log_functionals_for_batch(params, payoff, finals, integrals)
    return reduce_log_functionals(log_h)


def value_function_W(estimate: WEstimate | float, beta: float) -> float:
    """Recover W = -log(w)/beta from an estimate or a raw positive value."""
    if isinstance(estimate, WEstimate):
        return -estimate.log_value / beta
    value = float(estimate)
    if value <= 0.0:
        raise NumericalFailure("cannot take W = -log(w)/beta of a nonpositive w")
    return -math.log(value) / beta
