"""Model data: coupling operators, drifts, targets, terminal payoffs.

The controlled dynamics of N unit spins m = (m_1..m_N) is

    dm = f(m, u) dt + nu * (m x o dW),   f(m, u) = Sigma(m) (-Q m + c_ext u)

with Q = J + D combining symmetric PSD exchange J and per-spin diagonal
anisotropy/stray blocks D_i, Sigma(m) the blockwise operator
sigma(m_i) + alpha (I - m_i m_i^T), and Stratonovich noise.  The value
function of the tracking problem with running cost
L(m, u) = delta |m - mtilde|^2 + lambda/2 |u|^2 linearises under the
exponential transform w = exp(-beta W), beta = c_ext^2 (1+alpha^2)/(lambda nu^2),
whose representation is sampled by the estimator modules.  This module owns
the parameter bundle and every model-specific formula the samplers need.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import manifold
from .errors import ConfigError

PSD_ATOL = 1e-9


# ---------------------------------------------------------------------------
# coupling matrix builders


def exchange_zero(n: int) -> np.ndarray:
    return np.zeros((3 * n, 3 * n))


def exchange_two_spin(mu: float) -> np.ndarray:
    """Symmetric two-spin exchange: (Jm)_1 = mu(m_1 - m_2), (Jm)_2 = mu(m_2 - m_1)."""
    eye = np.eye(3)
    return np.block([[mu * eye, -mu * eye], [-mu * eye, mu * eye]])


def exchange_ring(n: int) -> np.ndarray:
    """Nearest-neighbour ring: (Jm)_i = -m_{i-1} + 2 m_i - m_{i+1}, periodic."""
    if n < 3:
        raise ConfigError("ring exchange needs at least 3 spins")
    lap = 2.0 * np.eye(n)
    for i in range(n):
        lap[i, (i + 1) % n] -= 1.0
        lap[i, (i - 1) % n] -= 1.0
    return np.kron(lap, np.eye(3))


# ---------------------------------------------------------------------------
# parameters


@dataclass
class ModelParams:
    """Physical and cost parameters for one control problem.

    exchange is the dense symmetric PSD (3N, 3N) matrix J; d_blocks holds the
    diagonals of the per-spin blocks D_i as an (N, 3) array (zeros by
    default).  Q = J + diag(d_blocks) is what the drifts apply.
    """

    n_spins: int
    alpha: float
    nu: float
    lam: float
    delta: float
    c_ext: float
    horizon: float
    exchange: np.ndarray = None
    d_blocks: np.ndarray = None

    def __post_init__(self):
        n = self.n_spins
        if n < 1:
            raise ConfigError("n_spins must be positive")
        if self.exchange is None:
            self.exchange = exchange_zero(n)
        self.exchange = np.asarray(self.exchange, dtype=float)
        if self.exchange.shape != (3 * n, 3 * n):
            raise ConfigError(
                f"exchange must be ({3*n}, {3*n}), got {self.exchange.shape}"
            )
        if not np.allclose(self.exchange, self.exchange.T, atol=1e-12):
            raise ConfigError("exchange matrix must be symmetric")
        scale = max(1.0, float(np.abs(self.exchange).max()))
        if np.linalg.eigvalsh(self.exchange).min() < -PSD_ATOL * scale:
            raise ConfigError("exchange matrix must be positive semidefinite")
        if self.d_blocks is None:
            self.d_blocks = np.zeros((n, 3))
        self.d_blocks = np.asarray(self.d_blocks, dtype=float)
        if self.d_blocks.shape != (n, 3):
            raise ConfigError(f"d_blocks must be ({n}, 3), got {self.d_blocks.shape}")
        if self.lam <= 0:
            raise ConfigError("lambda must be positive")
        if self.delta < 0 or self.alpha < 0 or self.nu < 0:
            raise ConfigError("alpha, nu, delta must be nonnegative")
        if self.horizon <= 0:
            raise ConfigError("horizon must be positive")

    @property
    def beta(self) -> float:
        """Exponential-transform rate c_ext^2 (1+alpha^2) / (lambda nu^2)."""
        if self.nu == 0:
            raise ConfigError("beta undefined for nu = 0 (no noise, no transform)")
        return self.c_ext**2 * (1.0 + self.alpha**2) / (self.lam * self.nu**2)

    def q_dense(self) -> np.ndarray:
        return self.exchange + np.diag(self.d_blocks.reshape(-1))

    def q_is_zero(self) -> bool:
        return not (np.any(self.exchange) or np.any(self.d_blocks))

    def q_apply(self, m: np.ndarray) -> np.ndarray:
        """(J + D) m without forming the dense sum."""
        return self.exchange @ m + self.d_blocks.reshape(-1) * m

    # -- drift fields -------------------------------------------------------

    def drift_f(self, m: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Controlled drift Sigma(m)(-Qm + c_ext u), returned in cross form."""
        h = -self.q_apply(m) + self.c_ext * np.asarray(u, dtype=float)
        return self._sigma_apply(m, h)

    def drift_b(self, m: np.ndarray) -> np.ndarray:
        """Linearising drift b(m) = Sigma(m) Q m; the sampled process uses -b."""
        return self._sigma_apply(m, self.q_apply(m))

    def _sigma_apply(self, m: np.ndarray, h: np.ndarray) -> np.ndarray:
        mb = manifold.as_blocks(m)
        hb = manifold.as_blocks(h)
        mxh = np.cross(mb, hb)
        return (mxh - self.alpha * np.cross(mb, mxh)).reshape(-1)

    def abar(self, m: np.ndarray) -> np.ndarray:
        """Midpoint-scheme field for the uncontrolled sampler.

        abar_i(m) = -(Qm)_i + alpha * m_i x (Qm)_i, so that
        m_i x abar_i = -b_i(m).
        """
        qm = manifold.as_blocks(self.q_apply(m))
        mb = manifold.as_blocks(m)
        return (-qm + self.alpha * np.cross(mb, qm)).reshape(-1)

    def a_ctrl(self, m: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Midpoint-scheme field with feedback, m_i x a_i = f_i(m, u)."""
        hb = manifold.as_blocks(
            -self.q_apply(m) + self.c_ext * np.asarray(u, dtype=float)
        )
        mb = manifold.as_blocks(m)
        return (hb - self.alpha * np.cross(mb, hb)).reshape(-1)

    def lagrangian(self, m: np.ndarray, u: np.ndarray, mtilde_t: np.ndarray) -> float:
        diff = np.asarray(m, dtype=float) - np.asarray(mtilde_t, dtype=float)
        uu = np.asarray(u, dtype=float)
        return self.delta * float(diff @ diff) + 0.5 * self.lam * float(uu @ uu)


# ---------------------------------------------------------------------------
# target profiles

SWITCH = "switch"


@dataclass
class TargetProfile:
    """Time-dependent tracking target mtilde(t), one unit vector per spin.

    kind:
      constant        -- fixed per-spin vectors
      rotating-switch -- spins marked SWITCH follow the half-turn profile
                         (-cos(pi t / T), sin(pi t / T), 0); the rest hold
                         their given vector
      tabulated       -- piecewise-affine in t between tabulated rows,
                         blockwise renormalized after interpolation
    """

    kind: str
    n_spins: int
    horizon: float
    vectors: Optional[np.ndarray] = None           # (N, 3) for constant / holds
    switch_spins: tuple = ()                       # indices following the switch
    times: Optional[np.ndarray] = None             # (K,) for tabulated
    table: Optional[np.ndarray] = None             # (K, 3N) for tabulated

    def __post_init__(self):
        if self.kind not in ("constant", "rotating-switch", "tabulated"):
            raise ConfigError(f"unknown target kind {self.kind!r}")
        if self.kind in ("constant", "rotating-switch"):
            self.vectors = np.asarray(self.vectors, dtype=float).reshape(self.n_spins, 3)
        if self.kind == "tabulated":
            self.times = np.asarray(self.times, dtype=float)
            self.table = np.asarray(self.table, dtype=float)
            if self.table.shape != (self.times.size, 3 * self.n_spins):
                raise ConfigError("tabulated target shape mismatch")
            if self.times.size < 2 or np.any(np.diff(self.times) <= 0):
                raise ConfigError("tabulated times must be strictly increasing")

    def eval(self, t: float) -> np.ndarray:
        """Target configuration at time t (analytic kinds exact, tables interpolated)."""
        if self.kind == "constant":
            return self.vectors.reshape(-1).copy()
        if self.kind == "rotating-switch":
            out = self.vectors.copy()
            phase = np.pi * t / self.horizon
            for i in self.switch_spins:
                out[i] = (-np.cos(phase), np.sin(phase), 0.0)
            return out.reshape(-1)
        row = np.empty(3 * self.n_spins)
        for c in range(row.size):
            row[c] = np.interp(t, self.times, self.table[:, c])
        return manifold.normalize_blocks(row)

    def grid_values(self, times: np.ndarray) -> np.ndarray:
        """Stack of eval() at the given grid times, shape (len(times), 3N)."""
        return np.stack([self.eval(float(t)) for t in np.asarray(times)])


def constant_target(vectors) -> Callable[[int, float], TargetProfile]:
    # small helper used by scenario presets
    arr = np.asarray(vectors, dtype=float)

    def build(n: int, horizon: float) -> TargetProfile:
        return TargetProfile("constant", n, horizon, vectors=arr)

    return build


# ---------------------------------------------------------------------------
# terminal payoffs


@dataclass
class TerminalPayoff:
    """Terminal cost h and its exponential image w_T = exp(-beta h).

    kinds:
      quadratic-tracking -- h(m) = 1/2 |m - m_ref|^2
      log-harmonic-1     -- terminal w stored directly: w_T = scale*(m_3 + 2)
      log-harmonic-2     -- w_T = scale*(m_{1,3} + m_{2,3} + 2)
      custom             -- explicit callables, not config-serializable

    The log kinds avoid the exp/log round trip: the sampler consumes
    log w_T directly and h is recovered as -log(w_T)/beta only where a cost
    in original units is reported.
    """

    kind: str
    m_ref: Optional[np.ndarray] = None
    scale: float = 1.0
    h_fn: Optional[Callable[[np.ndarray], float]] = None
    log_wt_fn: Optional[Callable[[np.ndarray, float], float]] = None

    def __post_init__(self):
        kinds = ("quadratic-tracking", "log-harmonic-1", "log-harmonic-2", "custom")
        if self.kind not in kinds:
            raise ConfigError(f"unknown payoff kind {self.kind!r}")
        if self.kind == "quadratic-tracking":
            if self.m_ref is None:
                raise ConfigError("quadratic-tracking needs m_ref")
            self.m_ref = np.asarray(self.m_ref, dtype=float).reshape(-1)
        if self.scale <= 0:
            raise ConfigError("payoff scale must be positive")
        if self.kind == "custom" and self.h_fn is None:
            raise ConfigError("custom payoff needs h_fn")

    def h(self, m: np.ndarray, beta: float) -> float:
        """Terminal cost in original units."""
        if self.kind == "quadratic-tracking":
            d = np.asarray(m, dtype=float) - self.m_ref
            return 0.5 * float(d @ d)
        if self.kind == "custom":
            return float(self.h_fn(np.asarray(m, dtype=float)))
        return -self.log_wt(m, beta) / beta

    def log_wt(self, m: np.ndarray, beta: float) -> float:
        return float(self.log_wt_batch(np.asarray(m, dtype=float)[None, :], beta)[0])

    def log_wt_batch(self, states: np.ndarray, beta: float) -> np.ndarray:
        """log w_T for a batch of terminal states, shape (B, 3N) -> (B,)."""
        states = np.asarray(states, dtype=float)
        if self.kind == "quadratic-tracking":
            d = states - self.m_ref[None, :]
            return -beta * 0.5 * np.einsum("bi,bi->b", d, d)
        if self.kind == "log-harmonic-1":
            return np.log(self.scale * (states[:, 2] + 2.0))
        if self.kind == "log-harmonic-2":
            return np.log(self.scale * (states[:, 2] + states[:, 5] + 2.0))
        if self.log_wt_fn is not None:
            return np.array([self.log_wt_fn(s, beta) for s in states])
        return np.array([-beta * self.h_fn(s) for s in states])
