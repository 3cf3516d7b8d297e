"""Vectorized pure-numpy path kernel; semantic twin of the Cython core.

Operates on a batch of B walks from one start configuration, stepping all
paths in lockstep.  einsum with fixed subscripts (never BLAS) keeps the
arithmetic order deterministic regardless of threading configuration.
"""

from __future__ import annotations

import numpy as np

from ..errors import NumericalFailure

NAME = "numpy"
STAGE_RESIDUAL_TOL = 1e-12


def _cayley_batch(c: np.ndarray, m: np.ndarray) -> np.ndarray:
    # (B, N, 3) blocks; closed-form solve of (I + sigma(c)) e = (I - sigma(c)) m
    c2 = np.einsum("bnj,bnj->bn", c, c)[..., None]
    cdotm = np.einsum("bnj,bnj->bn", c, m)[..., None]
    return ((1.0 - c2) * m + 2.0 * cdotm * c - 2.0 * np.cross(c, m)) / (1.0 + c2)


def _stage_checked(c: np.ndarray, m: np.ndarray) -> np.ndarray:
    e = _cayley_batch(c, m)
    residual = e + np.cross(c, e) - m + np.cross(c, m)
    worst = float(np.abs(residual).max())
    if worst > STAGE_RESIDUAL_TOL:
        raise NumericalFailure(f"midpoint stage residual {worst:.3e} exceeds tolerance")
    return e


def run_paths(
    start: np.ndarray,
    xi: np.ndarray,
    q_matrix,
    alpha: float,
    nu: float,
    tau: float,
    target_nodes,
    gl_x: np.ndarray,
    gl_w: np.ndarray,
    out_final: np.ndarray,
    out_integral: np.ndarray,
    out_states=None,
) -> None:
    """Roll a batch of uncontrolled paths, accumulating the tracking integral.

    start: (3N,) shared initial configuration.
    xi: (B, S, 3N) signed increments, one row per path.
    q_matrix: dense (3N, 3N) coupling or None when it vanishes.
    target_nodes: (S, q, 3N) target interpolant at the quadrature nodes, or
        None to skip the integral (delta = 0 shortcut).
    gl_x / gl_w: quadrature nodes and weights on [0, 1], weights sum to 1.
    out_final: (B, 3N); out_integral: (B,); out_states: optional (B, S+1, 3N).
    """
    batch, steps, dim = xi.shape
    n = dim // 3

    def abar(flat: np.ndarray) -> np.ndarray:
        # -(Qm) + alpha * m x (Qm), blockwise, on (B, 3N) flats
        qm = np.einsum("ij,bj->bi", q_matrix, flat) if q_matrix is not None else None
        if qm is None:
            return np.zeros((flat.shape[0], n, 3))
        qmb = qm.reshape(-1, n, 3)
        mb = flat.reshape(-1, n, 3)
        return -qmb + alpha * np.cross(mb, qmb)

    state = np.broadcast_to(start, (batch, dim)).copy()
    integral = np.zeros(batch)
    if out_states is not None:
        out_states[:, 0, :] = state

    for j in range(steps):
        mb = state.reshape(-1, n, 3)
        xib = xi[:, j, :].reshape(-1, n, 3)
        c1 = 0.5 * (tau * abar(state) + nu * xib)
        e = _stage_checked(c1, mb)
        mid = 0.5 * (mb + e)
        c2 = 0.5 * (tau * abar(mid.reshape(-1, dim)) + nu * xib)
        new = _stage_checked(c2, mb).reshape(-1, dim)

        if target_nodes is not None:
            for q in range(gl_x.size):
                x = gl_x[q]
                at_node = (1.0 - x) * state + x * new
                diff = at_node - target_nodes[j, q][None, :]
                integral += (gl_w[q] * tau) * np.einsum("bi,bi->b", diff, diff)

        state = new
        if out_states is not None:
            out_states[:, j + 1, :] = state

    out_final[:] = state
    out_integral[:] = integral
