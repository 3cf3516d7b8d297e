"""State manifold helpers for N coupled unit spins.

A configuration of N spins lives on the product of N unit spheres and is
stored as a flat float64 array of length 3N; block i occupies entries
[3i, 3i+3).  All operators below act blockwise and never materialise a
3N x 3N matrix: the only dense matrix in the model is the exchange-plus-
anisotropy coupling, which is applied once per step elsewhere.

Conventions:
  cross_matrix(v) @ x == np.cross(v, x)
  sigma_block(m, alpha) == cross_matrix(m) + alpha * (I - outer(m, m))
which for a unit block equals (I - alpha*cross_matrix(m)) @ cross_matrix(m).
"""

from __future__ import annotations

import numpy as np

# Aliases for readability; configurations and tangent vectors are plain
# float64 ndarrays of shape (3N,), a single block has shape (3,).
Vec3 = np.ndarray
SpinConfiguration = np.ndarray
TangentVector = np.ndarray

UNIT_NORM_ATOL = 1e-12
TANGENT_ATOL = 1e-10


def as_blocks(m: np.ndarray) -> np.ndarray:
    """View a flat (3N,) state as an (N, 3) array of spin blocks."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 1 or m.size % 3 != 0:
        raise ValueError(f"state length must be a multiple of 3, got shape {m.shape}")
    return m.reshape(-1, 3)


def n_spins(m: np.ndarray) -> int:
    return as_blocks(m).shape[0]


def block_norms(m: np.ndarray) -> np.ndarray:
    return np.linalg.norm(as_blocks(m), axis=1)


def spin_config(vectors, atol: float = UNIT_NORM_ATOL) -> SpinConfiguration:
    """Flatten per-spin vectors into a validated configuration.

    :param vectors: sequence of N length-3 vectors (or a flat 3N array)
    :param atol: allowed deviation of each block norm from 1
    """
    m = np.asarray(vectors, dtype=float).reshape(-1).copy()
    validate_spin_config(m, atol=atol)
    return m


def validate_spin_config(m: np.ndarray, atol: float = UNIT_NORM_ATOL) -> None:
    dev = np.abs(block_norms(m) - 1.0)
    worst = float(dev.max()) if dev.size else 0.0
    if worst > atol:
        raise ValueError(
            f"spin block norms deviate from 1 by {worst:.3e} (allowed {atol:.1e})"
        )


def validate_tangent(m: np.ndarray, v: np.ndarray, atol: float = TANGENT_ATOL) -> None:
    dots = np.einsum("ij,ij->i", as_blocks(m), as_blocks(v))
    worst = float(np.abs(dots).max()) if dots.size else 0.0
    if worst > atol:
        raise ValueError(f"tangency violated: max |<v_i, m_i>| = {worst:.3e}")


def cross_matrix(v: Vec3) -> np.ndarray:
    """3x3 matrix of the left cross product, cross_matrix(v) @ x = v x x."""
    v1, v2, v3 = np.asarray(v, dtype=float)
    return np.array([[0.0, -v3, v2], [v3, 0.0, -v1], [-v2, v1, 0.0]])


def sigma_block(m_i: Vec3, alpha: float) -> np.ndarray:
    """Per-spin drift operator block sigma(m_i) + alpha*(I - m_i m_i^T).

    Equals (I - alpha*sigma(m_i)) sigma(m_i) when |m_i| = 1; the additive
    form avoids the matrix product and stays exact for unit blocks.
    """
    m_i = np.asarray(m_i, dtype=float)
    return cross_matrix(m_i) + alpha * (np.eye(3) - np.outer(m_i, m_i))


def tangent_project(m: SpinConfiguration, v: np.ndarray) -> TangentVector:
    """Blockwise orthogonal projection of v onto the tangent space at m."""
    mb = as_blocks(m)
    vb = as_blocks(v)
    dots = np.einsum("ij,ij->i", mb, vb)
    return (vb - dots[:, None] * mb).reshape(-1)


def normalize_blocks(m: np.ndarray) -> SpinConfiguration:
    """Blockwise renormalization onto the product sphere.

    Only called at the documented points (midpoint state for the control
    evaluation, tabulated target interpolation); the integrator itself is
    norm-preserving and must not lean on this.
    """
    mb = as_blocks(m)
    norms = np.linalg.norm(mb, axis=1)
    if np.any(norms == 0.0):
        raise ValueError("cannot renormalize a zero block")
    return (mb / norms[:, None]).reshape(-1)


def perturb_renormalized(m: SpinConfiguration, i: int, l: int, h: float, sign: int) -> SpinConfiguration:
    """Renormalized ambient-axis stencil point (m_i +/- h e_l)/|m_i +/- h e_l|.

    Returns a full configuration with only block i perturbed.  The stencil
    probes the ambient axes; consumers project difference quotients back to
    the tangent space.
    """
    if sign not in (-1, 1):
        raise ValueError("sign must be +1 or -1")
    mb = as_blocks(m).copy()
    if not 0 <= i < mb.shape[0]:
        raise ValueError(f"spin index {i} out of range")
    if not 0 <= l < 3:
        raise ValueError(f"component index {l} out of range")
    mb[i, l] += sign * h
    norm = np.linalg.norm(mb[i])
    if norm == 0.0:
        raise ValueError("perturbation collapsed a block to zero")
    mb[i] /= norm
    return mb.reshape(-1)


def random_config(rng: np.random.Generator, n: int) -> SpinConfiguration:
    """Uniformly random configuration, one draw per spin."""
    g = rng.normal(size=(n, 3))
    return (g / np.linalg.norm(g, axis=1)[:, None]).reshape(-1)
