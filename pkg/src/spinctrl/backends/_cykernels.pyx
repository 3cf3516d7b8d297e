# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled path kernel; numpy_backend.run_paths defines the semantics.

One tight loop per path, GIL released, so callers may fan slices of the
batch out to a thread pool.  Arithmetic mirrors the vectorized fallback
operation by operation (no fast-math, division kept as division) to keep
the two backends within rounding noise of each other.
"""

import numpy as np

from ..errors import NumericalFailure

NAME = "cython"

cdef double RESIDUAL_TOL = 1e-12


cdef inline void cross3(const double* a, const double* b, double* out) noexcept nogil:
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


cdef inline void cayley3(const double* c, const double* m, double* out) noexcept nogil:
    cdef double c2 = c[0] * c[0] + c[1] * c[1] + c[2] * c[2]
    cdef double cm = c[0] * m[0] + c[1] * m[1] + c[2] * m[2]
    cdef double cx[3]
    cdef double den = 1.0 + c2
    cross3(c, m, cx)
    out[0] = ((1.0 - c2) * m[0] + 2.0 * cm * c[0] - 2.0 * cx[0]) / den
    out[1] = ((1.0 - c2) * m[1] + 2.0 * cm * c[1] - 2.0 * cx[1]) / den
    out[2] = ((1.0 - c2) * m[2] + 2.0 * cm * c[2] - 2.0 * cx[2]) / den


cdef inline double stage_residual(const double* c, const double* m, const double* e) noexcept nogil:
    cdef double ce[3]
    cdef double cm[3]
    cdef double r, worst = 0.0
    cdef int i
    cross3(c, e, ce)
    cross3(c, m, cm)
    for i in range(3):
        r = e[i] + ce[i] - m[i] + cm[i]
        if r < 0:
            r = -r
        if r > worst:
            worst = r
    return worst


cdef int _run_range(
    const double* start,
    const double* xi,
    const double* qmat,
    bint has_q,
    double alpha,
    double nu,
    double tau,
    const double* tnodes,
    bint has_integral,
    const double* gl_x,
    const double* gl_w,
    int nq,
    double* out_final,
    double* out_integral,
    double* out_states,
    bint want_states,
    int batch,
    int steps,
    int dim,
    double* scratch,
) noexcept nogil:
    cdef int b, j, i, base, k, q
    cdef int nsp = dim // 3
    cdef double* m = scratch
    cdef double* qm = scratch + dim
    cdef double* e = scratch + 2 * dim
    cdef double* mid = scratch + 3 * dim
    cdef double* newm = scratch + 4 * dim
    cdef double a[3]
    cdef double c[3]
    cdef double acc, s, x, d, node
    cdef const double* xirow
    cdef const double* trow

    for b in range(batch):
        for i in range(dim):
            m[i] = start[i]
        acc = 0.0
        if want_states:
            for i in range(dim):
                out_states[(b * (steps + 1)) * dim + i] = m[i]

        for j in range(steps):
            xirow = xi + (b * steps + j) * dim

            # stage 1: field frozen at the current state
            if has_q:
                for i in range(dim):
                    s = 0.0
                    for k in range(dim):
                        s += qmat[i * dim + k] * m[k]
                    qm[i] = s
            for i in range(nsp):
                base = 3 * i
                if has_q:
                    cross3(m + base, qm + base, a)
                    a[0] = -qm[base] + alpha * a[0]
                    a[1] = -qm[base + 1] + alpha * a[1]
                    a[2] = -qm[base + 2] + alpha * a[2]
                else:
                    a[0] = 0.0
                    a[1] = 0.0
                    a[2] = 0.0
                c[0] = 0.5 * (tau * a[0] + nu * xirow[base])
                c[1] = 0.5 * (tau * a[1] + nu * xirow[base + 1])
                c[2] = 0.5 * (tau * a[2] + nu * xirow[base + 2])
                cayley3(c, m + base, e + base)
                if stage_residual(c, m + base, e + base) > RESIDUAL_TOL:
                    return 1

            # stage 2: field at the raw stage average
            for i in range(dim):
                mid[i] = 0.5 * (m[i] + e[i])
            if has_q:
                for i in range(dim):
                    s = 0.0
                    for k in range(dim):
                        s += qmat[i * dim + k] * mid[k]
                    qm[i] = s
            for i in range(nsp):
                base = 3 * i
                if has_q:
                    cross3(mid + base, qm + base, a)
                    a[0] = -qm[base] + alpha * a[0]
                    a[1] = -qm[base + 1] + alpha * a[1]
                    a[2] = -qm[base + 2] + alpha * a[2]
                else:
                    a[0] = 0.0
                    a[1] = 0.0
                    a[2] = 0.0
                c[0] = 0.5 * (tau * a[0] + nu * xirow[base])
                c[1] = 0.5 * (tau * a[1] + nu * xirow[base + 1])
                c[2] = 0.5 * (tau * a[2] + nu * xirow[base + 2])
                cayley3(c, m + base, newm + base)
                if stage_residual(c, m + base, newm + base) > RESIDUAL_TOL:
                    return 1

            if has_integral:
                for q in range(nq):
                    x = gl_x[q]
                    trow = tnodes + (j * nq + q) * dim
                    s = 0.0
                    for i in range(dim):
                        node = (1.0 - x) * m[i] + x * newm[i]
                        d = node - trow[i]
                        s += d * d
                    acc += (gl_w[q] * tau) * s

            for i in range(dim):
                m[i] = newm[i]
            if want_states:
                for i in range(dim):
                    out_states[(b * (steps + 1) + j + 1) * dim + i] = m[i]

        for i in range(dim):
            out_final[b * dim + i] = m[i]
        out_integral[b] = acc
    return 0


def run_paths(
    start,
    xi,
    q_matrix,
    double alpha,
    double nu,
    double tau,
    target_nodes,
    gl_x,
    gl_w,
    out_final,
    out_integral,
    out_states=None,
):
    """Drop-in compiled equivalent of numpy_backend.run_paths."""
    cdef double[::1] start_v = np.ascontiguousarray(start, dtype=np.float64)
    cdef double[:, :, ::1] xi_v = np.ascontiguousarray(xi, dtype=np.float64)
    cdef int batch = xi_v.shape[0]
    cdef int steps = xi_v.shape[1]
    cdef int dim = xi_v.shape[2]

    cdef bint has_q = q_matrix is not None
    cdef double[:, ::1] q_v
    cdef const double* q_ptr = NULL
    if has_q:
        q_v = np.ascontiguousarray(q_matrix, dtype=np.float64)
        q_ptr = &q_v[0, 0]

    cdef bint has_integral = target_nodes is not None
    cdef double[:, :, ::1] tn_v
    cdef const double* tn_ptr = NULL
    cdef double[::1] glx_v = np.ascontiguousarray(gl_x, dtype=np.float64)
    cdef double[::1] glw_v = np.ascontiguousarray(gl_w, dtype=np.float64)
    cdef int nq = glx_v.shape[0]
    if has_integral:
        tn_v = np.ascontiguousarray(target_nodes, dtype=np.float64)
        tn_ptr = &tn_v[0, 0, 0]

    cdef double[:, ::1] fin_v = out_final
    cdef double[::1] integ_v = out_integral
    cdef bint want_states = out_states is not None
    cdef double[:, :, ::1] st_v
    cdef double* st_ptr = NULL
    if want_states:
        st_v = out_states
        st_ptr = &st_v[0, 0, 0]

    scratch_arr = np.empty(5 * dim, dtype=np.float64)
    cdef double[::1] scratch_v = scratch_arr
    cdef int err
    with nogil:
        err = _run_range(
            &start_v[0], &xi_v[0, 0, 0], q_ptr, has_q, alpha, nu, tau,
            tn_ptr, has_integral, &glx_v[0], &glw_v[0], nq,
            &fin_v[0, 0], &integ_v[0], st_ptr, want_states,
            batch, steps, dim, &scratch_v[0],
        )
    if err:
        raise NumericalFailure("midpoint stage residual exceeds tolerance in compiled kernel")
