# cython: language_level=3
"""Compiled pivot kernel for the weighted quantile-regression LP.

Same pivot rules as the numpy twin in ``pure.py``: Dantzig pricing with
smallest-index tie breaks, entering observation at the first breakpoint
where the cumulative directional slope turns non-negative.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs
from libc.stdlib cimport free, malloc, qsort

cnp.import_array()

CONVERGED = 0
MAX_PIVOTS = 1
SINGULAR_BASIS = 2
UNBOUNDED = 3

cdef int C_CONVERGED = 0
cdef int C_MAX_PIVOTS = 1
cdef int C_SINGULAR = 2
cdef int C_UNBOUNDED = 3

cdef double PIVOT_TOL = 1e-10


cdef struct Breakpoint:
    double t
    long idx


cdef int _cmp_bp(const void* pa, const void* pb) noexcept nogil:
    cdef const Breakpoint* a = <const Breakpoint*> pa
    cdef const Breakpoint* b = <const Breakpoint*> pb
    if a.t < b.t:
        return -1
    if a.t > b.t:
        return 1
    if a.idx < b.idx:
        return -1
    if a.idx > b.idx:
        return 1
    return 0


cdef int _lu_factor(double* A, long* piv, int p) noexcept nogil:
    """In-place LU with partial pivoting; returns 1 on a zero pivot."""
    cdef int i, j, k, imax
    cdef double amax, tmp
    for k in range(p):
        imax = k
        amax = fabs(A[k * p + k])
        for i in range(k + 1, p):
            if fabs(A[i * p + k]) > amax:
                amax = fabs(A[i * p + k])
                imax = i
        if amax == 0.0:
            return 1
        piv[k] = imax
        if imax != k:
            for j in range(p):
                tmp = A[k * p + j]
                A[k * p + j] = A[imax * p + j]
                A[imax * p + j] = tmp
        for i in range(k + 1, p):
            A[i * p + k] /= A[k * p + k]
            for j in range(k + 1, p):
                A[i * p + j] -= A[i * p + k] * A[k * p + j]
    return 0


cdef void _lu_solve(const double* LU, const long* piv, const double* b,
                    double* x, int p) noexcept nogil:
    cdef int i, j
    cdef double tmp
    for i in range(p):
        x[i] = b[i]
    for i in range(p):
        if piv[i] != i:
            tmp = x[i]
            x[i] = x[piv[i]]
            x[piv[i]] = tmp
    for i in range(p):
        for j in range(i):
            x[i] -= LU[i * p + j] * x[j]
    for i in range(p - 1, -1, -1):
        for j in range(i + 1, p):
            x[i] -= LU[i * p + j] * x[j]
        x[i] /= LU[i * p + i]


def run_pivots(object X_in, object y_in, object w_in, double tau,
               object basis_in, double ztol, long max_pivots):
    """Mirror of :func:`metaemu.solver.pure.run_pivots` (see its docstring)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] Xa = \
        np.ascontiguousarray(X_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ya = \
        np.ascontiguousarray(y_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] wa = \
        np.ascontiguousarray(w_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] basis = \
        np.array(basis_in, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] beta_out

    cdef long n = Xa.shape[0]
    cdef int p = <int> Xa.shape[1]
    cdef double one_m_tau = 1.0 - tau

    cdef double* X = <double*> Xa.data
    cdef double* y = <double*> ya.data
    cdef double* w = <double*> wa.data
    cdef long* bas = <long*> basis.data

    cdef double* Xh = <double*> malloc(p * p * sizeof(double))
    cdef long* piv = <long*> malloc(p * sizeof(long))
    cdef double* beta = <double*> malloc(p * sizeof(double))
    cdef double* rhs = <double*> malloc(p * sizeof(double))
    cdef double* col = <double*> malloc(p * sizeof(double))
    cdef double* dirs = <double*> malloc(p * p * sizeof(double))
    cdef double* r = <double*> malloc(n * sizeof(double))
    cdef double* G = <double*> malloc(n * p * sizeof(double))
    cdef double* d_plus = <double*> malloc(p * sizeof(double))
    cdef double* d_minus = <double*> malloc(p * sizeof(double))
    cdef double* tol_k = <double*> malloc(p * sizeof(double))
    cdef Breakpoint* bps = <Breakpoint*> malloc(n * sizeof(Breakpoint))

    cdef long pivots = 0
    cdef int status = C_CONVERGED
    cdef int i, j, k, best_k
    cdef long row, m, b_i
    cdef double acc, gi, wi, ri, best_val, best_sigma, sigma, slope
    cdef bint ok = (Xh != NULL and piv != NULL and beta != NULL and
                    rhs != NULL and col != NULL and dirs != NULL and
                    r != NULL and G != NULL and d_plus != NULL and
                    d_minus != NULL and tol_k != NULL and bps != NULL)

    if not ok:
        status = C_SINGULAR  # allocation failure; surfaced as numeric error
    else:
        with nogil:
            while True:
                # factor the basis matrix and solve for beta, dirs = inv(Xh)
                for i in range(p):
                    row = bas[i]
                    for j in range(p):
                        Xh[i * p + j] = X[row * p + j]
                    rhs[i] = y[row]
                if _lu_factor(Xh, piv, p):
                    status = C_SINGULAR
                    break
                _lu_solve(Xh, piv, rhs, beta, p)
                for k in range(p):
                    for i in range(p):
                        col[i] = 1.0 if i == k else 0.0
                    _lu_solve(Xh, piv, col, rhs, p)
                    for i in range(p):
                        dirs[i * p + k] = rhs[i]

                # residuals and per-edge residual rates
                for row in range(n):
                    acc = y[row]
                    for j in range(p):
                        acc -= X[row * p + j] * beta[j]
                    r[row] = acc
                    for k in range(p):
                        acc = 0.0
                        for j in range(p):
                            acc += X[row * p + j] * dirs[j * p + k]
                        G[row * p + k] = acc

                # price all 2p edges
                for k in range(p):
                    d_plus[k] = 0.0
                    d_minus[k] = 0.0
                    tol_k[k] = 1.0
                for row in range(n):
                    ri = r[row]
                    wi = w[row]
                    for k in range(p):
                        gi = G[row * p + k]
                        tol_k[k] += wi * fabs(gi)
                        if ri > ztol:
                            d_plus[k] -= tau * wi * gi
                            d_minus[k] += tau * wi * gi
                        elif ri < -ztol:
                            d_plus[k] += one_m_tau * wi * gi
                            d_minus[k] -= one_m_tau * wi * gi
                        else:
                            if gi > 0:
                                d_plus[k] += one_m_tau * wi * gi
                                d_minus[k] += tau * wi * gi
                            else:
                                d_plus[k] -= tau * wi * gi
                                d_minus[k] -= one_m_tau * wi * gi

                best_k = -1
                best_sigma = 0.0
                best_val = 0.0
                for k in range(p):
                    if d_plus[k] < -PIVOT_TOL * tol_k[k] and d_plus[k] < best_val:
                        best_val = d_plus[k]
                        best_k = k
                        best_sigma = 1.0
                    if d_minus[k] < -PIVOT_TOL * tol_k[k] and d_minus[k] < best_val:
                        best_val = d_minus[k]
                        best_k = k
                        best_sigma = -1.0
                if best_k < 0:
                    status = C_CONVERGED
                    break

                # breakpoints along the chosen edge
                sigma = best_sigma
                m = 0
                for row in range(n):
                    gi = sigma * G[row * p + best_k]
                    ri = r[row]
                    if (ri > ztol and gi > 0) or (ri < -ztol and gi < 0):
                        bps[m].t = ri / gi
                        bps[m].idx = row
                        m += 1
                if m == 0:
                    status = C_UNBOUNDED
                    break
                qsort(bps, m, sizeof(Breakpoint), _cmp_bp)
                slope = best_val
                b_i = m - 1
                for row in range(m):
                    slope += w[bps[row].idx] * fabs(sigma * G[bps[row].idx * p + best_k])
                    if slope >= 0.0:
                        b_i = row
                        break
                bas[best_k] = bps[b_i].idx
                pivots += 1
                if pivots >= max_pivots:
                    status = C_MAX_PIVOTS
                    break

    beta_out = np.empty(p, dtype=np.float64)
    if ok and status != C_SINGULAR:
        for i in range(p):
            beta_out[i] = beta[i]
    else:
        beta_out[:] = 0.0

    free(Xh); free(piv); free(beta); free(rhs); free(col); free(dirs)
    free(r); free(G); free(d_plus); free(d_minus); free(tol_k); free(bps)

    return beta_out, basis, pivots, status
