"""Pure numpy pivot kernel for the weighted quantile-regression LP.

This mirrors the compiled kernel in ``_fast.pyx``; both implement the same
pivot rules (Dantzig pricing, smallest-index tie breaks, first breakpoint
with non-negative cumulative slope) so either backend walks the same
vertex path on the same input.
"""

from __future__ import annotations

import numpy as np

# status codes shared with the compiled kernel
CONVERGED = 0
MAX_PIVOTS = 1
SINGULAR_BASIS = 2
UNBOUNDED = 3

# pivot acceptance threshold, relative to the per-edge slope scale
PIVOT_TOL = 1e-10


def run_pivots(X, y, w, tau, basis, ztol, max_pivots):
    """Descend through interpolation vertices until no improving edge remains.

    Parameters
    ----------
    X : (n, p) float64 design matrix, columns pre-scaled to O(1).
    y, w : (n,) response and positive weights.
    tau : quantile level in (0, 1).
    basis : (p,) int64 row indices with X[basis] nonsingular.
    ztol : absolute threshold below which a residual counts as zero.
    max_pivots : pivot budget.

    Returns
    -------
    (beta, basis, n_pivots, status)
    """
    n, p = X.shape
    basis = np.asarray(basis, dtype=np.int64).copy()
    one_m_tau = 1.0 - tau
    pivots = 0
    while True:
        Xh = X[basis]
        try:
            beta = np.linalg.solve(Xh, y[basis])
            dirs = np.linalg.inv(Xh)
        except np.linalg.LinAlgError:
            return np.zeros(p), basis, pivots, SINGULAR_BASIS
        r = y - X @ beta
        G = X @ dirs  # column k: residual change rate along edge k
        zero = np.abs(r) <= ztol
        pos = r > ztol
        neg = (r < -ztol)

        wp = w[pos]
        wn = w[neg]
        base = np.zeros(p)
        if wp.size:
            base += -tau * (wp @ G[pos])
        if wn.size:
            base += one_m_tau * (wn @ G[neg])
        Gz = G[zero]
        wz = w[zero]
        d_plus = base + wz @ np.maximum(one_m_tau * Gz, -tau * Gz)
        d_minus = -base + wz @ np.maximum(-one_m_tau * Gz, tau * Gz)

        tol_k = PIVOT_TOL * (1.0 + np.abs(G).T @ w)
        best_k = -1
        best_sigma = 0.0
        best_val = 0.0
        for k in range(p):
            if d_plus[k] < -tol_k[k] and d_plus[k] < best_val:
                best_val = d_plus[k]
                best_k = k
                best_sigma = 1.0
            if d_minus[k] < -tol_k[k] and d_minus[k] < best_val:
                best_val = d_minus[k]
                best_k = k
                best_sigma = -1.0
        if best_k < 0:
            return beta, basis, pivots, CONVERGED

        g = best_sigma * G[:, best_k]
        blocking = (pos & (g > 0)) | (neg & (g < 0))
        idx = np.nonzero(blocking)[0]
        if idx.size == 0:
            # impossible for tau in (0,1) with positive weights
            return beta, basis, pivots, UNBOUNDED
        t = r[idx] / g[idx]
        order = np.lexsort((idx, t))
        ordered = idx[order]
        cum = best_val + np.cumsum(w[ordered] * np.abs(g[ordered]))
        stop = int(np.argmax(cum >= 0.0))
        if cum[stop] < 0.0:
            stop = ordered.size - 1
        basis[best_k] = ordered[stop]
        pivots += 1
        if pivots >= max_pivots:
            return beta, basis, pivots, MAX_PIVOTS
