"""Vectorized numpy implementations of the hot kernels.

Every function here has a loop-based twin in ``_numba`` with the same
signature and the same return conventions.
"""
import numpy as np

# pcg status codes
CONVERGED = 0
MAX_ITER = 1
BREAKDOWN = 2


def csr_matvec(indptr, indices, data, x):
    n = indptr.shape[0] - 1
    rows = np.repeat(np.arange(n), np.diff(indptr))
    return np.bincount(rows, weights=data * x[indices], minlength=n)


def pcg(indptr, indices, data, b, x0, dinv, tol_abs, max_iter):
    """Jacobi-preconditioned CG.

    Returns ``(x, iterations, residual_norm, status)``. The residual norm is
    the true ``||b - A x||`` at exit. Convergence of the recursive residual is
    confirmed against the true residual; on disagreement the iteration is
    restarted from the current iterate.
    """
    x = x0.copy()
    r = b - csr_matvec(indptr, indices, data, x)
    rnorm = np.sqrt(r @ r)
    it = 0
    while True:
        if not np.isfinite(rnorm):
            return x, it, rnorm, BREAKDOWN
        if rnorm <= tol_abs:
            return x, it, rnorm, CONVERGED
        if it >= max_iter:
            return x, it, rnorm, MAX_ITER
        z = dinv * r
        p = z.copy()
        rz = r @ z
        while it < max_iter:
            ap = csr_matvec(indptr, indices, data, p)
            pap = p @ ap
            if not (pap > 0.0) or not np.isfinite(pap):
                return x, it, np.sqrt(r @ r), BREAKDOWN
            alpha = rz / pap
            x += alpha * p
            r -= alpha * ap
            it += 1
            rr = r @ r
            if np.sqrt(rr) <= tol_abs or not np.isfinite(rr):
                break
            z = dinv * r
            rz_new = r @ z
            p = z + (rz_new / rz) * p
            rz = rz_new
        r = b - csr_matvec(indptr, indices, data, x)
        rnorm = np.sqrt(r @ r)


def _faces(a, hx, hy):
    fx = 0.5 * (a[:, :-1] + a[:, 1:]) / (hx * hx)
    fy = 0.5 * (a[:-1, :] + a[1:, :]) / (hy * hy)
    return fx, fy


def assemble_flux(a, hx, hy):
    """CSR pattern of ``-div(a grad .)`` on the interior nodes.

    Returns ``(indptr, indices, data, diag_pos)`` where ``diag_pos[p]`` is
    the offset of the diagonal entry of row ``p`` inside ``data``.
    """
    ny, nx = a.shape
    mx, my = nx - 2, ny - 2
    m = mx * my
    fx, fy = _faces(a, hx, hy)
    jj, ii = np.meshgrid(np.arange(1, ny - 1), np.arange(1, nx - 1), indexing="ij")
    jj = jj.ravel()
    ii = ii.ravel()
    p = np.arange(m)
    w = fx[jj, ii - 1]
    e = fx[jj, ii]
    s = fy[jj - 1, ii]
    n = fy[jj, ii]
    diag = w + e + s + n

    rows = [p]
    cols = [p]
    vals = [diag]
    for mask, off, coef in (
        (jj > 1, -mx, s),
        (ii > 1, -1, w),
        (ii < nx - 2, 1, e),
        (jj < ny - 2, mx, n),
    ):
        rows.append(p[mask])
        cols.append(p[mask] + off)
        vals.append(-coef[mask])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    indptr = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=m), out=indptr[1:])
    diag_pos = np.flatnonzero(rows == cols).astype(np.int64)
    return indptr, cols.astype(np.int64), vals, diag_pos


def flux_divergence(a, phi, hx, hy):
    """``div(a grad phi)`` in flux form at interior nodes; boundary rows are 0."""
    fx, fy = _faces(a, hx, hy)
    gx = fx * (phi[:, 1:] - phi[:, :-1])
    gy = fy * (phi[1:, :] - phi[:-1, :])
    out = np.zeros_like(phi, dtype=np.float64)
    out[1:-1, 1:-1] = (gx[1:-1, 1:] - gx[1:-1, :-1]) + (gy[1:, 1:-1] - gy[:-1, 1:-1])
    return out
