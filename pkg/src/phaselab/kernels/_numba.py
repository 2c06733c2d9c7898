"""Loop kernels compiled with numba. Same contracts as ``_numpy``."""
import numpy as np
from numba import njit

CONVERGED = 0
MAX_ITER = 1
BREAKDOWN = 2


@njit(cache=True)
def csr_matvec(indptr, indices, data, x):
    n = indptr.shape[0] - 1
    y = np.zeros(n)
    for i in range(n):
        acc = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            acc += data[k] * x[indices[k]]
        y[i] = acc
    return y


@njit(cache=True)
def _dot(a, b):
    acc = 0.0
    for i in range(a.shape[0]):
        acc += a[i] * b[i]
    return acc


@njit(cache=True)
def _residual(indptr, indices, data, b, x, r):
    n = b.shape[0]
    for i in range(n):
        acc = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            acc += data[k] * x[indices[k]]
        r[i] = b[i] - acc


@njit(cache=True)
def pcg(indptr, indices, data, b, x0, dinv, tol_abs, max_iter):
    n = b.shape[0]
    x = x0.copy()
    r = np.empty(n)
    z = np.empty(n)
    p = np.empty(n)
    ap = np.empty(n)
    _residual(indptr, indices, data, b, x, r)
    rnorm = np.sqrt(_dot(r, r))
    it = 0
    while True:
        if not np.isfinite(rnorm):
            return x, it, rnorm, BREAKDOWN
        if rnorm <= tol_abs:
            return x, it, rnorm, CONVERGED
        if it >= max_iter:
            return x, it, rnorm, MAX_ITER
        for i in range(n):
            z[i] = dinv[i] * r[i]
            p[i] = z[i]
        rz = _dot(r, z)
        while it < max_iter:
            for i in range(n):
                acc = 0.0
                for k in range(indptr[i], indptr[i + 1]):
                    acc += data[k] * p[indices[k]]
                ap[i] = acc
            pap = _dot(p, ap)
            if not (pap > 0.0) or not np.isfinite(pap):
                return x, it, np.sqrt(_dot(r, r)), BREAKDOWN
            alpha = rz / pap
            rr = 0.0
            for i in range(n):
                x[i] += alpha * p[i]
                r[i] -= alpha * ap[i]
                rr += r[i] * r[i]
            it += 1
            if np.sqrt(rr) <= tol_abs or not np.isfinite(rr):
                break
            rz_new = 0.0
            for i in range(n):
                z[i] = dinv[i] * r[i]
                rz_new += r[i] * z[i]
            beta = rz_new / rz
            for i in range(n):
                p[i] = z[i] + beta * p[i]
            rz = rz_new
        _residual(indptr, indices, data, b, x, r)
        rnorm = np.sqrt(_dot(r, r))


@njit(cache=True)
def assemble_flux(a, hx, hy):
    ny, nx = a.shape
    mx = nx - 2
    my = ny - 2
    m = mx * my
    indptr = np.zeros(m + 1, dtype=np.int64)
    indices = np.empty(5 * m, dtype=np.int64)
    data = np.empty(5 * m)
    diag_pos = np.empty(m, dtype=np.int64)
    k = 0
    for j in range(1, ny - 1):
        for i in range(1, nx - 1):
            p = (j - 1) * mx + (i - 1)
            w = 0.5 * (a[j, i - 1] + a[j, i]) / (hx * hx)
            e = 0.5 * (a[j, i] + a[j, i + 1]) / (hx * hx)
            s = 0.5 * (a[j - 1, i] + a[j, i]) / (hy * hy)
            n = 0.5 * (a[j, i] + a[j + 1, i]) / (hy * hy)
            if j > 1:
                indices[k] = p - mx
                data[k] = -s
                k += 1
            if i > 1:
                indices[k] = p - 1
                data[k] = -w
                k += 1
            indices[k] = p
            data[k] = w + e + s + n
            diag_pos[p] = k
            k += 1
            if i < nx - 2:
                indices[k] = p + 1
                data[k] = -e
                k += 1
            if j < ny - 2:
                indices[k] = p + mx
                data[k] = -n
                k += 1
            indptr[p + 1] = k
    return indptr, indices[:k].copy(), data[:k].copy(), diag_pos


@njit(cache=True)
def flux_divergence(a, phi, hx, hy):
    ny, nx = phi.shape
    out = np.zeros((ny, nx))
    for j in range(1, ny - 1):
        for i in range(1, nx - 1):
            w = 0.5 * (a[j, i - 1] + a[j, i]) / (hx * hx)
            e = 0.5 * (a[j, i] + a[j, i + 1]) / (hx * hx)
            s = 0.5 * (a[j - 1, i] + a[j, i]) / (hy * hy)
            n = 0.5 * (a[j, i] + a[j + 1, i]) / (hy * hy)
            out[j, i] = (e * (phi[j, i + 1] - phi[j, i]) - w * (phi[j, i] - phi[j, i - 1])) + (
                n * (phi[j + 1, i] - phi[j, i]) - s * (phi[j, i] - phi[j - 1, i])
            )
    return out
