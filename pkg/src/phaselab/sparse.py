"""Compressed-sparse-row matrices and a preconditioned conjugate gradient."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionMismatch, InvalidParameter, NotConverged, ZeroDiagonal


@dataclass(frozen=True)
class SparseMatrix:
    """Square CSR matrix. Column indices are sorted and unique in each row."""

    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray

    def __post_init__(self):
        indptr = np.ascontiguousarray(self.indptr, dtype=np.int64)
        indices = np.ascontiguousarray(self.indices, dtype=np.int64)
        data = np.ascontiguousarray(self.data, dtype=np.float64)
        n = indptr.shape[0] - 1
        if n < 1:
            raise InvalidParameter("matrix dimension must be at least 1")
        if indptr[0] != 0 or np.any(np.diff(indptr) < 0) or indptr[-1] != len(indices):
            raise InvalidParameter("row offsets must be monotone and cover the index array")
        if len(indices) != len(data):
            raise InvalidParameter("indices and data lengths differ")
        if len(indices) and (indices.min() < 0 or indices.max() >= n):
            raise InvalidParameter("column index out of range")
        if not np.all(np.isfinite(data)):
            raise InvalidParameter("non-finite matrix entries")
        # sorted + unique within each row <=> strictly increasing except at row starts
        steps = np.diff(indices)
        row_start = np.zeros(len(indices), dtype=bool)
        row_start[indptr[:-1][np.diff(indptr) > 0]] = True
        if np.any(steps[~row_start[1:]] <= 0):
            raise InvalidParameter("column indices must be sorted and unique within rows")
        for name, arr in (("indptr", indptr), ("indices", indices), ("data", data)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.indptr.shape[0] - 1

    @property
    def nnz(self) -> int:
        return len(self.data)

    @classmethod
    def from_dense(cls, a) -> "SparseMatrix":
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch("expected a square 2D array")
        rows, cols = np.nonzero(a)
        indptr = np.zeros(a.shape[0] + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=a.shape[0]), out=indptr[1:])
        return cls(indptr, cols, a[rows, cols])

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls(np.arange(n + 1), np.arange(n), np.ones(n))

    def diagonal(self) -> np.ndarray:
        d = np.zeros(self.n)
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        on = rows == self.indices
        d[rows[on]] = self.data[on]
        return d

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        out[rows, self.indices] = self.data
        return out

    def with_data(self, data) -> "SparseMatrix":
        return SparseMatrix(self.indptr, self.indices, data)

    def __matmul__(self, x):
        return spmv(self, x)


def spmv(A: SparseMatrix, x) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape != (A.n,):
        raise DimensionMismatch(f"vector of shape {x.shape} for matrix of size {A.n}")
    return kernels.csr_matvec(A.indptr, A.indices, A.data, x)


@dataclass(frozen=True)
class CgReport:
    iterations: int
    final_residual_rel: float
    converged: bool


class JacobiPreconditioner:
    """Diagonal scaling ``z = r / diag(A)``."""

    def __init__(self, A: SparseMatrix):
        d = A.diagonal()
        if np.any(d <= 0.0):
            raise ZeroDiagonal("Jacobi preconditioner needs a strictly positive diagonal")
        self.inv_diag = 1.0 / d

    def __call__(self, r):
        return self.inv_diag * r


def jacobi_preconditioner(A: SparseMatrix) -> JacobiPreconditioner:
    return JacobiPreconditioner(A)


def conjugate_gradient(
    A: SparseMatrix,
    b,
    tol_rel: float = 1e-10,
    max_iter: int | None = None,
    x0=None,
    preconditioner: JacobiPreconditioner | None = None,
    check_spd: bool = False,
) -> tuple[np.ndarray, CgReport]:
    """Solve ``A x = b`` for symmetric positive definite ``A``.

    Stops when ``||b - A x|| <= tol_rel * ||b||`` (true residual). A report with
    ``converged=False`` is returned when ``max_iter`` is exhausted; a NaN or a
    non-positive curvature ``p.Ap`` raises :class:`NotConverged`.
    With ``check_spd`` a few random probes ``v.Av > 0`` are asserted first.
    """
    b = np.ascontiguousarray(b, dtype=np.float64)
    if b.shape != (A.n,):
        raise DimensionMismatch(f"rhs of shape {b.shape} for matrix of size {A.n}")
    if max_iter is None:
        max_iter = 10 * A.n
    if check_spd:
        rng = np.random.default_rng(0)
        for _ in range(3):
            v = rng.standard_normal(A.n)
            if not v @ spmv(A, v) > 0.0:
                raise InvalidParameter("matrix failed the positive-definiteness probe")
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros(A.n), CgReport(0, 0.0, True)
    x0 = np.zeros(A.n) if x0 is None else np.array(x0, dtype=np.float64)
    dinv = np.ones(A.n) if preconditioner is None else preconditioner.inv_diag
    x, it, rnorm, status = kernels.pcg(
        A.indptr, A.indices, A.data, b, x0, dinv, tol_rel * bnorm, int(max_iter)
    )
    report = CgReport(int(it), float(rnorm) / bnorm, status == kernels.CONVERGED)
    if status == kernels.BREAKDOWN:
        raise NotConverged("CG breakdown (NaN or non-positive curvature)", report)
    return x, report
