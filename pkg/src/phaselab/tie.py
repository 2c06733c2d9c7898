"""Dirichlet solves of the transport-of-intensity equation ``div(I grad phi) = k I_z``.

Two routes are provided: a direct flux-form discretisation with variable
coefficient ``I``, and Teague's pair of Poisson problems
``lap psi = k I_z`` then ``lap phi = div(grad psi / I)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .errors import InvalidParameter, NotConverged
from .grid import Grid2D, ScalarField2D, check_same_grid, fd_divergence_of_flux, require_positive
from .sparse import CgReport, SparseMatrix, conjugate_gradient, jacobi_preconditioner

BC_KINDS = ("ground-truth", "constant", "floor10x", "sin", "gaussian", "sampled")


@dataclass(frozen=True)
class DirichletBC:
    """Boundary data for ``phi`` on the outer ring of grid nodes.

    ``constant`` uses ``value``; ``sin`` is ``value * sin(2 pi frequency x)``;
    ``floor10x`` is ``floor(10 x)``; ``gaussian`` is ``exp(-|x|^2)`` on the
    grid's own coordinates; ``ground-truth`` and ``sampled`` read the boundary
    of ``field``.
    """

    kind: str
    value: float = 0.0
    frequency: float = 1.0
    field: ScalarField2D | None = None

    def __post_init__(self):
        if self.kind not in BC_KINDS:
            raise InvalidParameter(f"unknown boundary kind {self.kind!r}")
        if self.kind in ("ground-truth", "sampled") and self.field is None:
            raise InvalidParameter(f"boundary kind {self.kind!r} needs a field")

    @classmethod
    def constant(cls, c: float) -> "DirichletBC":
        return cls("constant", float(c))

    @classmethod
    def zero(cls) -> "DirichletBC":
        return cls("constant", 0.0)

    @classmethod
    def floor10x(cls) -> "DirichletBC":
        return cls("floor10x")

    @classmethod
    def sine(cls, amplitude: float = 10.0, frequency: float = 1.0) -> "DirichletBC":
        return cls("sin", float(amplitude), float(frequency))

    @classmethod
    def gaussian(cls) -> "DirichletBC":
        return cls("gaussian")

    @classmethod
    def ground_truth(cls, truth: ScalarField2D) -> "DirichletBC":
        return cls("ground-truth", field=truth)

    @classmethod
    def sampled(cls, f: ScalarField2D) -> "DirichletBC":
        return cls("sampled", field=f)

    def describe(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "constant":
            d["value"] = self.value
        elif self.kind == "sin":
            d.update(amplitude=self.value, frequency=self.frequency)
        elif self.kind == "gaussian":
            d["expression"] = "exp(-(x^2+y^2)) on configured domain coordinates"
        return d

    def values(self, grid: Grid2D) -> np.ndarray:
        """Full ``(ny, nx)`` array: boundary data on the ring, zeros inside."""
        X, Y = grid.mesh()
        if self.kind == "constant":
            v = np.full(grid.shape, self.value)
        elif self.kind == "floor10x":
            v = np.floor(10.0 * X)
        elif self.kind == "sin":
            v = self.value * np.sin(2.0 * np.pi * self.frequency * X)
        elif self.kind == "gaussian":
            v = np.exp(-(X**2 + Y**2))
        else:
            if self.field.grid != grid:
                raise InvalidParameter("boundary field grid does not match the problem grid")
            v = np.array(self.field.values)
        out = np.zeros(grid.shape)
        mask = grid.boundary_mask()
        out[mask] = v[mask]
        return out


def parse_bc(text: str, truth: ScalarField2D | None = None) -> DirichletBC:
    """Parse ``KIND[:ARGS]`` as used on the command line.

    Accepted: ``zero``, ``constant:C``, ``floor10x``, ``sin10`` or
    ``sin:AMP[,FREQ]``, ``gaussian``, ``ground-truth`` (alias ``truth``),
    ``file:PATH``.
    """
    kind, _, args = text.partition(":")
    kind = kind.strip().lower()
    if kind == "zero":
        return DirichletBC.zero()
    if kind in ("constant", "const"):
        expr = args.strip().lower().replace(" ", "")
        if expr in ("3pi/2", "3*pi/2"):
            return DirichletBC.constant(1.5 * math.pi)
        return DirichletBC.constant(float(args))
    if kind == "floor10x":
        return DirichletBC.floor10x()
    if kind == "sin10":
        return DirichletBC.sine(10.0, 1.0)
    if kind == "sin":
        parts = [float(a) for a in args.split(",") if a.strip()] or [10.0]
        return DirichletBC.sine(*parts[:2])
    if kind == "gaussian":
        return DirichletBC.gaussian()
    if kind in ("ground-truth", "truth"):
        if truth is None:
            raise InvalidParameter("ground-truth boundary needs a reference phase")
        return DirichletBC.ground_truth(truth)
    if kind == "file":
        from .fieldio import read_field

        return DirichletBC.sampled(read_field(Path(args)))
    raise InvalidParameter(f"unknown boundary specification {text!r}")


@dataclass(frozen=True)
class TieProblem:
    I: ScalarField2D
    rhs_Iz: ScalarField2D
    k: float
    bc: DirichletBC

    def __post_init__(self):
        check_same_grid(self.I, self.rhs_Iz)
        if not self.k > 0:
            raise InvalidParameter("wavenumber k must be positive")
        require_positive(self.I)

    @property
    def grid(self) -> Grid2D:
        return self.I.grid


def _operator(coef: np.ndarray, grid: Grid2D) -> SparseMatrix:
    indptr, indices, data, _ = kernels.assemble_flux(
        np.ascontiguousarray(coef, dtype=np.float64), grid.hx, grid.hy
    )
    return SparseMatrix(indptr, indices, data)


def _boundary_rhs(coef: np.ndarray, boundary: np.ndarray, grid: Grid2D) -> np.ndarray:
    # div(coef grad G) at interior nodes, G = boundary data with zero interior
    return kernels.flux_divergence(coef, boundary, grid.hx, grid.hy)[1:-1, 1:-1].ravel()


def _dirichlet_solve(coef, rhs_interior, boundary, grid, tol, precondition):
    """Solve ``-div(coef grad u) = rhs`` inside with ``u = boundary`` on the ring."""
    A = _operator(coef, grid)
    b = rhs_interior.ravel() + _boundary_rhs(coef, boundary, grid)
    M = jacobi_preconditioner(A) if precondition else None
    x, report = conjugate_gradient(A, b, tol_rel=tol, preconditioner=M)
    if not report.converged:
        raise NotConverged(
            f"CG stopped after {report.iterations} iterations at "
            f"relative residual {report.final_residual_rel:.3e}",
            report,
        )
    u = boundary.copy()
    u[1:-1, 1:-1] = x.reshape(grid.ny - 2, grid.nx - 2)
    return u, report


def assemble_tie(problem: TieProblem) -> tuple[SparseMatrix, np.ndarray]:
    """SPD system for the interior phase values.

    ``A`` discretises ``-div(I grad .)``; ``b = -k I_z`` plus the eliminated
    Dirichlet couplings. Unknowns are interior nodes in row-major order.
    """
    g = problem.grid
    A = _operator(problem.I.values, g)
    b = -problem.k * problem.rhs_Iz.values[1:-1, 1:-1].ravel() + _boundary_rhs(
        problem.I.values, problem.bc.values(g), g
    )
    return A, b


def solve_tie(problem: TieProblem, tol: float = 1e-10, precondition: bool = True, full_output=False):
    """Phase on the grid from the direct variable-coefficient discretisation.

    With ``full_output`` a ``(field, CgReport)`` pair is returned.
    """
    g = problem.grid
    phi, report = _dirichlet_solve(
        problem.I.values,
        -problem.k * problem.rhs_Iz.values[1:-1, 1:-1],
        problem.bc.values(g),
        g,
        tol,
        precondition,
    )
    field = ScalarField2D(g, phi, problem.I.z)
    return (field, report) if full_output else field


def solve_tie_teague(problem: TieProblem, tol: float = 1e-10, precondition: bool = True, full_output=False):
    """Two Poisson solves: ``lap psi = k I_z`` (psi = 0 on the boundary), then
    ``lap phi = div(grad psi / I)`` with the problem's boundary data.

    With ``full_output`` the pair of CG reports is returned as well.
    """
    g = problem.grid
    ones = np.ones(g.shape)
    zero_ring = np.zeros(g.shape)
    psi, rep1 = _dirichlet_solve(
        ones, -problem.k * problem.rhs_Iz.values[1:-1, 1:-1], zero_ring, g, tol, precondition
    )
    div = kernels.flux_divergence(1.0 / problem.I.values, psi, g.hx, g.hy)
    phi, rep2 = _dirichlet_solve(
        ones, -div[1:-1, 1:-1], problem.bc.values(g), g, tol, precondition
    )
    field = ScalarField2D(g, phi, problem.I.z)
    return (field, (rep1, rep2)) if full_output else field


def tie_residual(phi: ScalarField2D, problem: TieProblem) -> ScalarField2D:
    """``div(I grad phi) - k I_z`` at interior nodes (zero on the boundary)."""
    check_same_grid(phi, problem.I)
    r = fd_divergence_of_flux(problem.I, phi).values - problem.k * problem.rhs_Iz.values
    r[problem.grid.boundary_mask()] = 0.0
    return phi.with_values(r)


__all__ = [
    "BC_KINDS",
    "CgReport",
    "DirichletBC",
    "TieProblem",
    "assemble_tie",
    "parse_bc",
    "solve_tie",
    "solve_tie_teague",
    "tie_residual",
]
