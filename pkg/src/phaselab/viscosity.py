"""Vanishing-viscosity TPE solver through the Cole-Hopf transform.

The regularised equation ``2k phi_z - eps lap phi - |grad phi|^2 = -Ihat`` is
mapped by ``phi = eps log psi + c`` to the linear parabolic problem

    2k psi_z - eps lap psi = -(Ihat / eps) psi

which is marched in z with backward Euler, one SPD solve per step. The gauge
constant ``c`` (mean of the initial phase) keeps ``exp(phi/eps)`` in range.
"""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import kernels
from .errors import InvalidParameter, NonPositivePsi, NotConverged, StepRejected
from .grid import FieldStack, Grid2D, ScalarField2D, check_same_grid, field_error_norms
from .sparse import SparseMatrix, conjugate_gradient, jacobi_preconditioner
from .tie import TieProblem, solve_tie

log = logging.getLogger(__name__)


def cole_hopf_forward(phi: ScalarField2D, epsilon: float) -> tuple[ScalarField2D, float]:
    """``psi = exp((phi - c)/eps)`` with gauge ``c = mean(phi)``."""
    if not epsilon > 0:
        raise InvalidParameter("epsilon must be positive")
    c = float(np.mean(phi.values))
    return phi.with_values(np.exp((phi.values - c) / epsilon)), c


def cole_hopf_inverse(psi: ScalarField2D, epsilon: float, gauge: float) -> ScalarField2D:
    if np.any(psi.values <= 0.0):
        raise NonPositivePsi("Cole-Hopf variable must stay positive")
    return psi.with_values(epsilon * np.log(psi.values) + gauge)


@dataclass(frozen=True)
class ViscosityProblem:
    """Inputs of a viscosity march.

    ``ihat`` is either a callable model ``ihat(x, y, z) -> IHatValues`` or a
    :class:`FieldStack` of ``Ihat`` slices (linearly interpolated in z).
    ``h`` is the lateral boundary phase: a constant, a callable
    ``h(x, y, z) -> array`` or a stack of phase slices whose ring is used.
    """

    g: ScalarField2D
    ihat: Any
    k: float = 1.0
    epsilon: float = 0.05
    dz: float = 0.01
    h: Any = 1.5 * np.pi

    def __post_init__(self):
        if not (self.k > 0 and self.epsilon > 0 and self.dz > 0):
            raise InvalidParameter("k, epsilon and dz must be positive")
        if isinstance(self.ihat, FieldStack) and self.ihat.grid != self.g.grid:
            raise InvalidParameter("Ihat stack grid differs from the initial phase grid")
        if isinstance(self.h, FieldStack) and self.h.grid != self.g.grid:
            raise InvalidParameter("boundary stack grid differs from the initial phase grid")

    @property
    def grid(self) -> Grid2D:
        return self.g.grid

    def ihat_at(self, z: float) -> np.ndarray:
        g = self.grid
        if isinstance(self.ihat, FieldStack):
            return _stack_at(self.ihat, z)
        X, Y = g.mesh()
        return np.broadcast_to(self.ihat(X, Y, z).value, g.shape)

    def boundary_at(self, z: float) -> np.ndarray:
        g = self.grid
        if isinstance(self.h, FieldStack):
            v = _stack_at(self.h, z)
        elif callable(self.h):
            X, Y = g.mesh()
            v = np.broadcast_to(self.h(X, Y, z), g.shape)
        else:
            v = np.full(g.shape, float(self.h))
        if not np.all(np.isfinite(v[g.boundary_mask()])):
            raise InvalidParameter(f"boundary phase not finite at z={z}")
        return v

    def describe(self) -> dict:
        if isinstance(self.h, FieldStack):
            h = "stack"
        elif callable(self.h):
            h = getattr(self.h, "__name__", "callable")
        else:
            h = float(self.h)
        ihat = "stack" if isinstance(self.ihat, FieldStack) else type(self.ihat).__name__
        return {"k": self.k, "epsilon": self.epsilon, "dz": self.dz, "h": h, "ihat": ihat}


def _stack_at(stack: FieldStack, z: float) -> np.ndarray:
    zs = stack.z
    if z < zs[0] - 1e-12 or z > zs[-1] + 1e-12:
        raise InvalidParameter(f"z={z} outside stack range [{zs[0]}, {zs[-1]}]")
    if len(zs) == 1:
        return stack[0].values
    i = int(np.clip(np.searchsorted(zs, z) - 1, 0, len(zs) - 2))
    t = (z - zs[i]) / (zs[i + 1] - zs[i])
    if abs(t) < 1e-9:
        return stack[i].values
    if abs(t - 1.0) < 1e-9:
        return stack[i + 1].values
    return (1.0 - t) * stack[i].values + t * stack[i + 1].values


@dataclass
class MarchState:
    z: float
    psi: np.ndarray
    gauge: float


@dataclass
class MarchInfo:
    gauge: float
    steps: int
    cg_iterations: list = field(default_factory=list)


def viscosity_march(problem: ViscosityProblem, z_end: float, tol: float = 1e-10, full_output=False):
    """Phase slices ``z = 0, dz, ..., z_end`` of the viscous approximation.

    Each step solves ``((2k/dz) I + eps L + diag(Ihat/eps)) psi_new = (2k/dz) psi_old``
    on interior nodes (``L`` the five-point ``-lap``), with Dirichlet
    ``psi = exp((h - c)/eps)`` on the ring. With ``full_output`` a
    :class:`MarchInfo` is returned too.
    """
    dz, eps, k = problem.dz, problem.epsilon, problem.k
    nsteps = int(round(z_end / dz))
    if nsteps < 1 or abs(nsteps * dz - z_end) > 1e-12 * max(1.0, abs(z_end)):
        raise InvalidParameter(f"z_end={z_end} is not a positive multiple of dz={dz}")
    g = problem.grid
    ones = np.ones(g.shape)
    indptr, indices, lap_data, diag_pos = kernels.assemble_flux(ones, g.hx, g.hy)
    base = eps * lap_data
    shift = 2.0 * k / dz

    psi0, c = cole_hopf_forward(problem.g, eps)
    state = MarchState(0.0, np.array(psi0.values), c)
    slices = [problem.g]
    info = MarchInfo(c, nsteps)

    for n in range(1, nsteps + 1):
        z = n * dz
        ihat = np.asarray(problem.ihat_at(z))[1:-1, 1:-1].ravel()
        data = base.copy()
        data[diag_pos] += shift + ihat / eps
        if np.any(data[diag_pos] <= 0.0):
            raise StepRejected(
                f"non-positive diagonal at z={z:.6g}; reduce dz (reaction Ihat/eps too strong)"
            )
        A = SparseMatrix(indptr, indices, data)
        ring = np.exp((problem.boundary_at(z) - c) / eps)
        ring[1:-1, 1:-1] = 0.0
        b = shift * state.psi[1:-1, 1:-1].ravel() + eps * kernels.flux_divergence(
            ones, ring, g.hx, g.hy
        )[1:-1, 1:-1].ravel()
        x, report = conjugate_gradient(
            A, b, tol_rel=tol, x0=state.psi[1:-1, 1:-1].ravel(), preconditioner=jacobi_preconditioner(A)
        )
        if not report.converged:
            raise NotConverged(f"step {n} (z={z:.6g}) did not converge", report)
        psi = ring
        psi[1:-1, 1:-1] = x.reshape(g.ny - 2, g.nx - 2)
        if not np.all(np.isfinite(psi)) or np.any(psi <= 0.0):
            raise StepRejected(f"psi lost positivity at z={z:.6g}; reduce dz")
        state = MarchState(z, psi, c)
        info.cg_iterations.append(report.iterations)
        slices.append(cole_hopf_inverse(ScalarField2D(g, psi, z), eps, c))
        log.debug("z=%.4f cg_iters=%d", z, report.iterations)

    stack = FieldStack(tuple(slices))
    return (stack, info) if full_output else stack


def hybrid_pipeline(
    tie_problem: TieProblem,
    ihat,
    z_end: float,
    k: float | None = None,
    epsilon: float = 0.05,
    dz: float = 0.01,
    h=1.5 * np.pi,
    tol: float = 1e-10,
    full_output=False,
):
    """TIE solve on z = 0 followed by a viscosity march seeded with its result."""
    g0, tie_report = solve_tie(tie_problem, tol=tol, full_output=True)
    problem = ViscosityProblem(
        g=g0, ihat=ihat, k=tie_problem.k if k is None else k, epsilon=epsilon, dz=dz, h=h
    )
    stack, info = viscosity_march(problem, z_end, tol=tol, full_output=True)
    if full_output:
        return stack, {"tie": tie_report, "march": info}
    return stack


def viscosity_error_report(phi_stack: FieldStack, truth_stack: FieldStack) -> list[dict]:
    """Per-slice error norms of ``phi_stack`` against ``truth_stack``."""
    if len(phi_stack) != len(truth_stack):
        raise InvalidParameter("stacks have different lengths")
    rows = []
    for a, b in zip(phi_stack, truth_stack):
        check_same_grid(a, b)
        e = field_error_norms(a, b)
        rows.append(
            {
                "z": a.z,
                "l2_rel": e.l2_rel,
                "linf_rel": e.linf_rel,
                "linf_abs": e.linf_abs,
                "pointwise_rel": e.pointwise_rel,
            }
        )
    return rows


def write_error_report(rows: list[dict], csv_path=None, json_path=None) -> None:
    cols = ["z", "l2_rel", "linf_rel", "linf_abs", "pointwise_rel"]
    if csv_path is not None:
        with Path(csv_path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for r in rows:
                w.writerow([repr(float(r[c])) for c in cols])
    if json_path is not None:
        Path(json_path).write_text(json.dumps(rows, indent=2, sort_keys=True))
