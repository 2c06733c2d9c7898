"""Uniform 2D grids, scalar fields on them, and finite-difference calculus.

Field values are stored as ``(ny, nx)`` arrays indexed ``[j, i]`` so that the
row-major flattening runs with x fastest. Node ``(i, j)`` sits at
``(x_min + i*hx, y_min + j*hy)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import kernels
from .errors import (
    GridMismatch,
    IndexOutOfRange,
    InvalidField,
    InvalidGrid,
    NonPositiveIntensity,
    NonUniformZ,
    TooFewSlices,
)


@dataclass(frozen=True)
class Grid2D:
    nx: int
    ny: int
    x_min: float = 0.0
    x_max: float = 1.0
    y_min: float = 0.0
    y_max: float = 1.0

    def __post_init__(self):
        if int(self.nx) != self.nx or int(self.ny) != self.ny:
            raise InvalidGrid("node counts must be integers")
        if self.nx < 3 or self.ny < 3:
            raise InvalidGrid(f"need at least 3x3 nodes, got {self.nx}x{self.ny}")
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise InvalidGrid("empty domain: require x_max > x_min and y_max > y_min")
        object.__setattr__(self, "nx", int(self.nx))
        object.__setattr__(self, "ny", int(self.ny))
        for name in ("x_min", "x_max", "y_min", "y_max"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @classmethod
    def square(cls, n: int, bounds: Sequence[float] = (0.0, 1.0, 0.0, 1.0)) -> "Grid2D":
        return cls(n, n, *bounds)

    @property
    def hx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def hy(self) -> float:
        return (self.y_max - self.y_min) / (self.ny - 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.x_max, self.y_min, self.y_max)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.hx * np.arange(self.nx)

    @property
    def y(self) -> np.ndarray:
        return self.y_min + self.hy * np.arange(self.ny)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinates as two ``(ny, nx)`` arrays."""
        return np.meshgrid(self.x, self.y, indexing="xy")

    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[0, :] = mask[-1, :] = True
        mask[:, 0] = mask[:, -1] = True
        return mask

    def contains(self, x, y) -> np.ndarray:
        return (
            (x >= self.x_min) & (x <= self.x_max) & (y >= self.y_min) & (y <= self.y_max)
        )


@dataclass(frozen=True)
class ScalarField2D:
    grid: Grid2D
    values: np.ndarray
    z: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim == 1 and v.size == self.grid.nx * self.grid.ny:
            v = v.reshape(self.grid.shape)
        if v.shape != self.grid.shape:
            raise InvalidField(f"values shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidField("field contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "z", float(self.z))

    @classmethod
    def from_function(cls, grid: Grid2D, f: Callable, z: float = 0.0) -> "ScalarField2D":
        X, Y = grid.mesh()
        return cls(grid, np.broadcast_to(f(X, Y), grid.shape), z)

    @classmethod
    def constant(cls, grid: Grid2D, c: float, z: float = 0.0) -> "ScalarField2D":
        return cls(grid, np.full(grid.shape, float(c)), z)

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def interior(self) -> np.ndarray:
        return self.values[1:-1, 1:-1]

    def boundary_values(self) -> np.ndarray:
        return self.values[self.grid.boundary_mask()]

    def with_values(self, values, z: float | None = None) -> "ScalarField2D":
        return ScalarField2D(self.grid, values, self.z if z is None else z)


@dataclass(frozen=True)
class FieldStack:
    """z-ordered slices on a shared grid with uniform spacing."""

    fields: tuple = field(default_factory=tuple)

    def __post_init__(self):
        fields = tuple(self.fields)
        if not fields:
            raise InvalidField("empty field stack")
        grid = fields[0].grid
        for f in fields[1:]:
            if f.grid != grid:
                raise GridMismatch("all slices of a stack must share one grid")
        z = np.array([f.z for f in fields])
        if len(z) > 1:
            dz = np.diff(z)
            if np.any(dz <= 0):
                raise NonUniformZ("slice heights must be strictly increasing")
            if np.max(np.abs(dz - dz[0])) > 1e-12 * max(abs(dz[0]), np.max(np.abs(z))):
                raise NonUniformZ("slice spacing is not uniform")
        object.__setattr__(self, "fields", fields)

    def __len__(self):
        return len(self.fields)

    def __getitem__(self, i):
        return self.fields[i]

    def __iter__(self):
        return iter(self.fields)

    @property
    def grid(self) -> Grid2D:
        return self.fields[0].grid

    @property
    def z(self) -> np.ndarray:
        return np.array([f.z for f in self.fields])

    @property
    def dz(self) -> float:
        if len(self.fields) < 2:
            raise TooFewSlices("a single slice has no spacing")
        z = self.z
        return (z[-1] - z[0]) / (len(z) - 1)

    def values(self) -> np.ndarray:
        return np.stack([f.values for f in self.fields])

    def index_of(self, z: float, rtol: float = 1e-9) -> int:
        zs = self.z
        i = int(np.argmin(np.abs(zs - z)))
        scale = max(1.0, abs(z))
        if abs(zs[i] - z) > rtol * scale:
            raise IndexOutOfRange(f"no slice at z={z}")
        return i


def check_same_grid(*fields: ScalarField2D) -> Grid2D:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise GridMismatch("fields live on different grids")
    return grid


def require_positive(I: ScalarField2D, name: str = "intensity") -> None:
    if np.any(I.values <= 0.0):
        raise NonPositiveIntensity(f"{name} must be strictly positive")


def _second_derivative(f: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Central second difference with one-sided second-order ends."""
    f = np.moveaxis(f, axis, 0)
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (h * h)
    if f.shape[0] >= 4:
        out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h)
        out[-1] = (2.0 * f[-1] - 5.0 * f[-2] + 4.0 * f[-3] - f[-4]) / (h * h)
    else:
        out[0] = out[1]
        out[-1] = out[-2]
    return np.moveaxis(out, 0, axis)


def fd_gradient(f: ScalarField2D) -> tuple[ScalarField2D, ScalarField2D]:
    """Second-order gradient ``(f_x, f_y)``; one-sided stencils on the boundary."""
    g = f.grid
    fy, fx = np.gradient(f.values, g.hy, g.hx, edge_order=2)
    return f.with_values(fx), f.with_values(fy)


def fd_laplacian(f: ScalarField2D) -> ScalarField2D:
    """Five-point Laplacian at interior nodes.

    Boundary nodes get the sum of one-sided second-order second differences,
    which is accurate but not the five-point stencil.
    """
    g = f.grid
    v = f.values
    return f.with_values(_second_derivative(v, g.hx, 1) + _second_derivative(v, g.hy, 0))


def compute_i_hat(I: ScalarField2D) -> ScalarField2D:
    """Reduced intensity term ``lap(sqrt I) / sqrt I``."""
    require_positive(I)
    root = np.sqrt(I.values)
    return I.with_values(fd_laplacian(I.with_values(root)).values / root)


def fd_divergence_of_flux(I: ScalarField2D, phi: ScalarField2D) -> ScalarField2D:
    """Conservative ``div(I grad phi)`` with arithmetic-mean face coefficients.

    Only interior nodes are computed; boundary nodes are set to zero.
    """
    g = check_same_grid(I, phi)
    out = kernels.flux_divergence(
        np.ascontiguousarray(I.values), np.ascontiguousarray(phi.values), g.hx, g.hy
    )
    return phi.with_values(out)


def stack_z_derivative(stack: FieldStack, slice_index: int) -> ScalarField2D:
    """Second-order ``d/dz`` of a stack at one slice."""
    n = len(stack)
    if n < 3:
        raise TooFewSlices("z-derivative needs at least 3 slices")
    if not -n <= slice_index < n:
        raise IndexOutOfRange(f"slice {slice_index} not in stack of {n}")
    i = slice_index % n
    v = stack.values()
    dz = stack.dz
    if i == 0:
        d = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dz)
    elif i == n - 1:
        d = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * dz)
    else:
        d = (v[i + 1] - v[i - 1]) / (2.0 * dz)
    return stack[i].with_values(d)


class ErrorNorms(NamedTuple):
    l2_rel: float
    linf_rel: float
    linf_abs: float
    pointwise_rel: float
    absolute: bool = False


def field_error_norms(a: ScalarField2D, b: ScalarField2D) -> ErrorNorms:
    """Error of ``a`` measured against the reference ``b``.

    ``pointwise_rel`` is ``max |a - b| / |b|`` over nodes where ``b != 0``.
    When ``b`` is identically zero the relative norms fall back to absolute
    ones and ``absolute`` is set.
    """
    check_same_grid(a, b)
    d = a.values - b.values
    l2 = float(np.linalg.norm(d))
    linf = float(np.max(np.abs(d)))
    nb2 = float(np.linalg.norm(b.values))
    nbinf = float(np.max(np.abs(b.values)))
    nz = b.values != 0.0
    pointwise = float(np.max(np.abs(d[nz]) / np.abs(b.values[nz]))) if nz.any() else linf
    if nb2 == 0.0:
        return ErrorNorms(l2, linf, linf, pointwise, True)
    return ErrorNorms(l2 / nb2, linf / nbinf, linf, pointwise, False)
