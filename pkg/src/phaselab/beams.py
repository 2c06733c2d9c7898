"""Analytic paraxial beams used as ground truth.

Both beam types expose pointwise evaluators taking broadcastable ``x, y, z``
arrays, closed-form z-derivatives for the modeling-error diagnostics, and the
reduced intensity term ``Ihat = lap(sqrt I)/sqrt I`` with its gradient.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidParameter
from .grid import (
    FieldStack,
    Grid2D,
    ScalarField2D,
    check_same_grid,
    fd_divergence_of_flux,
    fd_gradient,
    fd_laplacian,
    require_positive,
)


class AxialDerivatives(NamedTuple):
    I_z: np.ndarray
    I_zz: np.ndarray
    phi_z: np.ndarray
    phi_zz: np.ndarray


class IHatValues(NamedTuple):
    value: np.ndarray
    dx: np.ndarray
    dy: np.ndarray
    dz: np.ndarray


@dataclass(frozen=True)
class PlaneWaveParams:
    """``A = exp(i (x.xi + |xi|^2 z / (2k)))``: unit intensity, linear phase."""

    xi: tuple[float, float] = (1.0, 1.0)
    k: float = 1.0

    def __post_init__(self):
        if not self.k > 0:
            raise InvalidParameter("wavenumber k must be positive")
        object.__setattr__(self, "xi", (float(self.xi[0]), float(self.xi[1])))

    @property
    def axial_rate(self) -> float:
        return (self.xi[0] ** 2 + self.xi[1] ** 2) / (2.0 * self.k)

    def intensity(self, x, y, z):
        return np.ones(np.broadcast(x, y, z).shape)

    def phase(self, x, y, z):
        return self.xi[0] * x + self.xi[1] * y + self.axial_rate * z + 0.0 * np.asarray(z)

    def axial_derivatives(self, x, y, z) -> AxialDerivatives:
        shape = np.broadcast(x, y, z).shape
        zero = np.zeros(shape)
        return AxialDerivatives(zero, zero, np.full(shape, self.axial_rate), zero)

    def i_hat(self, x, y, z) -> IHatValues:
        zero = np.zeros(np.broadcast(x, y, z).shape)
        return IHatValues(zero, zero, zero, zero)


@dataclass(frozen=True)
class GaussianBeamParams:
    """Fundamental Gaussian beam ``A = I0/q exp(-i k |x|^2 / (2q))``, ``q = z + i z_R``.

    The intensity is normalised so that ``I(0, 0, 0) = I0**2`` (the ``1/z_R^2``
    prefactor of ``|1/q|^2`` is dropped). The phase uses the branch with
    ``arg(1/q(0)) = 3*pi/2`` continued smoothly in z::

        phi = 3*pi/2 + arctan(z/z_R) - k |x|^2 z / (2 (z^2 + z_R^2))
    """

    z_R: float = 1.0
    k: float = 1.0
    I0: float = 1.0

    def __post_init__(self):
        if not (self.z_R > 0 and self.k > 0 and self.I0 > 0):
            raise InvalidParameter("z_R, k and I0 must be positive")

    phase_offset = 1.5 * np.pi

    @property
    def wavelength(self) -> float:
        return 2.0 * np.pi / self.k

    @property
    def w0(self) -> float:
        return np.sqrt(self.wavelength * self.z_R / np.pi)

    def width(self, z):
        return self.w0 * np.sqrt(1.0 + (np.asarray(z) / self.z_R) ** 2)

    def curvature_radius(self, z):
        z = np.asarray(z, dtype=float)
        with np.errstate(divide="ignore"):
            return self._u(z) / z

    def _u(self, z):
        return np.asarray(z, dtype=float) ** 2 + self.z_R**2

    def intensity(self, x, y, z):
        u = self._u(z)
        r2 = x * x + y * y
        return self.I0**2 * self.z_R**2 / u * np.exp(-self.k * self.z_R * r2 / u)

    def phase(self, x, y, z):
        z = np.asarray(z, dtype=float)
        r2 = x * x + y * y
        return self.phase_offset + np.arctan(z / self.z_R) - self.k * r2 * z / (2.0 * self._u(z))

    def axial_derivatives(self, x, y, z) -> AxialDerivatives:
        z = np.asarray(z, dtype=float)
        k, zr = self.k, self.z_R
        u = self._u(z)
        r2 = x * x + y * y
        I = self.intensity(x, y, z)
        # d/dz log I and its derivative
        L1 = -2.0 * z / u + 2.0 * k * zr * r2 * z / u**2
        L1p = -2.0 / u + 4.0 * z**2 / u**2 + k * zr * r2 * (2.0 / u**2 - 8.0 * z**2 / u**3)
        I_z = I * L1
        I_zz = I * (L1**2 + L1p)
        phi_z = zr / u - 0.5 * k * r2 * (zr**2 - z**2) / u**2
        phi_zz = -2.0 * z * zr / u**2 + k * r2 * z * (3.0 * zr**2 - z**2) / u**3
        return AxialDerivatives(I_z, I_zz, phi_z, phi_zz)

    def i_hat(self, x, y, z) -> IHatValues:
        # sqrt(I) ~ exp(-b r^2) with b = 1/w^2 = k z_R / (2u)
        z = np.asarray(z, dtype=float)
        u = self._u(z)
        b = self.k * self.z_R / (2.0 * u)
        db = -self.k * self.z_R * z / u**2
        r2 = x * x + y * y
        value = 4.0 * b * b * r2 - 4.0 * b
        return IHatValues(
            value,
            8.0 * b * b * x,
            8.0 * b * b * y,
            (8.0 * b * r2 - 4.0) * db,
        )


def _sample(grid: Grid2D, z: float, fn) -> ScalarField2D:
    X, Y = grid.mesh()
    return ScalarField2D(grid, np.broadcast_to(fn(X, Y, z), grid.shape), z)


def plane_wave_fields(p: PlaneWaveParams, grid: Grid2D, z: float):
    return _sample(grid, z, p.intensity), _sample(grid, z, p.phase)


def gaussian_fields(p: GaussianBeamParams, grid: Grid2D, z: float):
    return _sample(grid, z, p.intensity), _sample(grid, z, p.phase)


def beam_fields(p, grid: Grid2D, z: float):
    return _sample(grid, z, p.intensity), _sample(grid, z, p.phase)


def beam_axial_derivatives(p, grid: Grid2D, z: float) -> dict[str, ScalarField2D]:
    X, Y = grid.mesh()
    d = p.axial_derivatives(X, Y, z)
    return {
        name: ScalarField2D(grid, np.broadcast_to(v, grid.shape), z)
        for name, v in d._asdict().items()
    }


def beam_i_hat(p, grid: Grid2D, z: float) -> ScalarField2D:
    X, Y = grid.mesh()
    return ScalarField2D(grid, np.broadcast_to(p.i_hat(X, Y, z).value, grid.shape), z)


def beam_stack(p, grid: Grid2D, z_list) -> tuple[FieldStack, FieldStack]:
    """Intensity and phase stacks; ``z_list`` must be increasing and uniform."""
    pairs = [beam_fields(p, grid, float(z)) for z in z_list]
    return FieldStack(tuple(a for a, _ in pairs)), FieldStack(tuple(b for _, b in pairs))


def make_beam(model: str, **params):
    """Build a beam from its CLI selector (``plane-wave`` or ``gaussian``)."""
    if model == "plane-wave":
        return PlaneWaveParams(**params)
    if model == "gaussian":
        return GaussianBeamParams(**params)
    raise InvalidParameter(f"unknown beam model {model!r}")


def paraxial_residual(I, phi, phi_z, I_z, k):
    """Real and imaginary parts of ``exp(-i phi) (lap A - 2ik A_z)``, ``A = sqrt(I) e^{i phi}``.

    The imaginary part is multiplied by ``sqrt I`` so it reads as the TIE
    residual ``div(I grad phi) - k I_z``; the real part is the TPE residual
    times ``sqrt I``. Boundary nodes are zero.
    """
    check_same_grid(I, phi, phi_z, I_z)
    require_positive(I)
    root = I.with_values(np.sqrt(I.values))
    px, py = fd_gradient(phi)
    re = (
        fd_laplacian(root).values
        - root.values * (px.values**2 + py.values**2)
        + 2.0 * k * root.values * phi_z.values
    )
    im = fd_divergence_of_flux(I, phi).values - k * I_z.values
    mask = I.grid.boundary_mask()
    re[mask] = 0.0
    im[mask] = 0.0
    return I.with_values(re), I.with_values(im)


@dataclass(frozen=True)
class ModelingErrorTerms:
    m_tie: ScalarField2D
    m_tpe: ScalarField2D


def modeling_error_terms(I, I_z, I_zz, phi_z, phi_zz) -> ModelingErrorTerms:
    """Parts of ``exp(-i phi) A_zz`` dropped by the paraxial approximation."""
    check_same_grid(I, I_z, I_zz, phi_z, phi_zz)
    require_positive(I)
    s = np.sqrt(I.values)
    m_tpe = (
        -0.25 * I_z.values**2 / I.values**1.5
        + 0.5 * I_zz.values / s
        - s * phi_z.values**2
    )
    m_tie = I_z.values / s * phi_z.values + s * phi_zz.values
    return ModelingErrorTerms(I.with_values(m_tie), I.with_values(m_tpe))
