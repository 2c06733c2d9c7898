"""Local solutions of the transport-of-phase equation by characteristics.

The TPE is written as ``F(p, q, r, s, x, y, z) = 2 k r - (p^2 + q^2) + Ihat = 0``
with ``(p, q, r) = grad phi`` and ``s = phi``. Along a characteristic

    x' = -2p,  y' = -2q,  z' = 2k,  s' = -2p^2 - 2q^2 + 2kr,
    p' = -Ihat_x,  q' = -Ihat_y,  r' = -Ihat_z

and ``F`` is conserved. States are packed as 7-vectors in the order
``(x, y, z, s, p, q, r)``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .beams import IHatValues
from .errors import BlowUp, InterpolationOutOfDomain, InvalidParameter
from .grid import FieldStack, ScalarField2D, compute_i_hat

BLOWUP_LIMIT = 1e12
STATE_NAMES = ("x", "y", "z", "s", "p", "q", "r")


@dataclass(frozen=True)
class CharacteristicState:
    x: float
    y: float
    z: float
    s: float
    p: float
    q: float
    r: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.s, self.p, self.q, self.r], dtype=float)

    @classmethod
    def from_array(cls, v) -> "CharacteristicState":
        return cls(*(float(c) for c in v))


# --- reduced-intensity models --------------------------------------------------


class ZeroIHat:
    """``Ihat = 0``: intensity constant in the transverse plane."""

    def __call__(self, x, y, z) -> IHatValues:
        zero = np.zeros(np.broadcast(x, y, z).shape)
        return IHatValues(zero, zero, zero, zero)


class AnalyticIHat:
    """Wraps a beam's closed-form ``i_hat``."""

    def __init__(self, beam):
        self.beam = beam

    def __call__(self, x, y, z) -> IHatValues:
        return self.beam.i_hat(x, y, z)


class SampledIHat:
    """``Ihat`` from gridded data: bicubic per slice, linear between slices.

    Built either from a stack of ``Ihat`` slices or (``from_intensity``) from
    an intensity stack via finite differences. Points outside the grid or
    the stack's z-range evaluate to NaN; :meth:`evaluate` raises instead.
    """

    def __init__(self, stack: FieldStack):
        self.stack = stack
        g = stack.grid
        self._z = stack.z
        self._splines = [RectBivariateSpline(g.x, g.y, f.values.T, kx=3, ky=3) for f in stack]

    @classmethod
    def from_intensity(cls, intensity: FieldStack) -> "SampledIHat":
        return cls(FieldStack(tuple(compute_i_hat(f) for f in intensity)))

    def _slice(self, i, x, y):
        sp = self._splines[i]
        return (
            sp.ev(x, y),
            sp.ev(x, y, dx=1),
            sp.ev(x, y, dy=1),
        )

    def __call__(self, x, y, z) -> IHatValues:
        x, y, z = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float), np.asarray(z, float))
        shape = x.shape
        x, y, z = x.ravel(), y.ravel(), z.ravel()
        g = self.stack.grid
        zs = self._z
        tol = 1e-12 * max(1.0, abs(zs[-1]))
        inside = g.contains(x, y) & (z >= zs[0] - tol) & (z <= zs[-1] + tol)
        out = [np.full(x.shape, np.nan) for _ in range(4)]
        if inside.any():
            xi, yi, zi = x[inside], y[inside], z[inside]
            if len(zs) == 1:
                v, vx, vy = self._slice(0, xi, yi)
                vz = np.zeros_like(v)
            else:
                dz = zs[1] - zs[0]
                idx = np.clip(np.floor((zi - zs[0]) / dz).astype(int), 0, len(zs) - 2)
                t = (zi - zs[idx]) / dz
                v, vx, vy, vz = (np.empty_like(xi) for _ in range(4))
                for i in np.unique(idx):
                    m = idx == i
                    a = self._slice(i, xi[m], yi[m])
                    b = self._slice(i + 1, xi[m], yi[m])
                    tm = t[m]
                    v[m] = (1 - tm) * a[0] + tm * b[0]
                    vx[m] = (1 - tm) * a[1] + tm * b[1]
                    vy[m] = (1 - tm) * a[2] + tm * b[2]
                    vz[m] = (b[0] - a[0]) / dz
            for o, val in zip(out, (v, vx, vy, vz)):
                o[inside] = val
        return IHatValues(*(o.reshape(shape) for o in out))

    def evaluate(self, x, y, z) -> IHatValues:
        res = self(x, y, z)
        if np.any(np.isnan(res.value)):
            raise InterpolationOutOfDomain("Ihat requested outside the sampled region")
        return res


def ihat_model(name: str, beam=None):
    if name == "zero":
        return ZeroIHat()
    if name in ("gaussian", "beam", "analytic"):
        if beam is None:
            raise InvalidParameter("analytic Ihat needs a beam")
        return AnalyticIHat(beam)
    raise InvalidParameter(f"unknown Ihat model {name!r}")


# --- initial data on z = 0 ------------------------------------------------------


@dataclass(frozen=True)
class InitialSurfaceData:
    """Initial phase ``g`` with its gradient; callables take ``(x, y)`` arrays."""

    g: Callable
    g_x: Callable
    g_y: Callable
    k: float = 1.0

    @classmethod
    def affine(cls, alpha: float, beta: float, gamma: float, k: float = 1.0):
        return cls(
            lambda x, y: alpha * np.asarray(x) + beta * np.asarray(y) + gamma,
            lambda x, y: np.full(np.broadcast(x, y).shape, float(alpha)),
            lambda x, y: np.full(np.broadcast(x, y).shape, float(beta)),
            k,
        )

    @classmethod
    def constant(cls, c: float, k: float = 1.0):
        return cls.affine(0.0, 0.0, c, k)

    @classmethod
    def from_field(cls, f: ScalarField2D, k: float = 1.0):
        """Bicubic interpolant of sampled phase data, differentiated analytically."""
        sp = RectBivariateSpline(f.grid.x, f.grid.y, f.values.T, kx=3, ky=3)
        return cls(
            lambda x, y: sp.ev(x, y),
            lambda x, y: sp.ev(x, y, dx=1),
            lambda x, y: sp.ev(x, y, dy=1),
            k,
        )


def tpe_function(state, ihat, k: float) -> float:
    """``F = 2kr - (p^2 + q^2) + Ihat``; zero on exact characteristics."""
    v = state.as_array() if isinstance(state, CharacteristicState) else np.asarray(state)
    x, y, z, s, p, q, r = v[..., 0], v[..., 1], v[..., 2], v[..., 3], v[..., 4], v[..., 5], v[..., 6]
    return 2.0 * k * r - (p * p + q * q) + ihat(x, y, z).value


def compatibility_init(x0: float, y0: float, data: InitialSurfaceData, ihat) -> CharacteristicState:
    p0 = float(data.g_x(x0, y0))
    q0 = float(data.g_y(x0, y0))
    s0 = float(data.g(x0, y0))
    ih = float(ihat(x0, y0, 0.0).value)
    r0 = (p0 * p0 + q0 * q0 - ih) / (2.0 * data.k)
    return CharacteristicState(float(x0), float(y0), 0.0, s0, p0, q0, r0)


def noncharacteristic_check(state: CharacteristicState, k: float) -> bool:
    """``dF/dr = 2k`` must not vanish on the initial surface."""
    return bool(np.isfinite(state.r)) and 2.0 * k != 0.0


def _rhs(Y: np.ndarray, ihat, k: float) -> np.ndarray:
    x, y, z, p, q, r = Y[:, 0], Y[:, 1], Y[:, 2], Y[:, 4], Y[:, 5], Y[:, 6]
    ih = ihat(x, y, z)
    out = np.empty_like(Y)
    out[:, 0] = -2.0 * p
    out[:, 1] = -2.0 * q
    out[:, 2] = 2.0 * k
    out[:, 3] = -2.0 * p * p - 2.0 * q * q + 2.0 * k * r
    out[:, 4] = -ih.dx
    out[:, 5] = -ih.dy
    out[:, 6] = -ih.dz
    return out


def characteristic_rhs(state: CharacteristicState, ihat, k: float) -> np.ndarray:
    """Derivative of the packed state ``(x, y, z, s, p, q, r)`` in tau."""
    d = _rhs(state.as_array()[None, :], ihat, k)[0]
    if not np.all(np.isfinite(d)):
        raise InterpolationOutOfDomain(f"Ihat undefined at ({state.x}, {state.y}, {state.z})")
    return d


class Trajectory(NamedTuple):
    tau: np.ndarray
    states: np.ndarray  # (n_steps, 7), columns as STATE_NAMES
    status: str  # "complete", "exited", "out-of-domain", "blow-up"

    @property
    def final(self) -> CharacteristicState:
        return CharacteristicState.from_array(self.states[-1])

    @property
    def ok(self) -> bool:
        return self.status in ("complete", "exited")


def _box_inside(Y, box):
    if box is None:
        return np.ones(len(Y), dtype=bool)
    x0, x1, y0, y1, z0, z1 = box
    eps = 1e-12
    return (
        (Y[:, 0] >= x0 - eps) & (Y[:, 0] <= x1 + eps)
        & (Y[:, 1] >= y0 - eps) & (Y[:, 1] <= y1 + eps)
        & (Y[:, 2] >= z0 - eps) & (Y[:, 2] <= z1 + eps)
    )


def _rk4_fan(Y0: np.ndarray, ihat, k: float, tau_end: float, dtau: float, box) -> list[Trajectory]:
    """Classical RK4 on many characteristics at once with per-row termination."""
    if not dtau > 0 or not tau_end > 0:
        raise InvalidParameter("dtau and tau_end must be positive")
    nsteps = int(np.ceil(tau_end / dtau - 1e-9))
    m = len(Y0)
    hist = np.full((nsteps + 1, m, 7), np.nan)
    hist[0] = Y0
    last = np.zeros(m, dtype=int)
    status = np.array(["complete"] * m, dtype=object)
    active = np.ones(m, dtype=bool)
    Y = Y0.copy()
    for n in range(nsteps):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        h = min(dtau, tau_end - n * dtau)
        y = Y[idx]
        k1 = _rhs(y, ihat, k)
        k2 = _rhs(y + 0.5 * h * k1, ihat, k)
        k3 = _rhs(y + 0.5 * h * k2, ihat, k)
        k4 = _rhs(y + h * k3, ihat, k)
        y_new = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        undefined = ~np.all(np.isfinite(k1 + k2 + k3 + k4), axis=1)
        blown = ~undefined & ~np.all(np.abs(y_new) <= BLOWUP_LIMIT, axis=1)
        left = ~undefined & ~blown & ~_box_inside(y_new, box)
        good = ~(undefined | blown | left)

        status[idx[undefined]] = "out-of-domain"
        status[idx[blown]] = "blow-up"
        status[idx[left]] = "exited"
        active[idx[~good]] = False

        keep = idx[good]
        Y[keep] = y_new[good]
        hist[n + 1, keep] = y_new[good]
        last[keep] = n + 1

    taus = np.minimum(np.arange(nsteps + 1) * dtau, tau_end)
    return [
        Trajectory(taus[: last[i] + 1].copy(), hist[: last[i] + 1, i].copy(), str(status[i]))
        for i in range(m)
    ]


def integrate_characteristic(
    init: CharacteristicState,
    ihat,
    k: float,
    tau_end: float,
    dtau: float = 1e-3,
    box=None,
    strict: bool = True,
) -> Trajectory:
    """RK4 trajectory from ``init`` including the tau=0 state.

    ``box = (x0, x1, y0, y1, z0, z1)`` stops the curve when it leaves the
    region; the partial trajectory is returned with status ``"exited"``. With
    ``strict`` a blow-up or an undefined ``Ihat`` raises.
    """
    traj = _rk4_fan(init.as_array()[None, :], ihat, k, tau_end, dtau, box)[0]
    if strict and traj.status == "blow-up":
        raise BlowUp(f"characteristic exceeded {BLOWUP_LIMIT:g} at tau={traj.tau[-1]}")
    if strict and traj.status == "out-of-domain":
        raise InterpolationOutOfDomain(f"Ihat undefined after tau={traj.tau[-1]}")
    return traj


def constant_intensity_solution(g_affine: Sequence[float], k: float, x, y, z):
    """Global TPE solution for ``Ihat = 0`` and affine initial phase
    ``g = alpha x + beta y + gamma``."""
    alpha, beta, gamma = g_affine
    if not k > 0:
        raise InvalidParameter("wavenumber k must be positive")
    return alpha * np.asarray(x) + beta * np.asarray(y) + gamma + np.asarray(z) * (alpha**2 + beta**2) / (2.0 * k)


@dataclass
class Fan:
    seeds: np.ndarray
    trajectories: list

    def samples(self) -> np.ndarray:
        """``(x, y, z, phi)`` rows from every accepted state of every trajectory."""
        parts = [t.states[:, [0, 1, 2, 3]] for t in self.trajectories]
        return np.concatenate(parts) if parts else np.empty((0, 4))

    @property
    def n_failed(self) -> int:
        return sum(not t.ok for t in self.trajectories)


def characteristic_fan(
    seeds,
    data: InitialSurfaceData,
    ihat,
    tau_end: float,
    dtau: float = 1e-3,
    box=None,
) -> Fan:
    """Integrate one characteristic per seed ``(x0, y0)`` on the plane z = 0.

    Failing trajectories keep their status and partial history; the others
    are unaffected.
    """
    seeds = np.atleast_2d(np.asarray(seeds, dtype=float))
    if seeds.size == 0:
        raise InvalidParameter("empty seed list")
    Y0 = np.array([compatibility_init(sx, sy, data, ihat).as_array() for sx, sy in seeds])
    return Fan(seeds, _rk4_fan(Y0, ihat, data.k, tau_end, dtau, box))


def seed_grid(bounds, n: int) -> np.ndarray:
    """``n x n`` seeds on a uniform lattice covering ``bounds`` (edges included)."""
    x0, x1, y0, y1 = bounds
    X, Y = np.meshgrid(np.linspace(x0, x1, n), np.linspace(y0, y1, n))
    return np.column_stack([X.ravel(), Y.ravel()])


def seed_ring(radius: float, count: int, center=(0.0, 0.0)) -> np.ndarray:
    t = 2.0 * np.pi * np.arange(count) / count
    return np.column_stack([center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)])


def write_trajectories_csv(path, fan: Fan) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["seed", "tau", *STATE_NAMES])
        for i, t in enumerate(fan.trajectories):
            for tau, row in zip(t.tau, t.states):
                w.writerow([i, repr(float(tau)), *(repr(float(v)) for v in row)])
    return path
