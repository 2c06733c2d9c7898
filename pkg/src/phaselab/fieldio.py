"""Plain-text ``.fld`` field files and stack directories.

A ``.fld`` file starts with ``# key=value`` header lines (nx, ny, x_min,
x_max, y_min, y_max, z) followed by ``ny`` rows of ``nx`` values; row ``j``
is fixed y with x increasing.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import InvalidField
from .grid import FieldStack, Grid2D, ScalarField2D

_HEADER_KEYS = ("nx", "ny", "x_min", "x_max", "y_min", "y_max", "z")


def write_field(path, f: ScalarField2D) -> Path:
    path = Path(path)
    g = f.grid
    header = {
        "nx": g.nx,
        "ny": g.ny,
        "x_min": repr(g.x_min),
        "x_max": repr(g.x_max),
        "y_min": repr(g.y_min),
        "y_max": repr(g.y_max),
        "z": repr(f.z),
    }
    with path.open("w") as fh:
        for key in _HEADER_KEYS:
            fh.write(f"# {key}={header[key]}\n")
        np.savetxt(fh, f.values, fmt="%.17g")
    return path


def read_field(path) -> ScalarField2D:
    path = Path(path)
    meta = {}
    with path.open() as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            body = line[1:].strip()
            if "=" in body:
                key, val = body.split("=", 1)
                meta[key.strip()] = val.strip()
    missing = [k for k in _HEADER_KEYS if k not in meta]
    if missing:
        raise InvalidField(f"{path}: missing header keys {missing}")
    grid = Grid2D(
        int(meta["nx"]),
        int(meta["ny"]),
        float(meta["x_min"]),
        float(meta["x_max"]),
        float(meta["y_min"]),
        float(meta["y_max"]),
    )
    values = np.loadtxt(path, comments="#", ndmin=2)
    if values.shape != grid.shape:
        raise InvalidField(f"{path}: body shape {values.shape} != header {grid.shape}")
    return ScalarField2D(grid, values, float(meta["z"]))


def write_stack(directory, stack: FieldStack, prefix: str = "phi") -> list[Path]:
    """One ``{prefix}_zNNNN.fld`` per slice, NNNN the slice index."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    return [
        write_field(directory / f"{prefix}_z{i:04d}.fld", f) for i, f in enumerate(stack)
    ]


def read_stack(directory, prefix: str = "phi") -> FieldStack:
    files = sorted(Path(directory).glob(f"{prefix}_z*.fld"))
    if not files:
        raise InvalidField(f"no {prefix}_z*.fld files in {directory}")
    return FieldStack(tuple(read_field(p) for p in files))
