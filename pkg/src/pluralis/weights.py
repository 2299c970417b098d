"""Weight vectors on the probability simplex and uniform simplex grids."""
from __future__ import annotations

import math

import numpy as np

from .errors import GuardError

SIMPLEX_SUM_TOL = 1e-9
GRID_GUARD = 100_000


def validate_weight_vector(w, d: int | None = None) -> np.ndarray:
    """Check nonnegativity and unit sum (within 1e-9); returns a float64 copy."""
    arr = np.asarray(w, dtype=np.float64).reshape(-1)
    if d is not None and arr.shape[0] != d:
        raise ValueError(f"weight vector of length {arr.shape[0]}, expected {d}")
    if arr.shape[0] == 0:
        raise ValueError("empty weight vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError("weight vector has non-finite components")
    if np.any(arr < 0.0):
        raise ValueError(f"negative weight component in {arr.tolist()}")
    total = float(arr.sum())
    if abs(total - 1.0) > SIMPLEX_SUM_TOL:
        raise ValueError(f"weights sum to {total!r}, not 1")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


def simplex_grid_size(resolution: int, d: int) -> int:
    """Number of points in the uniform simplex grid without materializing it."""
    return math.comb(resolution + d - 1, d - 1)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def simplex_grid(resolution: int, d: int) -> np.ndarray:
    """Uniform grid on the (d-1)-simplex with `resolution` subdivisions per axis.

    Points are returned in lexicographic order of their integer compositions,
    so the layout is deterministic. Guarded: grids beyond 10^5 points are
    refused before any allocation happens.
    """
    if resolution < 1:
        raise ValueError(f"resolution {resolution} must be >= 1")
    if d < 1:
        raise ValueError(f"dimension {d} must be >= 1")
    size = simplex_grid_size(resolution, d)
    if size > GRID_GUARD:
        raise GuardError(
            f"simplex grid with resolution {resolution} and d={d} has {size} points, "
            f"over the {GRID_GUARD} guard"
        )
    counts = np.array(list(_compositions(resolution, d)), dtype=np.float64)
    grid = counts / float(resolution)
    grid.flags.writeable = False
    return grid
