"""Input checks shared by the estimators and the command line."""
from __future__ import annotations

import numpy as np
from sklearn.utils import check_array


def check_center(a, dim: int | None = None) -> np.ndarray:
    """Coordinates of an interior point; raises ``ValueError("center not interior")`` otherwise."""
    a = np.asarray(a, dtype=float).ravel()
    if dim is not None and a.shape[0] != dim:
        raise ValueError(f"center must have {dim} coordinates")
    if not np.all(np.isfinite(a)) or float(a @ a) >= 1.0:
        raise ValueError("center not interior")
    return a


def check_sphere_points(x, dim: int | None = None, tol: float = 1e-8) -> np.ndarray:
    """``(N, d)`` array of unit vectors."""
    x = check_array(x, ensure_2d=True, dtype=float)
    if dim is not None and x.shape[1] != dim:
        raise ValueError(f"points must have {dim} coordinates, got {x.shape[1]}")
    if np.max(np.abs(np.linalg.norm(x, axis=1) - 1.0)) > tol:
        raise ValueError("points must lie on the unit sphere")
    return x


def check_section_dim(k: int, n: int) -> int:
    if not 1 <= int(k) <= n:
        raise ValueError(f"section dimension k={k} outside 1..{n}")
    return int(k)


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if int(value) != value or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}")
    return int(value)
