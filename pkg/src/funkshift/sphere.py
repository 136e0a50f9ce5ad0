"""Points, quadrature grids and norms on the unit sphere S^n.

Functions on the sphere are plain callables mapping an ``(N, n+1)`` array of
points to an ``(N,)`` array of values.  A :class:`GridFunction` stores such a
function sampled on the nodes of a :class:`SphereGrid`.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import gammaln, roots_gegenbauer, roots_legendre

SphereFunction = Callable[[np.ndarray], np.ndarray]


def sphere_area(n: int) -> float:
    """Surface area of the unit sphere S^n in R^{n+1}."""
    return float(2.0 * np.exp(0.5 * (n + 1) * np.log(np.pi) - gammaln(0.5 * (n + 1))))


def as_points(x, dim: Optional[int] = None) -> np.ndarray:
    """Return ``x`` as a float array of shape ``(N, d)``; a single vector becomes ``(1, d)``."""
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2:
        raise ValueError(f"points must be a vector or a 2-d array, got shape {pts.shape}")
    if dim is not None and pts.shape[1] != dim:
        raise ValueError(f"points must have {dim} coordinates, got {pts.shape[1]}")
    return pts


def normalize(x: np.ndarray) -> np.ndarray:
    """Project the rows of ``x`` radially onto the unit sphere."""
    x = np.asarray(x, dtype=float)
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def sphere_point(coords) -> np.ndarray:
    """A single unit vector; rejects vectors far from the sphere rather than rescaling them."""
    v = np.asarray(coords, dtype=float).ravel()
    r = np.linalg.norm(v)
    if abs(r - 1.0) > 1e-8:
        raise ValueError(f"point is not on the unit sphere (|x| = {r})")
    return v / r


def geodesic_distance(x, pole) -> np.ndarray:
    """Great-circle distance between the rows of ``x`` and a single point ``pole``.

    Uses ``atan2`` so that tiny distances keep full relative precision.
    """
    x = as_points(x)
    p = np.asarray(pole, dtype=float).ravel()
    c = x @ p
    sin = np.linalg.norm(x - c[:, None] * p[None, :], axis=1)
    return np.arctan2(sin, c)


def orthonormal_complement(v: np.ndarray) -> np.ndarray:
    """Columns spanning the orthogonal complement of the columns of ``v`` (``(d, m)`` -> ``(d, d-m)``)."""
    v = np.atleast_2d(np.asarray(v, dtype=float))
    if v.shape[0] == 1 and v.shape[1] > 1:
        v = v.T
    u, _, _ = np.linalg.svd(v, full_matrices=True)
    return u[:, v.shape[1]:]


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Quadrature rule for the surface measure of S^n.

    Attributes
    ----------
    nodes : ndarray, shape (N, n+1)
    weights : ndarray, shape (N,)
        Positive weights summing to the area of S^n.
    n : int
        Sphere dimension.
    exactness : int
        Polynomial degree integrated exactly (``-1`` if no such claim is made).
    """

    nodes: np.ndarray
    weights: np.ndarray
    n: int
    exactness: int = -1

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        weights = np.array(self.weights, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != self.n + 1:
            raise ValueError("grid nodes must have shape (N, n+1)")
        if weights.shape != (nodes.shape[0],):
            raise ValueError("one weight per node is required")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, np.asarray(values, dtype=float)))

    def sample(self, func: SphereFunction) -> "GridFunction":
        """Evaluate ``func`` at the nodes, keeping ``func`` as the off-grid evaluator."""
        return GridFunction(self, func(self.nodes), func=func)


def _unit_circle(count: int) -> tuple[np.ndarray, np.ndarray]:
    ang = 2.0 * np.pi * np.arange(count) / count
    return np.column_stack([np.cos(ang), np.sin(ang)]), np.full(count, 2.0 * np.pi / count)


def build_sphere_grid(n: int, resolution: int) -> SphereGrid:
    """Product quadrature on S^n.

    For ``n == 1`` this is the uniform rule with ``resolution`` nodes.  For
    ``n >= 2`` the last coordinate ``t`` is sampled at the ``resolution``
    Gauss-Gegenbauer nodes for the weight ``(1 - t^2)^{(n-2)/2}`` and the
    remaining directions by the rule for S^{n-1} (a ``2*resolution``-point
    uniform circle when ``n == 2``).  The rule integrates polynomials of
    degree ``2*resolution - 1`` exactly for ``n >= 2``.
    """
    if n < 1:
        raise ValueError("sphere dimension n must be >= 1")
    if resolution < 4:
        raise ValueError("resolution must be >= 4")
    if n == 1:
        nodes, weights = _unit_circle(resolution)
        return SphereGrid(nodes, weights, 1, resolution - 1)

    if n == 2:
        t, wt = roots_legendre(resolution)
        sub_nodes, sub_w = _unit_circle(2 * resolution)
        exact = 2 * resolution - 1
    else:
        t, wt = roots_gegenbauer(resolution, 0.5 * (n - 1))
        sub = build_sphere_grid(n - 1, resolution)
        sub_nodes, sub_w = sub.nodes, sub.weights
        exact = min(2 * resolution - 1, sub.exactness)
    radial = np.sqrt(1.0 - t ** 2)
    nodes = np.concatenate(
        [np.column_stack([r * sub_nodes, np.full(len(sub_w), ti)]) for ti, r in zip(t, radial)]
    )
    weights = np.concatenate([wi * sub_w for wi in wt])
    return SphereGrid(normalize(nodes), weights, n, exact)


def build_polar_grid(
    pole,
    n: int = 2,
    panel_nodes: int = 8,
    outer_nodes: int = 96,
    azimuth: int = 64,
    theta_min: float = 1e-24,
    theta_split: float = 0.5,
) -> SphereGrid:
    """Quadrature in geodesic polar coordinates about ``pole``, graded toward it.

    The colatitude ``theta`` is integrated by composite Gauss-Legendre in
    ``log(theta)`` on ``[theta_min, theta_split]`` (one panel of
    ``panel_nodes`` points per unit of ``log(theta)``) and by Gauss-Legendre
    in ``theta`` on ``[theta_split, pi]``;
    the directions by the rule for S^{n-1} (``azimuth`` points when ``n == 2``).
    Functions concentrated in a shrinking cap around ``pole`` (the remainders
    of the two-center series near the repelling endpoint) stay resolved at
    every scale down to ``theta_min``.  The cap below ``theta_min`` is dropped.
    """
    if n < 2:
        raise ValueError("polar grids need n >= 2")
    p = sphere_point(pole)
    if p.size != n + 1:
        raise ValueError("pole dimension does not match n")
    if not 0.0 < theta_min < theta_split < np.pi:
        raise ValueError("need 0 < theta_min < theta_split < pi")
    basis = orthonormal_complement(p[:, None])  # (n+1, n)
    if n == 2:
        dirs, dir_w = _unit_circle(azimuth)
    else:
        sub = build_sphere_grid(n - 1, max(4, azimuth // 2))
        dirs, dir_w = sub.nodes, sub.weights

    u, wu = roots_legendre(panel_nodes)
    lo, hi = math.log(theta_min), math.log(theta_split)
    edges = np.linspace(lo, hi, int(math.ceil(hi - lo)) + 1)
    half = 0.5 * np.diff(edges)[:, None]
    log_theta = (half * u[None, :] + 0.5 * (edges[1:] + edges[:-1])[:, None]).ravel()
    th_in = np.exp(log_theta)
    w_in = (half * wu[None, :]).ravel() * th_in  # d(theta) = theta d(log theta)
    v, wv = roots_legendre(outer_nodes)
    th_out = 0.5 * (np.pi - theta_split) * v + 0.5 * (np.pi + theta_split)
    w_out = 0.5 * (np.pi - theta_split) * wv
    theta = np.concatenate([th_in, th_out])
    w_theta = np.concatenate([w_in, w_out]) * np.sin(theta) ** (n - 1)

    embedded = dirs @ basis.T  # (Q, n+1)
    c = np.cos(theta)[:, None, None]
    s = np.sin(theta)[:, None, None]
    nodes = (c * p[None, None, :] + s * embedded[None, :, :]).reshape(-1, n + 1)
    weights = (w_theta[:, None] * dir_w[None, :]).ravel()
    # keep the tiny transverse offsets exact; normalizing would only touch the pole component
    return SphereGrid(nodes, weights, n, -1)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values of a function on the nodes of ``grid``.

    ``func`` optionally holds an exact off-grid evaluator (a phantom or a
    reconstruction series).  Without it, off-grid evaluation falls back to the
    value at the nearest node and emits a warning.
    """

    grid: SphereGrid
    values: np.ndarray
    func: Optional[SphereFunction] = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).ravel()
        if vals.shape[0] != self.grid.size:
            raise ValueError("values length must equal the number of grid nodes")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __call__(self, points) -> np.ndarray:
        pts = as_points(points, self.grid.n + 1)
        if self.func is not None:
            return np.asarray(self.func(pts), dtype=float)
        warnings.warn(
            "GridFunction has no off-grid evaluator; using nearest-node values",
            RuntimeWarning,
            stacklevel=2,
        )
        idx = np.argmax(pts @ self.grid.nodes.T, axis=1)
        return self.values[idx]

    def to_csv(self, path) -> None:
        write_grid_function_csv(self, path)


def write_grid_function_csv(f: GridFunction, path) -> None:
    """One row per node: ``x1..x_{n+1}, weight, value`` with a header row."""
    d = f.grid.n + 1
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{i + 1}" for i in range(d)] + ["weight", "value"])
        for x, wt, v in zip(f.grid.nodes, f.grid.weights, f.values):
            w.writerow([f"{c:.17g}" for c in x] + [f"{wt:.17g}", f"{v:.17g}"])


def read_grid_function_csv(path) -> GridFunction:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], np.array(rows[1:], dtype=float)
    d = len(header) - 2
    if header[-2:] != ["weight", "value"] or d < 2:
        raise ValueError(f"{path}: not a GridFunction CSV")
    grid = SphereGrid(body[:, :d], body[:, d], d - 1)
    return GridFunction(grid, body[:, d + 1])


def lp_norm(f: GridFunction, p: float) -> float:
    """Quadrature ``L^p`` norm; ``p = inf`` gives the maximum over nodes."""
    if p == np.inf:
        return float(np.max(np.abs(f.values)))
    if not p >= 1:
        raise ValueError("p must be >= 1")
    return float(np.dot(f.grid.weights, np.abs(f.values) ** p) ** (1.0 / p))


def sup_norm_outside_cap(f: GridFunction, pole, delta: float) -> float:
    """Max of ``|f|`` over nodes at geodesic distance ``>= delta`` from ``pole``."""
    if not 0.0 <= delta < np.pi:
        raise ValueError("delta must lie in [0, pi)")
    mask = geodesic_distance(f.grid.nodes, pole) >= delta
    if not mask.any():
        raise ValueError(f"no grid node lies outside the cap of radius {delta}")
    return float(np.max(np.abs(f.values[mask])))


@dataclass(frozen=True, eq=False)
class SectionSphereQuad:
    """Quadrature on the (k-1)-sphere ``{center_point + radius * B u : |u| = 1}``.

    ``tangent_frame`` is the ``(n+1, k)`` orthonormal basis ``B``; for a
    section of S^n by a k-plane every node lies on S^n.
    """

    center_point: np.ndarray
    radius: float
    tangent_frame: np.ndarray
    nodes: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None


def unit_section_rule(k: int, resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes (``(Q, k)``) and weights for the unit (k-1)-sphere.

    ``k == 1`` is the two-point sphere S^0 with counting measure.
    """
    if k < 1:
        raise ValueError("section dimension k must be >= 1")
    if k == 1:
        return np.array([[1.0], [-1.0]]), np.ones(2)
    if resolution < 8:
        raise ValueError("section resolution must be >= 8")
    if k == 2:
        return _unit_circle(resolution)
    g = build_sphere_grid(k - 1, resolution)
    return g.nodes, g.weights


def section_sphere_quad(center_point, radius: float, tangent_frame, resolution: int) -> SectionSphereQuad:
    tf = np.asarray(tangent_frame, dtype=float)
    u, w = unit_section_rule(tf.shape[1], resolution)
    c = np.asarray(center_point, dtype=float)
    nodes = c[None, :] + radius * u @ tf.T
    weights = radius ** (tf.shape[1] - 1) * w
    return SectionSphereQuad(c, float(radius), tf, nodes, weights)
