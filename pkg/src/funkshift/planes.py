"""Affine k-planes through an interior center, encoded by orthonormal frames.

A plane through ``a`` is ``{x : xi' x = xi' a}`` for a frame ``xi`` with
``n+1-k`` orthonormal columns (the plane's normal space).  Frames are only
defined up to a right orthogonal factor, so planes are compared as point
sets, never as raw matrices.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .moebius import Center
from .sphere import SectionSphereQuad, orthonormal_complement, section_sphere_quad

_GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


@dataclass(frozen=True, eq=False)
class Frame:
    """Orthonormal ``(n+1, n+1-k)`` matrix ``xi``."""

    xi: np.ndarray

    def __post_init__(self):
        xi = np.array(self.xi, dtype=float)
        if xi.ndim == 1:
            xi = xi[:, None]
        m = xi.shape[1]
        if xi.shape[0] <= m:
            raise ValueError("a frame needs fewer columns than rows")
        if np.max(np.abs(xi.T @ xi - np.eye(m))) > 1e-10:
            raise ValueError("frame columns are not orthonormal")
        xi.setflags(write=False)
        object.__setattr__(self, "xi", xi)

    @property
    def k(self) -> int:
        return self.xi.shape[0] - self.xi.shape[1]


@dataclass(frozen=True, eq=False)
class PlaneThrough:
    """The plane ``{x : xi' x = xi' a}`` through ``center``."""

    center: Center
    frame: Frame

    def __post_init__(self):
        if self.center.dim != self.frame.xi.shape[0]:
            raise ValueError("center and frame dimensions differ")

    @property
    def k(self) -> int:
        return self.frame.k

    def residual(self, x) -> np.ndarray:
        """``|xi'(x - a)|`` for each row of ``x``; zero on the plane."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.linalg.norm((x - self.center.coords) @ self.frame.xi, axis=1)


class PlaneFamily:
    """A finite family of planes sharing one center, stored as stacked frames.

    Indexing and iteration yield :class:`PlaneThrough` objects; the batched
    routines work directly on ``frames`` of shape ``(P, n+1, n+1-k)``.
    """

    def __init__(self, center, frames):
        self.center = Center.of(center)
        f = np.array(frames, dtype=float)
        if f.ndim == 2:
            f = f[:, :, None]
        if f.ndim != 3 or f.shape[1] != self.center.dim or f.shape[2] >= f.shape[1]:
            raise ValueError(f"frames must have shape (P, {self.center.dim}, m) with m < {self.center.dim}")
        gram = np.einsum("pij,pik->pjk", f, f)
        if np.max(np.abs(gram - np.eye(f.shape[2])), initial=0.0) > 1e-10:
            raise ValueError("frame columns are not orthonormal")
        f.setflags(write=False)
        self.frames = f

    @property
    def k(self) -> int:
        return self.frames.shape[1] - self.frames.shape[2]

    @property
    def n(self) -> int:
        return self.frames.shape[1] - 1

    def __len__(self) -> int:
        return self.frames.shape[0]

    def __getitem__(self, i):
        if isinstance(i, slice) or np.ndim(i) > 0:
            return PlaneFamily(self.center, self.frames[i])
        return PlaneThrough(self.center, Frame(self.frames[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def section_batch(self):
        """Centers ``(P, n+1)``, radii ``(P,)`` and tangent frames ``(P, n+1, k)`` of ``S^n cap plane``."""
        a = self.center.coords
        proj = np.einsum("pij,i->pj", self.frames, a)  # xi' a
        centers = np.einsum("pij,pj->pi", self.frames, proj)
        radii = np.sqrt(np.clip(1.0 - np.einsum("pj,pj->p", proj, proj), 0.0, None))
        u, _, _ = np.linalg.svd(self.frames, full_matrices=True)
        tangents = u[:, :, self.frames.shape[2]:]
        return centers, radii, tangents

    def to_csv(self, path) -> None:
        write_plane_family_csv(self, path)


def section_geometry(plane: PlaneThrough, resolution: int | None = None) -> SectionSphereQuad:
    """Center, radius and tangent frame of ``S^n cap plane``; nodes too when ``resolution`` is given."""
    xi, a = plane.frame.xi, plane.center.coords
    proj = xi.T @ a
    center = xi @ proj
    radius = float(np.sqrt(max(0.0, 1.0 - proj @ proj)))
    tangent = orthonormal_complement(xi)
    if resolution is None:
        return SectionSphereQuad(center, radius, tangent)
    return section_sphere_quad(center, radius, tangent, resolution)


def _sym_power(mat: np.ndarray, power: float) -> np.ndarray:
    """``mat**power`` for stacked symmetric positive definite matrices."""
    w, v = np.linalg.eigh(mat)
    assert np.all(w > 1e-12), "frame Gram matrix is numerically singular"
    w = np.maximum(w, 1e-14) ** power
    return np.einsum("...ij,...j,...kj->...ik", v, w, v)


def _stack(xi) -> tuple[np.ndarray, bool]:
    if isinstance(xi, Frame):
        xi = xi.xi
    arr = np.asarray(xi, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    single = arr.ndim == 2
    return (arr[None] if single else arr), single


def _A(a: Center, scale_parallel: float, scale_perp: float) -> np.ndarray:
    """``scale_parallel * P_a + scale_perp * Q_a`` (the identity direction split is arbitrary at a = o)."""
    d = a.dim
    if a.is_origin:
        return np.eye(d)
    u = a.coords / np.sqrt(a.norm2)
    P = np.outer(u, u)
    return scale_parallel * P + scale_perp * (np.eye(d) - P)


def plane_alpha(a, xi) -> np.ndarray:
    """``alpha = (A xi)'(A xi)`` with ``A = s_a P_a + Q_a``; ``det alpha = 1 - |xi'a|^2``."""
    a = Center.of(a)
    f, single = _stack(xi)
    Axi = np.einsum("ij,pjk->pik", _A(a, a.s, 1.0), f)
    alpha = np.einsum("pij,pik->pjk", Axi, Axi)
    return alpha[0] if single else alpha


def map_plane_to_central(a, xi) -> np.ndarray:
    """Frame ``eta`` of ``phi_a(plane)`` for the plane ``{x : xi'x = xi'a}``.

    ``eta = -(A xi) alpha^{-1/2}``; the image is ``{y : eta' y = 0}``.
    Accepts one frame ``(n+1, m)`` or a stack ``(P, n+1, m)``.
    """
    a = Center.of(a)
    f, single = _stack(xi)
    Axi = np.einsum("ij,pjk->pik", _A(a, a.s, 1.0), f)
    alpha = np.einsum("pij,pik->pjk", Axi, Axi)
    eta = -Axi @ _sym_power(alpha, -0.5)
    return eta[0] if single else eta


def map_central_to_plane(a, eta) -> np.ndarray:
    """Frame ``xi`` of ``phi_a(zeta)`` for the central plane ``{y : eta'y = 0}``.

    ``xi = (A_1 eta) beta^{-1/2}`` with ``A_1 = P_a + s_a Q_a``; the image
    plane passes through ``a``.
    """
    a = Center.of(a)
    f, single = _stack(eta)
    A1e = np.einsum("ij,pjk->pik", _A(a, 1.0, a.s), f)
    beta = np.einsum("pij,pik->pjk", A1e, A1e)
    xi = A1e @ _sym_power(beta, -0.5)
    return xi[0] if single else xi


def spiral_hemisphere(count: int) -> np.ndarray:
    """``count`` quasi-uniform unit vectors on the upper hemisphere of S^2 (Fibonacci spiral)."""
    i = np.arange(count)
    z = 1.0 - (i + 0.5) / count
    r = np.sqrt(1.0 - z ** 2)
    ang = i * _GOLDEN_ANGLE
    return np.column_stack([r * np.cos(ang), r * np.sin(ang), z])


def sample_plane_family(a, n: int, k: int, count: int, seed: int = 0) -> PlaneFamily:
    """Deterministic family of ``count`` k-planes through ``a``.

    For ``n = 2`` the planes (``k = 2``) have unit normals, and the lines
    (``k = 1``) unit directions, on a hemisphere spiral; otherwise frames are
    orthonormalized Gaussian matrices drawn from ``seed``.
    """
    a = Center.of(a)
    if count < 1:
        raise ValueError("count must be >= 1")
    if not 1 <= k <= n or a.dim != n + 1:
        raise ValueError("need 1 <= k <= n and a center in R^{n+1}")
    if n == 2 and k == 2:
        frames = spiral_hemisphere(count)[:, :, None]
    elif n == 2 and k == 1:
        dirs = spiral_hemisphere(count)
        frames = np.stack([orthonormal_complement(d[:, None]) for d in dirs])
    else:
        rng = np.random.default_rng(seed)
        g = rng.standard_normal((count, n + 1, n + 1 - k))
        frames, _ = np.linalg.qr(g)
    return PlaneFamily(a, frames)


def write_plane_family_csv(planes: PlaneFamily, path) -> None:
    """Columns ``k, a1..a_{n+1}, xi_{row}_{col}...`` (frame flattened row-major), one row per plane."""
    d, m = planes.frames.shape[1:]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k"] + [f"a{i + 1}" for i in range(d)]
                   + [f"xi_{i + 1}_{j + 1}" for i in range(d) for j in range(m)])
        a = [f"{c:.17g}" for c in planes.center.coords]
        for fr in planes.frames:
            w.writerow([str(planes.k)] + a + [f"{c:.17g}" for c in fr.ravel()])


def read_plane_family_csv(path) -> PlaneFamily:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    d = sum(1 for h in header if h.startswith("a"))
    body = np.array(rows[1:], dtype=float)
    k = int(body[0, 0])
    m = d - k
    frames = body[:, 1 + d:].reshape(-1, d, m)
    return PlaneFamily(body[0, 1:1 + d], frames)
