"""Forward shifted Funk transforms and the factorization ``F_a = N_a F_o M_a``."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .moebius import Center, mobius_apply, reflect
from .planes import PlaneFamily, map_central_to_plane, map_plane_to_central
from .sphere import GridFunction, as_points, unit_section_rule

PlaneFunction = Callable[[PlaneFamily], np.ndarray]


@dataclass(frozen=True, eq=False)
class SectionField:
    """Values ``g(tau)`` of a transform over a family of planes."""

    planes: PlaneFamily
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).ravel()
        if vals.shape[0] != len(self.planes):
            raise ValueError("one value per plane is required")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.planes)

    def to_csv(self, path) -> None:
        write_section_field_csv(self, path)


def write_section_field_csv(g: SectionField, path) -> None:
    """Columns ``plane_id, xi_{row}_{col}..., value``."""
    d, m = g.planes.frames.shape[1:]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["plane_id"] + [f"xi_{i + 1}_{j + 1}" for i in range(d) for j in range(m)] + ["value"])
        for pid, (fr, v) in enumerate(zip(g.planes.frames, g.values)):
            w.writerow([str(pid)] + [f"{c:.17g}" for c in fr.ravel()] + [f"{v:.17g}"])


def read_section_field_csv(path, center, k: int) -> SectionField:
    center = Center.of(center)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    body = np.array(rows[1:], dtype=float)
    d = center.dim
    frames = body[:, 1:-1].reshape(-1, d, d - k)
    return SectionField(PlaneFamily(center, frames), body[:, -1])


def _as_callable(f) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(f, GridFunction):
        return f.__call__
    if not callable(f):
        raise TypeError("f must be callable on (N, n+1) point arrays")
    return f


def section_values(f, planes: PlaneFamily, section_resolution: int = 64) -> np.ndarray:
    """Quadrature of ``f`` over ``S^n cap tau`` for every plane ``tau`` of the family."""
    func = _as_callable(f)
    centers, radii, tangents = planes.section_batch()
    u, w = unit_section_rule(planes.k, section_resolution)
    nodes = centers[:, None, :] + radii[:, None, None] * np.einsum("pik,qk->pqi", tangents, u)
    P, Q, d = nodes.shape
    vals = np.asarray(func(nodes.reshape(P * Q, d)), dtype=float).reshape(P, Q)
    return (vals @ w) * radii ** (planes.k - 1)


def forward_funk(f, planes: PlaneFamily, section_resolution: int = 64) -> SectionField:
    """``(F_a f)(tau)`` for the planes of a family through ``a = planes.center``.

    Sections are sampled with a uniform angular rule for ``k = 2`` (spectrally
    accurate for smooth ``f``), a product rule for ``k > 2``, and the two
    intersection points for ``k = 1``.
    """
    return SectionField(planes, section_values(f, planes, section_resolution))


def funk_data(f, section_resolution: int = 64) -> PlaneFunction:
    """``planes -> F f`` as a callable, for consumers that need arbitrary planes."""
    return lambda planes: section_values(f, planes, section_resolution)


def point_pair_transform(f, a, x) -> np.ndarray:
    """``(F_a f)(L_{a,x}) = f(x) + f(tau_a x)`` for the line through ``a`` and ``x``."""
    func = _as_callable(f)
    a = Center.of(a)
    x = as_points(x, a.dim)
    return func(x) + func(reflect(a, x))


def _M_weight(a: Center, y: np.ndarray, k: int) -> np.ndarray:
    if k == 1:
        return np.ones(y.shape[0])
    return (a.s / (1.0 - y @ a.coords)) ** (k - 1)


def apply_M(a, f, y, k: int = 2) -> np.ndarray:
    """``(M_a f)(y) = (s_a / (1 - a.y))^{k-1} f(phi_a y)``; the identity at ``a = o``."""
    func = _as_callable(f)
    a = Center.of(a)
    y = as_points(y, a.dim)
    if a.is_origin:
        return np.asarray(func(y), dtype=float)
    return _M_weight(a, y, k) * func(mobius_apply(a, y))


def apply_M_inverse(a, f, x, k: int = 2) -> np.ndarray:
    """Exact inverse of :func:`apply_M`.

    ``1 - a.phi_a(x) = s_a^2 / (1 - a.x)`` turns ``1/weight(phi_a x)`` into
    ``weight(x)``, so the inverse has the same form as ``M_a`` itself.
    """
    func = _as_callable(f)
    a = Center.of(a)
    x = as_points(x, a.dim)
    if a.is_origin:
        return np.asarray(func(x), dtype=float)
    y = mobius_apply(a, x)
    return ((1.0 - y @ a.coords) / a.s) ** (k - 1) * func(y) if k > 1 else func(y)


def M_operator(a, f, k: int = 2):
    """``M_a f`` as a callable."""
    return lambda y: apply_M(a, f, y, k)


def M_inverse_operator(a, f, k: int = 2):
    return lambda x: apply_M_inverse(a, f, x, k)


def central_family(a, planes: PlaneFamily) -> PlaneFamily:
    """The family ``{phi_a tau}`` of central planes."""
    a = Center.of(a)
    if a.is_origin:
        return PlaneFamily(planes.center, planes.frames)
    return PlaneFamily(Center.origin(a.dim), map_plane_to_central(a, planes.frames))


def apply_N(a, Phi: Union[SectionField, PlaneFunction], planes: PlaneFamily | None = None) -> SectionField:
    """``(N_a Phi)(tau) = Phi(phi_a tau)``.

    ``Phi`` is either a :class:`SectionField` over central planes (relabelled
    onto the preimage planes through ``a``) or a callable on central plane
    families (evaluated at the images of ``planes``).
    """
    a = Center.of(a)
    if isinstance(Phi, SectionField):
        if not Phi.planes.center.is_origin:
            raise ValueError("N_a acts on fields over central planes")
        if a.is_origin:
            return Phi
        frames = map_central_to_plane(a, Phi.planes.frames)
        return SectionField(PlaneFamily(a, frames), Phi.values)
    if planes is None:
        raise ValueError("a plane family through a is required for callable Phi")
    if not np.allclose(planes.center.coords, a.coords, atol=1e-14):
        raise ValueError("plane family does not pass through a")
    return SectionField(planes, Phi(central_family(a, planes)))


def apply_N_inverse(a, g: Union[SectionField, PlaneFunction], central: PlaneFamily | None = None) -> SectionField:
    """``N_a^{-1} g = g o phi_a``: a field over planes through ``a`` moved to central planes."""
    a = Center.of(a)
    if isinstance(g, SectionField):
        if not np.allclose(g.planes.center.coords, a.coords, atol=1e-14):
            raise ValueError("field is not over planes through a")
        return SectionField(central_family(a, g.planes), g.values)
    if central is None or not central.center.is_origin:
        raise ValueError("a central plane family is required for callable g")
    frames = central.frames if a.is_origin else map_central_to_plane(a, central.frames)
    return SectionField(central, g(PlaneFamily(a, frames)))


def factorized_funk(f, a, planes: PlaneFamily, section_resolution: int = 64) -> SectionField:
    """``N_a F_o M_a f`` on the planes of a family through ``a``.

    Independent of :func:`forward_funk`: the integrals are taken over great
    subspheres of the central images, never over the shifted sections.
    """
    a = Center.of(a)
    if not np.allclose(planes.center.coords, a.coords, atol=1e-14):
        raise ValueError("plane family does not pass through a")
    k = planes.k
    central = central_family(a, planes)
    phi = forward_funk(M_operator(a, f, k), central, section_resolution)
    return SectionField(planes, phi.values)
