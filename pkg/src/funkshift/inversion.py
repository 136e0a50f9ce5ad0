"""Inversion of the central Funk transform on even functions, and of ``F_a`` on a-even ones.

Two routes invert ``F_o`` on S^2 (great-circle sections):

* ``harmonic`` -- fit the data in even-degree spherical harmonics of the
  plane normal and divide by the Funk-Hecke multipliers ``c_l``, which are
  measured by quadrature rather than taken from a table;
* ``meanvalue`` -- average the data over planes at a fixed distance from the
  evaluation point and recover the value by an Abel-type limit.

Single-center inversion composes ``f_a^+ = M_a^{-1} F_o^{-1} N_a^{-1} g``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np
from scipy.special import eval_legendre, roots_legendre, sph_harm_y

from .funk import (
    PlaneFunction,
    SectionField,
    apply_M_inverse,
    apply_N_inverse,
    section_values,
)
from .moebius import Center, mobius_apply
from .planes import PlaneFamily, map_central_to_plane
from .sphere import GridFunction, SphereGrid, as_points, orthonormal_complement


class IllConditionedError(RuntimeError):
    """Raised when the plane sample cannot determine the requested harmonics."""


def harmonic_indices(degree_max: int, even_only: bool = False) -> tuple[np.ndarray, np.ndarray]:
    ls, ms = [], []
    for l in range(0, degree_max + 1, 2 if even_only else 1):
        for m in range(-l, l + 1):
            ls.append(l)
            ms.append(m)
    return np.array(ls), np.array(ms)


def _normalized_legendre(degree_max: int, z: np.ndarray) -> dict:
    """Orthonormal associated Legendre functions ``N_lm P_l^m(z)`` for ``0 <= m <= l``.

    Standard three-term recurrence in ``l`` at fixed ``m``, seeded from the
    sectoral values; includes the Condon-Shortley phase.
    """
    sin_t = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    P = {(0, 0): np.full_like(z, np.sqrt(0.25 / np.pi))}
    for m in range(1, degree_max + 1):
        P[m, m] = -np.sqrt((2 * m + 1) / (2.0 * m)) * sin_t * P[m - 1, m - 1]
    for m in range(degree_max + 1):
        if m + 1 <= degree_max:
            P[m + 1, m] = np.sqrt(2 * m + 3.0) * z * P[m, m]
        for l in range(m + 2, degree_max + 1):
            a = np.sqrt((4.0 * l * l - 1) / (l * l - m * m))
            b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1) ** 2 - 1))
            P[l, m] = a * (z * P[l - 1, m] - b * P[l - 2, m])
    return P


def real_sph_harm(degrees: np.ndarray, orders: np.ndarray, points) -> np.ndarray:
    """Orthonormal real spherical harmonics, shape ``(N, len(degrees))``.

    ``sqrt(2) Re Y_l^m`` for ``m > 0``, ``sqrt(2) Im Y_l^|m|`` for ``m < 0``,
    with ``Y_l^m`` in the convention of :func:`scipy.special.sph_harm_y`.
    """
    x = as_points(points, 3)
    degrees = np.asarray(degrees, dtype=int)
    orders = np.asarray(orders, dtype=int)
    P = _normalized_legendre(int(degrees.max(initial=0)), np.clip(x[:, 2], -1.0, 1.0))
    phi = np.arctan2(x[:, 1], x[:, 0])
    mm = np.arange(1, int(np.abs(orders).max(initial=0)) + 1)
    cos_m = np.sqrt(2.0) * np.cos(np.outer(phi, mm)).T
    sin_m = np.sqrt(2.0) * np.sin(np.outer(phi, mm)).T
    out = np.empty((degrees.shape[0], x.shape[0]))
    for c, (l, m) in enumerate(zip(degrees, orders)):
        if m > 0:
            out[c] = P[l, m] * cos_m[m - 1]
        elif m < 0:
            out[c] = P[l, -m] * sin_m[-m - 1]
        else:
            out[c] = P[l, 0]
    return out.T


def real_sph_harm_scipy(degrees: np.ndarray, orders: np.ndarray, points) -> np.ndarray:
    """Same basis as :func:`real_sph_harm`, evaluated through scipy (slower; used as a check)."""
    x = as_points(points, 3)
    theta = np.arccos(np.clip(x[:, 2], -1.0, 1.0))
    phi = np.arctan2(x[:, 1], x[:, 0])
    Y = sph_harm_y(degrees[None, :], np.abs(orders)[None, :], theta[:, None], phi[:, None])
    out = np.where(orders[None, :] > 0, np.sqrt(2.0) * Y.real, Y.real)
    return np.where(orders[None, :] < 0, np.sqrt(2.0) * Y.imag, out)


@lru_cache(maxsize=8)
def _multipliers(degree_max: int, resolution: int) -> tuple[float, ...]:
    # F_o of the zonal harmonic P_l(x . e3), evaluated at the plane with normal e3
    pole = PlaneFamily(np.zeros(3), np.array([[[0.0], [0.0], [1.0]]]))
    return tuple(
        float(section_values(lambda x, l=l: eval_legendre(l, x[:, 2]), pole, resolution)[0])
        / float(eval_legendre(l, 1.0))
        for l in range(degree_max + 1)
    )


def funk_multipliers(degree_max: int, resolution: int = 256) -> np.ndarray:
    """``c_l`` with ``F_o Y_l = c_l Y_l`` on S^2, by brute-force section quadrature."""
    return np.array(_multipliers(int(degree_max), int(resolution)))


@dataclass(frozen=True, eq=False)
class HarmonicCoeffs:
    """Real spherical-harmonic expansion on S^2, callable on ``(N, 3)`` points."""

    degree_max: int
    degrees: np.ndarray
    orders: np.ndarray
    coefficients: np.ndarray

    def __call__(self, points) -> np.ndarray:
        x = as_points(points, 3)
        out = np.empty(x.shape[0])
        for lo in range(0, x.shape[0], 4096):
            out[lo:lo + 4096] = real_sph_harm(self.degrees, self.orders, x[lo:lo + 4096]) @ self.coefficients
        return out


def fit_funk_o_harmonic(g: SectionField, degree_max: int = 24, max_condition: float = 1e8) -> HarmonicCoeffs:
    """Expansion of the even function ``u`` with ``F_o u = g``.

    ``g`` must be given on central planes of S^2.  Odd degrees are in the
    kernel and come back as zero.
    """
    planes = g.planes
    if planes.n != 2 or planes.k != 2:
        raise NotImplementedError("the harmonic route is implemented for n = 2, k = 2")
    if not planes.center.is_origin:
        raise ValueError("harmonic inversion needs data on central planes")
    ls, ms = harmonic_indices(degree_max, even_only=True)
    if len(planes) < ls.size:
        raise IllConditionedError(
            f"{len(planes)} planes cannot determine {ls.size} even harmonics up to degree {degree_max}"
        )
    normals = planes.frames[:, :, 0]
    A = real_sph_harm(ls, ms, normals)
    b, _, rank, sv = np.linalg.lstsq(A, g.values, rcond=None)
    cond = sv[0] / sv[-1] if sv[-1] > 0 else np.inf
    if rank < ls.size or cond > max_condition:
        raise IllConditionedError(f"harmonic fit is ill-conditioned (condition estimate {cond:.3g})")
    c = funk_multipliers(degree_max)
    all_l, all_m = harmonic_indices(degree_max)
    coeffs = np.zeros(all_l.size)
    even = all_l % 2 == 0
    coeffs[even] = b / c[ls]
    return HarmonicCoeffs(degree_max, all_l, all_m, coeffs)


def invert_funk_o_harmonic(g: SectionField, degree_max: int, grid: SphereGrid) -> GridFunction:
    u = fit_funk_o_harmonic(g, degree_max)
    return grid.sample(u)


def multiplier_table(degree_max: int) -> dict:
    """Per-degree multipliers with the closed form ``2 pi P_l(0)`` alongside, for reports."""
    c = funk_multipliers(degree_max)
    return {
        "degree": list(range(degree_max + 1)),
        "measured": [float(v) for v in c],
        "funk_hecke": [float(2 * np.pi * eval_legendre(l, 0.0)) for l in range(degree_max + 1)],
    }


@dataclass(frozen=True, eq=False)
class MeanValueProfile:
    """Averages ``(F*_x phi)(r)`` over central planes at distance ``arccos r`` from ``x``."""

    x: np.ndarray
    r: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        if np.any(r <= 0) or np.any(r > 1) or np.any(np.diff(r) <= 0):
            raise ValueError("r values must increase strictly inside (0, 1]")


def _profile_normals(x: np.ndarray, r: np.ndarray, rotations: int) -> np.ndarray:
    """Normals ``eta`` with ``|x . eta| = sqrt(1 - r^2)``, rotated around ``x``: shape ``(R, rotations, 3)``."""
    u, v = orthonormal_complement(x[:, None]).T
    psi = 2 * np.pi * np.arange(rotations) / rotations
    ring = np.cos(psi)[:, None] * u + np.sin(psi)[:, None] * v
    c = np.sqrt(np.clip(1.0 - r ** 2, 0.0, None))
    return c[:, None, None] * x[None, None, :] + r[:, None, None] * ring[None, :, :]


def _profile(phi: PlaneFunction, x: np.ndarray, r: np.ndarray, rotations: int) -> np.ndarray:
    normals = _profile_normals(x, r, rotations)
    fam = PlaneFamily(np.zeros(3), normals.reshape(-1, 3))
    return phi(fam).reshape(r.size, rotations).mean(axis=1)


def mean_value_profile(phi: PlaneFunction, x, r_grid, rotations: int = 64) -> MeanValueProfile:
    """Average of ``phi`` over central planes whose great circle is at geodesic distance ``arccos r`` from ``x``.

    ``phi`` is a callable on central :class:`PlaneFamily` objects.  The planes
    at a given distance form one orbit of the rotations about ``x`` and are
    averaged with the uniform probability measure on that orbit.
    """
    x = np.asarray(x, dtype=float).ravel()
    r = np.asarray(r_grid, dtype=float).ravel()
    if np.any(r <= 0) or np.any(r >= 1):
        raise ValueError("r must lie in (0, 1)")
    return MeanValueProfile(x, r, _profile(phi, x, r, rotations))


def _richardson(values: np.ndarray) -> float:
    """Extrapolate ``values[j] ~ D(1 - 2^-j)`` to ``D(1)`` (expansion in powers of ``2^-j``)."""
    table = [np.asarray(values, dtype=float)]
    for i in range(1, len(values)):
        prev = table[-1]
        table.append(prev[1:] + (prev[1:] - prev[:-1]) / (2.0 ** i - 1.0))
    return float(table[-1][0])


def invert_funk_o_meanvalue(
    phi: PlaneFunction,
    x,
    k: int = 2,
    levels: tuple[int, ...] = (3, 4, 5, 6, 7),
    angular_nodes: int = 48,
    rotations: int = 48,
) -> np.ndarray:
    """Recover an even ``f`` at the points ``x`` from ``phi = F_o f`` on S^2.

    With ``k - 1 = 1`` the section dimension, the value is
    ``lim_{s->1} (1/(2s)) d/ds I(s)`` where
    ``I(s) = (1/pi) int_0^s (s^2 - r^2)^{-1/2} (F*_x phi)(r) r dr``.
    ``I`` is computed by Gauss-Legendre in ``r = s sin(t)``, the derivative by
    centered differences at ``s_j = 1 - 2^-j`` (step ``2^-(j+2)``), and the
    limit by Richardson extrapolation over the levels ``j``.
    """
    if k != 2:
        raise NotImplementedError("the mean-value route is implemented for great circles on S^2 (k = 2) only")
    pts = as_points(x, 3)
    t, wt = roots_legendre(angular_nodes)
    t = 0.25 * np.pi * (t + 1.0)
    wt = 0.25 * np.pi * wt
    sin_t = np.sin(t)

    s_eval = []
    for j in levels:
        s, h = 1.0 - 2.0 ** -j, 2.0 ** -(j + 2)
        s_eval.extend([s - h, s + h])
    s_eval = np.array(s_eval)
    r_all = (s_eval[:, None] * sin_t[None, :]).ravel()
    order = np.argsort(r_all)

    out = np.empty(pts.shape[0])
    for i, xi in enumerate(pts):
        prof = np.empty(r_all.size)
        prof[order] = _profile(phi, xi, r_all[order], rotations)
        prof = prof.reshape(s_eval.size, angular_nodes)
        I = s_eval / np.pi * ((prof * sin_t[None, :]) @ wt)
        D = []
        for jj, j in enumerate(levels):
            s, h = 1.0 - 2.0 ** -j, 2.0 ** -(j + 2)
            D.append((I[2 * jj + 1] - I[2 * jj]) / (2 * h) / (2 * s))
        out[i] = _richardson(np.array(D))
    return out


def _data_on_central(g, a: Center) -> Union[SectionField, PlaneFunction]:
    if isinstance(g, SectionField):
        return apply_N_inverse(a, g)
    if a.is_origin:
        return g
    return lambda central: g(PlaneFamily(a, map_central_to_plane(a, central.frames)))


def single_center_inverse(
    g, a, route: str = "harmonic", degree_max: int = 24, k: int = 2, **meanvalue_options
) -> Callable[[np.ndarray], np.ndarray]:
    """Callable ``x -> (F~_a^{-1} g)(x)``, the a-even part of any preimage of ``g``.

    ``route='harmonic'`` takes a :class:`SectionField` over planes through
    ``a``; ``route='meanvalue'`` needs ``g`` as a callable on plane families
    through ``a`` (see :func:`funkshift.funk.funk_data`), since it samples
    planes chosen by the evaluation point.
    """
    a = Center.of(a)
    central = _data_on_central(g, a)
    if route == "harmonic":
        if not isinstance(central, SectionField):
            raise TypeError("the harmonic route needs sampled data (a SectionField)")
        u = fit_funk_o_harmonic(central, degree_max)
    elif route == "meanvalue":
        if isinstance(central, SectionField):
            raise TypeError("the mean-value route needs g as a callable on plane families")
        def u(y, _phi=central):
            return invert_funk_o_meanvalue(_phi, y, k, **meanvalue_options)
    else:
        raise ValueError(f"unknown route {route!r}")
    return lambda x: apply_M_inverse(a, u, x, k)


def invert_funk_a(g, a, grid: SphereGrid, route: str = "harmonic", degree_max: int = 24, k: int = 2,
                  **meanvalue_options) -> GridFunction:
    """``f_a^+ = M_a^{-1} F~_o^{-1} N_a^{-1} g`` sampled on ``grid`` (exact off-grid evaluator attached)."""
    return grid.sample(single_center_inverse(g, a, route, degree_max, k, **meanvalue_options))


def save_multiplier_json(path, degree_max: int) -> None:
    with open(path, "w") as fh:
        json.dump(multiplier_table(degree_max), fh, indent=2)
