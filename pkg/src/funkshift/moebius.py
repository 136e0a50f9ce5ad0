"""Interior centers, the ball automorphism phi_a and the chord reflection tau_a."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sphere import as_points, normalize


@dataclass(frozen=True, eq=False)
class Center:
    """A point ``a`` of the open unit ball, with ``s = sqrt(1 - |a|^2)``."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float).ravel()
        if c.size < 2:
            raise ValueError("center needs at least 2 coordinates")
        if not np.all(np.isfinite(c)) or float(c @ c) >= 1.0:
            raise ValueError("center not interior")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @classmethod
    def of(cls, a) -> "Center":
        return a if isinstance(a, Center) else cls(a)

    @classmethod
    def origin(cls, dim: int) -> "Center":
        return cls(np.zeros(dim))

    @property
    def dim(self) -> int:
        return self.coords.size

    @property
    def norm2(self) -> float:
        return float(self.coords @ self.coords)

    @property
    def s(self) -> float:
        return float(np.sqrt(1.0 - self.norm2))

    @property
    def is_origin(self) -> bool:
        return self.norm2 == 0.0

    def __repr__(self) -> str:
        return f"Center({np.array2string(self.coords, precision=6)})"


class MobiusMap:
    """The involutive automorphism ``phi_a`` of the closed ball.

    ``phi_a x = (a - P_a x - s_a Q_a x) / (1 - x.a)`` where ``P_a`` projects
    onto the line through ``a`` and ``Q_a = I - P_a``.  At ``a = o`` the
    formula has the continuous limit ``x -> -x``.
    """

    def __init__(self, a):
        self.a = Center.of(a)

    def P(self, x) -> np.ndarray:
        a = self.a.coords
        if self.a.is_origin:
            raise ValueError("P_a is undefined at the origin")
        x = as_points(x, a.size)
        return np.outer(x @ a / (a @ a), a)

    def Q(self, x) -> np.ndarray:
        return as_points(x, self.a.dim) - self.P(x)

    def __call__(self, x) -> np.ndarray:
        return mobius_apply(self.a, x)


def mobius_apply(a, x) -> np.ndarray:
    """Apply ``phi_a`` to the rows of ``x`` (points of the closed ball).

    Uses ``(1 - s)/|a|^2 = 1/(1 + s)`` so the map is smooth through ``a = o``.
    Single vectors come back as single vectors.
    """
    a = Center.of(a)
    single = np.ndim(x) == 1
    pts = as_points(x, a.dim)
    c, s = a.coords, a.s
    ax = pts @ c
    denom = 1.0 - ax
    # |x| <= 1 and |a| < 1 keep the denominator away from zero
    assert np.all(denom >= 1.0 - np.sqrt(a.norm2) - 1e-12)
    num = c[None, :] - s * pts - (ax / (1.0 + s))[:, None] * c[None, :]
    out = num / denom[:, None]
    return out[0] if single else out


def reflect(a, x) -> np.ndarray:
    """``tau_a x``: the second intersection with S^n of the line through ``x`` and ``a``."""
    a = Center.of(a)
    single = np.ndim(x) == 1
    pts = as_points(x, a.dim)
    c = a.coords
    diff = pts - c[None, :]
    d2 = np.einsum("ij,ij->i", diff, diff)
    out = ((a.norm2 - 1.0) * pts + (2.0 * (1.0 - pts @ c))[:, None] * c[None, :]) / d2[:, None]
    out = normalize(out)
    return out[0] if single else out


def cov_weight_mobius(a, y, exponent: float) -> np.ndarray:
    """Change-of-variables factor ``(s_a / (1 - a.y))^exponent`` for ``x = phi_a y``."""
    a = Center.of(a)
    y = as_points(y, a.dim)
    return (a.s / (1.0 - y @ a.coords)) ** exponent


def cov_weight_reflection(a, x, power: float) -> np.ndarray:
    """``((1 - |a|^2) / |a - x|^2)^power``, the conformal factor of ``tau_a`` raised to ``power``."""
    if power < 0:
        raise ValueError("power must be >= 0")
    a = Center.of(a)
    x = as_points(x, a.dim)
    diff = x - a.coords[None, :]
    return ((1.0 - a.norm2) / np.einsum("ij,ij->i", diff, diff)) ** power
