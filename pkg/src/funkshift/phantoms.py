"""Analytic test functions on the sphere, callable at arbitrary points."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .parity import even_part, odd_part
from .sphere import as_points, sphere_area


@dataclass(frozen=True, eq=False)
class Phantom:
    """A named function on ``S^n`` with a smoothness tag and, when known, its integral."""

    name: str
    func: Callable[[np.ndarray], np.ndarray]
    smoothness: str = "analytic"
    integral: Optional[float] = None
    params: dict = field(default_factory=dict)

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.func(x), dtype=float)


def _constant(p, dim):
    c = float(p.get("c", 1.0))
    return Phantom("constant", lambda x: np.full(as_points(x, dim).shape[0], c),
                   integral=c * sphere_area(dim - 1), params={"c": c})


def _coordinate(p, dim):
    i = int(p.get("index", dim - 1))
    if not 0 <= i < dim:
        raise ValueError("coordinate index out of range")
    return Phantom("coordinate", lambda x: as_points(x, dim)[:, i], integral=0.0, params={"index": i})


def _harmonic(p, dim):
    if dim != 3:
        raise ValueError("harmonic phantoms are defined on S^2")
    from .inversion import real_sph_harm

    l, m = int(p.get("l", 2)), int(p.get("m", 0))
    if not abs(m) <= l:
        raise ValueError("need |m| <= l")
    ls, ms = np.array([l]), np.array([m])
    return Phantom("harmonic", lambda x: real_sph_harm(ls, ms, x)[:, 0],
                   integral=math.sqrt(4 * math.pi) if l == 0 else 0.0, params={"l": l, "m": m})


def _gaussian_bump(p, dim):
    c = np.asarray(p.get("center", [0.0] * (dim - 1) + [1.0]), dtype=float)
    c = c / np.linalg.norm(c)
    width = float(p.get("width", 0.5))
    if width <= 0:
        raise ValueError("width must be positive")
    kappa = 1.0 / width ** 2
    integral = None
    if dim == 3:
        integral = 2 * math.pi * (1 - math.exp(-2 * kappa)) / kappa
    return Phantom("gaussian_bump", lambda x: np.exp(kappa * (as_points(x, dim) @ c - 1.0)),
                   integral=integral, params={"center": c.tolist(), "width": width})


def _polynomial(p, dim):
    # x_3 + 0.5 x_1 x_2 on S^2 by default; generic (neither even nor odd under any W_a)
    coef = p.get("coefficients", {"2": 1.0, "0,1": 0.5})
    terms = [(tuple(int(i) for i in key.split(",")), float(v)) for key, v in coef.items()]

    def f(x):
        x = as_points(x, dim)
        out = np.zeros(x.shape[0])
        for idx, v in terms:
            out += v * np.prod(x[:, list(idx)], axis=1)
        return out
    return Phantom("polynomial", f, params={"coefficients": dict(coef)})


def _exp_linear(p, dim):
    w = np.asarray(p.get("w", [0.3, -0.2] + [0.1] * (dim - 2)), dtype=float)
    r = float(np.linalg.norm(w))
    integral = 4 * math.pi * math.sinh(r) / r if dim == 3 and r > 0 else None
    return Phantom("exp_linear", lambda x: np.exp(as_points(x, dim) @ w), integral=integral,
                   params={"w": w.tolist()})


def _projected(kind, p, dim):
    base = make_phantom(p.get("base", {"kind": "polynomial"}), dim=dim)
    a = np.asarray(p.get("a", [0.3, 0.2, 0.1]), dtype=float)
    k = int(p.get("k", 2))
    proj = odd_part if kind == "a_odd" else even_part
    return Phantom(kind, proj(base, a, k), smoothness=base.smoothness,
                   params={"base": base.name, "a": a.tolist(), "k": k})


_BUILDERS = {
    "constant": _constant,
    "coordinate": _coordinate,
    "harmonic": _harmonic,
    "gaussian_bump": _gaussian_bump,
    "polynomial": _polynomial,
    "exp_linear": _exp_linear,
}

PHANTOM_KINDS = {
    "constant": "f = c (param c)",
    "coordinate": "f = x_i (param index, 0-based)",
    "harmonic": "real orthonormal spherical harmonic Y_lm on S^2 (params l, m)",
    "gaussian_bump": "exp((x.c - 1)/width^2) (params center, width)",
    "polynomial": "sum of monomials (param coefficients: {\"i,j\": value})",
    "exp_linear": "exp(w.x) (param w)",
    "a_odd": "(base - W_a base)/2 (params base, a, k)",
    "a_even": "(base + W_a base)/2 (params base, a, k)",
}


def make_phantom(kind, params: Optional[dict] = None, dim: int = 3) -> Phantom:
    """Build a phantom from a kind name and parameters, or from ``{"kind": ..., **params}``."""
    if isinstance(kind, dict):
        params = {k: v for k, v in kind.items() if k != "kind"}
        kind = kind.get("kind")
    params = dict(params or {})
    if kind in ("a_odd", "a_even"):
        return _projected(kind, params, dim)
    if kind not in _BUILDERS:
        raise ValueError(f"unknown phantom kind {kind!r}; known: {', '.join(PHANTOM_KINDS)}")
    return _BUILDERS[kind](params, dim)


def list_phantoms() -> dict:
    return dict(PHANTOM_KINDS)
