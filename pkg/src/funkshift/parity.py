"""The weighted reflection ``W_a`` and the a-even / a-odd decomposition.

``(W_a f)(x) = rho_a(x) f(tau_a x)`` with
``rho_a(x) = ((1 - |a|^2) / |a - x|^2)^{k-1}``.  ``W_a`` is an involution;
``f`` is a-even (a-odd) exactly when ``W_a f = f`` (``= -f``), and the a-odd
functions form the kernel of ``F_a`` for ``k > 1``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .moebius import Center, cov_weight_reflection, reflect
from .sphere import as_points


@dataclass(frozen=True, eq=False)
class WeightedReflection:
    a: Center
    k: int

    def __post_init__(self):
        object.__setattr__(self, "a", Center.of(self.a))
        if not 1 <= self.k <= self.a.dim - 1:
            raise ValueError("need 1 <= k <= n")

    def rho(self, x) -> np.ndarray:
        return cov_weight_reflection(self.a, x, self.k - 1)

    def __call__(self, f):
        """``W_a f`` as a callable."""
        return lambda x: apply_W(self, f, x)


def apply_W(w: WeightedReflection, f, x) -> np.ndarray:
    x = as_points(x, w.a.dim)
    return w.rho(x) * f(reflect(w.a, x))


def even_part(f, a, k: int = 2):
    """``f_a^+ = (f + W_a f) / 2`` as a callable."""
    w = WeightedReflection(a, k)
    return lambda x: 0.5 * (f(x) + apply_W(w, f, x))


def odd_part(f, a, k: int = 2):
    """``f_a^- = (f - W_a f) / 2`` as a callable."""
    w = WeightedReflection(a, k)
    return lambda x: 0.5 * (f(x) - apply_W(w, f, x))
