"""scikit-learn style wrappers: fit on transform data, predict function values at points.

``X`` holds one plane per row as the flattened frame (for ``n = 2, k = 2``
simply the unit normal), ``y`` the transform values on those planes.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils import check_array, check_X_y
from sklearn.utils.validation import check_is_fitted

from ._validation import check_center, check_positive_int, check_sphere_points
from .funk import SectionField
from .inversion import single_center_inverse
from .planes import PlaneFamily
from .sphere import build_sphere_grid
from .two_center import TwoCenterSystem, reconstruct_two_center, series_reconstructor


def _field(center, X, y, k: int) -> SectionField:
    d = center.shape[0]
    frames = np.asarray(X, dtype=float).reshape(X.shape[0], d, d - k)
    return SectionField(PlaneFamily(center, frames), y)


class SingleCenterFunkInverter(BaseEstimator):
    """Recover the a-even part of ``f`` from ``F_a f`` on S^2.

    Parameters
    ----------
    center : array-like of shape (3,)
        Interior point ``a`` shared by all planes.
    degree_max : int
        Highest spherical-harmonic degree of the fit.
    k : int
        Section dimension; only ``k = 2`` is supported by the harmonic route.
    """

    def __init__(self, center=(0.0, 0.0, 0.0), degree_max: int = 24, k: int = 2):
        self.center = center
        self.degree_max = degree_max
        self.k = k

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        a = check_center(self.center, 3)
        check_positive_int(self.degree_max, "degree_max", 0)
        if self.k != 2:
            raise ValueError("the harmonic route needs n = 2, k = 2")
        self.field_ = _field(a, X, y, self.k)
        self.inverse_ = single_center_inverse(self.field_, a, "harmonic", self.degree_max, self.k)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "inverse_")
        return self.inverse_(check_sphere_points(X, 3))


class TwoCenterReconstructor(BaseEstimator):
    """Reconstruct ``f`` from sections through two centers (``n = 2, k = 2``).

    ``fit`` takes the planes of both families stacked in ``X`` with
    ``center_labels`` (0 for ``center_a``, 1 for ``center_b``); the number of
    series terms is fixed during ``fit`` on a coarse grid and stored in
    ``n_terms_``, together with the convergence report ``report_``.
    """

    def __init__(self, center_a=(0.25, 0.0, 0.0), center_b=(0.5, 0.0, 0.0), k: int = 2,
                 m_max: int = 40, delta: float = 0.2, degree_max: int = 24,
                 grid_resolution: int = 16, tol: float = 1e-10):
        self.center_a = center_a
        self.center_b = center_b
        self.k = k
        self.m_max = m_max
        self.delta = delta
        self.degree_max = degree_max
        self.grid_resolution = grid_resolution
        self.tol = tol

    def fit(self, X, y, center_labels=None):
        X, y = check_X_y(X, y, y_numeric=True)
        if center_labels is None:
            raise ValueError("center_labels is required")
        labels = check_array(np.asarray(center_labels).reshape(-1, 1), dtype=int).ravel()
        if labels.shape[0] != X.shape[0] or not set(np.unique(labels)) <= {0, 1}:
            raise ValueError("center_labels must be 0/1 and match X")
        if self.k != 2:
            raise ValueError("the harmonic route needs n = 2, k = 2")
        a, b = check_center(self.center_a, 3), check_center(self.center_b, 3)
        check_positive_int(self.m_max, "m_max")
        self.system_ = TwoCenterSystem(a, b, self.k)
        g = _field(a, X[labels == 0], y[labels == 0], self.k)
        h = _field(b, X[labels == 1], y[labels == 1], self.k)
        grid = build_sphere_grid(2, self.grid_resolution)
        _, self.report_ = reconstruct_two_center(g, h, self.system_, self.m_max, grid, self.delta,
                                                 self.degree_max, tol=self.tol, residual_planes=0)
        self.n_terms_ = self.report_.meta["terms"]
        self.reconstruction_ = series_reconstructor(g, h, self.system_, self.n_terms_, self.delta,
                                                    self.degree_max)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "reconstruction_")
        return self.reconstruction_(check_sphere_points(X, 3))
