"""Reconstruction from sections through two distinct centers.

With ``W = W_a W_b`` the data determine ``q = 2[F~_a^{-1} g - W_a F~_b^{-1} h]``
and ``f = W f + q``, so ``f = sum_j W^j q`` away from the chord endpoint
``a*``.  ``(W^m f)(x) = prod_{j<m} rho(T^j x) f(T^m x)`` with the double
reflection ``T = tau_b tau_a`` whose orbits run from ``a*`` to ``b*``.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .funk import SectionField, forward_funk
from .inversion import single_center_inverse
from .moebius import Center, cov_weight_reflection, reflect
from .sphere import (
    GridFunction,
    SphereGrid,
    as_points,
    build_polar_grid,
    geodesic_distance,
    lp_norm,
    normalize,
)


def chord_endpoints(a, b) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Endpoints ``(a*, b*)`` of the chord through ``a`` and ``b`` and the parameters ``t < s``.

    ``a = a* + t (b* - a*)``, ``b = a* + s (b* - a*)``; ``a`` is closer to
    ``a*`` than ``b`` is.
    """
    a, b = Center.of(a), Center.of(b)
    d = b.coords - a.coords
    dd = float(d @ d)
    if dd <= 1e-24:
        raise ValueError("degenerate configuration: the centers coincide")
    # |a + lam d|^2 = 1, roots lam_minus < 0 < 1 < lam_plus
    beta = float(a.coords @ d) / dd
    gamma = (a.norm2 - 1.0) / dd
    root = math.sqrt(beta * beta - gamma)
    lam_plus = -beta + root if beta <= 0 else -gamma / (beta + root)
    lam_minus = gamma / lam_plus
    a_star = normalize(a.coords + lam_minus * d)
    b_star = normalize(a.coords + lam_plus * d)
    span = lam_plus - lam_minus
    return a_star, b_star, -lam_minus / span, (1.0 - lam_minus) / span


class TwoCenterSystem:
    """Two distinct centers ``a, b``, section dimension ``k`` and the chord data."""

    def __init__(self, a, b, k: int = 2):
        self.a = Center.of(a)
        self.b = Center.of(b)
        if self.a.dim != self.b.dim:
            raise ValueError("centers live in different dimensions")
        if not 1 <= k <= self.a.dim - 1:
            raise ValueError("need 1 <= k <= n")
        self.k = int(k)
        self.a_star, self.b_star, self.t, self.s = chord_endpoints(self.a, self.b)

    @property
    def n(self) -> int:
        return self.a.dim - 1

    @property
    def p0(self) -> float:
        """Critical exponent ``n/(k-1)`` of the ``L^p`` convergence."""
        return math.inf if self.k == 1 else self.n / (self.k - 1)

    def T(self, x) -> np.ndarray:
        return reflect(self.b, reflect(self.a, x))

    def T_tilde(self, x) -> np.ndarray:
        return reflect(self.a, reflect(self.b, x))

    def rho(self, x) -> np.ndarray:
        """``rho_a(x) rho_b(tau_a x)``."""
        x = as_points(x, self.a.dim)
        p = self.k - 1
        return cov_weight_reflection(self.a, x, p) * cov_weight_reflection(self.b, reflect(self.a, x), p)

    def rho_tilde(self, x) -> np.ndarray:
        x = as_points(x, self.a.dim)
        p = self.k - 1
        return cov_weight_reflection(self.b, x, p) * cov_weight_reflection(self.a, reflect(self.b, x), p)

    def rho_bstar_closed_form(self) -> float:
        t, s = self.t, self.s
        return (t * (1 - s) / (s * (1 - t))) ** (self.k - 1)

    def rho_astar_closed_form(self) -> float:
        a, b = self.a.coords, self.b.coords
        num = (1 - a @ a) * (1 - b @ b)
        den = np.sum((a - self.a_star) ** 2) * np.sum((b - self.b_star) ** 2)
        return float(num / den) ** (self.k - 1)

    def step(self, x, reverse: bool = False) -> tuple[np.ndarray, np.ndarray]:
        """One step of the orbit: ``(rho(x), T x)``, or the ``W_b W_a`` version."""
        if reverse:
            return self.rho_tilde(x), self.T_tilde(x)
        return self.rho(x), self.T(x)


def T_apply(sys: TwoCenterSystem, x) -> np.ndarray:
    return sys.T(x)


def rho(sys: TwoCenterSystem, x) -> np.ndarray:
    return sys.rho(x)


def iterate_W(sys: TwoCenterSystem, f, m: int, x, reverse: bool = False) -> np.ndarray:
    """``(W^m f)(x)`` by a running product of ``rho`` along the orbit of ``x``."""
    if m < 0:
        raise ValueError("m must be >= 0")
    y = as_points(x, sys.a.dim)
    omega = np.ones(y.shape[0])
    for _ in range(m):
        r, y = sys.step(y, reverse)
        omega = omega * r
    return omega * f(y)


@dataclass
class ConvergenceReport:
    """Per-iteration diagnostics; ``records`` is a list of dicts keyed by column name."""

    columns: list
    records: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, **row) -> None:
        if self.records and row["m"] <= self.records[-1]["m"]:
            raise ValueError("m must increase strictly")
        self.records.append({c: row.get(c, math.nan) for c in self.columns})

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.records], dtype=float)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.columns)
            for r in self.records:
                w.writerow([str(r["m"])] + [f"{r[c]:.17g}" for c in self.columns[1:]])

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(_jsonable(self.meta), fh, indent=2, sort_keys=True)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def fit_log_rate(m: np.ndarray, values: np.ndarray, floor: float = 1e-280) -> float:
    """Geometric rate ``exp(slope)`` of ``log|values|`` against ``m`` by least squares."""
    v = np.abs(np.asarray(values, dtype=float))
    keep = (v > floor) & np.isfinite(v)
    if keep.sum() < 2:
        return math.nan
    slope = np.polyfit(np.asarray(m, dtype=float)[keep], np.log(v[keep]), 1)[0]
    return float(math.exp(slope))


def _cap_selection(nodes, sys: TwoCenterSystem, delta: float):
    da = geodesic_distance(nodes, sys.a_star)
    db = geodesic_distance(nodes, sys.b_star)
    use_alt = (da < delta) & ~((db < delta) & (db < da))
    return da, db, use_alt


def _make_series(q, r, sys: TwoCenterSystem, terms: int, delta: float):
    """Off-grid evaluator: primary series except near ``a*`` (nearest-cap rule)."""
    def f_rec(x):
        x = as_points(x, sys.a.dim)
        _, _, use_alt = _cap_selection(x, sys, delta)
        out = np.empty(x.shape[0])
        for mask, src, rev in ((~use_alt, q, False), (use_alt, r, True)):
            if mask.any():
                y = x[mask]
                omega = np.ones(y.shape[0])
                acc = np.zeros(y.shape[0])
                for _ in range(terms):
                    acc += omega * src(y)
                    w, y = sys.step(y, rev)
                    omega = omega * w
                out[mask] = acc
        return out
    return f_rec


def _series_sources(g: SectionField, h: SectionField, sys: TwoCenterSystem, degree_max: int):
    """``q = 2[F~_a^{-1} g - W_a F~_b^{-1} h]`` and ``r = 2[F~_b^{-1} h - W_b F~_a^{-1} g]``."""
    k = sys.k
    fa = single_center_inverse(g, sys.a, "harmonic", degree_max, k)
    fb = single_center_inverse(h, sys.b, "harmonic", degree_max, k)

    def q(x):
        return 2.0 * fa(x) - 2.0 * cov_weight_reflection(sys.a, x, k - 1) * fb(reflect(sys.a, x))

    def r(x):
        return 2.0 * fb(x) - 2.0 * cov_weight_reflection(sys.b, x, k - 1) * fa(reflect(sys.b, x))

    return q, r


def series_reconstructor(g: SectionField, h: SectionField, sys: TwoCenterSystem, terms: int,
                         delta: float = 0.2, degree_max: int = 24) -> Callable:
    """The two-series reconstruction with a fixed number of terms, as a callable on points."""
    if sys.k < 2:
        raise ValueError("use reconstruct_two_center_k1 for k = 1")
    q, r = _series_sources(g, h, sys, degree_max)
    return _make_series(q, r, sys, terms, delta)


def reconstruct_two_center(
    g: SectionField,
    h: SectionField,
    sys: TwoCenterSystem,
    m_max: int,
    grid: SphereGrid,
    delta: float = 0.2,
    degree_max: int = 24,
    truth: Optional[Callable] = None,
    p_list: Sequence[float] = (1.0, 2.0),
    tol: float = 1e-10,
    residual_planes: int = 64,
    section_resolution: int = 64,
) -> tuple[GridFunction, ConvergenceReport]:
    """Reconstruct ``f`` from ``g = F_a f`` and ``h = F_b f`` (``k > 1``).

    Nodes within ``delta`` of ``a*`` take the alternative series
    ``sum_j (W_b W_a)^j r`` with ``r = 2[F~_b^{-1} h - W_b F~_a^{-1} g]``;
    all others take the primary one.  Summation stops after ``m_max`` terms
    or once the largest increment falls below ``tol``.  The report tracks the
    increments (and the error when ``truth`` is given), the partial sums at
    the chord endpoints, the disagreement of the two series where both
    converge, and how well the result reproduces ``g`` and ``h``.
    """
    if sys.k < 2:
        raise ValueError("use reconstruct_two_center_k1 for k = 1")
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    q, r = _series_sources(g, h, sys, degree_max)
    nodes = grid.nodes
    da, db, use_alt = _cap_selection(nodes, sys, delta)
    overlap = (da >= delta) & (db >= delta)
    prim_idx = np.flatnonzero(~use_alt | overlap)
    alt_idx = np.flatnonzero(use_alt | overlap)
    k_delta_prim = da[prim_idx] >= delta

    cols = ["m", "sup_increment", "sup_error_Kdelta"] + [f"L{p:g}_error" for p in p_list] + [
        "val_at_astar", "val_at_bstar"]
    report = ConvergenceReport(cols)
    ends = np.vstack([sys.a_star, sys.b_star])

    state = {}
    for name, idx, src, rev in (("prim", prim_idx, q, False), ("alt", alt_idx, r, True)):
        y = nodes[idx]
        state[name] = [y, np.ones(len(idx)), np.zeros(len(idx)), src, rev]
    end_state = [ends, np.ones(2), np.zeros(2)]

    values = np.empty(grid.size)
    terms = 0
    for j in range(m_max):
        incs = {}
        for name, st in state.items():
            y, omega, acc, src, rev = st
            inc = omega * src(y)
            st[2] = acc + inc
            w, st[0] = sys.step(y, rev)
            st[1] = omega * w
            incs[name] = inc
        y, omega, acc = end_state
        end_state[2] = acc + omega * q(y)
        w, end_state[0] = sys.step(y)
        end_state[1] = omega * w
        terms = j + 1

        values[prim_idx] = state["prim"][2]
        values[np.flatnonzero(use_alt)] = state["alt"][2][np.isin(alt_idx, np.flatnonzero(use_alt))]
        sup_inc = max(
            float(np.max(np.abs(incs["prim"][k_delta_prim]), initial=0.0)),
            float(np.max(np.abs(incs["alt"]), initial=0.0)),
        )
        row = dict(m=terms, sup_increment=sup_inc, val_at_astar=end_state[2][0], val_at_bstar=end_state[2][1])
        if truth is not None:
            err = values - truth(nodes)
            row["sup_error_Kdelta"] = float(np.max(np.abs(err[da >= delta])))
            egf = GridFunction(grid, err)
            for p in p_list:
                row[f"L{p:g}_error"] = lp_norm(egf, p)
        report.add(**row)
        if sup_inc < tol:
            break

    prim_on_overlap = state["prim"][2][np.isin(prim_idx, np.flatnonzero(overlap))]
    alt_on_overlap = state["alt"][2][np.isin(alt_idx, np.flatnonzero(overlap))]
    f_rec = _make_series(q, r, sys, terms, delta)
    out = GridFunction(grid, values, func=f_rec)

    meta = {
        "terms": terms,
        "delta": delta,
        "rho_bstar": sys.rho_bstar_closed_form(),
        "series_overlap_discrepancy": float(np.max(np.abs(prim_on_overlap - alt_on_overlap), initial=0.0)),
    }
    if residual_planes > 0:
        for label, data in (("a", g), ("b", h)):
            idx = np.unique(np.linspace(0, len(data) - 1, min(residual_planes, len(data))).astype(int))
            sub = data.planes[idx]
            pred = forward_funk(f_rec, sub, section_resolution).values
            ref = data.values[idx]
            res = float(np.max(np.abs(pred - ref)) / max(np.max(np.abs(ref)), 1e-300))
            meta[f"residual_{label}"] = res
        meta["inconsistent_data"] = bool(max(meta["residual_a"], meta["residual_b"]) > 1e-3)
    report.meta.update(meta)
    return out, report


def reconstruct_two_center_k1(
    g_line: Callable,
    h_line: Callable,
    sys: TwoCenterSystem,
    m_max: int,
    grid: SphereGrid,
    endpoint_tol: float = 1e-9,
) -> GridFunction:
    """Symmetrized reconstruction for lines (``k = 1``).

    ``g_line(x)`` is the datum on the line through ``a`` and ``x`` (that is,
    ``f(x) + f(tau_a x)``), likewise ``h_line`` for ``b``.  With
    ``q(x) = g_line(x) - h_line(tau_a x)`` and
    ``r(x) = h_line(x) - g_line(tau_b x)``,
    ``2 f(x) = sum_{j<m} q(T^j x) + sum_{j<m} r(T~^j x) + g_line(a*)``.
    Nodes within ``endpoint_tol`` of ``a*`` or ``b*`` take the value of the
    nearest other node.
    """
    if sys.k != 1:
        raise ValueError("the symmetrized line formula needs k = 1")
    a, b = sys.a, sys.b

    def q(x):
        return g_line(x) - h_line(reflect(a, x))

    def r(x):
        return h_line(x) - g_line(reflect(b, x))

    chord_value = float(np.asarray(g_line(sys.a_star[None, :])).ravel()[0])

    def f_rec(x):
        x = as_points(x, sys.a.dim)
        total = np.full(x.shape[0], chord_value)
        y, z = x, x
        for _ in range(m_max):
            total += q(y) + r(z)
            y, z = sys.T(y), sys.T_tilde(z)
        return 0.5 * total

    values = f_rec(grid.nodes)
    near = (geodesic_distance(grid.nodes, sys.a_star) < endpoint_tol) | (
        geodesic_distance(grid.nodes, sys.b_star) < endpoint_tol)
    if near.any() and not near.all():
        far = np.flatnonzero(~near)
        for i in np.flatnonzero(near):
            values[i] = values[far[np.argmax(grid.nodes[far] @ grid.nodes[i])]]
    return GridFunction(grid, values, func=f_rec)


def convergence_diagnostics(
    sys: TwoCenterSystem,
    f: Callable,
    m_max: int,
    delta: float,
    p_list: Sequence[float],
    grid: SphereGrid,
    lp_grid: Optional[SphereGrid] = None,
) -> ConvergenceReport:
    """Remainders ``W^m f`` of the series for a known ``f`` (``k > 1``).

    ``sup_Kdelta`` is taken on ``grid`` outside the cap ``B(a*, delta)``; the
    ``L^p`` norms use ``lp_grid``, by default a polar grid graded toward
    ``a*`` so that the mass concentrating there stays resolved.
    """
    if sys.k < 2:
        raise ValueError("diagnostics need k > 1")
    if lp_grid is None:
        lp_grid = build_polar_grid(sys.a_star, sys.n)
    cols = ["m", "sup_Kdelta"] + [f"L{p:g}" for p in p_list] + ["val_at_astar", "val_at_bstar"]
    report = ConvergenceReport(cols)
    k_mask = geodesic_distance(grid.nodes, sys.a_star) >= delta
    if not k_mask.any():
        raise ValueError("K_delta contains no grid node")

    pts = [grid.nodes[k_mask], lp_grid.nodes, np.vstack([sys.a_star, sys.b_star])]
    omegas = [np.ones(p.shape[0]) for p in pts]
    for m in range(m_max + 1):
        vals = [w * f(y) for w, y in zip(omegas, pts)]
        row = dict(m=m, sup_Kdelta=float(np.max(np.abs(vals[0]))),
                   val_at_astar=float(vals[2][0]), val_at_bstar=float(vals[2][1]))
        lp_f = GridFunction(lp_grid, vals[1])
        for p in p_list:
            row[f"L{p:g}"] = lp_norm(lp_f, p)
        report.add(**row)
        if m < m_max:
            for i, y in enumerate(pts):
                w, pts[i] = sys.step(y)
                omegas[i] = omegas[i] * w

    m = report.column("m")
    tail = m >= m_max // 2
    astar = report.column("val_at_astar")
    report.meta.update({
        "n": sys.n,
        "k": sys.k,
        "p0": sys.p0,
        "delta": delta,
        "t": sys.t,
        "s": sys.s,
        "rho_bstar_predicted": sys.rho_bstar_closed_form(),
        "rho_bstar_observed": float(sys.rho(sys.b_star)[0]),
        "rho_astar_predicted": sys.rho_astar_closed_form(),
        "sup_Kdelta_rate": fit_log_rate(m[tail], report.column("sup_Kdelta")[tail]),
        "astar_growth_rate": fit_log_rate(m, astar),
        "lp_rates": {f"L{p:g}": fit_log_rate(m[tail], report.column(f"L{p:g}")[tail]) for p in p_list},
    })
    return report


def attractor_escape_time(
    sys: TwoCenterSystem,
    grid: SphereGrid,
    delta: float,
    eps: float,
    m_cap: int = 10_000,
    hold: int = 20,
) -> int:
    """Smallest ``m`` with ``T^j K_delta`` inside ``B(b*, eps)`` for all sampled ``j in [m, m + hold]``."""
    if delta <= 0 or eps <= 0:
        raise ValueError("delta and eps must be positive")
    y = grid.nodes[geodesic_distance(grid.nodes, sys.a_star) >= delta]
    if y.shape[0] == 0:
        raise ValueError("K_delta contains no grid node")
    inside = []
    for m in range(m_cap + hold + 1):
        inside.append(bool(np.all(geodesic_distance(y, sys.b_star) < eps)))
        if m >= hold and all(inside[m - hold:m + 1]):
            return m - hold
        y = sys.T(y)
    raise RuntimeError(f"K_delta did not settle in B(b*, {eps}) within {m_cap} steps")


def _odd_projection_words(iterations: int) -> dict:
    """``(P_b^- P_a^-)^N`` expanded over reduced words in ``W_a, W_b``.

    Words alternate letters, so a word is keyed by ``(first letter, length)``;
    the empty word is ``(None, 0)``.
    """
    other = {"a": "b", "b": "a"}

    def project(letter, elem):
        out = {key: 0.5 * c for key, c in elem.items()}
        for (first, length), c in elem.items():
            if first == letter:
                key = (None, 0) if length == 1 else (other[letter], length - 1)
            else:
                key = (letter, length + 1)
            out[key] = out.get(key, 0.0) - 0.5 * c
        return out

    elem = {(None, 0): 1.0}
    for _ in range(iterations):
        elem = project("b", project("a", elem))
    return elem


def alternating_odd_projection(f: Callable, sys: TwoCenterSystem, iterations: int, x) -> np.ndarray:
    """Values of ``(P_b^- P_a^-)^N f`` at ``x``, with ``P_c^- = (I - W_c)/2``.

    Words sharing a first letter are evaluated along one orbit of alternating
    reflections, so the cost is linear in the word length.
    """
    x = as_points(x, sys.a.dim)
    words = _odd_projection_words(iterations)
    out = words.get((None, 0), 0.0) * f(x)
    centers = {"a": sys.a, "b": sys.b}
    longest = max(length for _, length in words)
    for first in ("a", "b"):
        y = x
        omega = np.ones(x.shape[0])
        letter = first
        for length in range(1, longest + 1):
            c = centers[letter]
            omega = omega * cov_weight_reflection(c, y, sys.k - 1)
            y = reflect(c, y)
            coeff = words.get((first, length), 0.0)
            if coeff != 0.0:
                out = out + coeff * omega * f(y)
            letter = "b" if letter == "a" else "a"
    return out
