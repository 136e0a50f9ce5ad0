"""Exit criteria of the library, each at its stated tolerance and time budget."""
import json
import math
import time

import numpy as np
import pytest

from funkshift.cli import main
from funkshift.funk import factorized_funk, forward_funk, funk_data, point_pair_transform
from funkshift.inversion import fit_funk_o_harmonic, invert_funk_o_meanvalue, single_center_inverse
from funkshift.moebius import cov_weight_mobius, cov_weight_reflection, mobius_apply, reflect
from funkshift.parity import even_part
from funkshift.phantoms import make_phantom
from funkshift.planes import sample_plane_family
from funkshift.sphere import GridFunction, build_sphere_grid, geodesic_distance, sup_norm_outside_cap
from funkshift.two_center import (
    TwoCenterSystem,
    alternating_odd_projection,
    convergence_diagnostics,
    fit_log_rate,
    iterate_W,
    reconstruct_two_center,
    reconstruct_two_center_k1,
)

from conftest import SEED, random_ball, random_sphere, smooth_f

pytestmark = pytest.mark.acceptance

AXIS = ((0.25, 0.0, 0.0), (0.5, 0.0, 0.0))


def test_criterion_01_mobius_identities(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(SEED)
    x = random_sphere(rng, 1000)
    centers = random_ball(rng, 1000, radius=0.8)
    interior = random_ball(rng, 1000, radius=0.95)
    worst = 0.0
    for a, xi, zi in zip(centers, x, interior):
        pa = mobius_apply(a, xi)
        worst = max(worst, np.max(np.abs(mobius_apply(a, pa) - xi)))
        worst = max(worst, np.max(np.abs(reflect(a, reflect(a, xi)) - xi)))
        worst = max(worst, np.max(np.abs(mobius_apply(a, reflect(a, xi)) + pa)))
        ratio = (1 - a @ pa) / (1 + a @ pa)
        worst = max(worst, abs(ratio - cov_weight_reflection(a, xi, 1)[0]) / ratio)
        pz = mobius_apply(a, zi)
        lhs = 1 - pz @ pz
        rhs = (1 - a @ a) * (1 - zi @ zi) / (1 - zi @ a) ** 2
        worst = max(worst, abs(lhs - rhs))
    pointwise_ok = worst <= 1e-12

    grid = build_sphere_grid(2, 64)
    f = lambda y: np.exp(0.3 * y[:, 0] - 0.2 * y[:, 1]) + y[:, 2] ** 2
    quad = 0.0
    for a in random_ball(rng, 20, radius=0.6):
        base = grid.integrate(f(grid.nodes))
        lem22 = grid.integrate(cov_weight_mobius(a, grid.nodes, 2) * f(mobius_apply(a, grid.nodes)))
        lem23 = grid.integrate(f(grid.nodes) * cov_weight_reflection(a, grid.nodes, 2))
        quad = max(quad, abs(lem22 - base) / base,
                   abs(grid.integrate(f(reflect(a, grid.nodes))) - lem23) / lem23)
    elapsed = time.perf_counter() - start
    ok = pointwise_ok and quad <= 1e-10 and elapsed < 10
    criterion(1, ok, f"pointwise {worst:.2e} (<=1e-12), lemmas {quad:.2e} (<=1e-10), {elapsed:.1f}s (<10s)")
    assert ok


def test_criterion_02_factorization(criterion):
    start = time.perf_counter()
    phantoms = [
        make_phantom("exp_linear"),
        make_phantom("gaussian_bump", {"center": [0.0, 0.6, 0.8], "width": 0.7}),
        make_phantom("polynomial"),
        make_phantom("harmonic", {"l": 3, "m": 1}),
        make_phantom("a_even", {"base": {"kind": "exp_linear"}, "a": [0.2, 0.1, 0.0]}),
    ]
    centers = [[0.0, 0.0, 0.0], [0.7, 0.0, 0.0], [0.0, 0.4, -0.5], [0.3, 0.3, 0.3], [-0.2, 0.5, 0.4]]
    worst = 0.0
    for c in centers:
        planes = sample_plane_family(c, 2, 2, 100)
        for f in phantoms:
            direct = forward_funk(f, planes, 64).values
            fact = factorized_funk(f, c, planes, 64).values
            worst = max(worst, np.max(np.abs(direct - fact)) / np.max(np.abs(direct)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed < 120
    criterion(2, ok, f"max relative deviation {worst:.2e} (<=1e-6), {elapsed:.1f}s (<120s)")
    assert ok


def test_criterion_03_kernel_and_single_center(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(SEED + 3)
    x = random_sphere(rng, 1000)
    kernel, inv = 0.0, 0.0
    for a in ([0.4, 0.0, 0.0], [0.1, -0.3, 0.5], [-0.5, 0.2, 0.1]):
        planes = sample_plane_family(a, 2, 2, 100)
        for base in ({"kind": "polynomial"}, {"kind": "exp_linear"}):
            f = make_phantom("a_odd", {"base": base, "a": a, "k": 2})
            kernel = max(kernel, np.max(np.abs(forward_funk(f, planes).values)))
        g = forward_funk(smooth_f, sample_plane_family(a, 2, 2, 1000))
        rec = single_center_inverse(g, a, "harmonic", 24)
        inv = max(inv, np.max(np.abs(rec(x) - even_part(smooth_f, a, 2)(x))))
    elapsed = time.perf_counter() - start
    ok = kernel <= 1e-8 and inv <= 1e-5 and elapsed < 120
    criterion(3, ok, f"|F_a f_odd| {kernel:.2e} (<=1e-8), inversion {inv:.2e} (<=1e-5), {elapsed:.1f}s (<120s)")
    assert ok


def test_criterion_04_mean_value_route(criterion):
    start = time.perf_counter()
    w = np.array([0.4, -0.3, 0.5])
    c = np.array([0.0, 0.6, 0.8])
    phantoms = [
        lambda y: y[:, 2] ** 2 + 0.3 * y[:, 0] * y[:, 1],
        lambda y: np.cosh(y @ w),
        lambda y: np.exp(2.0 * (y @ c - 1)) + np.exp(2.0 * (-y @ c - 1)),
    ]
    pts = random_sphere(np.random.default_rng(SEED + 4), 12)
    central = sample_plane_family(np.zeros(3), 2, 2, 1000)
    worst = 0.0
    for f in phantoms:
        harmonic = fit_funk_o_harmonic(forward_funk(f, central), 24)(pts)
        meanvalue = invert_funk_o_meanvalue(funk_data(f), pts)
        worst = max(worst, np.max(np.abs(harmonic - meanvalue)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-3 and elapsed < 60
    criterion(4, ok, f"route disagreement {worst:.2e} (<=1e-3), {elapsed:.1f}s (<60s)")
    assert ok


def test_criterion_05_closed_forms(criterion):
    rng = np.random.default_rng(SEED + 5)
    closed = 0.0
    for dim, k in ((3, 2), (4, 2), (4, 3)):
        for a, b in zip(random_ball(rng, 34, dim), random_ball(rng, 34, dim)):
            sys = TwoCenterSystem(a, b, k)
            closed = max(closed, abs(sys.rho(sys.b_star)[0] / sys.rho_bstar_closed_form() - 1))
    sym = TwoCenterSystem([-0.5, 0, 0], [0.5, 0, 0], 2)
    nine = abs(sym.rho(sym.a_star)[0] - 9.0)
    f = lambda y: np.exp(y[:, 1] - y[:, 0] - 1.0)
    m = np.arange(13)
    growth = np.array([iterate_W(sym, f, int(j), sym.a_star)[0] for j in m])
    slope_err = abs(math.log(fit_log_rate(m, growth)) - math.log(9.0))
    ok = closed <= 1e-12 and nine <= 1e-12 and slope_err <= 1e-6
    criterion(5, ok, f"rho(b*) closed form {closed:.2e}, rho(a*)-9 {nine:.2e} (<=1e-12), "
                     f"log-slope error {slope_err:.2e} (<=1e-6)")
    assert ok


def test_criterion_06_two_center_reconstruction(criterion):
    start = time.perf_counter()
    sys = TwoCenterSystem(*AXIS, k=2)
    grid = build_sphere_grid(2, 48)
    g = forward_funk(smooth_f, sample_plane_family(sys.a, 2, 2, 1000))
    h = forward_funk(smooth_f, sample_plane_family(sys.b, 2, 2, 1000))
    rec, report = reconstruct_two_center(g, h, sys, 40, grid, 0.2, truth=smooth_f)
    err = sup_norm_outside_cap(GridFunction(grid, rec.values - smooth_f(grid.nodes)), sys.a_star, 0.2)
    m = report.column("m")
    tail = m >= 10
    rate = fit_log_rate(m[tail], report.column("sup_error_Kdelta")[tail])
    limit = sys.rho_bstar_closed_form() + 0.05
    elapsed = time.perf_counter() - start
    ok = err <= 1e-4 and rate <= limit and elapsed < 300
    criterion(6, ok, f"sup error on K_0.2 {err:.2e} (<=1e-4), rate {rate:.4f} (<={limit:.4f}), "
                     f"{elapsed:.1f}s (<300s)")
    assert ok


def test_criterion_07_lp_threshold(criterion):
    start = time.perf_counter()
    sys = TwoCenterSystem(*AXIS, k=2)
    rep = convergence_diagnostics(sys, smooth_f, 60, 0.2, [1.0, 2.0, 4.0], build_sphere_grid(2, 32))
    m = rep.column("m")
    L1, L2, L4 = rep.column("L1"), rep.column("L2"), rep.column("L4")
    iso = np.max(np.abs(L2[m <= 30] / L2[0] - 1))
    l1_ok = np.any(L1 < 0.01 * L1[0])
    l4_min = np.min(L4 / L4[0])
    elapsed = time.perf_counter() - start
    ok = rep.meta["p0"] == 2.0 and iso <= 1e-5 and l1_ok and l4_min >= 0.5 and elapsed < 120
    criterion(7, ok, f"L2 drift {iso:.2e} (<=1e-5), min L1 ratio {np.min(L1 / L1[0]):.2e} (<0.01), "
                     f"min L4 ratio {l4_min:.2f} (>=0.5), {elapsed:.1f}s (<120s)")
    assert ok


def test_criterion_08_uniqueness_witness(criterion):
    start = time.perf_counter()
    sys = TwoCenterSystem(*AXIS, k=2)
    grid = build_sphere_grid(2, 48)
    nodes = grid.nodes[geodesic_distance(grid.nodes, sys.a_star) >= 0.2]
    v = alternating_odd_projection(smooth_f, sys, 50, nodes)
    sup = float(np.max(np.abs(v)))
    elapsed = time.perf_counter() - start
    ok = sup <= 1e-3 and elapsed < 60
    criterion(8, ok, f"sup on K_0.2 after 50 projections {sup:.3e} (<=1e-3), {elapsed:.1f}s (<60s)")
    assert ok


def test_criterion_09_lines(criterion):
    start = time.perf_counter()
    grid = build_sphere_grid(2, 32)
    phantoms = [
        make_phantom("constant", {"c": 1.7}),
        make_phantom("coordinate", {"index": 2}),
        make_phantom("exp_linear"),
        make_phantom("harmonic", {"l": 3, "m": 1}),
        smooth_f,
    ]
    worst = 0.0
    for centers in (AXIS, ((0.1, 0.3, -0.2), (-0.4, 0.1, 0.2))):
        sys = TwoCenterSystem(*centers, k=1)
        far = (geodesic_distance(grid.nodes, sys.a_star) >= 0.2) & (
            geodesic_distance(grid.nodes, sys.b_star) >= 0.2)
        for f in phantoms:
            rec = reconstruct_two_center_k1(lambda y: point_pair_transform(f, sys.a, y),
                                            lambda y: point_pair_transform(f, sys.b, y), sys, 60, grid)
            worst = max(worst, np.max(np.abs(rec.values - f(grid.nodes))[far]))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed < 30
    criterion(9, ok, f"sup error away from endpoints {worst:.2e} (<=1e-6), {elapsed:.1f}s (<30s)")
    assert ok


def test_criterion_10_determinism(criterion, tmp_path):
    base = {"center": [0.25, 0, 0], "center_b": [0.5, 0, 0], "phantom": {"kind": "exp_linear"},
            "grid_resolution": 8, "plane_count": 400, "degree_max": 16, "m_max": 20, "seed": 11}
    runs = [
        ("forward", dict(base)),
        ("forward", dict(base, n=3, k=2, center=[0.1, 0.2, 0, 0], center_b=None)),
        ("invert-single", dict(base)),
        ("reconstruct-two", dict(base)),
        ("reconstruct-two", dict(base, k=1)),
        ("diagnose", dict(base)),
    ]
    identical = True
    for i, (command, cfg) in enumerate(runs):
        path = tmp_path / f"cfg{i}.json"
        path.write_text(json.dumps(cfg))
        out = tmp_path / f"out{i}"
        snapshots = []
        for _ in range(2):
            assert main([command, "--config", str(path), "--out", str(out)]) == 0
            snapshots.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        identical &= snapshots[0] == snapshots[1] and len(snapshots[0]) >= 2
    criterion(10, identical, f"{len(runs)} CLI experiments rerun {'bit-identically' if identical else 'with differences'}")
    assert identical
