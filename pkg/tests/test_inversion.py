import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.special import eval_legendre, i0

from funkshift.funk import SectionField, forward_funk, funk_data
from funkshift.inversion import (
    IllConditionedError,
    fit_funk_o_harmonic,
    funk_multipliers,
    harmonic_indices,
    invert_funk_a,
    invert_funk_o_harmonic,
    invert_funk_o_meanvalue,
    mean_value_profile,
    multiplier_table,
    real_sph_harm,
    real_sph_harm_scipy,
    single_center_inverse,
)
from funkshift.parity import even_part
from funkshift.planes import sample_plane_family
from funkshift.sphere import build_sphere_grid

from conftest import random_sphere, smooth_f

ORIGIN = np.zeros(3)


def test_basis_matches_scipy(sphere_points):
    ls, ms = harmonic_indices(12)
    assert_allclose(real_sph_harm(ls, ms, sphere_points), real_sph_harm_scipy(ls, ms, sphere_points), atol=1e-13)


def test_basis_orthonormal():
    g = build_sphere_grid(2, 20)
    ls, ms = harmonic_indices(8)
    Y = real_sph_harm(ls, ms, g.nodes)
    assert_allclose((Y * g.weights[:, None]).T @ Y, np.eye(ls.size), atol=1e-12)


def test_multipliers_brute_force():
    c = funk_multipliers(24)
    assert_allclose(c[0], 2 * np.pi, rtol=1e-14)
    assert_allclose(c[2], -np.pi, rtol=1e-13)
    assert np.max(np.abs(c[1::2])) < 1e-13
    assert_allclose(c, [2 * np.pi * eval_legendre(l, 0.0) for l in range(25)], atol=1e-12)
    table = multiplier_table(4)
    assert table["degree"] == [0, 1, 2, 3, 4]


def central_field(f, count=600):
    return forward_funk(f, sample_plane_family(ORIGIN, 2, 2, count))


def test_recover_constant_and_degree_two(sphere_points):
    ls, ms = harmonic_indices(2)
    for col in (0, 4, 5, 8):
        Y = lambda x, c=col: real_sph_harm(ls, ms, x)[:, c]
        u = fit_funk_o_harmonic(central_field(Y), 8)
        assert_allclose(u(sphere_points), Y(sphere_points), atol=1e-8)


def test_odd_harmonic_returns_zero(sphere_points):
    u = fit_funk_o_harmonic(central_field(lambda x: x[:, 1]), 8)
    assert np.max(np.abs(u(sphere_points))) < 1e-12


def test_ill_conditioned_fit_is_reported():
    with pytest.raises(IllConditionedError):
        fit_funk_o_harmonic(central_field(smooth_f, count=20), 12)


def test_grid_output():
    g = build_sphere_grid(2, 12)
    rec = invert_funk_o_harmonic(central_field(lambda x: x[:, 2] ** 2), 4, g)
    assert_allclose(rec.values, g.nodes[:, 2] ** 2, atol=1e-10)


def test_profile_of_constant_is_constant():
    prof = mean_value_profile(lambda fam: np.full(len(fam), 3.5), [0, 0, 1.0], [0.2, 0.5, 0.9])
    assert_allclose(prof.values, 3.5)
    with pytest.raises(ValueError):
        mean_value_profile(lambda fam: np.zeros(len(fam)), [0, 0, 1.0], [0.5, 1.0])


def test_profile_zonal_oracle():
    # f = exp(x3): each great circle at distance arccos(r) from the pole gives 2 pi I0(r)
    r = np.linspace(0.05, 0.95, 7)
    prof = mean_value_profile(funk_data(lambda x: np.exp(x[:, 2]), 128), [0, 0, 1.0], r)
    assert_allclose(prof.values, 2 * np.pi * i0(r), rtol=1e-12)


def test_meanvalue_constant_and_odd():
    pts = np.array([[0, 0, 1.0], [0.6, 0.0, 0.8]])
    assert_allclose(invert_funk_o_meanvalue(lambda fam: np.full(len(fam), 2 * np.pi), pts), 1.0, atol=1e-6)
    assert_allclose(invert_funk_o_meanvalue(funk_data(lambda x: x[:, 0] ** 3), pts), 0.0, atol=1e-12)
    with pytest.raises(NotImplementedError):
        invert_funk_o_meanvalue(funk_data(smooth_f), pts, k=3)


def test_meanvalue_zonal_degree_two():
    Y = lambda x: eval_legendre(2, x[:, 2])
    val = invert_funk_o_meanvalue(funk_data(Y), np.array([[0, 0, 1.0]]))
    assert_allclose(val, [1.0], atol=1e-3)


@pytest.mark.parametrize("a", [[0.4, 0, 0], [0.1, 0.3, -0.2]])
def test_single_center_recovers_even_part(a, rng):
    x = random_sphere(rng, 300)
    g = forward_funk(smooth_f, sample_plane_family(a, 2, 2, 1000))
    rec = single_center_inverse(g, a, "harmonic", 24)
    assert np.max(np.abs(rec(x) - even_part(smooth_f, a, 2)(x))) < 1e-6


def test_a_even_round_trip_on_grid():
    a = [0.4, 0, 0]
    f = even_part(lambda x: np.exp(x[:, 1]), a, 2)
    grid = build_sphere_grid(2, 16)
    rec = invert_funk_a(forward_funk(f, sample_plane_family(a, 2, 2, 1000)), a, grid)
    assert np.max(np.abs(rec.values - f(grid.nodes))) < 1e-6


def test_meanvalue_route_through_center():
    a = np.array([0.3, 0.0, 0.1])
    x = np.array([[0.0, 0.6, 0.8], [1.0, 0.0, 0.0]])
    rec = single_center_inverse(funk_data(smooth_f), a, "meanvalue")
    assert np.max(np.abs(rec(x) - even_part(smooth_f, a, 2)(x))) < 1e-3
    with pytest.raises(TypeError):
        single_center_inverse(funk_data(smooth_f), a, "harmonic")
    with pytest.raises(ValueError):
        single_center_inverse(funk_data(smooth_f), a, "nope")
