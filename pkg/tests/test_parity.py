import numpy as np
from numpy.testing import assert_allclose

from funkshift.funk import apply_M, forward_funk
from funkshift.parity import WeightedReflection, apply_W, even_part, odd_part
from funkshift.planes import sample_plane_family

from conftest import random_ball, random_sphere, smooth_f


def one(x):
    return np.ones(x.shape[0])


def test_origin_is_antipodal_map(sphere_points):
    w = WeightedReflection(np.zeros(3), 2)
    assert_allclose(apply_W(w, smooth_f, sphere_points), smooth_f(-sphere_points), atol=1e-15)


def test_k1_is_unweighted(sphere_points):
    w = WeightedReflection([0.3, 0.2, 0.1], 1)
    assert_allclose(w.rho(sphere_points), 1.0)


def test_hand_weight():
    w = WeightedReflection([0.5, 0, 0], 2)
    assert_allclose(apply_W(w, one, [1.0, 0, 0]), [3.0], rtol=1e-14)


def test_decomposition(sphere_points):
    a = np.array([0.3, 0.2, 0.1])
    fp, fm = even_part(smooth_f, a, 2), odd_part(smooth_f, a, 2)
    x = sphere_points
    assert_allclose(fp(x) + fm(x), smooth_f(x), atol=1e-13)
    w = WeightedReflection(a, 2)
    assert_allclose(apply_W(w, fp, x), fp(x), atol=1e-12)
    assert_allclose(apply_W(w, fm, x), -fm(x), atol=1e-12)


def test_ordinary_parity_at_origin(sphere_points):
    x3 = lambda x: x[:, 2]
    assert np.max(np.abs(even_part(x3, np.zeros(3), 2)(sphere_points))) < 1e-15
    assert_allclose(odd_part(x3, np.zeros(3), 2)(sphere_points), sphere_points[:, 2])


def test_involution_random_centers(rng):
    for dim, k in ((3, 1), (3, 2), (4, 2), (4, 3)):
        f = lambda y: np.exp(y[:, 0] - 0.5 * y[:, -1])
        x = random_sphere(rng, 1000, dim)
        for a in random_ball(rng, 4, dim, radius=0.8):
            w = WeightedReflection(a, k)
            assert_allclose(apply_W(w, w(f), x), f(x), atol=1e-12)


def test_characterization_via_M(sphere_points):
    # M_a f is even under y -> -y exactly when f is a-even
    a = np.array([0.2, -0.4, 0.3])
    x = sphere_points
    for part, sign in ((even_part, 1.0), (odd_part, -1.0)):
        h = part(smooth_f, a, 2)
        assert_allclose(apply_M(a, h, -x, 2), sign * apply_M(a, h, x, 2), atol=1e-11)


def test_odd_part_is_in_kernel():
    a = np.array([0.3, 0.2, 0.1])
    g = forward_funk(odd_part(smooth_f, a, 2), sample_plane_family(a, 2, 2, 100))
    assert np.max(np.abs(g.values)) < 1e-8
