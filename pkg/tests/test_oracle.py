import math

import numpy as np
import pytest
from scipy.stats import norm

from dmetric.measure import InputMeasure, box, sample
from dmetric.metric import d_mu_disagreement
from dmetric.net import Activation, NetworkParams, toy_network
from dmetric.oracle import (
    DegenerateHalfPlaneError,
    HalfPlane,
    UnsupportedOracleError,
    circle_polygon_area,
    clip_halfplane,
    exact_disagreement,
    halfplane_network,
    halfplane_of,
    has_closed_form,
    polygon_area,
    quad_disagreement,
)


def random_halfplane(rng, lim=3.0):
    # line through a random interior point with a random normal
    theta = rng.uniform(0, 2 * math.pi)
    a, b = math.cos(theta), math.sin(theta)
    p = rng.uniform(-lim, lim, 2)
    return HalfPlane(a, b, -(a * p[0] + b * p[1]))


class TestHalfPlaneOf:
    def test_w1(self, w1):
        h = halfplane_of(w1)
        assert (h.a, h.b, h.c) == pytest.approx((-0.2, 0.0, -0.1))
        assert -h.c / h.a == pytest.approx(-0.5)

    def test_w3(self, w3):
        h = halfplane_of(w3)
        assert (h.a, h.b, h.c) == pytest.approx((-3.0, 0.0, -2.9))
        assert -h.c / h.a == pytest.approx(-29 / 30)

    def test_all_one_degenerate(self, all_one):
        h = halfplane_of(all_one)
        assert (h.a, h.b, h.c) == (0, 0, 0) and h.degenerate

    def test_wrong_architecture(self):
        net = NetworkParams((2, 3), (np.zeros((3, 2)),), (np.zeros(3),))
        with pytest.raises(ValueError):
            halfplane_of(net)

    def test_region_matches_network(self, rng):
        x = rng.uniform(-3, 3, size=(5000, 2))
        for act in (Activation(), Activation("tanh"), Activation("softplus")):
            net = toy_network(*rng.normal(size=6), activation=act)
            h = halfplane_of(net)
            out = net.activation(x @ net.weights[0].T + net.biases[0])
            np.testing.assert_array_equal(out[:, 0] > out[:, 1], h.side(x) > 0)


class TestGeometry:
    def test_clip_square(self):
        sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
        assert polygon_area(clip_halfplane(sq, 1, 0, -0.25)) == pytest.approx(0.75)
        assert polygon_area(clip_halfplane(sq, 1, 1, -1)) == pytest.approx(0.5)

    def test_circle_polygon(self):
        big = np.array([[-5, -5], [5, -5], [5, 5], [-5, 5]], dtype=float)
        assert circle_polygon_area(big, 2.0) == pytest.approx(4 * math.pi)
        half = clip_halfplane(big, 1, 0, 0)
        assert circle_polygon_area(half, 2.0) == pytest.approx(2 * math.pi)
        # circular segment beyond x = 1 for r = 2
        seg = clip_halfplane(big, 1, 0, -1)
        expected = 4 * math.acos(0.5) - 1 * math.sqrt(3)
        assert circle_polygon_area(seg, 2.0) == pytest.approx(expected)
        small = np.array([[0, 0], [0.5, 0], [0.5, 0.5], [0, 0.5]], dtype=float)
        assert circle_polygon_area(small, 2.0) == pytest.approx(0.25)


class TestExact:
    def test_strip_uniform(self, w1, w3, uniform_square):
        val = exact_disagreement(halfplane_of(w1), halfplane_of(w3), uniform_square)
        assert val == pytest.approx(7 / 90, abs=1e-12)

    def test_strip_gaussian(self, w1, w3, gauss_square):
        val = exact_disagreement(halfplane_of(w1), halfplane_of(w3), gauss_square)
        c = norm.cdf(3) - norm.cdf(-3)
        assert val == pytest.approx((norm.cdf(-0.5) - norm.cdf(-29 / 30)) / c, rel=1e-12)
        assert val == pytest.approx(0.1421, abs=1e-4)

    def test_identical(self, w1, uniform_square, gauss_square, uniform_disc):
        h = halfplane_of(w1)
        for m in (uniform_square, gauss_square, uniform_disc):
            assert exact_disagreement(h, h, m) == 0.0

    def test_opposite_orientation(self, uniform_square, gauss_square):
        h = HalfPlane(1.0, 0.0, 0.0)
        flipped = HalfPlane(-1.0, 0.0, 0.0)
        assert exact_disagreement(h, flipped, uniform_square) == pytest.approx(1.0)
        assert exact_disagreement(h, flipped, gauss_square) == pytest.approx(1.0)

    def test_degenerate_raises(self, w1, all_one, uniform_square):
        with pytest.raises(DegenerateHalfPlaneError):
            exact_disagreement(halfplane_of(w1), halfplane_of(all_one), uniform_square)

    def test_disc_against_monte_carlo(self, rng, uniform_disc):
        x = sample(uniform_disc, 200_000, 17)
        for _ in range(10):
            h1, h2 = random_halfplane(rng, 2.5), random_halfplane(rng, 2.5)
            est = d_mu_disagreement(halfplane_network(h1), halfplane_network(h2), x)
            assert abs(est.value - exact_disagreement(h1, h2, uniform_disc)) <= 4 * est.ci_half_width + 1e-12

    def test_gaussian_oblique_falls_back_to_quadrature(self, rng, gauss_square):
        h1, h2 = random_halfplane(rng), random_halfplane(rng)
        assert not has_closed_form(h1, h2, gauss_square)
        direct = quad_disagreement(halfplane_network(h1), halfplane_network(h2), gauss_square, 512)
        assert exact_disagreement(h1, h2, gauss_square, grid_res=512) == direct


class TestQuadrature:
    def test_strip(self, w1, w3, uniform_square):
        assert abs(quad_disagreement(w1, w3, uniform_square, 4096) - 7 / 90) < 2e-3

    def test_self(self, w1, uniform_square):
        assert quad_disagreement(w1, w1, uniform_square, 256) == 0.0

    def test_all_one(self, w1, all_one, uniform_square):
        assert abs(quad_disagreement(w1, all_one, uniform_square, 512) - 1.0) < 2e-3

    def test_agrees_with_geometry(self, rng, uniform_square, uniform_disc):
        res = 1024
        for m in (uniform_square, uniform_disc):
            for _ in range(8):
                h1, h2 = random_halfplane(rng), random_halfplane(rng)
                q = quad_disagreement(halfplane_network(h1), halfplane_network(h2), m, res)
                # only cells cut by a boundary line err; a line of length l cuts
                # at most 2*l/h cells of side h, each off by at most h^2 * density
                h = 6 / res
                length = 2 * 6 * math.sqrt(2) + (2 * math.pi * 3 if m.domain.kind == "ball" else 0)
                bound = 2 * length * h / m.domain.volume
                assert abs(q - exact_disagreement(h1, h2, m)) <= bound

    def test_workers_identical(self, w1, w3, gauss_square):
        assert quad_disagreement(w1, w3, gauss_square, 256, workers=1) == quad_disagreement(
            w1, w3, gauss_square, 256, workers=3
        )

    def test_unsupported_dimension(self):
        net = NetworkParams((3, 2), (np.ones((2, 3)),), (np.zeros(2),))
        m = InputMeasure(box([[-1, 1]] * 3))
        with pytest.raises(UnsupportedOracleError):
            quad_disagreement(net, net, m, 128)

    def test_min_grid(self, w1, uniform_square):
        with pytest.raises(ValueError):
            quad_disagreement(w1, w1, uniform_square, 32)
