"""Grid construction and spectral calculus."""

import numpy as np
import pytest

from abreu import (
    ScalarField,
    SymMatrixField,
    interpolate,
    make_grid,
    mean,
    partial,
    project_mean_zero,
    second_divergence,
    sup_norm,
)
from tests.support import random_band_limited

TWO_PI = 2.0 * np.pi


class TestMakeGrid:
    def test_1d(self):
        g = make_grid(1, [16])
        assert g.node_count == 16
        assert np.allclose(g.axis_coordinates(0), np.arange(16) / 16)
        assert g.spacing == (1.0 / 16,)

    def test_2d_anisotropic(self):
        g = make_grid(2, [8, 16])
        assert g.node_count == 128
        assert g.spacing == (1.0 / 8, 1.0 / 16)
        # spacing * N = 1 exactly
        assert all(s * n == 1.0 for s, n in zip(g.spacing, g.resolution))

    def test_rejects_odd_resolution(self):
        with pytest.raises(ValueError):
            make_grid(2, [7, 8])

    def test_rejects_undersized(self):
        with pytest.raises(ValueError):
            make_grid(1, [6])

    def test_rejects_bad_dim(self):
        with pytest.raises(ValueError):
            make_grid(0, [])

    def test_wrap_into_fundamental_domain(self):
        g = make_grid(2, [8, 8])
        assert np.allclose(g.wrap([1.25, -0.75]), [0.25, 0.25])


class TestScalarField:
    def test_shape_mismatch(self):
        g = make_grid(1, [16])
        with pytest.raises(ValueError):
            ScalarField(g, np.zeros(8))

    def test_rejects_nonfinite(self):
        g = make_grid(1, [16])
        vals = np.zeros(16)
        vals[3] = np.inf
        with pytest.raises(ValueError):
            ScalarField(g, vals)

    def test_values_read_only(self):
        g = make_grid(1, [16])
        f = ScalarField.zeros(g)
        with pytest.raises(ValueError):
            f.values[0] = 1.0

    def test_arithmetic(self):
        g = make_grid(1, [16])
        x = g.axis_coordinates(0)
        f = ScalarField(g, np.cos(TWO_PI * x))
        h = 2.0 * f + 1.0 - f
        assert np.allclose(h.values, np.cos(TWO_PI * x) + 1.0)


class TestPartial:
    def test_second_derivative_of_cosine(self):
        g = make_grid(1, [16])
        x = g.axis_coordinates(0)
        f = ScalarField(g, np.cos(TWO_PI * x))
        d2 = partial(f, (2,))
        assert np.allclose(d2.values, -4 * np.pi**2 * np.cos(TWO_PI * x), atol=1e-11)

    def test_constant_derivative_zero(self):
        g = make_grid(2, [16, 16])
        f = ScalarField.constant(g, 3.7)
        for axes in [(1, 0), (0, 1), (2, 0), (1, 1)]:
            assert sup_norm(partial(f, axes)) < 1e-13

    def test_mixed_product_eigenfunction(self):
        g = make_grid(2, [32, 32])
        x, y = g.coordinate_arrays()
        f = ScalarField(g, np.sin(TWO_PI * x) * np.sin(2 * TWO_PI * y))
        d = partial(f, (1, 1))
        expected = 8 * np.pi**2 * np.cos(TWO_PI * x) * np.cos(2 * TWO_PI * y)
        assert np.allclose(d.values, expected, atol=1e-10)

    def test_differentiation_commutes(self):
        g = make_grid(2, [16, 16])
        rng = np.random.default_rng(7)
        f = random_band_limited(g, rng, max_mode=3)
        once = partial(partial(f, (1, 0)), (0, 1))
        both = partial(f, (1, 1))
        assert sup_norm(once - both) < 1e-10 * (1 + sup_norm(both))

    def test_integration_by_parts(self):
        g = make_grid(2, [16, 16])
        rng = np.random.default_rng(8)
        f = random_band_limited(g, rng, max_mode=3)
        h = random_band_limited(g, rng, max_mode=3)
        lhs = mean(f * partial(h, (1, 0)))
        rhs = -mean(partial(f, (1, 0)) * h)
        assert abs(lhs - rhs) < 1e-12

    def test_order_validation(self):
        g = make_grid(1, [16])
        f = ScalarField.zeros(g)
        with pytest.raises(ValueError):
            partial(f, (5,))
        with pytest.raises(ValueError):
            partial(f, (1, 1))  # wrong multi-index length


class TestMean:
    def test_constant(self):
        g = make_grid(2, [8, 8])
        assert mean(ScalarField.constant(g, 4.2)) == pytest.approx(4.2)

    def test_cosine_mean_zero(self):
        g = make_grid(1, [16])
        x = g.axis_coordinates(0)
        assert abs(mean(ScalarField(g, np.cos(TWO_PI * x)))) < 1e-15

    def test_offset_sine(self):
        g = make_grid(2, [8, 16])
        _, y = g.coordinate_arrays()
        f = ScalarField(g, 1.0 + 0.3 * np.sin(2 * TWO_PI * y))
        assert mean(f) == pytest.approx(1.0, abs=1e-14)

    def test_project_mean_zero(self):
        g = make_grid(1, [16])
        x = g.axis_coordinates(0)
        assert sup_norm(project_mean_zero(ScalarField.constant(g, 5.0))) < 1e-15
        f = ScalarField(g, np.cos(TWO_PI * x) + 2.0)
        assert np.allclose(
            project_mean_zero(f).values, np.cos(TWO_PI * x), atol=1e-14
        )
        g0 = project_mean_zero(f)
        assert sup_norm(project_mean_zero(g0) - g0) < 1e-15  # idempotent


class TestSecondDivergence:
    def test_identity_goes_to_zero(self):
        g = make_grid(2, [16, 16])
        assert sup_norm(second_divergence(SymMatrixField.identity(g))) < 1e-12

    def test_1d_single_mode(self):
        g = make_grid(1, [16])
        x = g.axis_coordinates(0)
        m = SymMatrixField(g, (1.0 + 0.1 * np.cos(TWO_PI * x))[..., None])
        out = second_divergence(m)
        assert np.allclose(
            out.values, -0.4 * np.pi**2 * np.cos(TWO_PI * x), atol=1e-11
        )

    def test_mean_zero_for_random_fields(self):
        g = make_grid(2, [16, 16])
        rng = np.random.default_rng(3)
        entries = np.stack(
            [random_band_limited(g, rng, 4, 1.0).values + rng.normal() for _ in range(3)],
            axis=-1,
        )
        m = SymMatrixField(g, entries)
        out = second_divergence(m)
        scale = np.max(np.abs(entries))
        assert abs(mean(out)) < 1e-12 * scale


class TestInterpolate:
    def test_node_values_exact(self):
        g = make_grid(2, [8, 8])
        rng = np.random.default_rng(5)
        f = ScalarField(g, rng.standard_normal(g.shape))
        for idx in [(0, 0), (3, 5), (7, 7)]:
            point = np.array([idx[0] / 8, idx[1] / 8])
            assert interpolate(f, point) == pytest.approx(
                f.values[idx], abs=1e-12
            )

    def test_band_limited_exactness(self):
        g = make_grid(1, [16])
        x = g.axis_coordinates(0)
        f = ScalarField(g, np.cos(TWO_PI * x))
        assert interpolate(f, np.array([0.35])) == pytest.approx(
            np.cos(0.7 * np.pi), abs=1e-13
        )

    def test_periodic_wrapping(self):
        g = make_grid(2, [16, 16])
        rng = np.random.default_rng(6)
        f = random_band_limited(g, rng, max_mode=5)
        p = np.array([0.23, 0.71])
        assert interpolate(f, p + np.array([2.0, -3.0])) == pytest.approx(
            interpolate(f, p), abs=1e-12
        )

    def test_random_band_limited_at_arbitrary_points(self):
        g = make_grid(2, [16, 16])
        rng = np.random.default_rng(9)
        # construct explicitly so the reference is evaluable anywhere
        terms = [
            (rng.normal(), kx, ky)
            for kx in range(-3, 4)
            for ky in range(-3, 4)
            if (kx, ky) != (0, 0)
        ]

        def reference(p):
            return sum(a * np.cos(TWO_PI * (kx * p[0] + ky * p[1])) for a, kx, ky in terms)

        x, y = g.coordinate_arrays()
        vals = np.zeros(g.shape)
        for a, kx, ky in terms:
            vals += a * np.cos(TWO_PI * (kx * x + ky * y))
        f = ScalarField(g, vals)
        scale = sup_norm(f)
        for p in rng.random((10, 2)):
            assert interpolate(f, p) == pytest.approx(
                reference(p), abs=1e-12 * scale
            )
