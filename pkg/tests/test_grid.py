import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phaselab.errors import (
    GridMismatch,
    IndexOutOfRange,
    InvalidField,
    InvalidGrid,
    NonPositiveIntensity,
    NonUniformZ,
    TooFewSlices,
)
from phaselab.grid import (
    FieldStack,
    Grid2D,
    ScalarField2D,
    compute_i_hat,
    fd_divergence_of_flux,
    fd_gradient,
    fd_laplacian,
    field_error_norms,
    stack_z_derivative,
)


def field(grid, f, z=0.0):
    return ScalarField2D.from_function(grid, f, z)


def test_grid_invariants():
    g = Grid2D(5, 9, -1.0, 1.0, 0.0, 2.0)
    assert g.hx == pytest.approx(0.5)
    assert g.hy == pytest.approx(0.25)
    X, Y = g.mesh()
    assert X.shape == (9, 5)
    assert X[0, 2] == pytest.approx(0.0) and Y[4, 0] == pytest.approx(1.0)
    with pytest.raises(InvalidGrid):
        Grid2D(2, 5)
    with pytest.raises(InvalidGrid):
        Grid2D(5, 5, 1.0, 0.0)


def test_field_layout_is_x_fastest():
    g = Grid2D(4, 3)
    f = ScalarField2D(g, np.arange(12.0))
    assert f.values[1, 0] == 4.0  # row j=1 starts after nx values
    np.testing.assert_array_equal(f.flat, np.arange(12.0))


def test_field_rejects_bad_values():
    g = Grid2D(3, 3)
    with pytest.raises(InvalidField):
        ScalarField2D(g, np.zeros(8))
    with pytest.raises(InvalidField):
        ScalarField2D(g, np.full(9, np.nan))


def test_field_is_immutable():
    f = ScalarField2D.constant(Grid2D(3, 3), 1.0)
    with pytest.raises(ValueError):
        f.values[0, 0] = 2.0


class TestGradient:
    def test_constant(self, small_grid):
        fx, fy = fd_gradient(ScalarField2D.constant(small_grid, 3.0))
        assert np.all(fx.values == 0) and np.all(fy.values == 0)

    def test_linear_exact(self):
        g = Grid2D.square(17)
        fx, fy = fd_gradient(field(g, lambda x, y: x + 0 * y))
        np.testing.assert_allclose(fx.values, 1.0, atol=1e-13)
        np.testing.assert_allclose(fy.values, 0.0, atol=1e-13)

    def test_quadratic_in_x(self):
        g = Grid2D.square(65)
        fx, _ = fd_gradient(field(g, lambda x, y: x**2 * y))
        # symbolic oracle: d/dx (x^2 y) = 2xy = 0.5 at (0.5, 0.5)
        assert fx.values[32, 32] == pytest.approx(0.5, abs=1e-10)


class TestLaplacian:
    def test_harmonic_linear(self, small_grid):
        lap = fd_laplacian(field(small_grid, lambda x, y: x + y))
        np.testing.assert_allclose(lap.interior(), 0.0, atol=1e-9)

    def test_quadratic(self, small_grid):
        lap = fd_laplacian(field(small_grid, lambda x, y: x**2 + y**2))
        np.testing.assert_allclose(lap.values, 4.0, atol=1e-9)

    def test_second_order_convergence(self):
        errs = []
        for n in (33, 65, 129):
            g = Grid2D.square(n, (-2, 2, -2, 2))
            f = field(g, lambda x, y: np.exp(-(x**2 + y**2)))
            X, Y = g.mesh()
            r2 = X**2 + Y**2
            exact = (4 * r2 - 4) * np.exp(-r2)
            errs.append(np.abs(fd_laplacian(f).values - exact)[1:-1, 1:-1].max())
        ratios = np.array(errs[:-1]) / np.array(errs[1:])
        assert np.all((ratios > 3.5) & (ratios < 4.5)), ratios


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6))
def test_stencils_exact_on_quadratics(c):
    g = Grid2D(11, 13, -0.7, 1.3, 0.2, 1.9)
    a, b, cc, d, e, f0 = c
    fn = lambda x, y: a * x * x + b * x * y + cc * y * y + d * x + e * y + f0
    f = field(g, fn)
    X, Y = g.mesh()
    fx, fy = fd_gradient(f)
    np.testing.assert_allclose(fx.interior(), (2 * a * X + b * Y + d)[1:-1, 1:-1], atol=1e-10)
    np.testing.assert_allclose(fy.interior(), (b * X + 2 * cc * Y + e)[1:-1, 1:-1], atol=1e-10)
    np.testing.assert_allclose(fd_laplacian(f).interior(), 2 * a + 2 * cc, atol=1e-9)


class TestIHat:
    def test_constant_intensity(self, small_grid):
        assert np.all(compute_i_hat(ScalarField2D.constant(small_grid, 1.0)).values == 0)

    def test_gaussian_values(self):
        # symbolic oracle: Ihat = 4 r^2 / w^4 - 4 / w^2 with w^2 = 2 at z = 0
        g = Grid2D.square(201, (-1, 1, -1, 1))
        I = field(g, lambda x, y: np.exp(-(x**2 + y**2)))
        ih = compute_i_hat(I)
        assert ih.values[100, 100] == pytest.approx(-2.0, abs=1e-4)
        assert ih.values[100, 200] == pytest.approx(-1.0, abs=1e-3)  # boundary node (1, 0)
        assert ih.values[100, 150] == pytest.approx(4 * 0.25 / 4 - 2, abs=1e-4)

    @settings(max_examples=20, deadline=None)
    @given(st.floats(1e-3, 1e3))
    def test_scale_invariant(self, c):
        g = Grid2D.square(17)
        I = field(g, lambda x, y: np.exp(-(x**2 + y**2)) + 0.1 * x)
        a = compute_i_hat(I).values
        b = compute_i_hat(I.with_values(c * I.values)).values
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-12 * np.abs(a).max() + 1e-12)

    def test_rejects_non_positive(self, small_grid):
        with pytest.raises(NonPositiveIntensity):
            compute_i_hat(ScalarField2D.constant(small_grid, 0.0))


class TestDivergence:
    def test_linear_phase(self, small_grid):
        one = ScalarField2D.constant(small_grid, 1.0)
        d = fd_divergence_of_flux(one, field(small_grid, lambda x, y: x + y))
        np.testing.assert_allclose(d.interior(), 0.0, atol=1e-9)

    def test_reduces_to_laplacian(self, small_grid, rng):
        one = ScalarField2D.constant(small_grid, 1.0)
        phi = ScalarField2D(small_grid, rng.standard_normal(small_grid.shape))
        d = fd_divergence_of_flux(one, phi)
        lap = fd_laplacian(phi)
        scale = np.abs(lap.interior()).max()
        np.testing.assert_allclose(d.interior(), lap.interior(), atol=1e-12 * scale)

    def test_x_squared(self, small_grid):
        one = ScalarField2D.constant(small_grid, 1.0)
        d = fd_divergence_of_flux(one, field(small_grid, lambda x, y: x**2 + 0 * y))
        np.testing.assert_allclose(d.interior(), 2.0, atol=1e-9)

    def test_variable_coefficient(self, unit_grid):
        I = field(unit_grid, lambda x, y: np.exp(-x) + 0 * y)
        d = fd_divergence_of_flux(I, field(unit_grid, lambda x, y: x + 0 * y))
        # symbolic oracle: d/dx (e^{-x} * 1) = -e^{-x}
        assert d.values[64, 64] == pytest.approx(-np.exp(-0.5), abs=1e-3)

    def test_grid_mismatch(self, small_grid):
        with pytest.raises(GridMismatch):
            fd_divergence_of_flux(
                ScalarField2D.constant(small_grid, 1.0), ScalarField2D.constant(Grid2D.square(9), 0.0)
            )


class TestStack:
    def make(self, grid, fn, zs):
        return FieldStack(tuple(ScalarField2D.from_function(grid, lambda x, y: fn(x, y, z), z) for z in zs))

    def test_constant(self, small_grid):
        s = self.make(small_grid, lambda x, y, z: 1 + 0 * x, [0, 0.1, 0.2])
        for i in range(3):
            assert np.all(stack_z_derivative(s, i).values == 0)

    def test_linear_in_z(self, small_grid):
        s = self.make(small_grid, lambda x, y, z: z + 0 * x, [0, 0.1, 0.2, 0.3])
        for i in range(4):
            np.testing.assert_allclose(stack_z_derivative(s, i).values, 1.0, rtol=1e-12)

    def test_gaussian_waist_slice(self, small_grid, gaussian):
        zs = [-0.01, 0.0, 0.01]
        s = FieldStack(tuple(ScalarField2D.from_function(small_grid, lambda x, y: gaussian.intensity(x, y, z), z) for z in zs))
        np.testing.assert_allclose(stack_z_derivative(s, 1).values, 0.0, atol=1e-8)

    def test_errors(self, small_grid):
        two = self.make(small_grid, lambda x, y, z: 0 * x, [0, 1])
        with pytest.raises(TooFewSlices):
            stack_z_derivative(two, 0)
        three = self.make(small_grid, lambda x, y, z: 0 * x, [0, 1, 2])
        with pytest.raises(IndexOutOfRange):
            stack_z_derivative(three, 3)
        with pytest.raises(NonUniformZ):
            self.make(small_grid, lambda x, y, z: 0 * x, [0, 1, 3])
        with pytest.raises(NonUniformZ):
            self.make(small_grid, lambda x, y, z: 0 * x, [0, 1, 1])


class TestNorms:
    def test_identical(self, small_grid, rng):
        a = ScalarField2D(small_grid, rng.random(small_grid.shape))
        e = field_error_norms(a, a)
        assert (e.l2_rel, e.linf_rel, e.linf_abs) == (0, 0, 0)

    def test_offset(self, small_grid):
        b = ScalarField2D.constant(small_grid, 1.0)
        e = field_error_norms(b.with_values(b.values + 0.01), b)
        assert e.linf_abs == pytest.approx(0.01) and e.linf_rel == pytest.approx(0.01)

    def test_scaling(self, small_grid, gaussian):
        X, Y = small_grid.mesh()
        b = ScalarField2D(small_grid, gaussian.intensity(X, Y, 0.0))
        e = field_error_norms(b.with_values(1.05 * b.values), b)
        assert e.l2_rel == pytest.approx(0.05, abs=1e-12)

    def test_zero_reference_falls_back(self, small_grid):
        b = ScalarField2D.constant(small_grid, 0.0)
        e = field_error_norms(b.with_values(np.full(small_grid.shape, 0.5)), b)
        assert e.absolute and e.linf_rel == 0.5
