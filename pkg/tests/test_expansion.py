import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conic_fourier.errors import DomainError, ParameterError, ResolutionWarning
from conic_fourier.expansion import (
    ProjectionTable,
    SampledFunction,
    apply_multiplier,
    cesaro_mean,
    convolve,
    dim_Vn,
    lp_norm,
    partial_sum,
    poisson_integral,
    project,
    projection_table,
    translate,
    translation_coefficients,
)
from conic_fourier.geometry import SolidPoint, SurfacePoint, sample_solid, sample_surface, solid_grid, surface_grid
from conic_fourier.jacobi import jacobi_series
from conic_fourier.kernels import AdditionSpec, tz_table
from conic_fourier.multipliers import MultiplierSequence

CASES = [
    (AdditionSpec.surface(2, 0.5), lambda deg: surface_grid(2, 0.5, deg)),
    (AdditionSpec.surface(3, 0.0), lambda deg: surface_grid(3, 0.0, deg)),
    (AdditionSpec.solid(2, 0.5, 0.0), lambda deg: solid_grid(2, 0.5, 0.0, deg)),
    (AdditionSpec.solid(2, 0.5, 1.0), lambda deg: solid_grid(2, 0.5, 1.0, deg)),
]
IDS = ["surface2", "surface3", "solid2_mu0", "solid2_mu1"]


def points(spec, n, seed=0):
    rng = np.random.default_rng(seed)
    return sample_surface(rng, spec.d, n) if spec.kind == "surface" else sample_solid(rng, spec.d, n)


class TestSampledFunction:
    def test_cache_and_kind(self):
        calls = []

        def ev(X, T):
            calls.append(1)
            return T

        f = SampledFunction(ev, "surface", "t", 1)
        g = surface_grid(2, 0.5, 4)
        f.on(g)
        f.on(g)
        assert len(calls) == 1
        with pytest.raises(ParameterError):
            f.on(solid_grid(2, 0.5, 0.0, 4))

    def test_helpers(self):
        f = SampledFunction(lambda X, T: T - 0.5, "surface", "h", 1)
        pts = [SurfacePoint.polar(0.2, 0.0), SurfacePoint.polar(0.9, 1.0)]
        assert_allclose(f.at(pts), [-0.3, 0.4])
        assert_allclose(f.scaled(2).at(pts), [-0.6, 0.8])
        assert_allclose(f.absolute().at(pts), [0.3, 0.4])
        assert f.absolute().degree is None
        assert_allclose(SampledFunction.constant(3.0, "surface").at(pts), 3.0)


@pytest.mark.parametrize("spec,grid_of", CASES, ids=IDS)
class TestReproduction:
    def test_partial_sum_reproduces(self, spec, grid_of, make_poly):
        N = 4
        grid = grid_of(2 * N)
        pts = points(spec, 8)
        f = make_poly(spec.kind, spec.d, N, seed=1)
        assert_allclose(partial_sum(spec, f, N, pts, grid), f.at(pts), atol=1e-10)

    def test_levels_orthogonal(self, spec, grid_of, make_poly):
        grid = grid_of(8)
        pts = points(spec, 6)
        f = make_poly(spec.kind, spec.d, 2, seed=2)
        for n in (3, 4):
            assert np.max(np.abs(project(spec, f, n, pts, grid))) < 1e-10

    def test_parseval(self, spec, grid_of, make_poly):
        N = 3
        grid = grid_of(2 * N)
        f = make_poly(spec.kind, spec.d, N, seed=3)
        tab = projection_table(spec, f, N, None, grid)
        total = sum(lp_norm(tab.values[n], 2, grid) ** 2 for n in range(N + 1))
        assert total == pytest.approx(lp_norm(f, 2, grid) ** 2, rel=1e-10)


class TestPaths:
    def test_ring_matches_dense(self, make_poly):
        spec = AdditionSpec.surface(2, 0.5)
        grid = surface_grid(2, 0.5, 16)
        f = SampledFunction(lambda X, T: np.exp(X[:, 0]) * (1 - T), "surface", "smooth")
        ring = projection_table(spec, f, 8, None, grid, ring=True).values
        dense = projection_table(spec, f, 8, None, grid, ring=False).values
        assert_allclose(ring, dense, atol=1e-12)

    def test_solid_ring_matches_dense(self):
        spec = AdditionSpec.solid(2, 0.5, 1.0)
        grid = solid_grid(2, 0.5, 1.0, 8)
        f = SampledFunction(lambda X, T: np.cos(X[:, 1]) + T**2, "solid", "smooth")
        ring = projection_table(spec, f, 4, None, grid, ring=True).values
        dense = projection_table(spec, f, 4, None, grid, ring=False).values
        assert_allclose(ring, dense, atol=1e-12)

    def test_projection_idempotent(self):
        spec = AdditionSpec.surface(2, 0.5)
        grid = surface_grid(2, 0.5, 16)
        f = SampledFunction(lambda X, T: np.abs(X[:, 0]) + T**3, "surface", "rough")
        p3 = project(spec, f, 3, None, grid)
        assert_allclose(project(spec, p3, 3, None, grid), p3, atol=1e-12)
        assert np.max(np.abs(project(spec, p3, 2, None, grid))) < 1e-12

    def test_output_forms_agree(self, make_poly):
        spec = AdditionSpec.surface(2, 0.5)
        grid = surface_grid(2, 0.5, 8)
        f = make_poly("surface", 2, 3, seed=4)
        pts = points(spec, 3)
        X = np.array([p.x for p in pts])
        T = np.array([p.t for p in pts])
        assert_allclose(project(spec, f, 2, pts, grid), project(spec, f, 2, (X, T), grid), rtol=1e-14)

    def test_coarse_grid_warns(self, make_poly):
        spec = AdditionSpec.surface(2, 0.5)
        with pytest.warns(ResolutionWarning):
            partial_sum(spec, make_poly("surface", 2, 2, 0), 6, None, surface_grid(2, 0.5, 6))

    def test_mismatched_grid(self):
        with pytest.raises(ParameterError):
            partial_sum(AdditionSpec.surface(2, 0.5), SampledFunction.constant(1, "surface"), 2, None,
                        surface_grid(2, 1.0, 6))


class TestOperators:
    spec = AdditionSpec.surface(2, 0.5)

    def test_cesaro_zero_is_partial_sum(self, make_poly):
        grid = surface_grid(2, 0.5, 12)
        f = make_poly("surface", 2, 6, seed=5)
        assert_allclose(cesaro_mean(self.spec, f, 5, 0.0, None, grid),
                        partial_sum(self.spec, f, 5, None, grid), atol=1e-12)

    def test_cesaro_constant(self):
        grid = surface_grid(2, 0.5, 12)
        out = cesaro_mean(self.spec, SampledFunction.constant(2.0, "surface"), 6, 1.5, None, grid)
        assert_allclose(out, 2.0, rtol=1e-12)

    def test_poisson_two_routes(self, make_poly):
        # closed-form kernel quadrature versus the multiplier r^k on projections
        grid = surface_grid(2, 0.5, 40)
        f = make_poly("surface", 2, 5, seed=6)
        pts = points(self.spec, 5)
        r = 0.4
        kernel = poisson_integral(self.spec, f, r, pts, grid)
        spectral = apply_multiplier(self.spec, f, r ** np.arange(6), 5, pts, grid)
        assert_allclose(kernel, spectral, atol=1e-9)

    def test_poisson_solid_two_routes(self, make_poly):
        spec = AdditionSpec.solid(2, 0.5, 1.0)
        grid = solid_grid(2, 0.5, 1.0, 16)
        f = make_poly("solid", 2, 3, seed=7)
        pts = points(spec, 2)
        r = 0.2
        kernel = poisson_integral(spec, f, r, pts, grid, n_inner=24)
        spectral = apply_multiplier(spec, f, r ** np.arange(4), 3, pts, grid)
        assert_allclose(kernel, spectral, atol=1e-8)

    def test_translation_two_routes(self, make_poly):
        grid = surface_grid(2, 0.5, 12)
        f = make_poly("surface", 2, 4, seed=8)
        pts = points(self.spec, 4)
        theta = 0.9
        coeffs = translation_coefficients(self.spec, theta, 4)
        g = lambda s: jacobi_series(coeffs, self.spec.params, s)
        assert_allclose(translate(self.spec, f, theta, pts, grid, N=4),
                        convolve(self.spec, f, g, pts, grid, n_inner=8), atol=1e-10)

    def test_translation_identity(self, make_poly):
        grid = surface_grid(2, 0.5, 12)
        f = make_poly("surface", 2, 4, seed=9)
        pts = points(self.spec, 4)
        assert_allclose(translate(self.spec, f, 0.0, pts, grid, N=6), f.at(pts), atol=1e-10)
        with pytest.raises(DomainError):
            translation_coefficients(self.spec, -0.1, 3)

    def test_multiplier_sequence_input(self, make_poly):
        grid = surface_grid(2, 0.5, 12)
        f = make_poly("surface", 2, 4, seed=10)
        seq = MultiplierSequence.geometric(0.5)
        assert_allclose(apply_multiplier(self.spec, f, seq, 4, None, grid),
                        apply_multiplier(self.spec, f, 0.5 ** np.arange(5), 4, None, grid))
        with pytest.raises(ParameterError):
            apply_multiplier(self.spec, f, [1.0, 1.0], 4, None, grid)


class TestNorms:
    def test_lp(self):
        grid = surface_grid(2, 0.5, 8)
        one = SampledFunction.constant(1.0, "surface")
        assert lp_norm(one, 3, grid) == pytest.approx(1.0)
        t = SampledFunction(lambda X, T: T, "surface", "t")
        assert lp_norm(t, math.inf, grid) == pytest.approx(grid.t.max())
        with pytest.raises(ParameterError):
            lp_norm(one, 0.5, grid)

    @pytest.mark.parametrize("n", range(6))
    def test_dimensions(self, n):
        assert dim_Vn("surface", 3, n) == 2 * n + 1
        assert dim_Vn("solid", 3, n) == (n + 1) * (n + 2) // 2
        assert dim_Vn("solid", 2, n) == n + 1

    def test_trace_matches_dimension(self):
        # sum_j w_j P_n(y_j, y_j) = dim V_n
        spec = AdditionSpec.solid(2, 0.5, 1.0)
        grid = solid_grid(2, 0.5, 1.0, 8)
        diag = tz_table(spec, 4, grid.x, grid.t, grid.x, grid.t)
        for n in range(5):
            assert grid.integrate(diag[n]) == pytest.approx(dim_Vn("solid", 3, n), rel=1e-9)


def test_table_csv_round_trip(tmp_path, make_poly):
    spec = AdditionSpec.surface(2, 0.5)
    grid = surface_grid(2, 0.5, 8)
    pts = points(spec, 3)
    tab = projection_table(spec, make_poly("surface", 2, 3, 0), 3, pts, grid)
    tab.to_csv(tmp_path / "proj.csv")
    back = ProjectionTable.from_csv(tmp_path / "proj.csv")
    assert np.array_equal(back.values, tab.values)
    assert tab.N == 3
    assert_allclose(tab.partial_sum(3), tab.multiplier(np.ones(4)))


def test_projection_table_single_function():
    spec = AdditionSpec.surface(2, 0.5)
    grid = surface_grid(2, 0.5, 6)
    one = SampledFunction.constant(1.0, "surface")
    with pytest.raises(ParameterError):
        projection_table(spec, [one, one], 2, None, grid)
