"""Resolvent solves: scalar roots, sweep fixed points, order properties."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gpme.errors import ConfigurationError, NonConvergenceError
from gpme.elliptic_solver import (EpSolveConfig, PhiSpec, combine_with_laplacian,
                                  scalar_resolvent, solve_ep)
from gpme.grid_field import GridFunction, UniformGrid, discrete_lr_norm
from gpme.levy_operators import WeightedStencil, laplacian_stencil


def test_scalar_closed_forms():
    # s + s^2 = 2 and s + sqrt(s) = 2 both have root 1
    assert scalar_resolvent(PhiSpec(kind="power", exponent=2.0), 1.0, 2.0) == pytest.approx(1.0)
    assert scalar_resolvent(PhiSpec(kind="power", exponent=0.5), 1.0, 2.0) == pytest.approx(1.0)
    # odd symmetry
    assert scalar_resolvent(PhiSpec(kind="power", exponent=2.0), 1.0, -2.0) == pytest.approx(-1.0)
    assert scalar_resolvent(PhiSpec(kind="power", exponent=0.5), 1.0, 0.0) == 0.0


def test_scalar_linear_and_zero_paths():
    assert scalar_resolvent(PhiSpec(kind="linear", slope=3.0), 2.0, 7.0) == pytest.approx(1.0)
    assert scalar_resolvent(PhiSpec(kind="zero"), 5.0, 0.3) == pytest.approx(0.3)
    assert scalar_resolvent(PhiSpec(kind="power", exponent=2.0), 0.0, 0.3) == pytest.approx(0.3)


def test_scalar_stefan_branches():
    phi = PhiSpec(kind="stefan", latent=0.5)
    # below the latent plateau phi vanishes
    assert scalar_resolvent(phi, 1.0, 0.3) == pytest.approx(0.3)
    # above it: s + (s - 1/2) = 2
    assert scalar_resolvent(phi, 1.0, 2.0) == pytest.approx(1.25)


def test_scalar_table_interior_and_clamped():
    phi = PhiSpec(kind="table", table_u=(-1.0, 0.0, 1.0), table_phi=(-1.0, 0.0, 1.0))
    assert scalar_resolvent(phi, 1.0, 0.5) == pytest.approx(0.25)
    # beyond the table phi is frozen at 1
    assert scalar_resolvent(phi, 1.0, 3.0) == pytest.approx(2.0)


def test_scalar_newton_path_general_exponent():
    phi = PhiSpec(kind="power", exponent=1.5)
    s = scalar_resolvent(phi, 2.0, 3.0)
    assert abs(s + 2.0 * s ** 1.5 - 3.0) < 1e-11


@settings(max_examples=60, deadline=None)
@given(b=st.floats(-50.0, 50.0), lam=st.floats(0.0, 30.0),
       m=st.sampled_from([0.5, 1.0, 1.5, 2.0, 3.0]))
def test_scalar_residual_property(b, lam, m):
    phi = PhiSpec(kind="power", exponent=m)
    s = scalar_resolvent(phi, lam, b)
    res = s + lam * float(phi.value(np.array([s]))[0]) - b
    assert abs(res) < 1e-9 * (1.0 + abs(b))
    assert min(0.0, b) - 1e-12 <= s <= max(0.0, b) + 1e-12


def test_three_node_dirichlet_oracle():
    # h = 1, dt = 1, rho = e_2: exact resolvent is (1/7, 3/7, 1/7)
    g = UniformGrid.from_box(1, 1.0, 1.0)
    rho = GridFunction(g, np.array([0.0, 1.0, 0.0]))
    out = solve_ep(laplacian_stencil(g), 0, PhiSpec(kind="linear"), 1.0, rho)
    np.testing.assert_allclose(out.w.values, [1.0 / 7.0, 3.0 / 7.0, 1.0 / 7.0],
                               atol=1e-10)
    assert out.residual <= 1e-10


def test_dense_linear_cross_check():
    g = UniformGrid.from_box(1, 0.5, 3.0)
    n = g.shape[0]
    rng = np.random.default_rng(11)
    rho = rng.normal(size=n)
    dt = 0.3
    A = np.zeros((n, n))
    for i in range(n):
        A[i, i] = 1.0 + 2.0 * dt / g.h ** 2
        if i > 0:
            A[i, i - 1] = -dt / g.h ** 2
        if i + 1 < n:
            A[i, i + 1] = -dt / g.h ** 2
    want = np.linalg.solve(A, rho)
    out = solve_ep(laplacian_stencil(g), 0, PhiSpec(kind="linear"), dt,
                   GridFunction(g, rho),
                   config=EpSolveConfig(residual_tol=1e-12, max_sweeps=100000))
    np.testing.assert_allclose(out.w.values, want, atol=1e-10)


def test_fast_paths_identity():
    g = UniformGrid.from_box(1, 0.5, 2.0)
    rho = GridFunction(g, np.linspace(-1, 1, g.shape[0]))
    for phi, dt in ((PhiSpec(kind="zero"), 0.7), (PhiSpec(kind="power", exponent=2.0), 0.0)):
        out = solve_ep(laplacian_stencil(g), 0, phi, dt, rho)
        np.testing.assert_array_equal(out.w.values, rho.values)
        assert out.sweeps == 0


def test_comparison_and_contraction():
    g = UniformGrid.from_box(1, 0.25, 2.0)
    phi = PhiSpec(kind="power", exponent=2.0)
    cfg = EpSolveConfig(residual_tol=1e-12, max_sweeps=100000)
    rng = np.random.default_rng(3)
    for _ in range(5):
        a = rng.uniform(0.0, 1.0, size=g.shape)
        b = a + rng.uniform(0.0, 0.5, size=g.shape)
        wa = solve_ep(laplacian_stencil(g), 0, phi, 0.2, GridFunction(g, a), config=cfg).w
        wb = solve_ep(laplacian_stencil(g), 0, phi, 0.2, GridFunction(g, b), config=cfg).w
        assert np.all(wb.values >= wa.values - 1e-10)
        assert (discrete_lr_norm(wa.with_values(wa.values - wb.values), 1)
                <= discrete_lr_norm(wa.with_values(a - b), 1) + 1e-10)


def test_sup_norm_bound():
    g = UniformGrid.from_box(1, 0.25, 2.0)
    phi = PhiSpec(kind="power", exponent=0.5)
    rng = np.random.default_rng(5)
    rho = rng.uniform(-1.0, 2.0, size=g.shape)
    out = solve_ep(laplacian_stencil(g), 0, phi, 0.4, GridFunction(g, rho),
                   config=EpSolveConfig(residual_tol=1e-12, max_sweeps=200000))
    assert np.max(np.abs(out.w.values)) <= np.max(np.abs(rho)) + 1e-10


def test_residual_field_recomputed():
    g = UniformGrid.from_box(1, 0.5, 2.0)
    rho = GridFunction(g, np.ones(g.shape))
    out = solve_ep(laplacian_stencil(g), 0, PhiSpec(kind="power", exponent=2.0),
                   0.25, rho, config=EpSolveConfig(residual_tol=1e-12, max_sweeps=50000))
    assert np.max(np.abs(out.residual_field)) == pytest.approx(out.residual)
    assert out.residual <= 1e-12


def test_warm_start_reaches_same_fixed_point():
    g = UniformGrid.from_box(1, 0.25, 2.0)
    phi = PhiSpec(kind="power", exponent=2.0)
    cfg = EpSolveConfig(residual_tol=1e-13, max_sweeps=100000)
    rho = GridFunction(g, np.cos(g.axis_coords(0)))
    cold = solve_ep(laplacian_stencil(g), 0, phi, 0.3, rho, config=cfg).w
    warm = solve_ep(laplacian_stencil(g), 0, phi, 0.3, rho, config=cfg,
                    warm_start=rho.values * 0.5).w
    np.testing.assert_allclose(cold.values, warm.values, atol=1e-11)


def test_sweep_cap_raises():
    g = UniformGrid.from_box(1, 0.25, 2.0)
    rho = GridFunction(g, np.ones(g.shape))
    with pytest.raises(NonConvergenceError) as exc:
        solve_ep(laplacian_stencil(g), 0, PhiSpec(kind="power", exponent=2.0),
                 0.5, rho, config=EpSolveConfig(residual_tol=1e-13, max_sweeps=2))
    assert exc.value.sweeps == 2
    assert "stalled" in str(exc.value)


def test_combine_with_laplacian_merges_rows():
    g = UniformGrid.from_box(1, 0.5, 2.0)
    comb = combine_with_laplacian(WeightedStencil.empty(g.h, g.dim), 1)
    assert comb.n_offsets == 2
    np.testing.assert_allclose(comb.weights, 4.0)
    assert comb.total_weight == pytest.approx(8.0)
    # c = 0 leaves the measure part untouched
    same = combine_with_laplacian(laplacian_stencil(g), 0)
    np.testing.assert_allclose(same.weights, 4.0)


def test_config_validation():
    with pytest.raises(ConfigurationError):
        EpSolveConfig(residual_tol=0.0)
    with pytest.raises(ConfigurationError):
        EpSolveConfig(max_sweeps=0)
    with pytest.raises(ConfigurationError):
        solve_ep(laplacian_stencil(UniformGrid.from_box(1, 0.5, 1.0)), 0,
                 PhiSpec(kind="linear"), -1.0,
                 GridFunction(UniformGrid.from_box(1, 0.5, 1.0), np.zeros(5)))

def test_lp_interpolation_bound():
    # |w|_p <= |rho|_inf^((p-1)/p) |rho|_1^(1/p) for p in {1, 2, inf}
    g = UniformGrid.from_box(1, 0.25, 3.0)
    phi = PhiSpec(kind="power", exponent=2.0)
    rng = np.random.default_rng(11)
    rho = rng.uniform(-1.0, 2.0, size=g.shape)
    out = solve_ep(laplacian_stencil(g), 0, phi, 0.3, GridFunction(g, rho),
                   config=EpSolveConfig(residual_tol=1e-12))
    sup_rho = float(np.max(np.abs(rho)))
    l1_rho = discrete_lr_norm(GridFunction(g, rho), 1)
    for p in (1.0, 2.0, np.inf):
        lhs = discrete_lr_norm(out.w, p)
        assert lhs <= sup_rho ** (1.0 - 1.0 / p) * l1_rho ** (1.0 / p) + 1e-8
