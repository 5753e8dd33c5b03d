"""Time stepping: ledger identity, order preservation, CFL, transport."""

import numpy as np
import pytest

from gpme.config import build_plan, load_config
from gpme.elliptic_solver import EpSolveConfig, PhiSpec, combine_with_laplacian
from gpme.errors import ConfigurationError
from gpme.evolution import (FluxSpec, ProblemSpec, cfl_limit, escape_weights,
                            flux_divergence, one_sided_difference, run,
                            step_cde, step_gpme)
from gpme.grid_field import GridFunction, TimeGrid, UniformGrid, discrete_lr_norm
from gpme.levy_operators import OperatorSpec, WeightedStencil, laplacian_stencil
from gpme.profiles import BarenblattExact, BarenblattProfile, GaussianProfile


def _empty(g):
    return WeightedStencil.empty(g.h, g.dim)


def test_upwind_hand_oracle():
    # pure transport of a unit bump, f = u^2/2 increasing on [0, 1]:
    # interface flux is f(upwind left), so the bump cell loses
    # (dt/h) f(1) = 1/4 and its right neighbor gains the same
    g = UniformGrid.from_box(1, 0.5, 1.0)
    u = np.array([0.0, 1.0, 0.0, 0.0, 0.0])
    fl = FluxSpec(kind="burgers", u_range=(0.0, 1.0))
    out = step_cde(_empty(g), 0, PhiSpec(kind="zero"), fl, 0.25, g.h, u)
    np.testing.assert_allclose(out.w, [0.0, 0.75, 0.25, 0.0, 0.0], atol=1e-14)


def test_flux_divergence_upwind_direction():
    fl = FluxSpec(kind="burgers", u_range=(0.0, 1.0))
    v = np.array([0.0, 1.0, 0.0, 0.0, 0.0])
    np.testing.assert_allclose(flux_divergence(fl, v, 0.5), [0.0, 1.0, -1.0, 0.0, 0.0])


def test_one_sided_difference():
    v = np.array([0.0, 1.0, 3.0])
    np.testing.assert_allclose(one_sided_difference(v, 0, 1.0, "forward"),
                               [1.0, 2.0, -3.0])
    np.testing.assert_allclose(one_sided_difference(v, 0, 1.0, "backward"),
                               [0.0, 1.0, 2.0])


def test_cfl_limit_inclusive():
    g = UniformGrid.from_box(1, 0.5, 1.0)
    fl = FluxSpec(kind="burgers", u_range=(0.0, 1.0))
    lim = cfl_limit(fl, g.h, g.dim)
    assert lim == pytest.approx(0.25)
    u = np.array([0.0, 1.0, 0.0, 0.0, 0.0])
    step_cde(_empty(g), 0, PhiSpec(kind="zero"), fl, lim, g.h, u)
    with pytest.raises(ConfigurationError):
        step_cde(_empty(g), 0, PhiSpec(kind="zero"), fl, 2.0 * lim, g.h, u)


def test_escape_weights_boundary_only():
    g = UniformGrid.from_box(1, 0.5, 1.0)
    esc = escape_weights(combine_with_laplacian(_empty(g), 1), g.shape)
    np.testing.assert_allclose(esc, [4.0, 0.0, 0.0, 0.0, 4.0])


def test_run_ledger_identity_pme():
    plan = build_plan(load_config("pme_barenblatt_1d"))
    rep = run(plan.problem, plan.grid, plan.time_grid,
              config=EpSolveConfig(residual_tol=1e-13, max_sweeps=100000))
    m0 = rep.mass[0]
    assert np.max(np.abs(rep.identity_gap)) <= 1e-9 * (1.0 + m0)
    assert rep.trajectory.time_grid.knots[-1] == pytest.approx(0.5)
    assert len(rep.trajectory.fields) == plan.time_grid.n_steps + 1


def test_run_with_source_ledger():
    cfg = load_config({"preset": "heat_gaussian_1d", "problem": {"source": {
        "spatial": {"kind": "gaussian", "amplitude": 0.3, "spread": 0.5},
        "temporal": {"kind": "linear", "slope": 1.0},
    }}})
    plan = build_plan(cfg)
    rep = run(plan.problem, plan.grid, plan.time_grid,
              config=EpSolveConfig(residual_tol=1e-13, max_sweeps=20000))
    assert rep.source_cum[-1] > 0.0
    assert np.max(np.abs(rep.identity_gap)) <= 1e-9 * (1.0 + rep.mass[0])


def test_pme_compact_support_no_leak():
    # box is three times the support: nothing may reach the boundary
    plan = build_plan(load_config("pme_barenblatt_1d"))
    prof = BarenblattExact(plan.problem.initial.coeff
                           if hasattr(plan.problem.initial, "coeff")
                           else BarenblattProfile.coeff_for_unit_mass(), 1.0)
    rep = run(plan.problem, plan.grid, plan.time_grid,
              config=EpSolveConfig(residual_tol=1e-13, max_sweeps=100000))
    assert abs(rep.leak_diffusive[-1]) <= 1e-12
    final = rep.trajectory.field_at_knot(plan.time_grid.n_steps)
    support = prof.at_time(0.5).support_radius
    x = plan.grid.axis_coords(0)
    outside = np.abs(x) > 3.0 * support
    assert np.all(np.abs(final[outside]) <= 1e-13)


def test_step_gpme_monotone_and_contractive():
    g = UniformGrid.from_box(1, 0.25, 2.0)
    phi = PhiSpec(kind="power", exponent=2.0)
    st = _empty(g)
    cfg = EpSolveConfig(residual_tol=1e-12, max_sweeps=100000)
    rng = np.random.default_rng(19)
    for _ in range(5):
        a = rng.uniform(0.0, 1.0, size=g.shape)
        b = a + rng.uniform(0.0, 0.5, size=g.shape)
        ua = step_gpme(st, 1, phi, 0.05, a, config=cfg).w
        ub = step_gpme(st, 1, phi, 0.05, b, config=cfg).w
        assert np.all(ub >= ua - 1e-10)
        vol = g.cell_volume
        assert vol * np.sum(np.abs(ua - ub)) <= vol * np.sum(np.abs(a - b)) + 1e-10


def test_step_gpme_max_principle_and_positivity():
    g = UniformGrid.from_box(1, 0.25, 2.0)
    phi = PhiSpec(kind="power", exponent=2.0)
    rng = np.random.default_rng(23)
    u = rng.uniform(0.0, 3.0, size=g.shape)
    out = step_gpme(_empty(g), 1, phi, 0.1, u,
                    config=EpSolveConfig(residual_tol=1e-12, max_sweeps=100000)).w
    assert np.all(out >= -1e-12)
    assert np.max(out) <= np.max(u) + 1e-10


def test_cde_step_ledger_terms():
    plan = build_plan(load_config("cde_burgers_frac_1d"))
    rep = run(plan.problem, plan.grid, plan.time_grid,
              config=EpSolveConfig(residual_tol=1e-13, max_sweeps=20000))
    assert np.max(np.abs(rep.identity_gap)) <= 1e-9 * (1.0 + rep.mass[0])
    # convection moves mass toward the outflow side, some of it out of the box
    assert rep.leak_convective[-1] >= 0.0


def test_run_rejects_cfl_violating_time_grid():
    cfg = load_config("burgers_riemann_1d")
    plan = build_plan(cfg)
    tg = TimeGrid.uniform(0.5, 10.0 * plan.grid.h)
    with pytest.raises(ConfigurationError):
        run(plan.problem, plan.grid, tg)


def test_flux_table_validation():
    with pytest.raises(ConfigurationError):
        FluxSpec(kind="table", u_range=(0.0, 1.0), table_u=(0.0, 1.0),
                 table_f=(0.0,))
    with pytest.raises(ConfigurationError):
        FluxSpec(kind="burgers", u_range=(1.0, 0.0))
