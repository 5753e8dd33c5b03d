"""Stencil assembly: weights, moments, symmetry, consistency."""

import numpy as np
import pytest

from gpme.errors import ConfigurationError, StencilError
from gpme.grid_field import UniformGrid
from gpme.levy_operators import (MeasureSpec, OperatorSpec, WeightedStencil,
                                 apply_stencil, apply_to_points, check_moments,
                                 consistency_error, laplacian_reference,
                                 laplacian_stencil, levy_reference,
                                 measure_stencil)
from gpme.levy_operators import testfunction_moment_bound as tf_moment_bound
from gpme.profiles import GaussianProfile, PoissonKernelProfile


def test_laplacian_stencil_weights():
    g = UniformGrid.from_box(1, 0.5, 2.0)
    st = laplacian_stencil(g)
    assert st.n_offsets == 2
    np.testing.assert_allclose(st.weights, 4.0)
    assert st.tail_mass_beyond_support == 0.0


def test_laplacian_exact_on_quadratics():
    g = UniformGrid.from_box(1, 0.5, 3.0)
    x = g.axis_coords(0)
    u = x * x
    out = apply_stencil(laplacian_stencil(g), 0, u)
    # zero extension spoils the two boundary cells only
    np.testing.assert_allclose(out[1:-1], 2.0, atol=1e-12)


def test_c_flag_equals_explicit_laplacian():
    g = UniformGrid.from_box(1, 0.25, 2.0)
    rng = np.random.default_rng(7)
    u = rng.normal(size=g.shape)
    empty = WeightedStencil.empty(g.h, g.dim)
    np.testing.assert_allclose(apply_stencil(empty, 1, u),
                               apply_stencil(laplacian_stencil(g), 0, u),
                               atol=1e-14)


def test_fractional_unit_cell_weight_oracle():
    # alpha = 1, h = 1: integral of 2 r^-2 over [1/2, 3/2] is 4/3
    m = MeasureSpec(kind="fractional", alpha=1.0)
    st = measure_stencil(m, UniformGrid.from_box(1, 1.0, 6.0))
    i = int(np.argmin(np.abs(st.offset_radii() - 1.0)))
    assert st.weights[i] == pytest.approx(4.0 / 3.0, abs=1e-13)


def test_stencil_symmetry():
    m = MeasureSpec(kind="fractional", alpha=1.2, scale=0.7)
    st = measure_stencil(m, UniformGrid.from_box(1, 0.25, 4.0))
    offs = st.offsets[:, 0]
    w = dict(zip(offs.tolist(), st.weights.tolist()))
    for k, v in w.items():
        assert w[-k] == pytest.approx(v, rel=1e-14)
    assert np.all(st.weights > 0.0)


def test_fractional_tail_mass_decreases_with_reach():
    m = MeasureSpec(kind="fractional", alpha=1.0)
    g = UniformGrid.from_box(1, 0.5, 10.0)
    near = measure_stencil(m, g, support_radius=4.0)
    far = measure_stencil(m, g, support_radius=8.0)
    assert near.tail_mass_beyond_support > far.tail_mass_beyond_support > 0.0


def test_moments_variant_A():
    g = UniformGrid.from_box(1, 0.5, 4.0)
    rep = check_moments(laplacian_stencil(g), variant="A")
    assert rep.far_mass == 0.0
    assert rep.near_second_moment == pytest.approx(2.0, abs=1e-12)


def test_a_double_prime_flat_across_scales():
    m = MeasureSpec(kind="fractional", alpha=1.0)
    vals = []
    for h in (0.125, 0.0625):
        g = UniformGrid.from_box(1, h, 20.0)
        st = measure_stencil(m, g, support_radius=18.0)
        rep = check_moments(st, variant="A_double_prime", alpha=1.0,
                            R_list=[2.0, 4.0, 8.0])
        vals.extend(v for _, v in rep.a_pp_values)
    assert max(vals) / min(vals) <= 10.0


def test_testfunction_bound_dominates_moment_sums():
    m = MeasureSpec(kind="fractional", alpha=1.0)
    st = measure_stencil(m, UniformGrid.from_box(1, 0.25, 8.0))
    raw = float(np.sum(np.minimum(st.offset_radii() ** 2, st.offset_radii())
                       * st.weights))
    assert tf_moment_bound(st, "A_prime") + 1e-12 >= raw


def test_laplacian_consistency_second_order():
    prof = GaussianProfile(1.0, 0.25)
    ref = laplacian_reference(prof)
    errs = []
    for h in (0.1, 0.05):
        g = UniformGrid.from_box(1, h, 6.0)
        errs.append(consistency_error(laplacian_stencil(g), 0, prof, ref, g))
    assert errs[1] < errs[0] / 2.0


def test_levy_reference_matches_poisson_closed_form():
    # alpha = 1 at scale 1/pi generates the Poisson kernel flow, whose
    # generator has the closed form (x^2 - t^2) / (pi (x^2 + t^2)^2)
    m = MeasureSpec(kind="fractional", alpha=1.0, scale=1.0 / np.pi)
    prof = PoissonKernelProfile(1.0)
    ref = levy_reference(m, prof)
    xs = np.array([[0.0], [0.5], [2.0]])
    want = (xs[:, 0] ** 2 - 1.0) / (np.pi * (xs[:, 0] ** 2 + 1.0) ** 2)
    got = np.array([ref(np.array([p])) for p in xs]).ravel()
    np.testing.assert_allclose(got, want, atol=5e-7)


def test_fractional_consistency_improves():
    m = MeasureSpec(kind="fractional", alpha=1.0, scale=1.0 / np.pi)
    prof = PoissonKernelProfile(1.0)
    ref = levy_reference(m, prof)
    errs = []
    for h in (0.25, 0.125):
        g = UniformGrid.from_box(1, h, 20.0)
        errs.append(consistency_error(measure_stencil(m, g), 0, prof, ref, g))
    assert errs[1] < errs[0]


def test_apply_to_points_smooth_probe():
    g = UniformGrid.from_box(1, 0.25, 6.0)
    st = laplacian_stencil(g)
    out = apply_to_points(st, 0, lambda p: p[:, 0] ** 2, np.array([[0.0], [1.0]]))
    np.testing.assert_allclose(out, 2.0, atol=1e-10)


def test_custom_pole_density_rejected():
    bad = MeasureSpec(kind="custom", density=lambda r: 1.0 / np.abs(r - 1.0),
                      tail_order=2.0)
    with pytest.raises(StencilError) as exc:
        measure_stencil(bad, UniformGrid.from_box(1, 0.5, 4.0))
    assert "cell" in str(exc.value)


def test_custom_smooth_density_accepted():
    ok = MeasureSpec(kind="custom", density=lambda r: np.exp(-r), tail_order=2.0)
    st = measure_stencil(ok, UniformGrid.from_box(1, 0.5, 4.0))
    assert np.all(st.weights > 0.0)


def test_operator_spec_build():
    g = UniformGrid.from_box(1, 0.5, 2.0)
    local = OperatorSpec(c=1, measure=None)
    assert local.build_stencil(g).n_offsets == 0
    with pytest.raises(ConfigurationError):
        MeasureSpec(kind="fractional", alpha=2.5)

def test_operator_norm_bound_splits_near_and_far():
    # |L[psi]|_p <= |psi''|_p * sum_{|z|<=R} |z|^2 w + 2 |psi|_p * sum_{|z|>R} w
    prof = GaussianProfile(1.0, 0.5)
    g = UniformGrid.from_box(1, 0.1, 10.0)
    st = measure_stencil(MeasureSpec(kind="fractional", alpha=1.0), g)
    x = g.axis_coords(0)
    psi = prof.value(x[:, None])
    spread = 0.5
    psi2 = (x ** 2 / (4.0 * spread ** 2) - 1.0 / (2.0 * spread)) * psi
    applied = apply_stencil(st, 0, psi)
    radii = st.offset_radii()
    vol = g.cell_volume

    def norm(vals, p):
        if np.isinf(p):
            return float(np.max(np.abs(vals)))
        return float((vol * np.sum(np.abs(vals) ** p)) ** (1.0 / p))

    for R in (1.5, 2.0, 4.0):
        near = radii <= R
        second_moment = float(np.sum(radii[near] ** 2 * st.weights[near]))
        far = float(np.sum(st.weights[~near])) + st.tail_mass_beyond_support
        for p in (1.0, 2.0, np.inf):
            rhs = norm(psi2, p) * second_moment + 2.0 * norm(psi, p) * far
            assert norm(applied, p) <= rhs * (1.0 + 1e-9)
