"""Analytical instruments for runs: the smooth radial cutoff family, tail
masses, the uniform-tail (equitightness) certificate with its explicit
constants, translation and time moduli, and sup-in-time L^r distances
between space-time interpolants.

The cutoff 𝒳_R vanishes on |x| <= R/2, equals 1 on |x| >= R, and its
transition is the classical smooth step sigma(s) = e(s)/(e(s)+e(1-s)) with
e(s) = exp(-1/s).  Since 𝒳_R - 1 is compactly supported, discrete operator
norms of 𝒳_R are computed exactly by applying the stencil to the nodal
values of 𝒳_R - 1 (zero extension is then not a truncation), plus the
analytic remainder of any measure mass beyond the stencil support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import ConfigurationError, DataError
from .grid_field import (GridFunction, eval_spacetime_interpolant, lr_norm_of_values,
                         shifted)
from .levy_operators import apply_stencil
from .profiles import sphere_area

__all__ = [
    "smooth_step",
    "smooth_step_d1",
    "smooth_step_d2",
    "Cutoff",
    "build_cutoff",
    "operator_cutoff_norm",
    "forward_difference_norms",
    "tail_mass",
    "conjugate_exponents",
    "admissible_threshold",
    "EquitightnessReport",
    "equitightness_check",
    "translation_modulus",
    "time_equicontinuity_profile",
    "ct_lr_distance",
]


def _bump(s):
    """exp(-1/s) for s > 0, zero otherwise; safe at s = 0."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0.0
    with np.errstate(divide="ignore", over="ignore"):
        out[pos] = np.exp(-1.0 / s[pos])
    return out


def smooth_step(s):
    """Monotone C^inf step: 0 for s <= 0, 1 for s >= 1."""
    s = np.asarray(s, dtype=float)
    a = _bump(s)
    b = _bump(1.0 - s)
    with np.errstate(invalid="ignore"):
        out = np.where(s <= 0.0, 0.0, np.where(s >= 1.0, 1.0, a / (a + b)))
    return out


def smooth_step_d1(s):
    """First derivative of smooth_step; vanishes outside (0, 1)."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    core = (s > 0.0) & (s < 1.0)
    sc = s[core]
    a = np.exp(-1.0 / sc)
    b = np.exp(-1.0 / (1.0 - sc))
    u = 1.0 / sc ** 2 + 1.0 / (1.0 - sc) ** 2
    out[core] = a * b * u / (a + b) ** 2
    return out


def smooth_step_d2(s):
    """Second derivative of smooth_step, from the product/quotient rules
    applied to d1 = (ab) u / (a+b)^2 with a = e(s), b = e(1-s)."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    core = (s > 0.0) & (s < 1.0)
    sc = s[core]
    a = np.exp(-1.0 / sc)
    b = np.exp(-1.0 / (1.0 - sc))
    v = a * b
    u = 1.0 / sc ** 2 + 1.0 / (1.0 - sc) ** 2
    w = (a + b) ** 2
    dv = v * (1.0 / sc ** 2 - 1.0 / (1.0 - sc) ** 2)
    du = -2.0 / sc ** 3 + 2.0 / (1.0 - sc) ** 3
    dw = 2.0 * (a + b) * (a / sc ** 2 - b / (1.0 - sc) ** 2)
    out[core] = (dv * u + v * du) / w - v * u * dw / w ** 2
    return out


_SUP_GRID = np.linspace(0.0, 1.0, 200001)


@dataclass(frozen=True)
class Cutoff:
    """Radial cutoff 𝒳_R: zero inside R/2, one outside R, smooth between."""

    R: float
    dim: int = 1

    def __post_init__(self):
        if not (self.R > 0.0):
            raise ConfigurationError("cutoff radius must be positive", field="R")

    def value_radial(self, r):
        r = np.asarray(r, dtype=float)
        return smooth_step(2.0 * r / self.R - 1.0)

    def radial_derivative(self, r, order=1):
        r = np.asarray(r, dtype=float)
        s = 2.0 * r / self.R - 1.0
        fac = (2.0 / self.R) ** order
        if order == 1:
            return fac * smooth_step_d1(s)
        if order == 2:
            return fac * smooth_step_d2(s)
        raise ConfigurationError("derivative order must be 1 or 2", field="order")

    def value(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        return self.value_radial(np.sqrt(np.sum(pts ** 2, axis=-1)))

    def on_grid(self, grid):
        return GridFunction(grid, self.value_radial(grid.node_radii()))

    def derivative_norm(self, order, p):
        """L^p(R^N) norm of the k-th radial derivative, k in {1, 2}."""
        if p == math.inf:
            if order == 0:
                return 1.0
            fn = smooth_step_d1 if order == 1 else smooth_step_d2
            return (2.0 / self.R) ** order * float(np.max(np.abs(fn(_SUP_GRID))))
        if not (p >= 1.0):
            raise ConfigurationError("p must be >= 1", field="p")
        if order == 0:
            raise DataError("cutoff itself is not p-integrable; use order 1 or 2")
        area = sphere_area(self.dim)

        def integrand(r):
            d = self.radial_derivative(r, order)
            return area * r ** (self.dim - 1) * np.abs(d) ** p

        lo, hi = 0.5 * self.R, self.R
        val, _ = integrate.quad(integrand, lo, hi, epsabs=1e-15, epsrel=1e-12, limit=400)
        return float(val) ** (1.0 / p)


def build_cutoff(R, grid):
    """Nodal 𝒳_R on the given grid plus the smooth evaluator."""
    cut = Cutoff(R=float(R), dim=grid.dim)
    return cut.on_grid(grid), cut


def operator_cutoff_norm(stencil, c, cutoff, grid, p):
    """Discrete surrogate for the L^p norm of the operator applied to 𝒳_R:
    the stencil acts on the nodal values of 𝒳_R - 1 (compactly supported, so
    zero extension is exact), and the measure mass beyond the stencil
    support contributes (1 - 𝒳_R) times the analytic remainder."""
    if min(grid.half_extents) < cutoff.R:
        raise ConfigurationError("cutoff radius exceeds the box", field="R")
    X = cutoff.on_grid(grid).values
    v = apply_stencil(stencil, c, X - 1.0) + (1.0 - X) * stencil.tail_mass_beyond_support
    return lr_norm_of_values(v, grid.cell_volume, p)


def forward_difference_norms(cutoff, grid, p):
    """sum_i of the L^p norms of the one-sided differences of 𝒳_R at grid
    spacing; the convective counterpart of operator_cutoff_norm."""
    if min(grid.half_extents) < cutoff.R:
        raise ConfigurationError("cutoff radius exceeds the box", field="R")
    X = cutoff.on_grid(grid).values - 1.0
    total = 0.0
    for axis in range(grid.dim):
        off = [0] * grid.dim
        off[axis] = 1
        d = (shifted(X, tuple(off)) - X) / grid.h
        total += lr_norm_of_values(d, grid.cell_volume, p)
    return total


def tail_mass(u, R, r=1.0):
    """h^N sum over |x_beta| > R of |U_beta|^r; straddling cells counted by
    their center."""
    if not (r >= 1.0):
        raise ConfigurationError("r must be >= 1", field="r")
    radii = u.grid.node_radii()
    vals = np.abs(u.values)
    mask = radii > R
    return u.grid.cell_volume * float(np.sum(np.where(mask, vals ** r, 0.0)))


def conjugate_exponents(ell):
    """(p, q) with p = 1/(1-ell) capped at infinity, q its conjugate."""
    if not (0.0 < ell <= 1.0):
        raise ConfigurationError("regularity exponent must lie in (0, 1]", field="ell")
    if ell >= 1.0:
        return math.inf, 1.0
    p = 1.0 / (1.0 - ell)
    return p, p / (p - 1.0)


def admissible_threshold(operator, dim):
    """Smallest admissible regularity exponent for the uniform tail bound,
    or None when no covered weight condition applies.

    Local part: (N-2)^+/N.  Measure with a finite first moment: (N-1)/N.
    Measure with power tail of order alpha: (N-alpha)^+/N.  A combined
    operator must clear both."""
    local = max(0.0, dim - 2.0) / dim if operator.c == 1 else None
    measure = operator.measure
    if measure is None:
        return local
    options = []
    if measure.finite_first_moment:
        options.append((dim - 1.0) / dim)
    if measure.tail_order is not None:
        options.append(max(0.0, dim - measure.tail_order) / dim)
    if not options:
        return None
    nonlocal_thr = min(options)
    if local is None:
        return nonlocal_thr
    return max(local, nonlocal_thr)


@dataclass(frozen=True)
class EquitightnessReport:
    """Uniform tail certificate for one run and one radius.

    lhs is the worst tail mass over knots and interval midpoints of the
    time interpolant; rhs_total = M^(r-1) (u0_piece + source_piece
    + C * operator_piece + conv_constant * convection_piece)."""

    R: float
    r: float
    p: float
    q: float
    ell: float
    seminorm: float
    M: float
    C: float
    u0_piece: float
    source_piece: float
    operator_piece: float
    convection_piece: float
    conv_constant: float
    rhs_total: float
    lhs: float
    leakage_allowance: float
    passed: bool
    bound_asserted: bool
    note: str

    def to_json_dict(self):
        return {
            "R": self.R,
            "r": self.r,
            "p": "inf" if self.p == math.inf else self.p,
            "q": self.q,
            "ell": self.ell,
            "seminorm": self.seminorm,
            "M": self.M,
            "C": self.C,
            "u0_piece": self.u0_piece,
            "source_piece": self.source_piece,
            "operator_piece": self.operator_piece,
            "convection_piece": self.convection_piece,
            "conv_constant": self.conv_constant,
            "rhs_total": self.rhs_total,
            "lhs": self.lhs,
            "leakage_allowance": self.leakage_allowance,
            "passed": self.passed,
            "bound_asserted": self.bound_asserted,
            "note": self.note,
        }


def _sample_times(time_grid):
    knots = time_grid.knots
    mids = 0.5 * (knots[:-1] + knots[1:])
    return np.sort(np.concatenate([knots, mids]))


def equitightness_check(traj, problem, R, r=1.0, leakage_allowance=0.0, stencil=None):
    """Evaluate the uniform tail bound for a finished trajectory.

    The left side samples the time interpolant at knots and midpoints
    (piecewise linear in time, so the per-cell sup sits at a knot); the
    right side assembles the declared data norms, the regularity constants
    of phi on [-M, M], and the discrete operator norm of the cutoff."""
    grid = traj.grid
    T = traj.time_grid.final_time
    X_nodal, cutoff = build_cutoff(R, grid)
    if stencil is None:
        stencil = problem.operator.build_stencil(grid)

    initial = problem.initial
    source = problem.source
    sup0 = initial.sup_norm()
    l1_0 = initial.l1_norm()
    if source is None or getattr(source, "is_zero", False):
        g_l1l1 = 0.0
        g_l1linf = 0.0
        g_piece = 0.0
    else:
        g_l1l1 = source.l1l1_norm(T)
        g_l1linf = source.l1linf_norm(T)
        g_piece = source.weighted_l1l1(cutoff, T)
    M = sup0 + g_l1linf

    ell = problem.phi.hoelder_exponent(M)
    seminorm = problem.phi.hoelder_seminorm(M)
    p, q = conjugate_exponents(ell)
    data_l1 = l1_0 + g_l1l1
    C = seminorm * M ** (ell - 1.0 / q) * data_l1 ** (1.0 / q)

    u0_piece = initial.weighted_abs_l1(cutoff)
    op_piece = T * operator_cutoff_norm(stencil, problem.operator.c, cutoff, grid, p)

    if problem.flux is not None:
        L_F = problem.flux.max_lipschitz(grid.dim)
        conv_constant = 2.0 * L_F * M ** (1.0 - 1.0 / q) * data_l1 ** (1.0 / q)
        conv_piece = T * forward_difference_norms(cutoff, grid, p)
    else:
        conv_constant = 0.0
        conv_piece = 0.0

    rhs = M ** (r - 1.0) * (u0_piece + g_piece + C * op_piece + conv_constant * conv_piece)

    lhs = 0.0
    for t in _sample_times(traj.time_grid):
        vals = traj.values_at_time(float(t))
        lhs = max(lhs, tail_mass(GridFunction(grid, vals), R, r))

    threshold = admissible_threshold(problem.operator, grid.dim)
    asserted = threshold is not None and threshold < ell <= 1.0
    note = ""
    if threshold is None:
        asserted = False
        note = "no covered weight condition for this measure; tail bound not asserted"
    elif not asserted:
        note = (f"exponent {ell:g} does not exceed the admissible threshold "
                f"{threshold:g} for this operator; tail bound not asserted")
    if problem.flux is not None and p != math.inf and p <= grid.dim:
        asserted = False
        note = "convective term requires p > N; tail bound not asserted"

    passed = lhs <= rhs * (1.0 + 1e-9) + leakage_allowance
    return EquitightnessReport(
        R=float(R), r=float(r), p=p, q=q, ell=ell, seminorm=seminorm, M=M, C=C,
        u0_piece=u0_piece, source_piece=g_piece, operator_piece=op_piece,
        convection_piece=conv_piece, conv_constant=conv_constant,
        rhs_total=rhs, lhs=lhs, leakage_allowance=float(leakage_allowance),
        passed=bool(passed), bound_asserted=bool(asserted), note=note)


def translation_modulus(f, shifts):
    """Table of zeta -> sup over sampled |xi| <= zeta of the L^1 distance
    between f and its xi-translate.

    f is either a profile descriptor (closed-form or quadrature distance)
    or a GridFunction (shifts must then be lattice-aligned)."""
    entries = []
    if isinstance(f, GridFunction):
        h = f.grid.h
        for xi in shifts:
            vec = np.atleast_1d(np.asarray(xi, dtype=float))
            steps = vec / h
            k = np.rint(steps).astype(int)
            if np.max(np.abs(steps - k)) > 1e-9:
                raise ConfigurationError("grid shifts must be lattice-aligned", field="shifts")
            d = f.grid.cell_volume * float(np.sum(np.abs(f.values - shifted(f.values, tuple(k)))))
            entries.append((float(np.linalg.norm(vec)), d))
    else:
        for xi in shifts:
            zeta = float(np.linalg.norm(np.atleast_1d(np.asarray(xi, dtype=float))))
            entries.append((zeta, float(f.shift_l1_distance(xi))))
    entries.sort(key=lambda e: e[0])
    table = []
    running = 0.0
    for zeta, d in entries:
        running = max(running, d)
        table.append((zeta, running))
    return table


def time_equicontinuity_profile(traj, r=1.0):
    """Symmetric matrix of L^r distances between saved knots."""
    n = len(traj.fields)
    vol = traj.grid.cell_volume
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = lr_norm_of_values(traj.fields[i] - traj.fields[j], vol, r)
            out[i, j] = d
            out[j, i] = d
    return out


def ct_lr_distance(traj_a, traj_b, r=1.0, times=None):
    """sup over sampled times of the L^r distance between the two
    space-time interpolants, evaluated on the finer grid's cells."""
    Ta = traj_a.time_grid.final_time
    Tb = traj_b.time_grid.final_time
    if abs(Ta - Tb) > 1e-12 * max(1.0, Ta):
        raise DataError("trajectories cover different time intervals")
    if traj_a.grid.h <= traj_b.grid.h:
        target = traj_a.grid
    else:
        target = traj_b.grid
    pts = target.coords().reshape(-1, target.dim)
    if times is None:
        knots = np.union1d(traj_a.time_grid.knots, traj_b.time_grid.knots)
        mids = 0.5 * (knots[:-1] + knots[1:])
        times = np.sort(np.concatenate([knots, mids]))
    worst = 0.0
    for t in times:
        va = eval_spacetime_interpolant(traj_a, pts, float(t))
        vb = eval_spacetime_interpolant(traj_b, pts, float(t))
        worst = max(worst, lr_norm_of_values(va - vb, target.cell_volume, r))
    return worst
