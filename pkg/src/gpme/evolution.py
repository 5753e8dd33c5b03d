"""Implicit time stepping for the degenerate parabolic problem and its
convection variant.

Each step solves the resolvent problem

    U^j - dt_j L[phi(U^j)] = U^{j-1} + dt_j G^j  (- dt_j div F(U^{j-1}))

with the convective divergence, when present, taken explicitly through a
monotone two-point numerical flux under a CFL restriction.  Everything
outside the computational box is held at zero, and the run keeps an exact
mass ledger: interior mass changes only through the projected source, the
diffusive flux out of the box (escape weights), the convective flux through
the boundary faces, and the reported solver residuals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DataError
from .grid_field import GridFunction, Trajectory, project_cell_average, project_source, shifted
from .elliptic_solver import EpSolveConfig, combine_with_laplacian, solve_ep
from .levy_operators import OperatorSpec, _neighbor_sum

__all__ = [
    "FluxSpec",
    "ProblemSpec",
    "RunReport",
    "validate_flux",
    "flux_divergence",
    "one_sided_difference",
    "escape_weights",
    "step_gpme",
    "step_cde",
    "cfl_limit",
    "run",
]


@dataclass(frozen=True)
class FluxSpec:
    """Convective flux, one scalar flux function per axis.

    kind "burgers" uses u^2/2 on every axis; "linear" uses velocity[i] * u;
    "table" interpolates the given breakpoints piecewise-linearly (constant
    beyond the ends) on every axis.  ``numerical`` picks the two-point flux:
    "engquist_osher" (default) or "lax_friedrichs".  ``u_range`` is the
    declared solution range used for Lipschitz bounds, validation sampling,
    and the CFL restriction.
    """

    kind: str
    u_range: tuple
    numerical: str = "engquist_osher"
    velocity: tuple = None
    table_u: tuple = None
    table_f: tuple = None

    def __post_init__(self):
        if self.kind not in ("burgers", "linear", "table"):
            raise ConfigurationError(f"unknown flux kind {self.kind!r}", field="problem.flux.kind")
        if self.numerical not in ("engquist_osher", "lax_friedrichs"):
            raise ConfigurationError(f"unknown numerical flux {self.numerical!r}",
                                     field="problem.flux.numerical")
        lo, hi = float(self.u_range[0]), float(self.u_range[1])
        if not lo < hi:
            raise ConfigurationError("u_range must be an increasing pair",
                                     field="problem.flux.u_range")
        object.__setattr__(self, "u_range", (lo, hi))
        if self.kind == "linear":
            if self.velocity is None:
                raise ConfigurationError("linear flux needs a velocity tuple",
                                         field="problem.flux.velocity")
            object.__setattr__(self, "velocity", tuple(float(v) for v in self.velocity))
        if self.kind == "table":
            if self.table_u is None or self.table_f is None:
                raise ConfigurationError("table flux needs table_u and table_f",
                                         field="problem.flux")
            u = np.asarray(self.table_u, dtype=float)
            f = np.asarray(self.table_f, dtype=float)
            if u.ndim != 1 or u.shape != f.shape or u.size < 2 or np.any(np.diff(u) <= 0.0):
                raise ConfigurationError("flux table needs strictly increasing abscissae",
                                         field="problem.flux.table_u")
            object.__setattr__(self, "table_u", tuple(float(x) for x in u))
            object.__setattr__(self, "table_f", tuple(float(x) for x in f))

    def flux_value(self, u, axis=0):
        u = np.asarray(u, dtype=float)
        if self.kind == "burgers":
            return 0.5 * u * u
        if self.kind == "linear":
            return self.velocity[axis] * u
        return np.interp(u, self.table_u, self.table_f)

    def lipschitz(self, axis=0):
        lo, hi = self.u_range
        if self.kind == "burgers":
            return max(abs(lo), abs(hi))
        if self.kind == "linear":
            return abs(self.velocity[axis])
        slopes = np.diff(self.table_f) / np.diff(self.table_u)
        return float(np.max(np.abs(slopes))) if slopes.size else 0.0

    def max_lipschitz(self, dim):
        return max(self.lipschitz(i) for i in range(dim))

    def numerical_flux(self, a, b, axis=0):
        """Two-point flux F(a, b); F(u, u) = f(u)."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if self.numerical == "lax_friedrichs":
            lam = self.lipschitz(axis)
            return 0.5 * (self.flux_value(a, axis) + self.flux_value(b, axis)) - 0.5 * lam * (b - a)
        if self.kind == "burgers":
            return 0.5 * np.maximum(a, 0.0) ** 2 + 0.5 * np.minimum(b, 0.0) ** 2
        if self.kind == "linear":
            v = self.velocity[axis]
            return v * a if v >= 0.0 else v * b
        return (self.flux_value(0.0, axis)
                + _segment_integral(self.table_u, self.table_f, a, positive=True)
                + _segment_integral(self.table_u, self.table_f, b, positive=False))


def _segment_integral(table_u, table_f, a, positive):
    """integral_0^a of the clipped slope of a piecewise-linear table;
    constant extension outside the table contributes nothing."""
    u = np.asarray(table_u, dtype=float)
    f = np.asarray(table_f, dtype=float)
    slopes = np.diff(f) / np.diff(u)
    a = np.asarray(a, dtype=float)
    lo_a = np.minimum(a, 0.0)
    hi_a = np.maximum(a, 0.0)
    sgn = np.where(a >= 0.0, 1.0, -1.0)
    total = np.zeros(a.shape)
    for k, g in enumerate(slopes):
        part = max(g, 0.0) if positive else min(g, 0.0)
        if part == 0.0:
            continue
        overlap = np.clip(hi_a, u[k], u[k + 1]) - np.clip(lo_a, u[k], u[k + 1])
        total += part * overlap
    return sgn * total


def validate_flux(flux, dim=1, samples=33):
    """Sample the declared range: consistency F(u,u) = f(u) and the
    monotone property (nondecreasing in the first slot, nonincreasing in
    the second).  Raises ConfigurationError on a violation."""
    lo, hi = flux.u_range
    us = np.linspace(lo, hi, samples)
    scale = 1.0 + float(np.max(np.abs(flux.flux_value(us))))
    for axis in range(dim):
        diag = flux.numerical_flux(us, us, axis)
        if np.max(np.abs(diag - flux.flux_value(us, axis))) > 1e-10 * scale:
            raise ConfigurationError("numerical flux is not consistent on the declared range",
                                     field="problem.flux")
        A, B = np.meshgrid(us, us, indexing="ij")
        F = flux.numerical_flux(A, B, axis)
        if np.min(np.diff(F, axis=0)) < -1e-10 * scale:
            raise ConfigurationError("numerical flux decreases in its first argument",
                                     field="problem.flux")
        if np.max(np.diff(F, axis=1)) > 1e-10 * scale:
            raise ConfigurationError("numerical flux increases in its second argument",
                                     field="problem.flux")


def one_sided_difference(values, axis, h, direction):
    """(v(beta) - v(beta - e)) / h for direction "backward", or the forward
    mirror; zero extension."""
    off = [0] * values.ndim
    if direction == "backward":
        off[axis] = -1
        return (values - shifted(values, tuple(off))) / h
    if direction == "forward":
        off[axis] = 1
        return (shifted(values, tuple(off)) - values) / h
    raise ConfigurationError("direction must be backward or forward", field="direction")


def flux_divergence(flux, values, h):
    """Conservative divergence sum_i (F_i(U, U_+e) - F_i(U_-e, U)) / h with
    zero extension outside the box."""
    values = np.asarray(values, dtype=float)
    out = np.zeros_like(values)
    for axis in range(values.ndim):
        off = [0] * values.ndim
        off[axis] = 1
        up = shifted(values, tuple(off))
        off[axis] = -1
        down = shifted(values, tuple(off))
        right = flux.numerical_flux(values, up, axis)
        left = flux.numerical_flux(down, values, axis)
        out += (right - left) / h
    return out


def boundary_outflow(flux, values, h):
    """Net convective flux through the box boundary per unit time:
    h^(N-1) * (sum of right-face fluxes - sum of left-face fluxes)."""
    values = np.asarray(values, dtype=float)
    dim = values.ndim
    total = 0.0
    for axis in range(dim):
        last = np.take(values, -1, axis=axis)
        first = np.take(values, 0, axis=axis)
        right = flux.numerical_flux(last, np.zeros_like(last), axis)
        left = flux.numerical_flux(np.zeros_like(first), first, axis)
        total += float(np.sum(right) - np.sum(left))
    return h ** (dim - 1) * total


def cfl_limit(flux, h, dim):
    """Largest admissible explicit step for the convective part."""
    L = flux.max_lipschitz(dim)
    if L == 0.0:
        return np.inf
    return h / (2.0 * dim * L)


def escape_weights(combined_stencil, shape):
    """Per node, the total weight of jumps that land outside the box; the
    diffusive mass leak rate is h^N * sum phi(U) * escape."""
    ones = np.ones(shape)
    return combined_stencil.total_weight - _neighbor_sum(combined_stencil, ones)


@dataclass(frozen=True)
class ProblemSpec:
    """Operator + nonlinearity + data; flux None means no convection."""

    operator: OperatorSpec
    phi: object
    initial: object
    source: object = None
    flux: object = None


def step_gpme(stencil, c, phi, dt, u_prev, g=None, config=None, warm_start=None):
    """One implicit step without convection; returns the EpResult."""
    rho = np.asarray(u_prev, dtype=float)
    if g is not None:
        rho = rho + dt * np.asarray(g, dtype=float)
    return solve_ep(stencil, c, phi, dt, rho, config=config,
                    warm_start=u_prev if warm_start is None else warm_start)


def step_cde(stencil, c, phi, flux, dt, h, u_prev, g=None, config=None, warm_start=None):
    """Explicit monotone convection then the implicit diffusion solve."""
    limit = cfl_limit(flux, h, np.asarray(u_prev).ndim)
    if dt > limit * (1.0 + 1e-12):
        raise ConfigurationError(
            f"dt = {dt:g} violates the convective step bound {limit:g}",
            field="time.dt")
    rho = np.asarray(u_prev, dtype=float) - dt * flux_divergence(flux, u_prev, h)
    if g is not None:
        rho = rho + dt * np.asarray(g, dtype=float)
    return solve_ep(stencil, c, phi, dt, rho, config=config,
                    warm_start=u_prev if warm_start is None else warm_start)


@dataclass(frozen=True)
class RunReport:
    """Trajectory plus the per-knot mass ledger.

    identity_gap[j] = mass[j] - (mass[0] + source_cum[j]
                      - leak_diffusive[j] - leak_convective[j]);
    up to rounding it equals residual_mass_cum[j], the accumulated signed
    mass of the reported solver residuals.
    """

    trajectory: Trajectory
    mass: np.ndarray
    source_cum: np.ndarray
    leak_diffusive: np.ndarray
    leak_convective: np.ndarray
    residual_mass_cum: np.ndarray
    identity_gap: np.ndarray
    sweeps: np.ndarray
    residuals: np.ndarray
    min_value: np.ndarray
    max_value: np.ndarray

    def to_json_dict(self):
        return {
            "times": [float(t) for t in self.trajectory.time_grid.knots],
            "mass": [float(x) for x in self.mass],
            "source_cum": [float(x) for x in self.source_cum],
            "leak_diffusive": [float(x) for x in self.leak_diffusive],
            "leak_convective": [float(x) for x in self.leak_convective],
            "residual_mass_cum": [float(x) for x in self.residual_mass_cum],
            "identity_gap": [float(x) for x in self.identity_gap],
            "sweeps": [int(x) for x in self.sweeps],
            "residuals": [float(x) for x in self.residuals],
            "min_value": [float(x) for x in self.min_value],
            "max_value": [float(x) for x in self.max_value],
        }


def run(problem, grid, time_grid, config=None):
    """March the implicit scheme across time_grid and account for every
    unit of mass; returns a RunReport."""
    cfg = config if config is not None else EpSolveConfig()
    stencil = problem.operator.build_stencil(grid)
    c = problem.operator.c
    if problem.flux is not None:
        validate_flux(problem.flux, dim=grid.dim)
    comb = combine_with_laplacian(stencil, c)
    esc = escape_weights(comb, grid.shape)
    vol = grid.cell_volume

    u0 = project_cell_average(problem.initial, grid)
    sources = project_source(problem.source, grid, time_grid)
    steps = time_grid.steps

    fields = [u0.values]
    mass = [u0.mass()]
    src_cum = [0.0]
    leak_d = [0.0]
    leak_c = [0.0]
    res_cum = [0.0]
    sweeps = []
    residuals = []
    mins = [float(np.min(u0.values))]
    maxs = [float(np.max(u0.values))]

    u = u0.values
    for j, dt in enumerate(steps):
        g = sources[j] if sources is not None else None
        if problem.flux is not None:
            conv_inc = dt * boundary_outflow(problem.flux, u, grid.h)
            result = step_cde(stencil, c, problem.phi, problem.flux, dt, grid.h,
                              u, g=g, config=cfg)
        else:
            conv_inc = 0.0
            result = step_gpme(stencil, c, problem.phi, dt, u, g=g, config=cfg)
        w = result.w if not isinstance(result.w, GridFunction) else result.w.values
        p = problem.phi.value(w)
        fields.append(w)
        mass.append(vol * float(np.sum(w)))
        src_cum.append(src_cum[-1] + (dt * vol * float(np.sum(g)) if g is not None else 0.0))
        leak_d.append(leak_d[-1] + dt * vol * float(np.sum(p * esc)))
        leak_c.append(leak_c[-1] + conv_inc)
        res_cum.append(res_cum[-1] + vol * float(np.sum(result.residual_field)))
        sweeps.append(result.sweeps)
        residuals.append(result.residual)
        mins.append(float(np.min(w)))
        maxs.append(float(np.max(w)))
        u = w

    mass = np.array(mass)
    src_cum = np.array(src_cum)
    leak_d = np.array(leak_d)
    leak_c = np.array(leak_c)
    res_cum = np.array(res_cum)
    gap = mass - (mass[0] + src_cum - leak_d - leak_c)
    traj = Trajectory(grid=grid, time_grid=time_grid, fields=tuple(fields),
                      sources=tuple(sources) if sources is not None else None)
    return RunReport(trajectory=traj, mass=mass, source_cum=src_cum,
                     leak_diffusive=leak_d, leak_convective=leak_c,
                     residual_mass_cum=res_cum, identity_gap=gap,
                     sweeps=np.array(sweeps, dtype=int), residuals=np.array(residuals),
                     min_value=np.array(mins), max_value=np.array(maxs))
