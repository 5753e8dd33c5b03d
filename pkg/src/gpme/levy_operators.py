"""Discrete diffusion operators: the lattice Laplacian and weighted
difference quadratures of symmetric jump measures.

A stencil is a finite symmetric family of lattice offsets z_gamma = h*gamma
with nonnegative weights; it acts on a field by

    L[psi](x) = sum_gamma (psi(x + z_gamma) - psi(x)) * w_gamma,

optionally on top of the standard second-difference Laplacian (weight 1/h^2
at the 2N nearest neighbors).  Weights for a jump measure are the measure of
each lattice cell, so the total mass on any region is preserved by
construction; the origin cell is excluded.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, signal

from .errors import ConfigurationError, DataError, StencilError
from .grid_field import GridFunction, shifted
from .profiles import sphere_area

__all__ = [
    "MeasureSpec",
    "WeightedStencil",
    "OperatorSpec",
    "MomentReport",
    "laplacian_stencil",
    "measure_stencil",
    "apply_stencil",
    "apply_to_points",
    "check_moments",
    "testfunction_moment_bound",
    "consistency_error",
    "laplacian_reference",
    "levy_reference",
    "write_stencil_csv",
]

# direct shift loop below this offset count, dense-kernel convolution above
_KERNEL_THRESHOLD = 64


@dataclass(frozen=True)
class MeasureSpec:
    """Radial jump measure on R^N minus the origin.

    kind:
      * ``fractional``: density |z|^(-(N+alpha)), alpha in (0, 2)
      * ``split``: |z|^(-(N+beta)) for 0 < |z| <= 1 and |z|^(-(N+alpha))
        for |z| > 1
      * ``custom``: user radial density rho(r) >= 0

    ``scale`` multiplies the density (e.g. 1/pi turns the pure unit-order
    power on the line into the generator of the Cauchy semigroup).
    ``truncation`` chops the measure beyond a radius.  ``weight_rule`` picks
    cell-mass quadrature (default) or midpoint density times h^N.
    """

    kind: str
    alpha: float = None
    beta: float = None
    density: object = None
    scale: float = 1.0
    truncation: float = None
    tail_order: float = None
    finite_first_moment: bool = None
    weight_rule: str = "cell_mass"

    def __post_init__(self):
        if self.kind not in ("fractional", "split", "custom"):
            raise ConfigurationError(f"unknown measure kind {self.kind!r}", field="operator.measure")
        if self.kind in ("fractional", "split"):
            if self.alpha is None or not (0.0 < self.alpha < 2.0):
                raise ConfigurationError("alpha must lie in (0, 2)", field="operator.measure.alpha")
        if self.kind == "split" and (self.beta is None or not (0.0 < self.beta < 2.0)):
            raise ConfigurationError("beta must lie in (0, 2)", field="operator.measure.beta")
        if self.kind == "custom" and not callable(self.density):
            raise ConfigurationError("custom measure needs a radial density callable",
                                     field="operator.measure.density")
        if self.weight_rule not in ("cell_mass", "midpoint_density"):
            raise ConfigurationError("weight_rule must be cell_mass or midpoint_density",
                                     field="operator.measure.weight_rule")
        if not (self.scale > 0.0):
            raise ConfigurationError("measure scale must be positive", field="operator.measure.scale")
        if self.tail_order is None and self.kind in ("fractional", "split"):
            object.__setattr__(self, "tail_order", self.alpha)
        if self.finite_first_moment is None:
            ffm = self.tail_order is not None and self.tail_order > 1.0
            if self.truncation is not None:
                ffm = True
            object.__setattr__(self, "finite_first_moment", ffm)

    def radial_density(self, r):
        """Density value at radius r (> 0)."""
        r = np.asarray(r, dtype=float)
        if self.kind == "fractional":
            out = self.scale * r ** (-(1.0 * self.dim_hint + self.alpha))
        elif self.kind == "split":
            near = r ** (-(self.dim_hint + self.beta))
            far = r ** (-(self.dim_hint + self.alpha))
            out = self.scale * np.where(r <= 1.0, near, far)
        else:
            out = self.scale * np.asarray(self.density(r), dtype=float)
        if self.truncation is not None:
            out = np.where(r > self.truncation, 0.0, out)
        return out

    # density exponents need N; stored transiently by measure_stencil
    dim_hint: int = field(default=1, compare=False)

    def with_dim(self, dim):
        object.__setattr__(self, "dim_hint", dim)
        return self

    def mass_beyond(self, R, dim):
        """Measure of {|z| > R}; closed form for power tails, quadrature
        otherwise."""
        if self.truncation is not None and R >= self.truncation:
            return 0.0
        hi = self.truncation if self.truncation is not None else math.inf
        area = sphere_area(dim)
        if self.kind in ("fractional", "split") and R >= 1.0 or (
            self.kind == "fractional" and R > 0.0
        ):
            a = self.alpha
            top = 0.0 if hi == math.inf else hi ** (-a) / a
            return self.scale * area * (R ** (-a) / a - top)
        self.with_dim(dim)

        def g(r):
            return area * r ** (dim - 1) * float(self.radial_density(r))

        if hi == math.inf:
            val, err = integrate.quad(g, R, math.inf, epsabs=1e-13, epsrel=1e-11, limit=200)
        else:
            val, err = integrate.quad(g, R, hi, epsabs=1e-13, epsrel=1e-11, limit=200)
        if not np.isfinite(val):
            raise StencilError("tail mass quadrature did not converge")
        return val


@dataclass(frozen=True)
class WeightedStencil:
    """Symmetric nonnegative lattice weights at nonzero offsets."""

    h: float
    dim: int
    offsets: np.ndarray  # (n, N) integers
    weights: np.ndarray  # (n,)
    tail_mass_beyond_support: float = 0.0

    def __post_init__(self):
        off = np.asarray(self.offsets, dtype=int).reshape(-1, self.dim)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if off.shape[0] != w.shape[0]:
            raise StencilError("offset/weight count mismatch")
        if np.any(~np.isfinite(w)):
            bad = off[np.where(~np.isfinite(w))[0][0]]
            raise StencilError(f"non-finite weight at offset {tuple(bad)}", cell=tuple(bad))
        if np.any(w < 0.0):
            bad = off[np.where(w < 0.0)[0][0]]
            raise StencilError(f"negative weight at offset {tuple(bad)}", cell=tuple(bad))
        if off.shape[0] and np.any(np.all(off == 0, axis=1)):
            raise StencilError("origin offset is not allowed")
        # canonical lexicographic order for deterministic serialization
        order = np.lexsort(tuple(off[:, i] for i in reversed(range(self.dim))))
        off = off[order]
        w = w[order]
        object.__setattr__(self, "offsets", off)
        object.__setattr__(self, "weights", w)
        off.flags.writeable = False
        w.flags.writeable = False
        # symmetry: the mirrored family must be identical
        mirrored = -off
        morder = np.lexsort(tuple(mirrored[:, i] for i in reversed(range(self.dim))))
        if not np.array_equal(mirrored[morder], off) or not np.allclose(
            w[morder], w, rtol=0.0, atol=0.0
        ):
            raise StencilError("stencil weights are not symmetric under reflection")
        object.__setattr__(self, "_kernel", None)

    @property
    def n_offsets(self):
        return self.offsets.shape[0]

    @property
    def total_weight(self):
        return float(np.sum(self.weights))

    def offset_radii(self):
        """Euclidean |z_gamma| per offset."""
        return self.h * np.sqrt(np.sum(self.offsets.astype(float) ** 2, axis=1))

    def max_index_radius(self):
        if self.n_offsets == 0:
            return 0
        return int(np.max(np.abs(self.offsets)))

    def dense_kernel(self):
        """Weights as a dense (2K+1)^N array; kernel[K,...,K] = 0."""
        if self._kernel is not None:
            return self._kernel
        K = self.max_index_radius()
        kern = np.zeros((2 * K + 1,) * self.dim)
        idx = tuple((self.offsets[:, i] + K) for i in range(self.dim))
        kern[idx] = self.weights
        object.__setattr__(self, "_kernel", kern)
        return kern

    @classmethod
    def empty(cls, h, dim):
        return cls(h=h, dim=dim, offsets=np.zeros((0, dim), dtype=int),
                   weights=np.zeros(0))


def laplacian_stencil(grid):
    """Nearest-neighbor weights 1/h^2 along each axis: the discrete
    Laplacian as an explicit stencil."""
    offs = []
    for i in range(grid.dim):
        e = [0] * grid.dim
        e[i] = 1
        offs.append(list(e))
        e2 = [0] * grid.dim
        e2[i] = -1
        offs.append(e2)
    w = np.full(2 * grid.dim, 1.0 / grid.h ** 2)
    return WeightedStencil(h=grid.h, dim=grid.dim, offsets=np.array(offs), weights=w)


def _cell_weight_1d_power(measure, lo, hi):
    """Exact mass of the 1D interval [lo, hi] (0 < lo < hi) under a pure or
    split power density; antiderivative of s^(-1-c) is -s^(-c)/c."""

    def power_mass(a, b, c):
        return (a ** (-c) - b ** (-c)) / c

    if measure.truncation is not None:
        hi = min(hi, measure.truncation)
        if hi <= lo:
            return 0.0
    if measure.kind == "fractional":
        return measure.scale * power_mass(lo, hi, measure.alpha)
    out = 0.0
    if lo < 1.0:
        out += power_mass(lo, min(hi, 1.0), measure.beta)
    if hi > 1.0:
        out += power_mass(max(lo, 1.0), hi, measure.alpha)
    return measure.scale * out


_GL20 = np.polynomial.legendre.leggauss(20)


def _gl_cell_mass_1d(measure, center, half):
    nodes, wts = _GL20
    pts = center + half * nodes
    vals = measure.radial_density(np.abs(pts))
    return half * float(np.dot(wts, vals))


def _cell_weight_quad(measure, center, h, dim):
    """Cell mass by tensor Gauss-Legendre; a well-posed density is bounded
    on every non-origin cell, so fixed order suffices.  Custom densities
    additionally get a half-cell refinement check: a pole inside the cell
    makes the two estimates disagree, which a single quadrature cannot
    see."""
    if dim == 1:
        half = 0.5 * h
        out = _gl_cell_mass_1d(measure, center[0], half)
        if measure.kind == "custom":
            fine = (_gl_cell_mass_1d(measure, center[0] - 0.5 * half, 0.5 * half)
                    + _gl_cell_mass_1d(measure, center[0] + 0.5 * half, 0.5 * half))
            if not np.isfinite(fine) or abs(fine - out) > 1e-6 * (1.0 + abs(fine)):
                raise StencilError(
                    "density not integrable on the cell at "
                    f"{tuple(float(c) for c in center)}",
                    cell=tuple(int(round(c / h)) for c in center))
            out = fine
    else:
        nodes, wts = np.polynomial.legendre.leggauss(8)
        half = 0.5 * h
        grids = np.meshgrid(*([center[i] + half * nodes for i in range(dim)]), indexing="ij")
        pts = np.stack([g.reshape(-1) for g in grids], axis=-1)
        r = np.sqrt(np.sum(pts ** 2, axis=1))
        vals = measure.radial_density(r)
        wcombo = np.ones(len(nodes) ** dim)
        for i in range(dim):
            rep = np.meshgrid(*([wts] * dim), indexing="ij")[i].reshape(-1)
            wcombo = wcombo * rep
        out = (half ** dim) * float(np.dot(wcombo, vals))
    if not np.isfinite(out):
        raise StencilError(
            f"cell quadrature non-finite near {tuple(float(c) for c in center)}",
            cell=tuple(int(round(c / h)) for c in center))
    return out


def measure_stencil(measure, grid, support_radius=None):
    """Weights omega_gamma = mu(z_gamma + cell) for all offsets with
    |z_gamma| <= support_radius (default: the box diameter).

    The mass of the measure beyond the covered region is recorded in
    ``tail_mass_beyond_support`` so moment checks can add the analytic
    remainder instead of silently dropping it.
    """
    h = grid.h
    dim = grid.dim
    measure.with_dim(dim)
    if support_radius is None:
        support_radius = 2.0 * max(grid.half_extents)
    if measure.truncation is not None:
        support_radius = min(support_radius, measure.truncation + 0.5 * h)
    kmax = int(np.floor(support_radius / h + 0.5 + 1e-12))
    if kmax < 1:
        raise ConfigurationError("support radius leaves no offsets", field="operator.measure")

    offsets = []
    weights = []
    if dim == 1:
        use_closed = measure.kind in ("fractional", "split") and measure.weight_rule == "cell_mass"
        gammas = np.arange(1, kmax + 1)
        keep = gammas * h <= support_radius + 1e-12
        gammas = gammas[keep]
        for g in gammas:
            lo = (g - 0.5) * h
            hi = (g + 0.5) * h
            if measure.weight_rule == "midpoint_density":
                w = float(measure.radial_density(g * h)) * h
            elif use_closed:
                w = _cell_weight_1d_power(measure, lo, hi)
            else:
                w = _cell_weight_quad(measure, np.array([g * h]), h, 1)
            offsets.append([int(g)])
            weights.append(w)
            offsets.append([-int(g)])
            weights.append(w)
        covered_edge = (float(gammas[-1]) + 0.5) * h if len(gammas) else 0.5 * h
    else:
        rng = np.arange(-kmax, kmax + 1)
        mesh = np.meshgrid(*([rng] * dim), indexing="ij")
        all_off = np.stack([m.reshape(-1) for m in mesh], axis=-1)
        radii = h * np.sqrt(np.sum(all_off.astype(float) ** 2, axis=1))
        mask = (radii > 0.0) & (radii <= support_radius + 1e-12)
        all_off = all_off[mask]
        # quadrature once per sign-canonical representative, mirrored after
        seen = {}
        for off in all_off:
            key = tuple(off)
            mkey = tuple(-off)
            if mkey in seen:
                w = seen[mkey]
            else:
                center = off.astype(float) * h
                if measure.weight_rule == "midpoint_density":
                    w = float(measure.radial_density(float(np.linalg.norm(center)))) * h ** dim
                else:
                    w = _cell_weight_quad(measure, center, h, dim)
                seen[key] = w
            offsets.append(list(off))
            weights.append(w)
        covered_edge = support_radius

    tail = measure.mass_beyond(covered_edge, dim)
    return WeightedStencil(h=h, dim=dim, offsets=np.array(offsets, dtype=int),
                           weights=np.array(weights), tail_mass_beyond_support=float(tail))


def _neighbor_sum(stencil, values):
    """sum_gamma w_gamma * values(beta + gamma) with zero extension."""
    if stencil.n_offsets == 0:
        return np.zeros_like(values)
    if stencil.n_offsets <= _KERNEL_THRESHOLD:
        out = np.zeros_like(values)
        for off, w in zip(stencil.offsets, stencil.weights):
            out += w * shifted(values, tuple(off))
        return out
    # dense symmetric kernel: correlation equals convolution
    kern = stencil.dense_kernel()
    return signal.convolve(values, kern, mode="same", method="auto")


def _laplace_term(values, h, dim):
    out = -2.0 * dim * values.copy()
    for i in range(dim):
        off = [0] * dim
        off[i] = 1
        out += shifted(values, tuple(off))
        off[i] = -1
        out += shifted(values, tuple(off))
    return out / (h * h)


def apply_stencil(stencil, c, u):
    """c * discrete Laplacian of u plus the stencil part, zero extension
    outside the box."""
    if c not in (0, 1):
        raise ConfigurationError("local factor c must be 0 or 1", field="operator.c")
    vals = u.values if isinstance(u, GridFunction) else np.asarray(u, dtype=float)
    out = _neighbor_sum(stencil, vals) - stencil.total_weight * vals
    if c == 1:
        out = out + _laplace_term(vals, stencil.h, stencil.dim)
    if isinstance(u, GridFunction):
        return GridFunction(u.grid, out)
    return out


def apply_to_points(stencil, c, fn, points):
    """Apply the operator to a genuine function (no truncation of the
    argument): fn is evaluated at every shifted point.

    points: (M, N) array.  Returns (M,) values.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    base = np.asarray(fn(pts), dtype=float).reshape(pts.shape[0])
    out = -stencil.total_weight * base
    h = stencil.h
    for off, w in zip(stencil.offsets, stencil.weights):
        out += w * np.asarray(fn(pts + h * off), dtype=float).reshape(pts.shape[0])
    if c == 1:
        acc = -2.0 * stencil.dim * base
        for i in range(stencil.dim):
            e = np.zeros(stencil.dim)
            e[i] = h
            acc += np.asarray(fn(pts + e), dtype=float).reshape(pts.shape[0])
            acc += np.asarray(fn(pts - e), dtype=float).reshape(pts.shape[0])
        out += acc / (h * h)
    return out


# ---------------------------------------------------------------------------
# moment checks


@dataclass(frozen=True)
class MomentReport:
    """Finite moment sums of a stencil.

    near_second_moment : sum over h <= |z| <= 1 of |z|^2 w
    far_mass           : sum over |z| > 1 of w
    far_first_moment   : sum over |z| > 1 of |z| w
    a_pp_values        : per R, R^(alpha-2) * sum_{1<|z|<=R} |z|^2 w
                         + R^alpha * sum_{|z|>R} w  (analytic remainder of a
                         truncated measure included in the far sum)
    """

    variant: str
    near_second_moment: float
    far_mass: float
    far_first_moment: float
    a_pp_values: tuple = ()
    a_pp_max: float = None
    alpha: float = None
    truncation_remainder: float = 0.0

    def to_json_dict(self):
        return {
            "near_second_moment": self.near_second_moment,
            "far_mass": self.far_mass,
            "far_first_moment": self.far_first_moment,
            "a_pp_values": [{"R": R, "value": v} for R, v in self.a_pp_values],
            "a_pp_max": self.a_pp_max,
            "variant": self.variant,
            "alpha": self.alpha,
            "truncation_remainder": self.truncation_remainder,
        }

    def to_json(self):
        return json.dumps(self.to_json_dict(), indent=2)


def check_moments(stencil, variant="A", alpha=None, R_list=None):
    """Evaluate the moment sums of a stencil.

    variant: "A" (near second moment + far mass), "A_prime" (adds the far
    first moment), or "A_double_prime" (adds the scaled annulus/far sums for
    each R in R_list; needs alpha).
    """
    radii = stencil.offset_radii()
    w = stencil.weights
    near = float(np.sum(np.where(radii <= 1.0, radii ** 2 * w, 0.0)))
    far_mask = radii > 1.0
    far = float(np.sum(w[far_mask]))
    far_first = float(np.sum(radii[far_mask] * w[far_mask]))
    report = dict(variant=variant, near_second_moment=near, far_mass=far,
                  far_first_moment=far_first,
                  truncation_remainder=stencil.tail_mass_beyond_support)
    if variant == "A_double_prime":
        if alpha is None or not (0.0 < alpha < 2.0):
            raise ConfigurationError("A_double_prime needs alpha in (0, 2)", field="alpha")
        if not R_list:
            raise ConfigurationError("A_double_prime needs a nonempty R list", field="R_list")
        vals = []
        for R in R_list:
            if not (R > 1.0):
                raise ConfigurationError("A_double_prime radii must exceed 1", field="R_list")
            annulus = float(np.sum(np.where((radii > 1.0) & (radii <= R), radii ** 2 * w, 0.0)))
            beyond = float(np.sum(w[radii > R])) + stencil.tail_mass_beyond_support
            vals.append((float(R), R ** (alpha - 2.0) * annulus + R ** alpha * beyond))
        report["a_pp_values"] = tuple(vals)
        report["a_pp_max"] = max(v for _, v in vals)
        report["alpha"] = float(alpha)
    elif variant not in ("A", "A_prime"):
        raise ConfigurationError(f"unknown moment variant {variant!r}", field="variant")
    return MomentReport(**report)


def testfunction_moment_bound(stencil, variant, alpha=None, R=None):
    """Evaluate L[psi](0) for the certifying test functions.

    variant "A_prime" uses psi = |x|^2 - 1 inside the unit ball and
    2(|x| - 1) outside; the value dominates sum min(|z|^2, |z|) w.  variant
    "A_double_prime" uses psi = R^(alpha-2)|x|^2 - R^alpha inside |x| <= R
    and 0 outside; the value dominates the scaled annulus/far sum.  Either
    way the returned number is a certified upper bound for the corresponding
    moment quantity (the analytic remainder of a truncated measure is
    included in the far field).
    """
    radii = stencil.offset_radii()
    w = stencil.weights
    if variant == "A_prime":
        inside = radii <= 1.0
        psi_shift = np.where(inside, radii ** 2, 2.0 * radii - 1.0)
        # remainder sits at |z| > covered radius where psi - psi(0) >= |z| >= 1
        return float(np.sum(psi_shift * w)) + stencil.tail_mass_beyond_support
    if variant == "A_double_prime":
        if alpha is None or R is None or not (R > 1.0):
            raise ConfigurationError("A_double_prime bound needs alpha and R > 1", field="R")
        inside = radii <= R
        psi_shift = np.where(inside, R ** (alpha - 2.0) * radii ** 2, R ** alpha)
        return float(np.sum(psi_shift * w)) + R ** alpha * stencil.tail_mass_beyond_support
    raise ConfigurationError(f"unknown bound variant {variant!r}", field="variant")


# ---------------------------------------------------------------------------
# consistency against continuum references


def laplacian_reference(profile):
    """Analytic Laplacian for the profiles that have one."""
    from .profiles import GaussianProfile

    if isinstance(profile, GaussianProfile):
        def ref(points):
            pts = np.asarray(points, dtype=float)
            vals = profile.value(pts)
            d2 = np.sum((pts - np.asarray(profile.center)) ** 2, axis=-1)
            s = profile.spread
            return vals * (d2 / (4.0 * s * s) - profile.dim / (2.0 * s))

        return ref
    raise DataError("no analytic Laplacian for this profile")


def levy_reference(measure, profile, far_cut=60.0, inner_cut=1e-5):
    """Principal-value action of the measure on a smooth decaying profile in
    one dimension, by adaptive quadrature of the symmetrized difference:

        integral_0^inf (psi(x+s) + psi(x-s) - 2 psi(x)) rho(s) ds

    Below ``inner_cut`` the symmetrized difference drowns in rounding, so
    that piece is replaced by psi''(x) times the exact second moment of the
    density on (0, inner_cut).  The far field beyond ``far_cut`` contributes
    -psi(x) * mu(|z| > far_cut) (the shifted values are negligible for a
    decaying profile).
    """
    measure.with_dim(1)

    def second_moment_near(d):
        if measure.kind in ("fractional", "split"):
            expo = measure.beta if measure.kind == "split" else measure.alpha
            return measure.scale * d ** (2.0 - expo) / (2.0 - expo)
        val, _ = integrate.quad(lambda s: s * s * float(measure.radial_density(s)),
                                0.0, d, epsabs=1e-16, epsrel=1e-12)
        return val

    def ref(points):
        pts = np.asarray(points, dtype=float).reshape(-1, 1)
        x = pts[:, 0]
        base = profile.value(pts)

        def integrand(s):
            plus = profile.value((x + s).reshape(-1, 1))
            minus = profile.value((x - s).reshape(-1, 1))
            return (plus + minus - 2.0 * base) * float(measure.radial_density(s))

        out, _ = integrate.quad_vec(integrand, inner_cut, far_cut,
                                    epsabs=1e-12, epsrel=1e-11)
        d2h = 1e-3
        d2 = (profile.value((x + d2h).reshape(-1, 1))
              + profile.value((x - d2h).reshape(-1, 1)) - 2.0 * base) / (d2h * d2h)
        out = out + d2 * second_moment_near(inner_cut)
        out = out - base * measure.mass_beyond(far_cut, 1)
        return out

    return ref


def consistency_error(stencil, c, profile, reference, grid):
    """Discrete L1 distance between the stencil applied to the profile and a
    continuum reference, over the grid nodes.

    The profile is evaluated at shifted nodes directly (no box truncation),
    and the analytic remainder of a truncated measure is accounted for by
    subtracting psi(x) times the remainder mass (the shifted values beyond
    the support radius are negligible for decaying profiles).
    """
    pts = grid.coords().reshape(-1, grid.dim)
    disc = apply_to_points(stencil, c, profile.value, pts)
    disc = disc - profile.value(pts) * stencil.tail_mass_beyond_support
    ref = np.asarray(reference(pts), dtype=float).reshape(-1)
    return float(grid.cell_volume * np.sum(np.abs(disc - ref)))


@dataclass(frozen=True)
class OperatorSpec:
    """c * Laplacian + optional jump measure; at least one part present."""

    c: int = 1
    measure: MeasureSpec = None
    support_radius: float = None

    def __post_init__(self):
        if self.c not in (0, 1):
            raise ConfigurationError("operator factor c must be 0 or 1", field="operator.c")
        if self.c == 0 and self.measure is None:
            raise ConfigurationError("operator needs c = 1 or a jump measure", field="operator")

    def build_stencil(self, grid):
        if self.measure is None:
            return WeightedStencil.empty(grid.h, grid.dim)
        return measure_stencil(self.measure, grid, self.support_radius)


def _format_float(x):
    return repr(float(x))


def write_stencil_csv(path, stencil):
    """``gamma_1,...,gamma_N,weight`` rows in lexicographic offset order."""
    header = ",".join(f"gamma_{i + 1}" for i in range(stencil.dim)) + ",weight"
    lines = [header]
    for off, w in zip(stencil.offsets, stencil.weights):
        lines.append(",".join(str(int(g)) for g in off) + "," + _format_float(w))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
