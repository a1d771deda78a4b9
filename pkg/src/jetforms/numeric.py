"""Numeric side: sampled sections, quadrature, the wave evolution, oracles.

Everything here exists to corroborate the symbolic machinery:

* sampled sections with spectral (periodic) or fourth-order finite-difference
  jets, and quadrature of Lagrangians and pulled-back forms;
* the decomposition of a force functional into body and boundary terms, with
  an exact-integration path for polynomial fixtures (the identities under
  test hold to roundoff there, quadrature error would only obscure them);
* the Cauchy evolution of the fourth-order wave example, advanced exactly
  per spatial Fourier mode by a dense matrix exponential, so conservation
  checks see no time-stepping error at all;
* a finite-difference functional-derivative oracle for Lagrange derivatives.

Periodic grids stand in for the decay-at-infinity assumptions of the
continuum statements: both make boundary terms and exact forms integrate to
zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .dedonder import (
    BoundaryForm,
    DeDonderForm,
    PhiDecomposition,
)
from .expressions import Expr, PolynomialSection, substitute_section
from .forms import holonomic_reduce, interior_product
from .jets import JetConfig, base_coord, field_coord, jet_coord, multiindices


@dataclass(frozen=True)
class GridSpec:
    """Uniform tensor grid; per axis (lower, upper, count, periodic).

    Periodic axes exclude the right endpoint (count cells of width
    (upper-lower)/count); non-periodic axes include both endpoints.
    """

    axes: tuple

    def __post_init__(self):
        for lo, hi, count, periodic in self.axes:
            if not (np.isfinite(lo) and np.isfinite(hi) and hi > lo):
                raise ValueError(f"bad axis bounds ({lo}, {hi})")
            if count < 8:
                raise ValueError(f"grids need at least 8 points per axis, got {count}")

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple:
        return tuple(int(count) for _, _, count, _ in self.axes)

    def spacing(self, axis: int) -> float:
        lo, hi, count, periodic = self.axes[axis]
        return (hi - lo) / count if periodic else (hi - lo) / (count - 1)

    def points(self, axis: int) -> np.ndarray:
        lo, hi, count, periodic = self.axes[axis]
        if periodic:
            return lo + self.spacing(axis) * np.arange(count)
        return np.linspace(lo, hi, count)

    def meshes(self) -> list:
        grids = np.meshgrid(*(self.points(i) for i in range(self.ndim)), indexing="ij")
        return list(grids)

    def quadrature_weights(self, axis: int) -> np.ndarray:
        lo, hi, count, periodic = self.axes[axis]
        h = self.spacing(axis)
        if periodic:
            return np.full(count, h)
        w = np.full(count, h)
        w[0] = w[-1] = h / 2
        return w


def quadrature(values: np.ndarray, grid: GridSpec) -> float:
    """Trapezoid rule; exact-weight (flat) trapezoid on periodic axes."""
    acc = np.asarray(values, dtype=float)
    for axis in range(grid.ndim - 1, -1, -1):
        w = grid.quadrature_weights(axis)
        acc = np.tensordot(acc, w, axes=([axis], [0]))
    return float(acc)


def evaluate_on_grid(e: Expr, values: dict, shape: tuple) -> np.ndarray:
    """Float evaluation of an expression on coordinate arrays."""
    total = np.zeros(shape)
    for mono, coeff in e.terms():
        term = np.full(shape, float(coeff))
        for coord, exp in mono:
            term = term * np.asarray(values[coord], dtype=float) ** exp
        total += term
    return total


def _spectral_derivative(values: np.ndarray, axis: int, length: float) -> np.ndarray:
    n = values.shape[axis]
    freqs = 2.0 * np.pi * np.fft.rfftfreq(n, d=length / n)
    spectrum = np.fft.rfft(values, axis=axis)
    if n % 2 == 0:
        # zero the Nyquist bin for odd derivatives
        freqs = freqs.copy()
        freqs[-1] = 0.0
    shape = [1] * values.ndim
    shape[axis] = freqs.size
    spectrum = spectrum * (1j * freqs.reshape(shape))
    return np.fft.irfft(spectrum, n=n, axis=axis)


def _fd_matrix(n: int, h: float) -> np.ndarray:
    """Dense fourth-order first-derivative matrix with one-sided edge rows."""
    if n < 5:
        raise ValueError("fourth-order stencils need at least 5 points")
    D = np.zeros((n, n))
    c = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
    for i in range(2, n - 2):
        D[i, i - 2 : i + 3] = c
    D[0, :5] = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
    D[1, :5] = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0
    D[n - 2, n - 5 :] = -np.array([-3.0, -10.0, 18.0, -6.0, 1.0])[::-1] / 12.0
    D[n - 1, n - 5 :] = -np.array([-25.0, 48.0, -36.0, 16.0, -3.0])[::-1] / 12.0
    return D / h


def _derivative(values: np.ndarray, axis: int, grid: GridSpec) -> np.ndarray:
    lo, hi, count, periodic = grid.axes[axis]
    if periodic:
        return _spectral_derivative(values, axis, hi - lo)
    D = _fd_matrix(count, grid.spacing(axis))
    moved = np.moveaxis(values, axis, -1)
    out = moved @ D.T
    return np.moveaxis(out, -1, axis)


@dataclass
class SampledSection:
    """Grid samples of a section, with lazily computed jet arrays.

    Jet arrays are produced by this module's own differentiation (spectral on
    periodic axes, fourth-order finite differences otherwise) and stored per
    canonical multi-index, so mixed partials are symmetric by construction.
    """

    grid: GridSpec
    values: list
    jets: dict = field(default_factory=dict)

    def __post_init__(self):
        for arr in self.values:
            if arr.shape != self.grid.shape:
                raise ValueError("sample shape does not match the grid")

    @property
    def n(self) -> int:
        return len(self.values)

    def jet(self, a: int, indices: tuple) -> np.ndarray:
        indices = tuple(sorted(indices))
        if not indices:
            return self.values[a - 1]
        key = (a, indices)
        cached = self.jets.get(key)
        if cached is None:
            lower = self.jet(a, indices[:-1])
            cached = _derivative(lower, indices[-1] - 1, self.grid)
            self.jets[key] = cached
        return cached

    def coordinate_arrays(self, cfg: JetConfig, order: int) -> dict:
        """Coordinate -> array mapping for evaluating expressions on the grid."""
        meshes = self.grid.meshes()
        values = {base_coord(i + 1): meshes[i] for i in range(self.grid.ndim)}
        for a in range(1, self.n + 1):
            values[field_coord(a)] = self.values[a - 1]
            for level in range(1, order + 1):
                for I in multiindices(cfg.m, level):
                    values[jet_coord(a, I)] = self.jet(a, I)
        return values


def numeric_jet(section: SampledSection, cfg: JetConfig, order: int) -> dict:
    """All jet arrays up to the given order (at most 2k-1)."""
    if order > cfg.working_order:
        raise ValueError(f"order {order} exceeds the working order {cfg.working_order}")
    out = {}
    for a in range(1, section.n + 1):
        for level in range(1, order + 1):
            for I in multiindices(cfg.m, level):
                out[(a, I)] = section.jet(a, I)
    return out


def sample_section(section: PolynomialSection, grid: GridSpec) -> SampledSection:
    """Evaluate a (fully determined) polynomial section on a grid."""
    if grid.ndim != section.cfg.m:
        raise ValueError("grid dimension does not match the configuration")
    meshes = grid.meshes()
    values = {base_coord(i + 1): meshes[i] for i in range(grid.ndim)}
    arrays = []
    for comp in section.components:
        if any(c[0] == "c" for c in comp.variables()):
            raise ValueError("cannot sample a section with free coefficients")
        arrays.append(evaluate_on_grid(comp, values, grid.shape))
    return SampledSection(grid, arrays)


def integrate_action(
    cfg: JetConfig, L: Expr, section: SampledSection, grid: GridSpec | None = None
) -> float:
    """Quadrature of the action integrand L(j^k sigma) over the grid."""
    grid = section.grid if grid is None else grid
    values = section.coordinate_arrays(cfg, cfg.k)
    return quadrature(evaluate_on_grid(L, values, grid.shape), grid)


# -- decomposition of force functionals ---------------------------------------


def _exact_antiderivative(e: Expr, coord) -> Expr:
    out = Expr.zero()
    for mono, coeff in e.terms():
        powers = dict(mono)
        exp = powers.get(coord, 0)
        powers[coord] = exp + 1
        out = out + Expr.monomial(powers, Fraction(coeff, exp + 1))
    return out


def _exact_integral_1d(e: Expr, coord, lo: Fraction, hi: Fraction) -> Expr:
    anti = _exact_antiderivative(e, coord)
    upper = anti.substitute({coord: Expr.constant(hi)})
    lower = anti.substitute({coord: Expr.constant(lo)})
    return upper - lower


def _exact_box_integral(e: Expr, grid: GridSpec) -> Fraction:
    out = e
    for axis in range(grid.ndim):
        lo, hi, _, _ = grid.axes[axis]
        out = _exact_integral_1d(
            out, base_coord(axis + 1), Fraction(lo), Fraction(hi)
        )
    value = out.constant_term()
    assert out == Expr.constant(value), "integral left free variables behind"
    return Fraction(value)


def decomposition_terms(
    dec: PhiDecomposition,
    xi: BoundaryForm,
    Y,
    section,
    region: GridSpec,
    method: str = "exact",
):
    """Body/boundary decomposition of the force functional on a box.

    Returns ``(total, body, boundary)`` with

        total    = integral over K of j^k sigma*(Y^k -| Phi),
        body     = integral over K of [j sigma*(Phi_a) - P^i_{a,i}] Y^a d_m x,
        boundary = integral over the boundary of K of j sigma*(Y^{2k-1} -| Xi),

    and total = body + boundary (Stokes).  ``Y`` must be a vertical
    projectable field.  With ``method="exact"`` (polynomial sections only)
    the integrands are integrated exactly and the identity holds to roundoff;
    ``method="trapezoid"`` samples a :class:`SampledSection` on the region
    grid and is limited by quadrature accuracy.
    """
    from .prolongations import ProjectableField, prolong  # runtime import: cycle

    if not isinstance(Y, ProjectableField) or not Y.is_vertical:
        raise ValueError("the decomposition requires a vertical projectable field")
    cfg = dec.cfg
    if cfg.m not in (1, 2):
        raise ValueError("boundary integrals are implemented for m in {1, 2}")
    prolonged_k = prolong(Y, cfg.k)
    total_expr = holonomic_reduce(
        interior_product(prolonged_k, dec.form()), cfg
    ).coefficient(tuple(("dx", i) for i in range(1, cfg.m + 1)))
    current = holonomic_reduce(
        interior_product(prolong(Y, cfg.working_order), xi.form), cfg
    )

    if method == "exact":
        if not isinstance(section, PolynomialSection):
            raise ValueError("exact integration needs a PolynomialSection")
        body_expr = Expr.zero()
        for a in range(1, cfg.n + 1):
            e_a = dec.component(a) - xi.coefficients.holonomic_divergence(a)
            body_expr = body_expr + e_a * Y.vertical_components[a - 1]
        total = float(_exact_box_integral(substitute_section(total_expr, section), region))
        body = float(_exact_box_integral(substitute_section(body_expr, section), region))
        boundary = float(_exact_boundary_integral(current, section, region))
        return total, body, boundary
    if method != "trapezoid":
        raise ValueError(f"unknown method {method!r}")
    if isinstance(section, SampledSection):
        if section.grid.axes != region.axes:
            raise ValueError("the sampled section does not live on the region grid")
        sampled = section
    else:
        sampled = sample_section(section, region)
    # jets stop at the working order 2k-1; the divergence of the level-one
    # coefficients (an order-2k object) is taken on the grid instead
    arrays = sampled.coordinate_arrays(cfg, cfg.working_order)
    total = quadrature(evaluate_on_grid(total_expr, arrays, region.shape), region)
    body_vals = np.zeros(region.shape)
    for a in range(1, cfg.n + 1):
        density = evaluate_on_grid(dec.component(a), arrays, region.shape)
        for i in range(1, cfg.m + 1):
            p_i = evaluate_on_grid(
                xi.coefficients.coefficient(a, i), arrays, region.shape
            )
            density = density - _derivative(p_i, i - 1, region)
        body_vals += density * evaluate_on_grid(
            Y.vertical_components[a - 1], arrays, region.shape
        )
    body = quadrature(body_vals, region)
    boundary = _sampled_boundary_integral(current, arrays, region)
    return total, body, boundary


def _exact_boundary_integral(
    current, section: PolynomialSection, region: GridSpec
) -> Fraction:
    """Integral of the pulled-back (m-1)-form over the oriented box boundary."""
    cfg = section.cfg
    pulled = {
        wedge_key: substitute_section(coeff, section)
        for wedge_key, coeff in current.terms()
    }
    if cfg.m == 1:
        lo, hi, _, _ = region.axes[0]
        g = pulled.get((), Expr.zero())
        upper = g.substitute({base_coord(1): Expr.constant(Fraction(hi))})
        lower = g.substitute({base_coord(1): Expr.constant(Fraction(lo))})
        return Fraction((upper - lower).constant_term())
    (lo1, hi1, _, _), (lo2, hi2, _, _) = region.axes[0], region.axes[1]
    lo1, hi1, lo2, hi2 = map(Fraction, (lo1, hi1, lo2, hi2))
    g1 = pulled.get((("dx", 1),), Expr.zero())
    g2 = pulled.get((("dx", 2),), Expr.zero())
    x1, x2 = base_coord(1), base_coord(2)
    total = Fraction(0)
    # counterclockwise: bottom (+dx1), right (+dx2), top (-dx1), left (-dx2)
    bottom = _exact_integral_1d(g1.substitute({x2: Expr.constant(lo2)}), x1, lo1, hi1)
    top = _exact_integral_1d(g1.substitute({x2: Expr.constant(hi2)}), x1, lo1, hi1)
    right = _exact_integral_1d(g2.substitute({x1: Expr.constant(hi1)}), x2, lo2, hi2)
    left = _exact_integral_1d(g2.substitute({x1: Expr.constant(lo1)}), x2, lo2, hi2)
    for piece, sign in ((bottom, 1), (right, 1), (top, -1), (left, -1)):
        total += sign * Fraction(piece.constant_term())
    return total


def _sampled_boundary_integral(current, arrays: dict, region: GridSpec) -> float:
    cfg_m = region.ndim
    if cfg_m == 1:
        values = evaluate_on_grid(current.coefficient(()), arrays, region.shape)
        return float(values[-1] - values[0])
    g1 = evaluate_on_grid(current.coefficient((("dx", 1),)), arrays, region.shape)
    g2 = evaluate_on_grid(current.coefficient((("dx", 2),)), arrays, region.shape)
    w1 = region.quadrature_weights(0)
    w2 = region.quadrature_weights(1)
    bottom = float(np.dot(g1[:, 0], w1))
    top = float(np.dot(g1[:, -1], w1))
    right = float(np.dot(g2[-1, :], w2))
    left = float(np.dot(g2[0, :], w2))
    return bottom + right - top - left


# -- the fourth-order wave Cauchy problem -------------------------------------


@dataclass
class CauchyState:
    """Cauchy data (y, y_t, y_tt, y_ttt) per field on a periodic spatial grid."""

    grid: GridSpec
    data: np.ndarray  # shape (n, 4, N)
    t: float = 0.0

    def __post_init__(self):
        if self.grid.ndim != 1 or not self.grid.axes[0][3]:
            raise ValueError("Cauchy evolution needs a 1-D periodic grid")
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 3 or self.data.shape[1] != 4:
            raise ValueError("state data must have shape (n, 4, N)")
        if self.data.shape[2] != self.grid.shape[0]:
            raise ValueError("state data does not match the grid")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("state data contains non-finite values")

    @property
    def n(self) -> int:
        return self.data.shape[0]


def cauchy_evolve(state: CauchyState, t_target: float) -> CauchyState:
    """Advance the fourth-order wave system exactly per spatial Fourier mode.

    The first-order system d/dt (y, y_t, y_tt, y_ttt) has, per mode xi, the
    companion matrix with bottom row (-xi^4, 0, -2 xi^2, 0); its matrix
    exponential is evaluated densely (Pade) at machine precision, so the jump
    to ``t_target`` happens in a single step with no time-stepping error.
    The xi = 0 companion block is nilpotent and exp reduces to the exact
    cubic polynomial in t.
    """
    dt = t_target - state.t
    if dt == 0.0:
        return CauchyState(state.grid, state.data.copy(), state.t)
    lo, hi, count, _ = state.grid.axes[0]
    xi = 2.0 * np.pi * np.fft.rfftfreq(count, d=(hi - lo) / count)
    spectrum = np.fft.rfft(state.data, axis=2)  # (n, 4, M)
    out = np.empty_like(spectrum)
    for mode, x in enumerate(xi):
        A = np.array(
            [
                [0.0, 1.0, 0.0, 0.0],
                [0.0, 0.0, 1.0, 0.0],
                [0.0, 0.0, 0.0, 1.0],
                [-(x**4), 0.0, -2.0 * x**2, 0.0],
            ]
        )
        out[:, :, mode] = spectrum[:, :, mode] @ expm(dt * A).T
    data = np.fft.irfft(out, n=count, axis=2)
    if not np.all(np.isfinite(data)):
        raise ValueError("evolution produced non-finite values")
    return CauchyState(state.grid, data, t_target)


def state_coordinate_arrays(state: CauchyState, cfg: JetConfig, order: int) -> dict:
    """Evaluate jet coordinates on a constant-t slice of a Cauchy state.

    x^1 is time (a scalar), x^2 the spatial grid; z^a_I with r ones and s twos
    is the s-th spectral x-derivative of the r-th stored time derivative.
    """
    values = {
        base_coord(1): state.t,
        base_coord(2): state.grid.points(0),
    }
    lo, hi, count, _ = state.grid.axes[0]
    length = hi - lo
    for a in range(1, state.n + 1):
        values[field_coord(a)] = state.data[a - 1, 0]
        for level in range(1, order + 1):
            for I in multiindices(cfg.m, level):
                r = sum(1 for i in I if i == 1)
                s = len(I) - r
                if r >= 4:
                    raise ValueError(
                        f"slice data only carries three time derivatives; "
                        f"cannot evaluate z[{a};{' '.join(map(str, I))}]"
                    )
                arr = state.data[a - 1, r]
                for _ in range(s):
                    arr = _spectral_derivative(arr, 0, length)
                values[jet_coord(a, I)] = arr
    return values


class EnergyFunctional:
    """Spatial integral of the time-translation current of a De Donder form.

    Precomputes the holonomically reduced current j sigma*(Y_T -| Theta) for
    Y_T = d/dx^1; only the dx^2 component survives on a constant-t slice, and
    periodicity plays the role of the decay conditions: exact-form
    contributions (the skew part of any boundary-form choice) integrate to
    zero, so the value is independent of that choice.
    """

    def __init__(self, theta: DeDonderForm):
        from .prolongations import ProjectableField, reduced_current

        cfg = theta.cfg
        if cfg.m != 2:
            raise ValueError("the slice energy is defined for m = 2")
        y_t = ProjectableField(
            cfg,
            (Expr.one(), Expr.zero()),
            tuple(Expr.zero() for _ in range(cfg.n)),
        )
        self.cfg = cfg
        self.density = reduced_current(y_t, theta).coefficient((("dx", 2),))

    def __call__(self, state: CauchyState) -> float:
        values = state_coordinate_arrays(state, self.cfg, self.cfg.working_order)
        integrand = evaluate_on_grid(self.density, values, state.grid.shape)
        return quadrature(integrand, state.grid)


def energy_integral(state: CauchyState, theta: DeDonderForm) -> float:
    """One-shot evaluation of :class:`EnergyFunctional` at a state."""
    return EnergyFunctional(theta)(state)


def band_limited_state(
    grid: GridSpec, n: int, max_mode: int, seed: int
) -> CauchyState:
    """Random band-limited Cauchy data (modes 1..max_mode, unit-scale)."""
    rng = np.random.default_rng(seed)
    x = grid.points(0)
    lo, hi, _, _ = grid.axes[0]
    base = 2.0 * np.pi / (hi - lo)
    data = np.zeros((n, 4, grid.shape[0]))
    for a in range(n):
        for row in range(4):
            for mode in range(1, max_mode + 1):
                amp_c, amp_s = rng.normal(size=2) / max_mode
                data[a, row] += amp_c * np.cos(mode * base * x)
                data[a, row] += amp_s * np.sin(mode * base * x)
    return CauchyState(grid, data)


# -- functional-derivative oracle ---------------------------------------------


def _bump(grid: GridSpec, center: Sequence[float], width: float) -> np.ndarray:
    meshes = grid.meshes()
    r2 = np.zeros(grid.shape)
    for axis in range(grid.ndim):
        lo, hi, _, periodic = grid.axes[axis]
        delta = meshes[axis] - center[axis]
        if periodic:
            length = hi - lo
            delta = (delta + length / 2.0) % length - length / 2.0
        r2 = r2 + delta**2
    return np.exp(-r2 / (2.0 * width**2))


def functional_derivative_oracle(
    cfg: JetConfig,
    L: Expr,
    section: SampledSection,
    a: int,
    center: Sequence[float],
    eps: float = 1e-3,
    width: float = 0.05,
) -> float:
    """Central difference of the action under a localized bump of field a.

    Returns (A(s + eps phi) - A(s - eps phi)) / (2 eps integral(phi)), which
    converges to the Lagrange derivative at the bump center as the width and
    spacing shrink; the bump (and its order-k stencil footprint) must stay
    inside the region.
    """
    grid = section.grid
    phi = _bump(grid, center, width)
    for axis in range(grid.ndim):
        lo, hi, count, periodic = grid.axes[axis]
        if not periodic:
            margin = (cfg.k + 2) * grid.spacing(axis) + 3.0 * width
            if center[axis] - margin < lo or center[axis] + margin > hi:
                raise ValueError("bump too close to the region boundary")
    mass = quadrature(phi, grid)
    plus = SampledSection(
        grid, [v + (eps * phi if b == a - 1 else 0.0) for b, v in enumerate(section.values)]
    )
    minus = SampledSection(
        grid, [v - (eps * phi if b == a - 1 else 0.0) for b, v in enumerate(section.values)]
    )
    action_plus = integrate_action(cfg, L, plus)
    action_minus = integrate_action(cfg, L, minus)
    return (action_plus - action_minus) / (2.0 * eps * mass)
