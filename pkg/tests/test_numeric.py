import math
import random

import numpy as np
import pytest

from jetforms.expressions import Expr, PolynomialSection, x_var, y_var, z_var
from jetforms.jets import JetConfig, jet_coord
from jetforms.numeric import (
    CauchyState,
    EnergyFunctional,
    GridSpec,
    band_limited_state,
    cauchy_evolve,
    decomposition_terms,
    energy_integral,
    functional_derivative_oracle,
    integrate_action,
    numeric_jet,
    sample_section,
    state_coordinate_arrays,
    SampledSection,
)
from jetforms.prolongations import ProjectableField
from jetforms.wave import wave_problem

TWO_PI = 2.0 * math.pi


def periodic_grid(n=256):
    return GridSpec(((0.0, TWO_PI, n, True),))


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec(((0.0, 1.0, 4, False),))
    with pytest.raises(ValueError):
        GridSpec(((0.0, 0.0, 16, False),))
    with pytest.raises(ValueError):
        GridSpec(((0.0, float("inf"), 16, False),))
    grid = GridSpec(((0.0, 1.0, 11, False), (0.0, TWO_PI, 16, True)))
    assert grid.shape == (11, 16)
    assert abs(grid.spacing(0) - 0.1) < 1e-15
    assert abs(grid.spacing(1) - TWO_PI / 16) < 1e-15


def test_numeric_jet_spectral_accuracy():
    cfg = JetConfig(1, 1, 2)
    grid = periodic_grid(256)
    x = grid.points(0)
    section = SampledSection(grid, [np.sin(x)])
    jets = numeric_jet(section, cfg, 2)
    assert np.max(np.abs(jets[(1, (1, 1))] + np.sin(x))) <= 1e-10
    # constants have vanishing jets
    flat = SampledSection(grid, [np.full(256, 3.25)])
    assert np.max(np.abs(numeric_jet(flat, cfg, 2)[(1, (1,))])) <= 1e-12


def test_numeric_jet_exact_on_low_degree_polynomials():
    cfg = JetConfig(1, 1, 2)
    grid = GridSpec(((0.0, 1.0, 32, False),))
    x = grid.points(0)
    section = SampledSection(grid, [x])
    jets = numeric_jet(section, cfg, 3)
    assert np.max(np.abs(jets[(1, (1,))] - 1.0)) <= 1e-12
    assert np.max(np.abs(jets[(1, (1, 1))])) <= 1e-10
    # degree-4 polynomial: fourth-order one-sided stencils stay exact
    section4 = SampledSection(grid, [x**4 - 2 * x**2])
    jets4 = numeric_jet(section4, cfg, 2)
    assert np.max(np.abs(jets4[(1, (1, 1))] - (12 * x**2 - 4))) <= 1e-9


def test_numeric_jet_order_guard():
    cfg = JetConfig(1, 1, 1)
    grid = periodic_grid(16)
    section = SampledSection(grid, [np.zeros(16)])
    with pytest.raises(ValueError):
        numeric_jet(section, cfg, 2)


def test_integrate_action_examples():
    cfg = JetConfig(1, 1, 1)
    grid = periodic_grid(64)
    section = SampledSection(grid, [np.sin(grid.points(0))])
    assert integrate_action(cfg, Expr.zero(), section) == 0.0
    assert abs(integrate_action(cfg, Expr.one(), section) - TWO_PI) <= 1e-12
    # L = 1/2 z^2 on sin(x): integral of cos^2/2 = pi/2
    L = z_var(1, (1,)) ** 2 / 2
    assert abs(integrate_action(cfg, L, section) - math.pi / 2) <= 1e-10


def test_integrate_action_wave_slice():
    # L on the 2-d box for y^a = sin(x - t): box y = 0 so L vanishes; the
    # independent analytic value is 0
    wp = wave_problem()
    grid = GridSpec(((0.0, 1.0, 24, False), (0.0, TWO_PI, 64, True)))
    t_mesh, x_mesh = grid.meshes()
    data = np.sin(x_mesh - t_mesh)
    section = SampledSection(grid, [data, data])
    assert abs(integrate_action(wp.cfg, wp.lagrangian, section)) <= 1e-6
    # and a case with a nonzero analytic value: y = sin(x), box y = sin(x),
    # L = g_ab (box y)^a (box y)^b = sin^2 - sin^2 = 0 for equal fields; use
    # distinct fields to get integral of sin^2 - cos^2 over the box, which is 0
    section2 = SampledSection(grid, [np.sin(x_mesh), np.cos(x_mesh)])
    value = integrate_action(wp.cfg, wp.lagrangian, section2)
    assert abs(value - 0.0) <= 1e-8


def test_decomposition_identity_and_invariance():
    wp = wave_problem()
    cfg = wp.cfg
    x1, x2 = x_var(1), x_var(2)
    region = GridSpec(((0.0, 1.0, 16, False), (0.0, 1.0, 16, False)))
    rng = random.Random(14)
    fixtures = [
        PolynomialSection(cfg, (x1**3 * x2 + x2**2, x1**2 * x2**2)),
        PolynomialSection(cfg, (x1 * x2**3 - x1**2, x1**3 + x2)),
        PolynomialSection(cfg, (x1**2 * x2 + 1, x2**3 - x1 * x2)),
    ]
    Y = ProjectableField(
        cfg, (Expr.zero(), Expr.zero()), (x1 * x2, y_var(1) - x2)
    )
    xi_skew = wp.skew_boundary()
    for sigma in fixtures:
        total, body, boundary = decomposition_terms(
            wp.decomposition, wp.boundary_symmetric, Y, sigma, region
        )
        scale = max(1.0, abs(total))
        assert abs(total - body - boundary) <= 1e-8 * scale
        total2, body2, boundary2 = decomposition_terms(
            wp.decomposition, xi_skew, Y, sigma, region
        )
        assert abs(total - total2) <= 1e-8 * scale
        assert abs(body - body2) <= 1e-8 * max(1.0, abs(body))
        assert abs(boundary - boundary2) <= 1e-8 * max(1.0, abs(boundary))


def test_decomposition_zero_field():
    wp = wave_problem()
    cfg = wp.cfg
    Y0 = ProjectableField(
        cfg, (Expr.zero(), Expr.zero()), (Expr.zero(), Expr.zero())
    )
    region = GridSpec(((0.0, 1.0, 16, False), (0.0, 1.0, 16, False)))
    sigma = PolynomialSection(cfg, (x_var(1) ** 2, x_var(2) ** 2))
    assert decomposition_terms(
        wp.decomposition, wp.boundary_symmetric, Y0, sigma, region
    ) == (0.0, 0.0, 0.0)


def test_decomposition_requires_vertical():
    wp = wave_problem()
    region = GridSpec(((0.0, 1.0, 16, False), (0.0, 1.0, 16, False)))
    sigma = PolynomialSection(wp.cfg, (x_var(1), x_var(2)))
    with pytest.raises(ValueError, match="vertical"):
        decomposition_terms(
            wp.decomposition, wp.boundary_symmetric, wp.time_translation, sigma, region
        )


def test_decomposition_trapezoid_path():
    # the sampled path reproduces the exact values at quadrature accuracy
    wp = wave_problem()
    cfg = wp.cfg
    x1, x2 = x_var(1), x_var(2)
    Y = ProjectableField(cfg, (Expr.zero(), Expr.zero()), (x1, x2))
    sigma = PolynomialSection(cfg, (x1**2 * x2, x2**2))
    fine = GridSpec(((0.0, 1.0, 96, False), (0.0, 1.0, 96, False)))
    exact = decomposition_terms(
        wp.decomposition, wp.boundary_symmetric, Y, sigma, fine
    )
    approx = decomposition_terms(
        wp.decomposition, wp.boundary_symmetric, Y, sigma, fine, method="trapezoid"
    )
    for e_val, a_val in zip(exact, approx):
        assert abs(e_val - a_val) <= 5e-3 * max(1.0, abs(e_val))


def test_cauchy_zero_data_stays_zero():
    grid = periodic_grid(64)
    state = CauchyState(grid, np.zeros((1, 4, 64)))
    out = cauchy_evolve(state, 3.7)
    assert np.max(np.abs(out.data)) == 0.0
    assert out.t == 3.7


def test_cauchy_travelling_wave_exact():
    grid = periodic_grid(256)
    x = grid.points(0)
    h = grid.spacing(0)
    # single-mode travelling waves solve box y = 0, hence box^2 y = 0; the
    # per-mode exponential reproduces them without time-stepping error
    for k, t in ((1, 1.0), (5, 0.37), (11, 1.0)):
        data = np.stack(
            [
                np.sin(k * x),
                -k * np.cos(k * x),
                -(k**2) * np.sin(k * x),
                k**3 * np.cos(k * x),
            ]
        )[None, :, :]
        out = cauchy_evolve(CauchyState(grid, data), t)
        exact = np.sin(k * (x - t))
        err = math.sqrt(float(np.sum((out.data[0, 0] - exact) ** 2) * h))
        assert err <= 1e-8, (k, t, err)


def test_cauchy_zero_mode_cubic_growth():
    grid = periodic_grid(32)
    data = np.zeros((1, 4, 32))
    data[0, 3] = 2.0  # constant third time derivative
    out = cauchy_evolve(CauchyState(grid, data), 1.5)
    expected = 2.0 * 1.5**3 / 6.0
    assert abs(float(out.data[0, 0].mean()) - expected) <= 1e-12
    assert abs(float(out.data[0, 2].mean()) - 2.0 * 1.5) <= 1e-12


def test_cauchy_rejects_bad_grids():
    grid = GridSpec(((0.0, 1.0, 32, False),))
    with pytest.raises(ValueError, match="periodic"):
        CauchyState(grid, np.zeros((1, 4, 32)))
    with pytest.raises(ValueError, match="finite"):
        CauchyState(periodic_grid(16), np.full((1, 4, 16), np.nan))


def test_energy_conservation_and_boundary_form_independence():
    wp = wave_problem()
    grid = periodic_grid(256)
    state = band_limited_state(grid, wp.cfg.n, max_mode=32, seed=20240817)
    e_sym = EnergyFunctional(wp.theta_symmetric)
    e_skew = EnergyFunctional(wp.theta_skew())
    e0 = e_sym(state)
    assert abs(e0) > 1.0  # scale sanity for the relative tolerances
    drift = 0.0
    gap = abs(e_sym(state) - e_skew(state))
    current = state
    for step in range(1, 9):
        current = cauchy_evolve(current, step / 8.0)
        es = e_sym(current)
        drift = max(drift, abs(es - e0))
        gap = max(gap, abs(es - e_skew(current)))
    assert drift / abs(e0) <= 1e-6
    assert gap / abs(e0) <= 1e-10


def test_energy_integral_examples():
    wp = wave_problem()
    grid = periodic_grid(64)
    zero = CauchyState(grid, np.zeros((2, 4, 64)))
    assert energy_integral(zero, wp.theta_symmetric) == 0.0
    # evolved travelling-wave data conserves the energy value
    x = grid.points(0)
    rows = np.stack([np.sin(x), -np.cos(x), -np.sin(x), np.cos(x)])
    state = CauchyState(grid, np.stack([rows, rows]))
    e0 = energy_integral(state, wp.theta_symmetric)
    e1 = energy_integral(cauchy_evolve(state, 1.0), wp.theta_symmetric)
    assert abs(e1 - e0) <= 1e-6 * max(1.0, abs(e0))


def test_state_coordinate_arrays_guard():
    wp = wave_problem()
    grid = periodic_grid(16)
    state = CauchyState(grid, np.zeros((2, 4, 16)))
    values = state_coordinate_arrays(state, wp.cfg, 3)
    assert values[jet_coord(1, (1, 1, 1))].shape == (16,)
    with pytest.raises(ValueError, match="time derivatives"):
        # order 4 would need four time derivatives of the stored data
        state_coordinate_arrays(state, wp.cfg, 4)


def test_functional_derivative_oracle_matches_lagrange_derivative():
    # calibrated: width 0.03 and eps 1e-3 at N = 512 give ~5e-4 agreement
    cfg = JetConfig(1, 1, 1)
    L = z_var(1, (1,)) ** 2 / 2
    grid = periodic_grid(512)
    x = grid.points(0)
    section = SampledSection(grid, [np.sin(x)])
    value = functional_derivative_oracle(
        cfg, L, section, 1, (math.pi / 2,), eps=1e-3, width=0.03
    )
    assert abs(value - math.sin(math.pi / 2)) <= 1e-3
    # zero Lagrangian
    assert functional_derivative_oracle(cfg, Expr.zero(), section, 1, (1.0,)) == 0.0


def test_functional_derivative_oracle_random_fixtures():
    # five random fixtures against the substituted Lagrange derivative
    from jetforms.dedonder import lagrange_derivative

    rng = random.Random(6)
    cfg = JetConfig(1, 1, 1)
    L = z_var(1, (1,)) ** 2 / 2 + y_var(1) ** 2
    delta = lagrange_derivative(cfg, L)[0]  # -y'' + 2y
    grid = periodic_grid(512)
    x = grid.points(0)
    for trial in range(5):
        k = rng.randint(1, 3)
        phase = rng.uniform(0, TWO_PI)
        section = SampledSection(grid, [np.sin(k * x + phase)])
        x0 = rng.uniform(1.0, TWO_PI - 1.0)
        got = functional_derivative_oracle(
            cfg, L, section, 1, (x0,), eps=1e-3, width=0.02
        )
        expected = (k * k + 2.0) * math.sin(k * x0 + phase)
        assert abs(got - expected) <= 2e-3 * max(1.0, abs(expected)), (
            trial,
            got,
            expected,
        )


def test_functional_derivative_oracle_wave_fixture():
    # the t^2 x^2 fixture of the fourth-order example: expect -16
    wp = wave_problem()
    region = GridSpec(((0.0, 1.0, 96, False), (0.0, 1.0, 96, False)))
    x1, x2 = x_var(1), x_var(2)
    section = sample_section(
        PolynomialSection(wp.cfg, (x1**2 * x2**2, Expr.zero())), region
    )
    value = functional_derivative_oracle(
        wp.cfg, wp.lagrangian, section, 1, (0.5, 0.5), eps=1e-3, width=0.06
    )
    assert abs(value + 16.0) <= 1e-2


def test_bump_boundary_guard():
    cfg = JetConfig(1, 1, 1)
    grid = GridSpec(((0.0, 1.0, 64, False),))
    section = SampledSection(grid, [np.zeros(64)])
    with pytest.raises(ValueError, match="boundary"):
        functional_derivative_oracle(
            cfg, Expr.zero(), section, 1, (0.01,), width=0.05
        )
