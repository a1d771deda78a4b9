import random
from fractions import Fraction

import pytest

from jetforms.dedonder import (
    BoundaryCoefficients,
    assemble_boundary_form,
    boundary_form_for_lagrangian,
    compare_boundary_forms,
    decompose_phi,
    dedonder_form,
    dedonder_residual,
    lagrange_derivative,
    perturbed_coefficients,
    phi_from_lagrangian,
    skew_pair_perturbation,
    symmetric_boundary_coefficients,
    verify_condition3,
)
from jetforms.expressions import (
    Expr,
    PolynomialSection,
    random_expr,
    substitute_section,
    total_derivative,
    x_var,
    y_var,
    z_var,
)
from jetforms.forms import (
    DifferentialForm,
    base_contraction,
    basis_vector,
    contact_form,
    holonomic_pullback,
    interior_product,
    volume_form,
)
from jetforms.jets import JetConfig, field_coord, jet_coord
from jetforms.wave import wave_problem


def test_phi_from_lagrangian_examples():
    cfg = JetConfig(2, 1, 1)
    phi, dec = phi_from_lagrangian(cfg, Expr.zero())
    assert phi.is_zero and not dec.jet_components
    # k=1, L = 1/2 sum z_i^2: Phi^i = z_i, Phi_a = 0
    L = (z_var(1, (1,)) ** 2 + z_var(1, (2,)) ** 2) / 2
    phi, dec = phi_from_lagrangian(cfg, L)
    assert dec.component(1, (1,)) == z_var(1, (1,))
    assert dec.component(1, (2,)) == z_var(1, (2,))
    assert dec.component(1).is_zero
    # order guard
    cfg2 = JetConfig(2, 1, 2)
    with pytest.raises(ValueError):
        phi_from_lagrangian(cfg2, z_var(1, (1, 1, 2)))


def test_wave_phi_components():
    wp = wave_problem()
    box = {
        a: z_var(a, (1, 1)) - z_var(a, (2, 2)) for a in (1, 2)
    }
    g = {1: 1, 2: -1}
    for a in (1, 2):
        assert wp.decomposition.component(a).is_zero
        for i in (1, 2):
            assert wp.decomposition.component(a, (i,)).is_zero
        # canonical components dL/dz^a_I carry the multiplicities
        assert wp.decomposition.component(a, (1, 1)) == 2 * g[a] * box[a]
        assert wp.decomposition.component(a, (2, 2)) == -2 * g[a] * box[a]
        assert wp.decomposition.component(a, (1, 2)).is_zero


def test_decompose_phi_roundtrip():
    rng = random.Random(8)
    cfg = JetConfig(2, 2, 2)
    L = random_expr(rng, cfg, 2, degree=2, terms=6)
    phi, dec = phi_from_lagrangian(cfg, L)
    again = decompose_phi(cfg, phi)
    assert again.form() == phi
    bad = DifferentialForm.basis(("dy", 1)).wedge(DifferentialForm.basis(("dy", 2)))
    with pytest.raises(ValueError):
        decompose_phi(JetConfig(1, 2, 1), bad)


def test_symmetric_coefficients_wave_closed_form():
    wp = wave_problem()
    coeffs = wp.boundary_symmetric.coefficients
    g = {1: Fraction(1), 2: Fraction(-1)}
    for a in (1, 2):
        box = z_var(a, (1, 1)) - z_var(a, (2, 2))
        for i1 in (1, 2):
            for i2 in (1, 2):
                expected = (
                    2 * g[a] * (g[i1] if i1 == i2 else Fraction(0)) * box
                )
                assert coeffs.coefficient(a, i1, (i2,)) == expected
        # p^i_a = - sum_j D_j p^{j,(i)}: third-order jets with the metric signs
        for i in (1, 2):
            expected = Expr.zero()
            for j in (1, 2):
                expected = expected - total_derivative(
                    coeffs.coefficient(a, j, (i,)), j, wp.cfg
                )
            assert coeffs.coefficient(a, i) == expected


def test_coefficient_order_bounds():
    # level-r coefficients have jet order at most 2k - r
    rng = random.Random(10)
    for cfg in (JetConfig(2, 1, 2), JetConfig(1, 1, 3)):
        L = random_expr(rng, cfg, cfg.k, degree=2, terms=5)
        _, dec = phi_from_lagrangian(cfg, L)
        coeffs = symmetric_boundary_coefficients(dec)
        for (a, i1, tail), value in coeffs.table.items():
            level = len(tail) + 1
            assert value.jet_order() <= 2 * cfg.k - level


def test_k1_reduction_is_poincare_cartan():
    cfg = JetConfig(2, 1, 1)
    L = (z_var(1, (1,)) ** 2 + z_var(1, (2,)) ** 2) / 2
    xi = boundary_form_for_lagrangian(cfg, L)
    theta = dedonder_form(cfg, L, xi)
    classical = DifferentialForm.from_scalar(L).wedge(volume_form(cfg))
    for i in (1, 2):
        p_i = L.partial(jet_coord(1, (i,)))
        classical = classical + (
            contact_form(cfg, 1, ()).wedge(base_contraction(cfg, i)) * p_i
        )
    assert theta.form == classical


def test_assemble_checks_and_condition3():
    wp = wave_problem()
    report = verify_condition3(wp.decomposition, wp.boundary_symmetric)
    assert report.ok
    # injected symmetric defect is detected at the right component
    broken = dict(wp.boundary_symmetric.coefficients.table)
    broken[(1, 1, (1,))] = broken.get((1, 1, (1,)), Expr.zero()) + y_var(1)
    bad_xi = assemble_boundary_form(
        BoundaryCoefficients(wp.cfg, broken)
    )  # structural conditions still hold without a Phi
    report = verify_condition3(wp.decomposition, bad_xi)
    assert not report.ok
    failing = {(a, I) for a, I, _, _ in report.failures}
    assert (1, (1, 1)) in failing
    # assembling against the decomposition rejects the broken system
    with pytest.raises(AssertionError):
        assemble_boundary_form(BoundaryCoefficients(wp.cfg, broken), wp.decomposition)


def test_condition3_zero_phi():
    cfg = JetConfig(2, 1, 2)
    _, dec = phi_from_lagrangian(cfg, Expr.zero())
    xi = assemble_boundary_form(symmetric_boundary_coefficients(dec), dec)
    assert xi.form.is_zero
    assert verify_condition3(dec, xi).ok


def test_condition3_random_lagrangians():
    rng = random.Random(2718)
    configs = (
        JetConfig(1, 1, 1),
        JetConfig(2, 1, 1),
        JetConfig(2, 2, 1),
        JetConfig(1, 1, 2),
        JetConfig(2, 1, 2),
        JetConfig(2, 2, 2),
    )
    for cfg in configs:
        for _ in range(3):
            L = random_expr(rng, cfg, cfg.k, degree=2, terms=5)
            xi = boundary_form_for_lagrangian(cfg, L)
            assert verify_condition3(xi.phi, xi).ok


def test_condition3_higher_order_k3():
    # the construction is not k=2 specific: check a third-order Lagrangian
    cfg = JetConfig(2, 1, 3)
    L = z_var(1, (1, 1, 2)) ** 2 + z_var(1, (1, 2)) * z_var(1, (2, 2, 2))
    xi = boundary_form_for_lagrangian(cfg, L)
    assert verify_condition3(xi.phi, xi).ok


def test_lagrange_derivative_examples():
    wp = wave_problem()
    deltas = lagrange_derivative(wp.cfg, wp.lagrangian)
    for a, sign in ((1, 1), (2, -1)):
        expected = (
            z_var(a, (1, 1, 1, 1))
            - 2 * z_var(a, (1, 1, 2, 2))
            + z_var(a, (2, 2, 2, 2))
        ) * (2 * sign)
        assert deltas[a - 1] == expected
    assert lagrange_derivative(JetConfig(1, 1, 1), Expr.zero()) == [Expr.zero()]
    cfg = JetConfig(2, 1, 1)
    L = (z_var(1, (1,)) ** 2 + z_var(1, (2,)) ** 2) / 2
    assert lagrange_derivative(cfg, L) == [
        -z_var(1, (1, 1)) - z_var(1, (2, 2))
    ]


def test_el_consistency_of_dedonder_contractions():
    # pullback of d/dy^a -| dTheta equals the Lagrange derivative, exactly
    rng = random.Random(321)
    for cfg in (JetConfig(1, 1, 2), JetConfig(2, 1, 2), JetConfig(2, 2, 2)):
        for _ in range(3):
            L = random_expr(rng, cfg, cfg.k, degree=2, terms=4)
            xi = boundary_form_for_lagrangian(cfg, L)
            theta = dedonder_form(cfg, L, xi)
            deltas = lagrange_derivative(cfg, L)
            comps = tuple(
                sum(
                    (
                        Expr.monomial(
                            {("x", i): rng.randrange(3) for i in range(1, cfg.m + 1)},
                            rng.randint(-2, 2),
                        )
                        for _ in range(4)
                    ),
                    Expr.zero(),
                )
                for _ in range(cfg.n)
            )
            sigma = PolynomialSection(cfg, comps)
            d_theta = theta.form.d()
            vol_wedge = tuple(("dx", i) for i in range(1, cfg.m + 1))
            for a in range(1, cfg.n + 1):
                pulled = holonomic_pullback(
                    interior_product(basis_vector(field_coord(a)), d_theta), sigma
                )
                assert pulled.coefficient(vol_wedge) == substitute_section(
                    deltas[a - 1], sigma
                )


def test_decomposition_identity_symbolic():
    # the integrand-level form of the body/boundary split: for vertical Y,
    #   reduce(Y^k -| Phi) = sum_a [Phi_a - div p] Y^a + D_1 G_2 - D_2 G_1
    # with G the reduced boundary current; integrating over a box and using
    # Stokes turns the last term into the boundary integral
    rng = random.Random(4242)
    cfg = JetConfig(2, 2, 2)
    from jetforms.forms import holonomic_reduce as reduce_form
    from jetforms.forms import interior_product as contract
    from jetforms.prolongations import ProjectableField, prolong

    for _ in range(3):
        L = random_expr(rng, cfg, 2, degree=2, terms=5)
        xi = boundary_form_for_lagrangian(cfg, L)
        dec = xi.phi
        Y = ProjectableField(
            cfg,
            (Expr.zero(), Expr.zero()),
            (random_expr(rng, cfg, 0, degree=2, terms=3),
             random_expr(rng, cfg, 0, degree=2, terms=3)),
        )
        total_expr = reduce_form(
            contract(prolong(Y, cfg.k), dec.form()), cfg
        ).coefficient((("dx", 1), ("dx", 2)))
        body_expr = Expr.zero()
        for a in (1, 2):
            e_a = dec.component(a) - xi.coefficients.holonomic_divergence(a)
            body_expr = body_expr + e_a * Y.vertical_components[a - 1]
        current = reduce_form(
            contract(prolong(Y, cfg.working_order), xi.form), cfg
        )
        div = total_derivative(
            current.coefficient((("dx", 2),)), 1, cfg, max_order=4
        ) - total_derivative(
            current.coefficient((("dx", 1),)), 2, cfg, max_order=4
        )
        assert (total_expr - body_expr - div).is_zero


def test_dedonder_residual_examples():
    wp = wave_problem()
    cfg = wp.cfg
    x1, x2 = x_var(1), x_var(2)
    sol = PolynomialSection(cfg, ((x2 - x1) ** 3, (x2 - x1) ** 2))
    res = dedonder_residual(wp.theta_symmetric, sol)
    assert all(form.is_zero for form in res.values())
    bad = PolynomialSection(cfg, (x1**2 * x2**2, Expr.zero()))
    res_bad = dedonder_residual(wp.theta_symmetric, bad)
    vol = (("dx", 1), ("dx", 2))
    assert res_bad[field_coord(1)].coefficient(vol) == Expr.constant(-16)
    # only the d/dy contractions can be nonzero: the d/dz ones vanish for
    # every section by the boundary-form construction
    for coord, form in res_bad.items():
        if coord[0] == "z":
            assert form.is_zero, coord
    # zero Lagrangian: zero residuals for any section
    cfg1 = JetConfig(1, 1, 1)
    xi0 = boundary_form_for_lagrangian(cfg1, Expr.zero())
    theta0 = dedonder_form(cfg1, Expr.zero(), xi0)
    any_sigma = PolynomialSection(cfg1, (x_var(1) ** 4,))
    assert all(f.is_zero for f in dedonder_residual(theta0, any_sigma).values())


def test_dedonder_form_pullback_equals_lagrangian_pullback():
    # j*Theta = L(j^k sigma) d_m x, checked by explicit substitution
    rng = random.Random(17)
    cfg = JetConfig(2, 1, 2)
    L = z_var(1, (1, 1)) * z_var(1, (2, 2)) + y_var(1) ** 2
    xi = boundary_form_for_lagrangian(cfg, L)
    theta = dedonder_form(cfg, L, xi)
    sigma = PolynomialSection(cfg, (x_var(1) ** 3 + x_var(1) * x_var(2) ** 2,))
    pulled = holonomic_pullback(theta.form, sigma)
    vol = (("dx", 1), ("dx", 2))
    assert pulled.coefficient(vol) == substitute_section(L, sigma)


def test_contact_presentation():
    from jetforms.dedonder import contact_presentation

    cfg = JetConfig(1, 1, 1)
    L = z_var(1, (1,)) ** 2 / 2
    xi = boundary_form_for_lagrangian(cfg, L)
    assert contact_presentation(xi) == "(z[1;1]) theta[1]^w[1]"


def test_dedonder_form_requires_provenance():
    wp = wave_problem()
    orphan = assemble_boundary_form(wp.boundary_symmetric.coefficients)
    with pytest.raises(ValueError):
        dedonder_form(wp.cfg, wp.lagrangian, orphan)


def test_skew_perturbation_invariance():
    wp = wave_problem()
    cfg = wp.cfg
    xi = wp.boundary_symmetric
    xi_skew = wp.skew_boundary()
    report = compare_boundary_forms(xi, xi_skew)
    assert report.ok
    assert not report.relation_failures
    assert all(v.is_zero for v in report.divergence_residuals.values())
    assert not report.pullback_failures
    # identical forms compare trivially
    assert compare_boundary_forms(xi, xi).ok


def test_divergence_trace_hand_checkable_instance():
    # Q^{12} = y, Q^{21} = -y: Q^1 = z_(2), Q^2 = -z_(1), divergence zero
    cfg = JetConfig(2, 1, 2)
    L = z_var(1, (1, 1)) ** 2 + z_var(1, (2, 2)) ** 2
    _, dec = phi_from_lagrangian(cfg, L)
    delta = skew_pair_perturbation(cfg, {(1, 1, 2): y_var(1), (1, 2, 1): -y_var(1)})
    sym = symmetric_boundary_coefficients(dec)
    alt = perturbed_coefficients(dec, delta)
    q1 = alt.coefficient(1, 1) - sym.coefficient(1, 1)
    q2 = alt.coefficient(1, 2) - sym.coefficient(1, 2)
    assert q1 == z_var(1, (2,))
    assert q2 == -z_var(1, (1,))
    divergence = total_derivative(q1, 1, cfg, max_order=4) + total_derivative(
        q2, 2, cfg, max_order=4
    )
    assert divergence.is_zero


def test_invalid_skew_rejected():
    wp = wave_problem()
    # nonzero diagonal entry violates the homogeneous top-level relation
    with pytest.raises(ValueError, match="splitting sum"):
        perturbed_coefficients(
            wp.decomposition, {(1, 1, (1,)): y_var(1)}
        )
    # one-sided off-diagonal entry is not skew either
    with pytest.raises(ValueError, match="splitting sum"):
        perturbed_coefficients(wp.decomposition, {(1, 1, (2,)): y_var(1)})
    # excessive jet order in the perturbation
    with pytest.raises(ValueError, match="jet order"):
        perturbed_coefficients(
            wp.decomposition,
            skew_pair_perturbation(
                wp.cfg,
                {(1, 1, 2): z_var(1, (1, 1, 2)), (1, 2, 1): -z_var(1, (1, 1, 2))},
            ),
        )


def test_comparison_requires_same_phi():
    cfg = JetConfig(2, 1, 2)
    xi_a = boundary_form_for_lagrangian(cfg, z_var(1, (1, 1)) ** 2)
    xi_b = boundary_form_for_lagrangian(cfg, z_var(1, (2, 2)) ** 2)
    with pytest.raises(ValueError):
        compare_boundary_forms(xi_a, xi_b)


def test_divergence_trace_random_skew_family():
    # random skew data over a random Lagrangian: divergence trace vanishes
    rng = random.Random(99)
    cfg = JetConfig(2, 2, 2)
    for _ in range(3):
        L = random_expr(rng, cfg, 2, degree=2, terms=5)
        _, dec = phi_from_lagrangian(cfg, L)
        sym = symmetric_boundary_coefficients(dec)
        xi = assemble_boundary_form(sym, dec)
        skew = {}
        for a in range(1, cfg.n + 1):
            q = random_expr(rng, cfg, 2, degree=1, terms=3)
            skew[(a, 1, 2)] = q
            skew[(a, 2, 1)] = -q
        alt = assemble_boundary_form(
            perturbed_coefficients(dec, skew_pair_perturbation(cfg, skew)), dec
        )
        assert compare_boundary_forms(xi, alt).ok
