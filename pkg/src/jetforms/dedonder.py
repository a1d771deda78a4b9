"""Boundary forms and De Donder forms for order-k Lagrangians.

Given a source-semi-basic (m+1)-form Phi on the order-k jet space, locally

    Phi = (Phi_a dy^a + Phi^i_a dz^a_i + ... + Phi^I_a dz^a_I) ^ d_m x ,

a boundary form is an m-form on the order-(2k-1) jet space of the shape

    Xi = sum_{l=1..k} p^{i1,T}_a  theta^a_T ^ (d/dx^{i1} -| d_m x),

with T a canonical multi-index of length l-1 and theta^a_T the contact
forms.  Xi is a boundary form *of Phi* when additionally every pullback
j sigma* (X -| (Phi + dXi)) vanishes for X tangent to target-map fibres.
On canonical storage that condition is the linear system

    level k:      sum over splittings (i1,T) of I of p^{i1,T}_a  = Phi^I_a
    level r < k:  sum over splittings of I of p^{i1,T}_a
                    = Phi^I_a - sum_j D_j p^{j,I}_a

for every canonical I, where a splitting of I is a pair (i1, T) with
canonicalize((i1,)+T) = I; a canonical I admits one splitting per distinct
value it contains.  The generalized De Donder construction distributes each
right-hand side equally over the splittings, which yields coefficients fully
symmetric in all upper indices; any two solutions differ by "skew" data with
vanishing splitting sums, and their level-one divergences agree identically
(that is the divergence-trace invariance behind the decomposition's
independence of the chosen boundary form).

The De Donder form is Theta = L d_m x + Xi; a section is critical for the
action iff the pullbacks of X -| dTheta vanish for all X tangent to
source-map fibres, and for X = d/dy^a that pullback is exactly the Lagrange
derivative of L times the volume form.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .expressions import (
    Expr,
    PolynomialSection,
    generic_section,
    render_expr,
    substitute_section,
    total_derivative,
)
from .forms import (
    DifferentialForm,
    base_contraction,
    basis_vector,
    contact_form,
    holonomic_pullback,
    holonomic_reduce,
    interior_product,
    is_semibasic,
    volume_form,
)
from .jets import (
    JetConfig,
    enumerate_coordinates,
    field_coord,
    jet_coord,
    multiindices,
    splitting_count,
    splittings,
)


@dataclass
class PhiDecomposition:
    """Components of a source-semi-basic (m+1)-form in the contact-adapted basis.

    ``field_components[a]`` is the dy^a ^ d_m x coefficient; ``jet_components``
    maps (a, canonical I) with 1 <= |I| <= k to the dz^a_I ^ d_m x coefficient.
    """

    cfg: JetConfig
    field_components: dict
    jet_components: dict

    def component(self, a: int, indices: tuple = ()) -> Expr:
        if not indices:
            return self.field_components.get(a, Expr.zero())
        return self.jet_components.get((a, tuple(indices)), Expr.zero())

    def form(self) -> DifferentialForm:
        """Reassemble Phi from its components."""
        vol = volume_form(self.cfg)
        out = DifferentialForm.zero(self.cfg.m + 1)
        for a in range(1, self.cfg.n + 1):
            coeff = self.component(a)
            if not coeff.is_zero:
                out = out + DifferentialForm(1, {(("dy", a),): coeff}).wedge(vol)
        for (a, I), coeff in sorted(self.jet_components.items()):
            if not coeff.is_zero:
                out = out + DifferentialForm(1, {(("dz", a, I),): coeff}).wedge(vol)
        return out


def phi_from_lagrangian(cfg: JetConfig, L: Expr):
    """d(L d_m x) together with its decomposition Phi_a = dL/dy^a, Phi^I_a = dL/dz^a_I."""
    if L.jet_order() > cfg.k:
        raise ValueError(
            f"Lagrangian has jet order {L.jet_order()}, exceeding k={cfg.k}"
        )
    field_components = {
        a: L.partial(field_coord(a)) for a in range(1, cfg.n + 1)
    }
    jet_components = {}
    for level in range(1, cfg.k + 1):
        for a in range(1, cfg.n + 1):
            for I in multiindices(cfg.m, level):
                partial = L.partial(jet_coord(a, I))
                if not partial.is_zero:
                    jet_components[(a, I)] = partial
    decomposition = PhiDecomposition(cfg, field_components, jet_components)
    phi = DifferentialForm.from_scalar(L).wedge(volume_form(cfg)).d()
    # the coordinate computation and the component extraction must agree
    assert phi == decomposition.form(), "Phi decomposition mismatch"
    return phi, decomposition


def decompose_phi(cfg: JetConfig, phi: DifferentialForm) -> PhiDecomposition:
    """Extract the local components of a general source-semi-basic (m+1)-form."""
    if phi.degree != cfg.m + 1:
        raise ValueError(f"expected an (m+1)-form, got degree {phi.degree}")
    vol_wedge = tuple(("dx", i) for i in range(1, cfg.m + 1))
    field_components: dict = {}
    jet_components: dict = {}
    for wedge_key, coeff in phi.terms():
        non_dx = [b for b in wedge_key if b[0] != "dx"]
        if len(non_dx) != 1 or tuple(b for b in wedge_key if b[0] == "dx") != vol_wedge:
            raise ValueError(
                "form is not of the semi-basic shape (single dy/dz factor "
                "wedged with the volume form)"
            )
        lead = non_dx[0]
        # global basis order puts dy/dz after all dx, so no extra sign
        if lead[0] == "dy":
            field_components[lead[1]] = coeff
        else:
            if len(lead[2]) > cfg.k:
                raise ValueError(f"component dz{lead[1:]} exceeds order k={cfg.k}")
            jet_components[(lead[1], lead[2])] = coeff
    return PhiDecomposition(cfg, field_components, jet_components)


@dataclass
class BoundaryCoefficients:
    """Coefficients p^{i1,T}_a: first index free, tail canonical, level |T|+1 <= k."""

    cfg: JetConfig
    table: dict  # (a, i1, tail) -> Expr

    def coefficient(self, a: int, i1: int, tail: tuple = ()) -> Expr:
        return self.table.get((a, i1, tuple(tail)), Expr.zero())

    def level(self, level: int) -> dict:
        return {
            key: value for key, value in self.table.items() if len(key[2]) + 1 == level
        }

    def holonomic_divergence(self, a: int) -> Expr:
        """sum_i D_i p^{i}_a of the level-one coefficients (order <= 2k)."""
        out = Expr.zero()
        for i in range(1, self.cfg.m + 1):
            out = out + total_derivative(
                self.coefficient(a, i), i, self.cfg, max_order=self.cfg.expression_order
            )
        return out


def _splitting_system_rhs(
    dec: PhiDecomposition, upper: Mapping, I: tuple, a: int
) -> Expr:
    """Phi^I_a minus the divergence of the next level's coefficients with tail I."""
    cfg = dec.cfg
    rhs = dec.component(a, I)
    if upper is not None:
        for j in range(1, cfg.m + 1):
            coeff = upper.get((a, j, I))
            if coeff is not None and not coeff.is_zero:
                rhs = rhs - total_derivative(coeff, j, cfg)
    return rhs


def symmetric_boundary_coefficients(dec: PhiDecomposition) -> BoundaryCoefficients:
    """The fully symmetric solution of the boundary-coefficient system.

    Built top-down: at each level the right-hand side for canonical I is
    distributed equally over the splittings of I, so the value depends only
    on the combined multiset of upper indices.  A level-(k-l+1) coefficient
    ends up with jet order at most 2k - (k-l+1) = k+l-1.
    """
    cfg = dec.cfg
    table: dict = {}
    upper: dict | None = None
    for level in range(cfg.k, 0, -1):
        current: dict = {}
        for a in range(1, cfg.n + 1):
            for I in multiindices(cfg.m, level):
                rhs = _splitting_system_rhs(dec, upper, I, a)
                share = rhs / splitting_count(I)
                for i1, tail in splittings(I):
                    if not share.is_zero:
                        current[(a, i1, tail)] = share
        for (a, _, tail), value in current.items():
            expected = cfg.expression_order - (len(tail) + 1)
            assert value.jet_order() <= expected, (
                f"coefficient order {value.jet_order()} exceeds bound {expected}"
            )
        table.update(current)
        upper = current
    return BoundaryCoefficients(cfg, table)


def _check_splitting_system(
    dec: PhiDecomposition, coeffs: BoundaryCoefficients
) -> list:
    """Residuals of the boundary-coefficient system; empty iff it holds."""
    cfg = dec.cfg
    failures = []
    for level in range(cfg.k, 0, -1):
        upper = coeffs.level(level + 1) if level < cfg.k else None
        for a in range(1, cfg.n + 1):
            for I in multiindices(cfg.m, level):
                rhs = _splitting_system_rhs(dec, upper, I, a)
                total = Expr.zero()
                for i1, tail in splittings(I):
                    total = total + coeffs.coefficient(a, i1, tail)
                residual = total - rhs
                if not residual.is_zero:
                    failures.append((a, I, residual))
    return failures


def perturbed_coefficients(
    dec: PhiDecomposition, top_delta: Mapping
) -> BoundaryCoefficients:
    """Alternative solution: perturb the top level, re-solve the lower levels.

    ``top_delta`` maps (a, i1, tail) with |tail| = k-1 to Exprs whose
    splitting sums vanish for every canonical index (the homogeneous top
    equation); violations are rejected with the offending index named.
    """
    cfg = dec.cfg
    for (a, i1, tail), value in top_delta.items():
        if len(tail) != cfg.k - 1:
            raise ValueError(f"perturbation {(a, i1, tail)} is not top-level")
        if tuple(sorted(tail)) != tuple(tail):
            raise ValueError(f"perturbation tail {tail} is not canonical")
        # k-1 total derivatives are applied on the way down to level one,
        # which must stay within the working order 2k-1
        if value.jet_order() > cfg.k:
            raise ValueError(
                f"perturbation at {(a, i1, tail)} has jet order "
                f"{value.jet_order()}; at most {cfg.k} is allowed"
            )
    for a in range(1, cfg.n + 1):
        for I in multiindices(cfg.m, cfg.k):
            total = Expr.zero()
            for i1, tail in splittings(I):
                total = total + top_delta.get((a, i1, tail), Expr.zero())
            if not total.is_zero:
                raise ValueError(
                    f"perturbation violates the top-level relation at a={a}, "
                    f"I={I}: splitting sum is {render_expr(total)}, not 0"
                )
    symmetric = symmetric_boundary_coefficients(dec)
    table: dict = {}
    for (a, i1, tail), value in symmetric.level(cfg.k).items():
        table[(a, i1, tail)] = value
    for key, delta in top_delta.items():
        table[key] = table.get(key, Expr.zero()) + delta
    upper = {key: value for key, value in table.items()}
    for level in range(cfg.k - 1, 0, -1):
        current: dict = {}
        for a in range(1, cfg.n + 1):
            for I in multiindices(cfg.m, level):
                rhs = _splitting_system_rhs(dec, upper, I, a)
                share = rhs / splitting_count(I)
                for i1, tail in splittings(I):
                    if not share.is_zero:
                        current[(a, i1, tail)] = share
        table.update(current)
        upper = current
    table = {key: value for key, value in table.items() if not value.is_zero}
    return BoundaryCoefficients(dec.cfg, table)


def skew_pair_perturbation(cfg: JetConfig, skew: Mapping) -> dict:
    """Top-level perturbation from skew data Q^{i1 i2}_a (k = 2 family).

    ``skew`` maps (a, i1, i2) to Exprs;  Q^{i1 i2}_a = -Q^{i2 i1}_a and zero
    diagonal are exactly the homogeneous top-level relations for k = 2.
    """
    if cfg.k != 2:
        raise ValueError("skew index pairs parameterize perturbations only for k=2")
    return {
        (a, i1, (i2,)): value
        for (a, i1, i2), value in skew.items()
        if not value.is_zero
    }


def double_vertical_contraction_vanishes(form: DifferentialForm, cfg: JetConfig) -> bool:
    """X2 -| (X1 -| form) = 0 for all source-vertical basis fields X1, X2."""
    vertical = [
        basis_vector(c)
        for c in enumerate_coordinates(cfg, cfg.working_order)
        if c[0] != "x"
    ]
    for X1 in vertical:
        contracted = interior_product(X1, form)
        if contracted.degree == 0 or contracted.is_zero:
            continue
        for X2 in vertical:
            if not interior_product(X2, contracted).is_zero:
                return False
    return True


@dataclass
class BoundaryForm:
    """An assembled boundary form with its coefficients and provenance."""

    cfg: JetConfig
    form: DifferentialForm
    coefficients: BoundaryCoefficients
    phi: PhiDecomposition | None = None

    @property
    def is_boundary_form_of_phi(self) -> bool:
        return self.phi is not None


def assemble_boundary_form(
    coeffs: BoundaryCoefficients, phi: PhiDecomposition | None = None
) -> BoundaryForm:
    """Assemble Xi = sum p^{i1,T}_a theta^a_T ^ (d/dx^{i1} -| d_m x).

    Construction-time verification covers the structural conditions: Xi is
    semi-basic over the forgetful map to order k-1, double contraction with
    source-vertical fields vanishes, and the pullback along every section is
    zero.  Failures signal an implementation bug, not bad user input.  When
    ``phi`` is supplied, the defining coefficient system is checked exactly
    and the result is marked as a boundary form of that Phi.
    """
    cfg = coeffs.cfg
    xi = DifferentialForm.zero(cfg.m)
    for (a, i1, tail), value in sorted(coeffs.table.items()):
        block = contact_form(cfg, a, tail).wedge(base_contraction(cfg, i1))
        xi = xi + block * value
    if not is_semibasic(xi, ("forgetful", cfg.k - 1)):
        raise AssertionError("assembled form is not semi-basic over order k-1")
    if not double_vertical_contraction_vanishes(xi, cfg):
        raise AssertionError("double vertical contraction is nonzero")
    if not holonomic_reduce(xi, cfg).is_zero:
        raise AssertionError("assembled form does not pull back to zero on jets")
    if phi is not None:
        failures = _check_splitting_system(phi, coeffs)
        if failures:
            a, I, residual = failures[0]
            raise AssertionError(
                f"coefficients do not solve the boundary system at a={a}, I={I}: "
                f"{render_expr(residual)}"
            )
    return BoundaryForm(cfg, xi, coeffs, phi)


def boundary_form_for_lagrangian(cfg: JetConfig, L: Expr) -> BoundaryForm:
    """Convenience: the symmetric boundary form of d(L d_m x)."""
    _, dec = phi_from_lagrangian(cfg, L)
    return assemble_boundary_form(symmetric_boundary_coefficients(dec), dec)


def contact_presentation(xi: BoundaryForm) -> str:
    """Render Xi in the contact basis: sum of p * theta^a_T ^ (d/dx^i -| d_m x).

    The stored form is expanded over the coordinate basis (that makes d, the
    wedge and contractions mechanical); this is the presentation-layer view
    matching the defining structure of boundary forms.
    """
    pieces = []
    for (a, i1, tail), value in sorted(xi.coefficients.table.items()):
        theta = f"theta[{a}]" if not tail else (
            f"theta[{a};{' '.join(map(str, tail))}]"
        )
        pieces.append(f"({render_expr(value)}) {theta}^w[{i1}]")
    return " + ".join(pieces) if pieces else "0"


@dataclass
class DeDonderForm:
    """Theta = L d_m x + Xi on the order-(2k-1) jet space."""

    cfg: JetConfig
    lagrangian: Expr
    boundary: BoundaryForm
    form: DifferentialForm = field(init=False)

    def __post_init__(self):
        self.form = (
            DifferentialForm.from_scalar(self.lagrangian).wedge(volume_form(self.cfg))
            + self.boundary.form
        )


def dedonder_form(cfg: JetConfig, L: Expr, xi: BoundaryForm) -> DeDonderForm:
    """Theta = pi* (L d_m x) + Xi, verified to pull back like the Lagrangian."""
    if not xi.is_boundary_form_of_phi:
        raise ValueError(
            "the boundary form was not constructed against a Phi; a De Donder "
            "form requires a boundary form of d(L d_m x)"
        )
    theta = DeDonderForm(cfg, L, xi)
    if not is_semibasic(theta.form, ("forgetful", cfg.k - 1)):
        raise AssertionError("De Donder form is not semi-basic over order k-1")
    reduced = holonomic_reduce(theta.form, cfg)
    expected = holonomic_reduce(
        DifferentialForm.from_scalar(L).wedge(volume_form(cfg)), cfg
    )
    if not (reduced - expected).is_zero:
        raise AssertionError("j*Theta does not equal j*Lambda")
    return theta


@dataclass
class Condition3Report:
    """Outcome of the target-vertical pullback check, per probing field."""

    ok: bool
    failures: list  # (a, I, residual Expr, pulled-back certificate Expr)
    section_degree: int

    def __bool__(self):
        return self.ok


def verify_condition3(
    phi: DifferentialForm | PhiDecomposition,
    xi: BoundaryForm,
    section_degree: int | None = None,
) -> Condition3Report:
    """Check j sigma*(X -| (Phi + dXi)) = 0 for all target-vertical basis X.

    X runs over d/dz^a_I with 1 <= |I| <= 2k-1.  The pullback for a generic
    undetermined-coefficient polynomial section of total degree 2k+1 (enough
    to realize every jet of order 2k at any point) must vanish identically in
    x and the free coefficients.  Failures carry the offending (a, I), the
    reduced residual, and the generic-section certificate.
    """
    cfg = xi.cfg
    phi_form = phi.form() if isinstance(phi, PhiDecomposition) else phi
    degree = 2 * cfg.k + 1 if section_degree is None else section_degree
    total = phi_form + xi.form.d()
    sigma = generic_section(cfg, degree)
    failures = []
    for level in range(1, cfg.working_order + 1):
        for a in range(1, cfg.n + 1):
            for I in multiindices(cfg.m, level):
                X = basis_vector(jet_coord(a, I))
                reduced = holonomic_reduce(interior_product(X, total), cfg)
                if reduced.is_zero:
                    continue
                certificate = DifferentialForm.zero(cfg.m)
                for wedge_key, coeff in reduced.terms():
                    certificate = certificate + DifferentialForm(
                        cfg.m, {wedge_key: substitute_section(coeff, sigma)}
                    )
                if certificate.is_zero:
                    continue
                residual = reduced.coefficient(
                    tuple(("dx", i) for i in range(1, cfg.m + 1))
                )
                failures.append((a, I, residual, certificate))
    return Condition3Report(not failures, failures, degree)


def lagrange_derivative(cfg: JetConfig, L: Expr) -> list:
    """Lagrange derivatives dL/dy^a as expressions of jet order <= 2k.

    On canonical storage the alternating-sign total-derivative sum collapses
    to one term per canonical multi-index:

        dL/dy^a = sum_{l=0..k} (-1)^l sum_{canonical |I|=l} D_I [dL/dz^a_I].

    The identity Phi_a - sum_i D_i p^i_a = dL/dy^a against the symmetric
    boundary coefficients is verified exactly before returning.
    """
    if L.jet_order() > cfg.k:
        raise ValueError(
            f"Lagrangian has jet order {L.jet_order()}, exceeding k={cfg.k}"
        )
    out = []
    for a in range(1, cfg.n + 1):
        acc = L.partial(field_coord(a))
        sign = 1
        for level in range(1, cfg.k + 1):
            sign = -sign
            for I in multiindices(cfg.m, level):
                term = L.partial(jet_coord(a, I))
                if term.is_zero:
                    continue
                for i in I:
                    term = total_derivative(
                        term, i, cfg, max_order=cfg.expression_order
                    )
                acc = acc + (term if sign == 1 else -term)
        out.append(acc)
    _, dec = phi_from_lagrangian(cfg, L)
    coeffs = symmetric_boundary_coefficients(dec)
    for a in range(1, cfg.n + 1):
        identity = dec.component(a) - coeffs.holonomic_divergence(a)
        assert (identity - out[a - 1]).is_zero, (
            "Lagrange derivative disagrees with Phi_a - div p^i_a"
        )
    return out


def dedonder_residual(theta: DeDonderForm, section: PolynomialSection) -> dict:
    """Pullbacks j sigma*(X -| dTheta) for every source-vertical basis X.

    Returns a mapping coordinate -> m-form on the base.  All values vanish
    exactly when the section satisfies the De Donder equations, equivalently
    the Euler-Lagrange equations; the d/dy^a entries carry the Lagrange
    derivative evaluated on the section.
    """
    cfg = theta.cfg
    d_theta = theta.form.d()
    out = {}
    for coord in enumerate_coordinates(cfg, cfg.working_order):
        if coord[0] == "x":
            continue
        pulled = holonomic_pullback(
            interior_product(basis_vector(coord), d_theta), section
        )
        out[coord] = pulled
    return out


@dataclass
class ComparisonReport:
    """Lemma-2 style comparison of two boundary forms of the same Phi."""

    ok: bool
    differences: dict  # (a, i1, tail) -> Expr
    relation_failures: list  # (a, I, residual) from the homogeneous system
    divergence_residuals: dict  # a -> Expr, must all be zero
    pullback_failures: list  # (coordinate, certificate) from d(Xi - Xi')

    def __bool__(self):
        return self.ok


def compare_boundary_forms(xi: BoundaryForm, xi_prime: BoundaryForm) -> ComparisonReport:
    """Verify invariance of the decomposition under change of boundary form.

    Checks, all exactly: the difference Q = p - p' satisfies the homogeneous
    coefficient relations; the level-one divergence trace sum_i D_i Q^i_a
    vanishes identically; and the pullbacks of X -| d(Xi - Xi') vanish for
    every source-vertical basis X.
    """
    if xi.phi is None or xi_prime.phi is None:
        raise ValueError("both forms must be boundary forms of a Phi")
    if not (xi.phi.form() - xi_prime.phi.form()).is_zero:
        raise ValueError("the two boundary forms belong to different Phi")
    cfg = xi.cfg
    differences: dict = {}
    keys = set(xi.coefficients.table) | set(xi_prime.coefficients.table)
    for a, i1, tail in keys:
        diff = xi.coefficients.coefficient(a, i1, tail) - (
            xi_prime.coefficients.coefficient(a, i1, tail)
        )
        if not diff.is_zero:
            differences[(a, i1, tail)] = diff
    q = BoundaryCoefficients(cfg, differences)
    zero_dec = PhiDecomposition(cfg, {}, {})
    relation_failures = _check_splitting_system(zero_dec, q)
    divergence_residuals = {}
    for a in range(1, cfg.n + 1):
        divergence_residuals[a] = q.holonomic_divergence(a)
    pullback_failures = []
    delta = (xi.form - xi_prime.form).d()
    for coord in enumerate_coordinates(cfg, cfg.working_order):
        if coord[0] == "x":
            continue
        reduced = holonomic_reduce(
            interior_product(basis_vector(coord), delta), cfg
        )
        if not reduced.is_zero:
            pullback_failures.append((coord, reduced))
    ok = (
        not relation_failures
        and all(v.is_zero for v in divergence_residuals.values())
        and not pullback_failures
    )
    return ComparisonReport(
        ok, differences, relation_failures, divergence_residuals, pullback_failures
    )
