"""Exterior calculus on the jet-coordinate chart.

Differential forms are stored fully expanded over the coordinate one-form
basis ``dx^i, dy^a, dz^a_I`` with :class:`~jetforms.expressions.Expr`
coefficients.  Each term is an Expr times a strictly increasing wedge of
basis one-forms under the fixed global order (dx by i, then dy by a, then dz
by (|I|, a, I)), which pins down every sign once and for all.

Vector fields on the jet space are plain mappings ``coordinate -> Expr``;
missing entries are zero.  Fields with dx-components are allowed (time
translation in the wave example is one), verticality is checked where an
operation requires it.

``holonomic_reduce`` is the workhorse for "for every section" statements: it
rewrites dy^a -> z^a_(i) dx^i and dz^a_I -> z^a_{I+i} dx^i, which is exactly
what pulling back along the jet extension of an arbitrary section does to the
form part.  A form pulls back to zero along every section iff its reduction
is the zero form, because jets of polynomial sections realize every
combination of coordinate values.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from .expressions import Expr, PolynomialSection, render_expr, substitute_section
from .jets import JetConfig, base_coord, field_coord, jet_coord, multiindices

BasisOneForm = tuple  # ("dx", i) | ("dy", a) | ("dz", a, I)


def dx(i: int) -> BasisOneForm:
    return ("dx", i)


def dy(a: int) -> BasisOneForm:
    return ("dy", a)


def dz(a: int, indices) -> BasisOneForm:
    return ("dz", a, tuple(indices))


def basis_sort_key(b: BasisOneForm):
    tag = b[0]
    if tag == "dx":
        return (0, b[1])
    if tag == "dy":
        return (1, b[1])
    return (2, len(b[2]), b[1], b[2])


def coordinate_of_basis(b: BasisOneForm) -> tuple:
    """The coordinate dual to a basis one-form (dz^a_I <-> z^a_I etc.)."""
    tag = b[0]
    if tag == "dx":
        return base_coord(b[1])
    if tag == "dy":
        return field_coord(b[1])
    return jet_coord(b[1], b[2])


def basis_of_coordinate(coord) -> BasisOneForm:
    tag = coord[0]
    if tag == "x":
        return dx(coord[1])
    if tag == "y":
        return dy(coord[1])
    if tag == "z":
        return dz(coord[1], coord[2])
    raise ValueError(f"coordinate {coord!r} has no differential")


def _prepend_signed(wedge: tuple, b: BasisOneForm):
    """Sort b ^ wedge into canonical order; returns (wedge, sign) or None."""
    key = basis_sort_key(b)
    for pos, existing in enumerate(wedge):
        existing_key = basis_sort_key(existing)
        if existing_key == key:
            return None
        if existing_key > key:
            sign = -1 if pos % 2 else 1
            return wedge[:pos] + (b,) + wedge[pos:], sign
    sign = -1 if len(wedge) % 2 else 1
    return wedge + (b,), sign


def _merge_wedges(wedge_a: tuple, wedge_b: tuple):
    """Sort wedge_a ^ wedge_b, counting inversions; None on a repeated factor."""
    out = []
    sign = 1
    ia, ib = 0, 0
    while ia < len(wedge_a) and ib < len(wedge_b):
        key_a = basis_sort_key(wedge_a[ia])
        key_b = basis_sort_key(wedge_b[ib])
        if key_a == key_b:
            return None
        if key_a < key_b:
            out.append(wedge_a[ia])
            ia += 1
        else:
            if (len(wedge_a) - ia) % 2:
                sign = -sign
            out.append(wedge_b[ib])
            ib += 1
    out.extend(wedge_a[ia:])
    out.extend(wedge_b[ib:])
    return tuple(out), sign


class DifferentialForm:
    """Graded sum of Expr-coefficient wedges of coordinate one-forms."""

    __slots__ = ("degree", "_terms")

    def __init__(self, degree: int, terms: dict | None = None):
        self.degree = degree
        self._terms = terms if terms is not None else {}

    @staticmethod
    def zero(degree: int = 0) -> "DifferentialForm":
        return DifferentialForm(degree)

    @staticmethod
    def from_scalar(e: Expr) -> "DifferentialForm":
        return DifferentialForm(0, {(): e} if not e.is_zero else {})

    @staticmethod
    def basis(b: BasisOneForm) -> "DifferentialForm":
        return DifferentialForm(1, {(b,): Expr.one()})

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def terms(self):
        return self._terms.items()

    def coefficient(self, wedge: Sequence[BasisOneForm]) -> Expr:
        return self._terms.get(tuple(wedge), Expr.zero())

    def _accumulate(self, store: dict, wedge: tuple, coeff: Expr):
        if coeff.is_zero:
            return
        acc = store.get(wedge)
        total = coeff if acc is None else acc + coeff
        if total.is_zero:
            store.pop(wedge, None)
        else:
            store[wedge] = total

    def __add__(self, other: "DifferentialForm") -> "DifferentialForm":
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        if self.degree != other.degree:
            raise ValueError(
                f"cannot add forms of degree {self.degree} and {other.degree}"
            )
        out = dict(self._terms)
        result = DifferentialForm(self.degree, out)
        for wedge, coeff in other._terms.items():
            result._accumulate(out, wedge, coeff)
        return result

    def __neg__(self) -> "DifferentialForm":
        return DifferentialForm(
            self.degree, {w: -c for w, c in self._terms.items()}
        )

    def __sub__(self, other: "DifferentialForm") -> "DifferentialForm":
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar) -> "DifferentialForm":
        if isinstance(scalar, (int, Fraction, Expr)):
            out: dict = {}
            result = DifferentialForm(self.degree, out)
            for wedge, coeff in self._terms.items():
                result._accumulate(out, wedge, coeff * scalar)
            return result
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        if self.degree != other.degree and not (self.is_zero or other.is_zero):
            return False
        return (self - other).is_zero

    def __ne__(self, other):
        eq = self.__eq__(other)
        return NotImplemented if eq is NotImplemented else not eq

    __hash__ = None

    def __repr__(self):
        return f"DifferentialForm({render_form(self)})"

    def wedge(self, other: "DifferentialForm") -> "DifferentialForm":
        if not isinstance(other, DifferentialForm):
            raise TypeError("wedge expects a DifferentialForm")
        out: dict = {}
        result = DifferentialForm(self.degree + other.degree, out)
        for wedge_a, coeff_a in self._terms.items():
            for wedge_b, coeff_b in other._terms.items():
                merged = _merge_wedges(wedge_a, wedge_b)
                if merged is None:
                    continue
                wedge, sign = merged
                coeff = coeff_a * coeff_b
                result._accumulate(out, wedge, coeff if sign == 1 else -coeff)
        return result

    def d(self) -> "DifferentialForm":
        """Exterior derivative; differentiates coefficients in every
        coordinate present (coefficient symbols are constants)."""
        out: dict = {}
        result = DifferentialForm(self.degree + 1, out)
        for wedge, coeff in self._terms.items():
            for coord in coeff.variables():
                if coord[0] == "c":
                    continue
                dcoeff = coeff.partial(coord)
                if dcoeff.is_zero:
                    continue
                inserted = _prepend_signed(wedge, basis_of_coordinate(coord))
                if inserted is None:
                    continue
                new_wedge, sign = inserted
                result._accumulate(
                    out, new_wedge, dcoeff if sign == 1 else -dcoeff
                )
        return result


VectorFieldOnJet = Mapping[tuple, Expr]


def vector_field(components: Mapping[tuple, Expr]) -> dict:
    return {tuple(c): e for c, e in components.items() if not e.is_zero}


def basis_vector(coord) -> dict:
    return {tuple(coord): Expr.one()}


def is_vertical_over_base(X: VectorFieldOnJet) -> bool:
    """No dx-direction components (tangent to source-map fibres)."""
    return all(coord[0] != "x" or comp.is_zero for coord, comp in X.items())


def wedge(a: DifferentialForm, b: DifferentialForm) -> DifferentialForm:
    return a.wedge(b)


def exterior_derivative(form: DifferentialForm) -> DifferentialForm:
    return form.d()


def interior_product(X: VectorFieldOnJet, form: DifferentialForm) -> DifferentialForm:
    """Left interior product (contraction) X -| form."""
    if form.degree < 1:
        raise ValueError("interior product needs a form of degree >= 1")
    out: dict = {}
    result = DifferentialForm(form.degree - 1, out)
    for wedge_key, coeff in form.terms():
        for pos, b in enumerate(wedge_key):
            comp = X.get(coordinate_of_basis(b))
            if comp is None or comp.is_zero:
                continue
            reduced = wedge_key[:pos] + wedge_key[pos + 1 :]
            signed = coeff * comp
            result._accumulate(out, reduced, signed if pos % 2 == 0 else -signed)
    return result


def lie_derivative(X: VectorFieldOnJet, form: DifferentialForm) -> DifferentialForm:
    """Cartan formula: L_X = X -| d + d (X -| .)."""
    if form.degree == 0:
        return interior_product(X, form.d())
    return interior_product(X, form.d()) + interior_product(X, form).d()


def volume_form(cfg: JetConfig) -> DifferentialForm:
    out = DifferentialForm.basis(dx(1))
    for i in range(2, cfg.m + 1):
        out = out.wedge(DifferentialForm.basis(dx(i)))
    return out


def base_contraction(cfg: JetConfig, i: int) -> DifferentialForm:
    """The (m-1)-form d/dx^i -| d_m x."""
    return interior_product(basis_vector(base_coord(i)), volume_form(cfg))


def contact_form(cfg: JetConfig, a: int, indices: tuple) -> DifferentialForm:
    """theta^a_I = dz^a_I - z^a_{I+i} dx^i (dy^a - z^a_(i) dx^i for |I|=0)."""
    indices = tuple(indices)
    lead = dy(a) if not indices else dz(a, indices)
    terms = {(lead,): Expr.one()}
    for i in range(1, cfg.m + 1):
        lifted = jet_coord(a, tuple(sorted(indices + (i,))))
        terms[(dx(i),)] = -Expr.variable(lifted)
    return DifferentialForm(1, terms)


def contact_forms(cfg: JetConfig, order: int) -> list:
    """All contact forms of the order-``order`` jet space."""
    if not 1 <= order <= cfg.working_order:
        raise ValueError(f"order {order} outside 1..{cfg.working_order}")
    forms = []
    for level in range(order):
        for a in range(1, cfg.n + 1):
            for I in multiindices(cfg.m, level):
                forms.append(contact_form(cfg, a, I))
    return forms


_SEMIBASIC_KINDS = ("source", "target")


def is_semibasic(form: DifferentialForm, fibration) -> bool:
    """True iff X -| form = 0 for every X tangent to the fibration's fibres.

    ``fibration`` is "source" (fibres along all y and z directions),
    "target" (along all z directions), or ("forgetful", l) (along z^a_I with
    |I| > l).  On the expanded coordinate basis this is the statement that no
    term contains the corresponding dual one-forms.
    """
    if fibration in _SEMIBASIC_KINDS:
        kind, level = fibration, None
    else:
        kind, level = fibration
        if kind != "forgetful":
            raise ValueError(f"unknown fibration {fibration!r}")
    for wedge_key in dict(form.terms()):
        for b in wedge_key:
            if kind == "source" and b[0] in ("dy", "dz"):
                return False
            if kind == "target" and b[0] == "dz":
                return False
            if kind == "forgetful" and b[0] == "dz" and len(b[2]) > level:
                return False
    return True


def holonomic_reduce(form: DifferentialForm, cfg: JetConfig) -> DifferentialForm:
    """Rewrite dy and dz factors through the holonomic relations.

    The result has only dx factors; its coefficients are polynomials in the
    jet coordinates (one order above those appearing as dz).  Pulling ``form``
    back along j^r sigma equals substituting sigma into the reduction, for
    every section sigma.
    """
    result = DifferentialForm.zero(form.degree)
    for wedge_key, coeff in form.terms():
        partial = DifferentialForm(0, {(): coeff})
        for b in wedge_key:
            if b[0] == "dx":
                factor = DifferentialForm.basis(b)
            else:
                a = b[1]
                indices = b[2] if b[0] == "dz" else ()
                terms = {}
                for i in range(1, cfg.m + 1):
                    lifted = tuple(sorted(indices + (i,)))
                    if len(lifted) > cfg.expression_order:
                        raise ValueError(
                            f"holonomic reduction needs jet order {len(lifted)} "
                            f"beyond the allowed order {cfg.expression_order}"
                        )
                    terms[(dx(i),)] = Expr.variable(jet_coord(a, lifted))
                factor = DifferentialForm(1, terms)
            partial = partial.wedge(factor)
        result = result + partial
    return result


def holonomic_pullback(
    form: DifferentialForm, section: PolynomialSection
) -> DifferentialForm:
    """Pull back along the jet extension of a polynomial section.

    Returns a form on the base: dx factors only, coefficients polynomial in x
    (plus any free coefficient symbols the section carries).
    """
    cfg = section.cfg
    if form.degree > cfg.m:
        return DifferentialForm.zero(form.degree)
    reduced = holonomic_reduce(form, cfg)
    out: dict = {}
    result = DifferentialForm(form.degree, out)
    for wedge_key, coeff in reduced.terms():
        result._accumulate(out, wedge_key, substitute_section(coeff, section))
    return result


def render_form(form: DifferentialForm) -> str:
    """Deterministic text rendering: `(coeff) b1^b2^...` per term."""
    if form.is_zero:
        return "0"

    def render_basis(b):
        if b[0] == "dx":
            return f"dx[{b[1]}]"
        if b[0] == "dy":
            return f"dy[{b[1]}]"
        return f"dz[{b[1]};{' '.join(map(str, b[2]))}]"

    parts = []
    for wedge_key in sorted(
        dict(form.terms()), key=lambda w: tuple(basis_sort_key(b) for b in w)
    ):
        coeff = form.coefficient(wedge_key)
        body = "^".join(render_basis(b) for b in wedge_key)
        if not body:
            parts.append(f"({render_expr(coeff)})")
        else:
            parts.append(f"({render_expr(coeff)}) {body}")
    return " + ".join(parts)
