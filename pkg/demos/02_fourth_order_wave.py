"""The fourth-order wave example on 1+1 Minkowski spacetime.

L = g_ab g^ij g^kl z^a_ij z^b_kl gives the squared d'Alembertian as its
Euler-Lagrange operator.  The script derives the equations, builds the De
Donder form, and evaluates its residuals on a solution and on a non-solution.
"""
from jetforms import (
    Expr,
    PolynomialSection,
    dedonder_residual,
    lagrange_derivative,
    render_expr,
    render_form,
    x_var,
)
from jetforms.wave import wave_problem

wp = wave_problem()
cfg = wp.cfg

print("Lagrangian:")
print("  L =", render_expr(wp.lagrangian))

# Writing x[1] = t, x[2] = x: the operator is y_tttt - 2 y_ttxx + y_xxxx,
# with the fibre-metric sign per field.
print("\nEuler-Lagrange equations:")
for a, delta in enumerate(lagrange_derivative(cfg, wp.lagrangian), start=1):
    print(f"  deltaL/dy[{a}] =", render_expr(delta))

print("\nDe Donder form Theta = L d_2x + Xi:")
print("  Theta =", render_form(wp.theta_symmetric.form))

# Any function of (x - t) solves both the wave equation and its square.
x1, x2 = x_var(1), x_var(2)
travelling = PolynomialSection(cfg, ((x2 - x1) ** 3, (x2 - x1) ** 2))
residuals = dedonder_residual(wp.theta_symmetric, travelling)
print("\nResiduals on the travelling-wave section (all must be 0):")
print("  max over contractions:",
      "0" if all(f.is_zero for f in residuals.values()) else "NONZERO")

# t^2 x^2 is not a solution; the d/dy-contraction carries the Lagrange
# derivative evaluated on the section.
bad = PolynomialSection(cfg, (x1**2 * x2**2, x1 * x2))
residuals = dedonder_residual(wp.theta_symmetric, bad)
print("\nResiduals on t^2 x^2 (the d/dy[1] entry is the EL value):")
for coord, form in sorted(residuals.items()):
    if not form.is_zero:
        print(f"  d/d{render_expr(Expr.variable(coord))}:", render_form(form))
