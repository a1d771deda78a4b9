"""Command-line entry point.

    jetforms <command> <problem-file> [--json] [--out DIR] [--grid-n N]
             [--t1 T] [--seed S] [--section NAME]

Commands: euler-lagrange, boundary-form, dedonder-form, verify, noether,
evolve, residual.  Exit codes: 0 all checks passed, 1 a check failed,
2 parse or semantic error in the input.  Set JETFORMS_LOG=debug for chatty
logging.  Output is deterministic: identical inputs give byte-identical
output.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from .dedonder import (
    assemble_boundary_form,
    compare_boundary_forms,
    dedonder_form,
    dedonder_residual,
    lagrange_derivative,
    perturbed_coefficients,
    phi_from_lagrangian,
    skew_pair_perturbation,
    symmetric_boundary_coefficients,
    verify_condition3,
)
from .expressions import Expr, render_expr, z_var
from .forms import render_form
from .jets import jet_coord
from .numeric import (
    EnergyFunctional,
    GridSpec,
    band_limited_state,
    cauchy_evolve,
)
from .problem import ProblemError, ProblemSpec, _render_rational, parse_problem
from .prolongations import is_symmetry, noether_current

log = logging.getLogger("jetforms")

ENERGY_DRIFT_TOL = 1e-6
ENERGY_AGREE_TOL = 1e-10

COMMANDS = (
    "euler-lagrange",
    "boundary-form",
    "dedonder-form",
    "verify",
    "noether",
    "evolve",
    "residual",
)


@dataclass
class Report:
    """Accumulates human-readable lines, machine records and check results."""

    json_mode: bool
    lines: list = field(default_factory=list)
    data: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    def say(self, text: str):
        self.lines.append(text)

    def check(self, name: str, ok: bool, detail: str = ""):
        self.checks.append({"name": name, "ok": bool(ok), "detail": detail})
        status = "PASS" if ok else "FAIL"
        self.say(f"{name}: {status}" + (f" ({detail})" if detail else ""))

    @property
    def ok(self) -> bool:
        return all(c["ok"] for c in self.checks)

    def emit(self, stream=None):
        stream = stream or sys.stdout
        if self.json_mode:
            payload = dict(self.data)
            if self.checks:
                payload["checks"] = self.checks
                payload["ok"] = self.ok
            json.dump(payload, stream, indent=2, sort_keys=True)
            stream.write("\n")
        else:
            for line in self.lines:
                stream.write(line + "\n")


def _symmetric_objects(spec: ProblemSpec):
    phi, dec = phi_from_lagrangian(spec.cfg, spec.lagrangian)
    coeffs = symmetric_boundary_coefficients(dec)
    xi = assemble_boundary_form(coeffs, dec)
    theta = dedonder_form(spec.cfg, spec.lagrangian, xi)
    return phi, dec, coeffs, xi, theta


def _coefficient_key(a: int, i1: int, tail: tuple) -> str:
    indices = " ".join(map(str, (i1,) + tail))
    return f"p[{a}; {indices}]"


def _leading_coefficient(delta: Expr):
    from .expressions import _monomial_sort_key

    terms = sorted(delta.terms(), key=lambda item: _monomial_sort_key(item[0]))
    return terms[0][1] if terms else 0


def cmd_euler_lagrange(spec: ProblemSpec, report: Report, args):
    deltas = lagrange_derivative(spec.cfg, spec.lagrangian)
    rendered = {}
    normalized = {}
    for a, delta in enumerate(deltas, start=1):
        rendered[str(a)] = render_expr(delta)
        report.say(f"deltaL/dy[{a}] = {rendered[str(a)]}")
        lead = _leading_coefficient(delta)
        if lead not in (0, 1):
            normalized[str(a)] = render_expr(delta * (Fraction(1) / Fraction(lead)))
            report.say(
                f"deltaL/dy[{a}] = ({_render_rational(Fraction(lead))}) * "
                f"({normalized[str(a)]})"
            )
    report.data["euler_lagrange"] = rendered
    if normalized:
        report.data["euler_lagrange_normalized"] = normalized


def cmd_boundary_form(spec: ProblemSpec, report: Report, args):
    from .dedonder import contact_presentation

    _, dec, coeffs, xi, _ = _symmetric_objects(spec)
    rendered = {}
    for (a, i1, tail) in sorted(coeffs.table):
        key = _coefficient_key(a, i1, tail)
        rendered[key] = render_expr(coeffs.coefficient(a, i1, tail))
        report.say(f"{key} = {rendered[key]}")
    report.say(f"Xi = {contact_presentation(xi)}")
    report.say(f"Xi (coordinate basis) = {render_form(xi.form)}")
    report.data["coefficients"] = rendered
    report.data["boundary_form_contact"] = contact_presentation(xi)
    report.data["boundary_form"] = render_form(xi.form)


def cmd_dedonder_form(spec: ProblemSpec, report: Report, args):
    _, dec, coeffs, xi, theta = _symmetric_objects(spec)
    report.say(f"Theta = {render_form(theta.form)}")
    report.data["dedonder_form"] = render_form(theta.form)
    report.data["lagrangian"] = render_expr(spec.lagrangian)


def _declared_skew_delta(spec: ProblemSpec):
    skew = {key: value for key, value in spec.skew.items()}
    return skew_pair_perturbation(spec.cfg, skew) if skew else None


def cmd_verify(spec: ProblemSpec, report: Report, args):
    from .forms import holonomic_reduce, is_semibasic

    from .dedonder import double_vertical_contraction_vanishes

    phi, dec, coeffs, xi, theta = _symmetric_objects(spec)
    cfg = spec.cfg
    report.check(
        "boundary-form-semibasic-over-forgetful",
        is_semibasic(xi.form, ("forgetful", cfg.k - 1)),
    )
    report.check(
        "boundary-form-double-vertical-contraction",
        double_vertical_contraction_vanishes(xi.form, cfg),
    )
    report.check("boundary-form-pullback-vanishes", holonomic_reduce(xi.form, cfg).is_zero)
    condition3 = verify_condition3(dec, xi)
    detail = ""
    if not condition3.ok:
        a, I, residual, _ = condition3.failures[0]
        detail = f"first failure at a={a}, I={I}: {render_expr(residual)}"
    report.check("boundary-form-target-vertical-pullback", condition3.ok, detail)
    if spec.skew:
        delta = _declared_skew_delta(spec)
        try:
            alt_coeffs = perturbed_coefficients(dec, delta)
        except ValueError as exc:
            report.check("skew-structure", False, str(exc))
            return
        report.check("skew-structure", True)
        alt = assemble_boundary_form(alt_coeffs, dec)
        comparison = compare_boundary_forms(xi, alt)
        report.check(
            "skew-homogeneous-relations",
            not comparison.relation_failures,
            ""
            if not comparison.relation_failures
            else f"violated at {comparison.relation_failures[0][:2]}",
        )
        trace_ok = all(v.is_zero for v in comparison.divergence_residuals.values())
        report.check("divergence-trace-invariance", trace_ok)
        report.check(
            "pullback-difference-vanishes",
            not comparison.pullback_failures,
        )
        report.data["skew_differences"] = {
            _coefficient_key(*key): render_expr(value)
            for key, value in sorted(comparison.differences.items())
        }


def cmd_noether(spec: ProblemSpec, report: Report, args):
    if not spec.fields:
        report.say("no symmetry fields declared")
        return
    _, dec, coeffs, xi, theta = _symmetric_objects(spec)
    currents = {}
    for name in sorted(spec.fields):
        Y = spec.fields[name]
        symmetric, residual = is_symmetry(Y, spec.lagrangian)
        report.check(
            f"symmetry-{name}",
            symmetric,
            "" if symmetric else f"residual {render_form(residual)}",
        )
        for section_name in sorted(spec.sections):
            section = spec.sections[section_name]
            residuals = dedonder_residual(theta, section)
            solves = all(form.is_zero for form in residuals.values())
            if not (symmetric and solves):
                report.say(
                    f"current-{name}-on-{section_name}: skipped "
                    f"({'not a symmetry' if not symmetric else 'section is not a solution'})"
                )
                continue
            current = noether_current(Y, theta, section)
            closed = current.d().is_zero
            currents[f"{name}:{section_name}"] = render_form(current)
            report.say(f"current-{name}-on-{section_name} = {render_form(current)}")
            report.check(f"conservation-{name}-on-{section_name}", closed)
    if currents:
        report.data["currents"] = currents


def _squared_wave_pattern(cfg, deltas) -> bool:
    """Do the Lagrange derivatives match c*(z_tttt - 2 z_ttxx + z_xxxx)?"""
    if cfg.m != 2 or cfg.k != 2:
        return False
    for a, delta in enumerate(deltas, start=1):
        pattern = (
            Expr.variable(jet_coord(a, (1, 1, 1, 1)))
            - 2 * Expr.variable(jet_coord(a, (1, 1, 2, 2)))
            + Expr.variable(jet_coord(a, (2, 2, 2, 2)))
        )
        lead = delta.partial(jet_coord(a, (1, 1, 1, 1))).constant_term()
        if lead == 0 or delta != pattern * lead:
            return False
    return True


def cmd_evolve(spec: ProblemSpec, report: Report, args):
    cfg = spec.cfg
    if spec.grid is None or spec.evolve is None:
        raise ProblemError(
            "the evolve command needs grid and evolve declarations", 1, 1
        )
    deltas = lagrange_derivative(cfg, spec.lagrangian)
    if not _squared_wave_pattern(cfg, deltas):
        report.check(
            "evolve-system-supported",
            False,
            "the Cauchy solver covers the squared-wave operator "
            "z_tttt - 2 z_ttxx + z_xxxx only",
        )
        return
    report.check("evolve-system-supported", True)
    grid = spec.grid
    if args.grid_n:
        grid = GridSpec(
            tuple((lo, hi, args.grid_n, periodic) for lo, hi, _, periodic in grid.axes)
        )
    t0, t1, steps = spec.evolve
    if args.t1 is not None:
        t1 = args.t1
    _, dec, coeffs, xi, theta = _symmetric_objects(spec)
    if spec.skew:
        delta = _declared_skew_delta(spec)
    else:
        delta = skew_pair_perturbation(
            cfg,
            {
                (a, i1, i2): sign * z_var(a, (2,))
                for a in range(1, cfg.n + 1)
                for (i1, i2, sign) in ((1, 2, 1), (2, 1, -1))
            },
        )
    alt = assemble_boundary_form(perturbed_coefficients(dec, delta), dec)
    theta_skew = dedonder_form(cfg, spec.lagrangian, alt)
    energy_sym = EnergyFunctional(theta)
    energy_skew = EnergyFunctional(theta_skew)
    count = grid.shape[0]
    state = band_limited_state(grid, cfg.n, max_mode=max(2, count // 8), seed=args.seed)
    state.t = t0
    rows = []
    for step in range(steps + 1):
        t = t0 + (t1 - t0) * step / steps
        state = cauchy_evolve(state, t)
        e_sym = energy_sym(state)
        e_skew = energy_skew(state)
        rows.append((t, e_sym, e_skew))
    e0 = rows[0][1]
    scale = abs(e0) if e0 else 1.0
    drift = max(abs(e - e0) for _, e, _ in rows) / scale
    agree = max(abs(es - ek) for _, es, ek in rows) / scale
    csv_lines = ["t,E_symmetric,E_skew,drift"]
    for t, e_sym, e_skew in rows:
        csv_lines.append(
            f"{t:.17g},{e_sym:.17g},{e_skew:.17g},{abs(e_sym - e0) / scale:.17g}"
        )
    csv_text = "\n".join(csv_lines) + "\n"
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "conservation.csv")
        with open(path, "w") as handle:
            handle.write(csv_text)
        report.say(f"wrote {path}")
    else:
        report.say(csv_text.rstrip("\n"))
    report.data["csv"] = csv_text
    report.check(
        "energy-drift",
        drift <= ENERGY_DRIFT_TOL,
        f"max relative drift {drift:.3e} over [{t0:g}, {t1:g}]",
    )
    report.check(
        "boundary-form-independence",
        agree <= ENERGY_AGREE_TOL,
        f"max relative symmetric-vs-skew gap {agree:.3e}",
    )


def cmd_residual(spec: ProblemSpec, report: Report, args):
    if not spec.sections:
        raise ProblemError("the residual command needs a section declaration", 1, 1)
    names = [args.section] if args.section else sorted(spec.sections)
    _, dec, coeffs, xi, theta = _symmetric_objects(spec)
    results = {}
    for name in names:
        section = spec.sections.get(name)
        if section is None:
            raise ProblemError(f"unknown section {name!r}", 1, 1)
        residuals = dedonder_residual(theta, section)
        nonzero = {
            coord: form for coord, form in residuals.items() if not form.is_zero
        }
        for coord in sorted(residuals, key=lambda c: (c[0], c[1:])):
            form = residuals[coord]
            label = render_expr(Expr.variable(coord))
            if form.is_zero:
                continue
            report.say(f"residual[{name}] d/d{label}: {render_form(form)}")
        results[name] = {
            render_expr(Expr.variable(coord)): render_form(form)
            for coord, form in sorted(nonzero.items(), key=lambda kv: str(kv[0]))
        }
        report.check(
            f"dedonder-equations-{name}",
            not nonzero,
            "" if not nonzero else f"{len(nonzero)} nonvanishing contractions",
        )
    report.data["residuals"] = results


HANDLERS = {
    "euler-lagrange": cmd_euler_lagrange,
    "boundary-form": cmd_boundary_form,
    "dedonder-form": cmd_dedonder_form,
    "verify": cmd_verify,
    "noether": cmd_noether,
    "evolve": cmd_evolve,
    "residual": cmd_residual,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jetforms",
        description="Boundary forms, De Donder forms and conservation checks.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("problem", help="problem description file")
    parser.add_argument("--json", action="store_true", help="structured output")
    parser.add_argument("--out", help="directory for artifacts (CSV)")
    parser.add_argument("--grid-n", type=int, default=0, help="override grid size")
    parser.add_argument("--t1", type=float, default=None, help="override end time")
    parser.add_argument("--seed", type=int, default=0, help="random data seed")
    parser.add_argument("--section", default=None, help="section name for residual")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=getattr(logging, os.environ.get("JETFORMS_LOG", "WARNING").upper(), 30)
    )
    args = build_parser().parse_args(argv)
    try:
        with open(args.problem) as handle:
            text = handle.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = Report(json_mode=args.json)
    try:
        spec = parse_problem(text)
        HANDLERS[args.command](spec, report, args)
    except ProblemError as exc:
        record = {
            "error": exc.message,
            "line": exc.line,
            "column": exc.column,
            "expected": list(exc.expected),
        }
        if args.json:
            json.dump(record, sys.stdout, indent=2, sort_keys=True)
            sys.stdout.write("\n")
        else:
            print(f"{args.problem}:{exc}", file=sys.stderr)
        return 2
    report.emit()
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
