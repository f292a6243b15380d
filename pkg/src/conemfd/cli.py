"""Command-line front end.

Every subcommand prints a JSON report (or CSV for tables with ``--csv``).
Exit codes: 0 all checks pass, 1 a verified failure, 2 input or usage
error, 3 numerically indeterminate.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from . import bessel, deformations, germ, identities, indicial, normal_op, spectra
from .polyrig import polyhedra, rigidity

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_INDETERMINATE = 0, 1, 2, 3
SPECTRUM_ORACLE_TOL = 1e-8


class InputError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


# -------------------------------------------------------------- rendering


def _num(x) -> str:
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def to_json(obj, indent: int = 0) -> str:
    """JSON with every float written to 17 significant digits."""
    pad, inner = " " * indent, " " * (indent + 1)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{to_json(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating, bool, np.bool_, str)) for v in seq):
            return "[" + ", ".join(to_json(v) for v in seq) + "]"
        return "[\n" + ",\n".join(inner + to_json(v, indent + 1) for v in seq) + "\n" + pad + "]"
    raise TypeError(f"cannot render {type(obj).__name__}")


def _status(code: int) -> str:
    return {EXIT_OK: "pass", EXIT_FAIL: "fail", EXIT_INDETERMINATE: "indeterminate"}[code]


def _report(args, results, checks: dict, code: int) -> str:
    inputs = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "output", "csv", "command", "command_path")}
    return to_json(
        {
            "subcommand": args.command_path,
            "inputs": inputs,
            "results": results,
            "summary": {"status": _status(code), "checks": checks},
            "versions": {"conemfd": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
            "seed": getattr(args, "seed", None),
        }
    ) + "\n"


def _csv_rows(columns, rows) -> str:
    out = [",".join(columns)]
    for row in rows:
        out.append(",".join(_num(v) if isinstance(v, (float, np.floating)) else str(v) for v in row))
    return "\n".join(out) + "\n"


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError("E_FILE", f"cannot read {path}: {exc.strerror}") from exc


# ------------------------------------------------------------ subcommands


def cmd_validate_germ(args):
    try:
        g = germ.loads_germ(_read(args.file))
    except (germ.GermInputError, ValueError) as exc:
        raise InputError("E_GERM", str(exc)) from exc
    rep = germ.validate_germ(g)
    results = {
        "violations": [
            {"code": v.code, "locus": v.locus, "severity": v.severity, "message": v.message} for v in rep.violations
        ],
        "germ_param_dim": germ.germ_param_dim(g),
    }
    code = EXIT_OK if rep.ok else EXIT_FAIL
    return _report(args, results, {"no_violations": rep.ok}, code), code


def _load_poly(path: str) -> polyhedra.Polyhedron:
    try:
        return polyhedra.load_polyhedron(_read(path))
    except (polyhedra.GeometryError, ValueError) as exc:
        raise InputError("E_POLY", str(exc)) from exc


def cmd_double(args):
    poly = _load_poly(args.file)
    try:
        g = germ.double_polyhedron(poly)
    except ValueError as exc:
        raise InputError("E_NONCONVEX", str(exc)) from exc
    rep = germ.validate_germ(g)
    Path(args.germ_out).write_text(germ.dumps_germ(g))
    results = {
        "edges": len(g.edges),
        "vertices": len(g.vertices),
        "edge_angles": [g.edge_data[e.id].angle for e in g.edges],
        "germ_param_dim": germ.germ_param_dim(g),
        "violations": rep.codes(),
        "germ_file": args.germ_out,
    }
    code = EXIT_OK if rep.ok else EXIT_FAIL
    return _report(args, results, {"double_validates": rep.ok}, code), code


def cmd_spectrum(args):
    try:
        closed = spectra.football_spectrum(args.angle, args.max)
    except ValueError as exc:
        raise InputError("E_DOMAIN", str(exc)) from exc
    bounds = spectra.check_spectral_bounds(closed)
    checks = {"weiss_ok": bounds["weiss_ok"], "oneform_gap_ok": bounds["oneform_gap_ok"]}
    rows = [{"lambda": v} for v in closed.expanded()]
    if args.oracle:
        oracle_vals = spectra.oracle_spectrum(args.angle, args.max).expanded()
        checks["oracle_count_matches"] = len(oracle_vals) == len(rows)
        diffs = []
        for row, v in zip(rows, oracle_vals):
            row["oracle"] = v
            row["difference"] = abs(v - row["lambda"])
            diffs.append(row["difference"])
        checks["oracle_agrees"] = bool(diffs) and max(diffs) <= SPECTRUM_ORACLE_TOL
    code = EXIT_OK if all(checks.values()) else EXIT_FAIL
    if args.csv:
        cols = ["lambda"] + (["oracle", "difference"] if args.oracle else [])
        return _csv_rows(cols, [[r[c] for c in cols] for r in rows]), code
    results = {"eigenvalues": closed.as_pairs(), "table": rows, "lambda_1": bounds["lambda_1"], "weiss_equality": bounds["weiss_equality"]}
    return _report(args, results, checks, code), code


def cmd_indicial(args):
    try:
        if args.locus == "vertex":
            if (args.spectrum is None) == (args.football is None):
                raise InputError("E_USAGE", "indicial vertex needs exactly one of --spectrum, --football")
            if args.window is not None:
                raise InputError("E_USAGE", "the vertex window is fixed by the transverse dimension")
            if args.spectrum is not None:
                link = spectra.loads_spectrum(_read(args.spectrum))
            else:
                link = spectra.football_spectrum(args.football, args.max)
            report = indicial.roots_vertex(link, include_endpoint=args.include_endpoint)
        else:
            if args.angle is None:
                raise InputError("E_USAGE", f"indicial {args.locus} needs --angle")
            fn = {
                "cone-scalar": indicial.roots_cone_scalar,
                "cone-oneform": indicial.roots_cone_oneform,
                "edge": indicial.roots_edge,
            }[args.locus]
            report = fn(args.angle, window=args.window, include_endpoint=args.include_endpoint)
    except indicial.SpectralGapError as exc:
        raise InputError("E_SPECTRAL_GAP", str(exc)) from exc
    except ValueError as exc:
        raise InputError("E_DOMAIN", str(exc)) from exc
    residuals = indicial.report_residuals(report)
    worst = max((r for _, _, r in residuals), default=0.0)
    results = report.to_dict()
    results["max_mode_residual"] = worst
    if args.locus == "vertex":
        results["groups"] = report.groups()
    checks = {"mode_residuals_ok": worst <= 1e-9}
    code = EXIT_OK if all(checks.values()) else EXIT_FAIL
    return _report(args, results, checks, code), code


def cmd_normal_scan(args):
    try:
        scan = normal_op.injectivity_scan(args.gamma, args.deltas, args.nmax, args.xis)
    except ValueError as exc:
        raise InputError("E_DOMAIN", str(exc)) from exc
    if args.csv:
        return scan.to_csv(), EXIT_OK
    results = {
        "gamma": scan.gamma,
        "verdicts": [{"delta": d, "verdict": v, "members": [r["mode"] + f"@n={r['n']}" for r in scan.members(d)]}
                     for d, v in scan.verdicts.items()],
        "rows": scan.rows,
    }
    return _report(args, results, {}, EXIT_OK), EXIT_OK


def cmd_normal_solve(args):
    grid = normal_op.radial_grid()
    center, width = args.bump
    try:
        f = normal_op.gaussian_bump(grid, center, width)
        res = normal_op.green_apply(f, grid, args.xi)
    except normal_op.AccuracyError as exc:
        raise InputError("E_ACCURACY", str(exc)) from exc
    except ValueError as exc:
        raise InputError("E_DOMAIN", str(exc)) from exc
    checks = {
        "residual_ok": res.residual <= 1e-6,
        "no_log_term": abs(res.log_coeff) <= 1e-6 * res.f_norm,
    }
    results = {
        "residual": res.residual,
        "log_coeff": res.log_coeff,
        "const_coeff": res.const_coeff,
        "kernel_constant": res.kernel_constant,
        "f_norm": res.f_norm,
    }
    code = EXIT_OK if all(checks.values()) else EXIT_FAIL
    return _report(args, results, checks, code), code


def cmd_check_identities(args):
    chart = identities.named_chart(args.chart)
    reports = identities.identity_suite(chart, trials=args.trials, seed=args.seed)
    checks = {r.identity: r.passes() for r in reports}
    code = EXIT_OK if all(checks.values()) else EXIT_FAIL
    if args.csv:
        rows = [[r.identity, r.max_residual, r.order, int(r.passes())] for r in reports]
        return _csv_rows(["identity", "max_residual", "order", "pass"], rows), code
    results = {
        "identities": [
            {
                "identity": r.identity,
                "max_residual": r.max_residual,
                "order": r.order,
                "steps": r.steps,
                "residuals": r.residuals,
                **r.extra,
            }
            for r in reports
        ]
    }
    return _report(args, results, checks, code), code


def cmd_classify(args):
    field = deformations.deformation_basis(args.kappa, args.kind)
    c = deformations.l2_classify(field)
    results = {
        "tensor_exponent": c.tensor_exponent,
        "derivative_exponent": c.derivative_exponent,
        "tensor_in_L2": c.tensor_in_L2,
        "derivative_in_L2": c.derivative_in_L2,
        "transverse_dim": c.transverse_dim,
        "fit_r2": list(c.fit_quality),
    }
    return _report(args, results, {}, EXIT_OK), EXIT_OK


def cmd_rigidity(args):
    poly = _load_poly(args.file)
    rep = rigidity.rigidity_check(poly, tol_rel=args.tol)
    code = {rigidity.PASS: EXIT_OK, rigidity.FAIL: EXIT_FAIL, rigidity.INDETERMINATE: EXIT_INDETERMINATE}[rep.verdict]
    checks = {"verdict_pass": rep.verdict == rigidity.PASS}
    return _report(args, rep.to_dict(), checks, code), code


def cmd_bessel_selftest(args):
    st = bessel.selftest()
    checks = {
        "wronskian_ok": st["wronskian_max_defect"] <= 1e-10,
        "corrected_asymptotics_ok": st["corrected_max_deviation"] <= 1e-3,
    }
    results = {
        "wronskian_max_defect": st["wronskian_max_defect"],
        "x": bessel.SELFTEST_X,
        "leading_ratios": [{"order": a, "I": r[0], "K": r[1]} for a, r in st["large_x_ratios"].items()],
        "corrected_ratios": [{"order": a, "I": r[0], "K": r[1]} for a, r in st["corrected_ratios"].items()],
    }
    code = EXIT_OK if all(checks.values()) else EXIT_FAIL
    return _report(args, results, checks, code), code


# ---------------------------------------------------------------- parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        sys.stderr.write(f"E_USAGE: {message}\n")
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_INPUT)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="conemfd", description="Numerical checks for constant-curvature cone-manifolds.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, path=None, parent=sub, report_file=True, **kw):
        sp = parent.add_parser(name, **kw)
        sp.set_defaults(func=func, command_path=path or name, output=None)
        if report_file:
            sp.add_argument("-o", "--output", help="write the report here instead of stdout")
        return sp

    sp = add("validate-germ", cmd_validate_germ, help="validate a germ file")
    sp.add_argument("file")

    sp = add("double", cmd_double, report_file=False, help="double a polyhedron into a germ")
    sp.add_argument("file")
    sp.add_argument("-o", "--germ-out", required=True, help="germ file to write")

    spec = sub.add_parser("spectrum", help="Laplace spectra of spherical cone-surfaces")
    ssub = spec.add_subparsers(dest="surface", required=True, parser_class=_Parser)
    sp = add("football", cmd_spectrum, "spectrum football", ssub, help="football with the given cone angle")
    sp.add_argument("--angle", type=float, required=True)
    sp.add_argument("--max", type=float, required=True)
    sp.add_argument("--oracle", action="store_true", help="also compute eigenvalues by shooting")
    sp.add_argument("--csv", action="store_true")

    sp = add("indicial", cmd_indicial, help="indicial roots at a singular locus")
    sp.add_argument("locus", choices=["cone-scalar", "cone-oneform", "edge", "vertex"])
    sp.add_argument("--angle", type=float)
    sp.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"))
    sp.add_argument("--spectrum", help="link spectrum file (lambda multiplicity per line)")
    sp.add_argument("--football", type=float, metavar="A", help="use the football link of cone angle A")
    sp.add_argument("--max", type=float, default=4.0, help="spectral cutoff for --football")
    sp.add_argument("--include-endpoint", action="store_true")

    nop = sub.add_parser("normal-op", help="edge normal operator")
    nsub = nop.add_subparsers(dest="action", required=True, parser_class=_Parser)
    sp = add("scan", cmd_normal_scan, "normal-op scan", nsub, help="weighted L2 injectivity scan")
    sp.add_argument("--gamma", type=float, required=True)
    sp.add_argument("--deltas", type=float, nargs="+", required=True)
    sp.add_argument("--nmax", type=int, required=True)
    sp.add_argument("--xis", type=float, nargs="+", required=True)
    sp.add_argument("--csv", action="store_true")
    sp = add("solve", cmd_normal_solve, "normal-op solve", nsub, help="Green solve for a Gaussian bump")
    sp.add_argument("--xi", type=float, required=True)
    sp.add_argument("--bump", type=float, nargs=2, metavar=("C", "W"), required=True)

    chk = sub.add_parser("check", help="operator identity checks")
    csub = chk.add_subparsers(dest="what", required=True, parser_class=_Parser)
    sp = add("identities", cmd_check_identities, "check identities", csub, help="finite-difference identity suite")
    sp.add_argument("--chart", choices=["flat", "hyperbolic-edge", "euclidean-edge", "spherical-edge", "vertex"], required=True)
    sp.add_argument("--trials", type=int, default=3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--csv", action="store_true")

    sp = add("classify-deformation", cmd_classify, help="L2 class of a standard deformation")
    sp.add_argument("--kind", choices=list(deformations.KINDS), required=True)
    sp.add_argument("--kappa", type=int, choices=[-1, 0, 1], required=True)

    sp = add("rigidity", cmd_rigidity, help="infinitesimal rigidity check")
    sp.add_argument("file")
    sp.add_argument("--tol", type=float, default=rigidity.DEFAULT_TOL)

    bes = sub.add_parser("bessel", help="Bessel layer")
    bsub = bes.add_subparsers(dest="action", required=True, parser_class=_Parser)
    add("selftest", cmd_bessel_selftest, "bessel selftest", bsub, help="Wronskian and asymptotic checks")
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text, code = args.func(args)
    except InputError as exc:
        sys.stderr.write(f"{exc.code}: {exc}\n")
        return EXIT_INPUT
    except ArithmeticError as exc:
        sys.stderr.write(f"E_NUMERIC: {exc}\n")
        return EXIT_INDETERMINATE
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
