"""Command-line entry point: ``wslab <command> ...``.

Exit codes: 0 success, 1 validation failure, 2 numeric failure.
"""

import argparse
import csv
import io
import json
import sys


from . import schemas
from .calculus import Polynomial, TakagiResult, takagi, takagi_from_json, vn_gap
from .config import COMMUTATION_TOL, default_tol
from .dilation import TARGETS, normalize_to_x0, random_table
from .errors import ConvergenceError, ValidationError
from .shift import FAMILIES, WeightTable, check_commutation, classify, family, row_sums, spherical_sums

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2


def _load_json(path, what):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"{what} {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{what} {path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _load_table(path):
    return WeightTable.from_json(_load_json(path, "weights-file"))


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _dump_json(doc):
    return json.dumps(doc, indent=2) + "\n"


def _dump_csv(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _fmt_index(idx):
    return "(" + ",".join(str(int(i)) for i in idx) + ")"


def _tol(args):
    tol = default_tol() if args.tol is None else args.tol
    if not tol > 0:
        raise ValidationError(f"--tol must be positive, got {tol}")
    return tol


# ------------------------------------------------------------ commands


def cmd_check(args):
    table = _load_table(args.weights)
    ctol = args.ctol
    if ctol < 0:
        raise ValidationError(f"--ctol must be >= 0, got {ctol}")
    violations = check_commutation(table, ctol)
    report = classify(table, _tol(args)) if not violations else None
    doc = {
        "valid": not violations,
        "violations": [
            {"I": list(v.index), "j": v.j, "k": v.k, "residual": v.residual} for v in violations
        ],
        "report": None if report is None else report.to_json(),
    }
    schemas.validate_report(schemas.CONTRACTIVITY_REPORT, doc)
    if args.format == "csv":
        sph = spherical_sums(table)
        rows_h = row_sums(table)
        rows = []
        for p, (idx, j, w) in enumerate(table.items()):
            rows.append([_fmt_index(idx), j, repr(w.real), repr(w.imag), repr(float(sph[p // table.d])), repr(float(rows_h[p // table.d]))])
        text = _dump_csv(["I", "j", "re", "im", "spherical_sum", "row_sum"], rows)
    else:
        text = _dump_json(doc)
    _emit(text, args.out)
    if violations:
        v = violations[0]
        print(
            f"commutation fails at I={list(v.index)}, j={v.j}, k={v.k} (residual {v.residual:.3e})",
            file=sys.stderr,
        )
        return EXIT_INVALID
    return EXIT_OK


def cmd_vn(args):
    table = _load_table(args.weights)
    p = Polynomial.from_json(_load_json(args.poly, "polynomial"))
    if p.d != table.d:
        raise ValidationError(f"polynomial has d={p.d} but the weights have d={table.d}")
    if p.is_zero():
        raise ValidationError("polynomial is zero")
    sup = "auto" if args.sup is None else args.sup
    report = vn_gap(p, table, N=args.levels, sup=sup, seed=args.seed, starts=args.starts)
    doc = report.to_json()
    schemas.validate_report(schemas.VN_GAP_REPORT, doc)
    if args.format == "csv":
        text = _dump_csv(
            ["op_norm", "sup_norm", "gap", "sup_method", "N"],
            [[repr(report.op_norm), repr(report.sup_norm), repr(report.gap), report.sup_method, report.N]],
        )
    else:
        text = _dump_json(doc)
    _emit(text, args.out)
    return EXIT_OK


def _parse_floats(text, what):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"{what} must be comma-separated numbers, got {text!r}") from None


def cmd_normalize(args):
    table = _load_table(args.weights)
    bounds = None if args.bounds is None else _parse_floats(args.bounds, "--bounds")
    trace = normalize_to_x0(table, bounds)
    doc = trace.to_json()
    schemas.validate_report(schemas.NORMALIZATION_TRACE, doc)
    if args.format == "csv":
        rows = []
        for n, step in enumerate(trace.steps):
            c = step.classification
            rows.append([n, "scale", "", repr(step.r), repr(step.t), len(c.good), len(c.bad), len(c.scalable)])
        if trace.rescale is not None:
            rs = trace.rescale
            rows.append([len(trace.steps), "rescale", rs.direction, repr(rs.r), repr(rs.r), "", "", ""])
        text = _dump_csv(["step", "kind", "direction", "r", "t", "good", "bad", "scalable"], rows)
    else:
        text = _dump_json(doc)
    _emit(text, args.out)
    return EXIT_OK if trace.reached_x0 else EXIT_NUMERIC


def _parse_params(items):
    params = {}
    for item in items or []:
        if "=" not in item:
            raise ValidationError(f"parameter {item!r} is not of the form key=value")
        key, value = item.split("=", 1)
        key = key.strip()
        if key in ("N", "d"):
            try:
                params[key] = int(value)
            except ValueError:
                raise ValidationError(f"parameter {key} must be an integer, got {value!r}") from None
        elif "," in value or key == "m":
            params[key] = _parse_floats(value, key)
        else:
            try:
                params[key] = float(value)
            except ValueError:
                raise ValidationError(f"parameter {key} must be a number, got {value!r}") from None
    return params


def cmd_gen(args):
    table = family(args.family, **_parse_params(args.params))
    _emit(_dump_json(table.to_json()), args.out)
    return EXIT_OK


def cmd_random(args):
    bounds = None if args.bounds is None else _parse_floats(args.bounds, "--bounds")
    table = random_table(args.seed, args.d, args.levels, args.target, bounds=bounds, phases=args.phases)
    _emit(_dump_json(table.to_json()), args.out)
    return EXIT_OK


def cmd_quadnorm(args):
    A = takagi_from_json(_load_json(args.matrix, "matrix"))
    res: TakagiResult = takagi(A)
    doc = res.to_json()
    schemas.validate_report(schemas.TAKAGI_SUMMARY, doc)
    if args.format == "csv":
        text = _dump_csv(["k", "sigma"], [[k + 1, repr(float(s))] for k, s in enumerate(res.sigma)])
    else:
        text = _dump_json(doc)
    _emit(text, args.out)
    return EXIT_OK


# -------------------------------------------------------------- parser


def build_parser():
    parser = argparse.ArgumentParser(prog="wslab", description="Numerical laboratory for d-variable weighted shifts.")
    sub = parser.add_subparsers(dest="command", required=True)

    def reporting(p):
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--tol", type=float, default=None, help="contractivity tolerance (default: $WSLAB_TOL or 1e-9)")

    p = sub.add_parser("check", help="commutation and contractivity of a weight table")
    p.add_argument("weights")
    p.add_argument("--ctol", type=float, default=COMMUTATION_TOL, help="commutation tolerance")
    reporting(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("vn", help="von Neumann gap ||p(T)|| - sup |p|")
    p.add_argument("weights")
    p.add_argument("poly")
    p.add_argument("--levels", type=int, default=None, help="truncation level N (default min(deg p + 4, table N))")
    p.add_argument("--sup", choices=("takagi", "optimize", "grid"), default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--starts", type=int, default=64)
    reporting(p)
    p.set_defaults(func=cmd_vn)

    p = sub.add_parser("normalize", help="scale a table into X_0 and print the trace")
    p.add_argument("weights")
    p.add_argument("--bounds", help="m1,..,md (default: bounds stored in the file)")
    reporting(p)
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("gen", help="write a named weight family")
    p.add_argument("--family", required=True, choices=sorted(FAMILIES))
    p.add_argument("--params", nargs="*", default=[], metavar="KEY=VALUE")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("random", help="write a random commuting weight table")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--levels", type=int, required=True)
    p.add_argument("--target", choices=TARGETS, default="doubly")
    p.add_argument("--bounds", help="m1,..,md caps on |w_{I,j}|")
    p.add_argument("--phases", action="store_true", help="random complex phases")
    p.add_argument("--out")
    p.set_defaults(func=cmd_random)

    p = sub.add_parser("quadnorm", help="Takagi values of a symmetric matrix")
    p.add_argument("matrix")
    reporting(p)
    p.set_defaults(func=cmd_quadnorm)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ConvergenceError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
