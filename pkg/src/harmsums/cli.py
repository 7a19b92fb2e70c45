"""Command-line front end.

Exit codes: 0 success, 1 verification or convergence failure, 2 usage or
parse error. ``HARMSUMS_DIGITS`` and ``HARMSUMS_WORKERS`` override the
default precision and worker count.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time

import mpmath

from . import catalog, closedform, exactcore, reductions
from .numerics import ConvergenceFailure, PrecisionConfig

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"{name} must be an integer, got {raw!r}") from None
    if value < 1:
        raise UsageError(f"{name} must be positive")
    return value


def _num(v, digits: int) -> str:
    return mpmath.nstr(v, digits, min_fixed=-4, max_fixed=4)


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _check_precision(digits: int, tolerance: int | None):
    if digits < 1:
        raise UsageError("--digits must be positive")
    if tolerance is not None:
        if tolerance < 1:
            raise UsageError("--tolerance must be positive")
        if digits < tolerance + 5:
            raise UsageError(f"--digits ({digits}) must be at least tolerance + 5 ({tolerance + 5})")


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------


def cmd_eval(args) -> int:
    text = args.input.strip()
    if not text:
        raise UsageError("empty input")
    digits = args.digits
    _check_precision(digits, None)
    cfg = PrecisionConfig(target_digits=digits)
    if text.startswith("{"):
        try:
            spec = reductions.SeriesSpec.from_json(json.loads(text))
        except (json.JSONDecodeError, ValueError, TypeError) as exc:
            raise UsageError(f"bad series spec: {exc}") from None
        try:
            r = reductions.eval_series(spec, cfg)
        except ConvergenceFailure as exc:
            print(f"convergence failure: {exc}", file=sys.stderr)
            return EXIT_FAIL
        out = {
            "input": spec.to_json(),
            "kind": "series",
            "digits": digits,
            "value": _num(r.value, digits),
            "error_estimate": _num(r.error_bound, 3),
            "method": r.method,
        }
    else:
        try:
            expr = closedform.parse_expr(text)
        except (closedform.ExprParseError, exactcore.CompositionParseError, ValueError) as exc:
            raise UsageError(f"bad expression: {exc}") from None
        value = closedform.eval_expr(expr, cfg)
        out = {
            "input": expr.render(),
            "kind": "expression",
            "digits": digits,
            "value": _num(value, digits),
            "error_estimate": None,
            "method": "closed-form",
        }
    if args.format == "json":
        _emit(_dump_json(out), None)
    else:
        err = "" if out["error_estimate"] is None else f"  (error estimate {out['error_estimate']}, {out['method']})"
        print(f"{out['value']}{err}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

CSV_FIELDS = ["id", "params", "lhs", "rhs", "abs_diff", "error_estimate", "tolerance_digits", "pass", "method", "millis"]


def _params_text(params: dict) -> str:
    return ",".join(f"{k}={v}" for k, v in params.items())


def _results_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in rows:
        w.writerow([
            r["id"], _params_text(r["params"]), r["lhs"], r["rhs"], r["abs_diff"],
            r["error_estimate"], r["tolerance_digits"], str(r["pass"]).lower(), r["method"],
            r["timing"]["millis"],
        ])
    return buf.getvalue()


def cmd_verify(args) -> int:
    _check_precision(args.digits, args.tolerance)
    if args.filter and not catalog.select(args.filter):
        raise UsageError(f"no identity matches filter {args.filter!r}")
    cfg = PrecisionConfig(target_digits=args.digits)
    started = time.perf_counter()
    results = catalog.verify_all(args.filter, cfg, workers=args.workers, tolerance=args.tolerance)
    rows = [r.to_json(args.digits) for r in results]
    passed = sum(1 for r in results if r.passed)
    report = {
        "config": {"digits": args.digits, "tolerance": args.tolerance, "filter": args.filter or ""},
        "summary": {"total": len(rows), "passed": passed, "failed": len(rows) - passed},
        "results": rows,
        "timing": {"total_millis": round((time.perf_counter() - started) * 1000, 3)},
    }
    if args.format == "json":
        text = _dump_json(report)
    elif args.format == "csv":
        text = _results_csv(rows)
    else:
        lines = []
        for r in rows:
            tag = "PASS" if r["pass"] else "FAIL"
            extra = f"  {r['reason']}" if r["reason"] else ""
            lines.append(
                f"{tag} {r['id']} {_params_text(r['params'])} |diff|={r['abs_diff']} "
                f"err={r['error_estimate']} [{r['method']}]{extra}"
            )
        lines.append(f"{passed}/{len(rows)} passed")
        text = "\n".join(lines) + "\n"
    _emit(text, args.output)
    return EXIT_OK if passed == len(rows) else EXIT_FAIL


# ---------------------------------------------------------------------------
# table
# ---------------------------------------------------------------------------


def _parse_range(text: str) -> range:
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
        else:
            lo = hi = int(text)
    except ValueError:
        raise UsageError(f"bad range {text!r}; use N or A..B") from None
    if lo < 1 or hi < lo:
        raise UsageError(f"range {text!r} must satisfy 1 <= A <= B")
    return range(lo, hi + 1)


def cmd_table(args) -> int:
    _check_precision(args.digits, args.tolerance)
    ks = _parse_range(args.k)
    cfg = PrecisionConfig(target_digits=args.digits)
    bound = mpmath.mpf(10) ** -args.tolerance
    rows = []
    ok = True
    orders = reductions.FAMILY_ORDERS[args.family]
    for k in ks:
        try:
            direct = reductions.wbar_direct(orders, args.p, k, cfg)
        except ConvergenceFailure as exc:
            print(f"convergence failure at k={k}: {exc}", file=sys.stderr)
            return EXIT_FAIL
        reduced = reductions.wbar_reduced(args.family, args.p, k, cfg)
        with mpmath.workdps(cfg.working_digits):
            diff = abs(direct.value - reduced)
        row_ok = diff < bound and direct.error_bound < bound
        ok = ok and row_ok
        rows.append({
            "k": k,
            "p": args.p,
            "direct": _num(direct.value, args.digits),
            "reduced": _num(reduced, args.digits),
            "abs_diff": _num(diff, 3),
            "error_estimate": _num(direct.error_bound, 3),
            "pass": bool(row_ok),
        })
    if args.format == "json":
        text = _dump_json({"family": args.family, "p": args.p, "digits": args.digits,
                           "tolerance": args.tolerance, "rows": rows})
    elif args.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow(dict(row, **{"pass": str(row["pass"]).lower()}))
        text = buf.getvalue()
    else:
        text = "".join(
            f"k={r['k']} p={r['p']} direct={r['direct']} reduced={r['reduced']} |diff|={r['abs_diff']}\n"
            for r in rows
        )
    _emit(text, args.output)
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# list
# ---------------------------------------------------------------------------


def _listing() -> list[dict]:
    out = []
    for rec in catalog.registry():
        domain = {
            k: [catalog._param_text(v) for v in vals] for k, vals in rec.domain_summary().items()
        }
        out.append({
            "id": rec.id,
            "description": rec.description,
            "anchor": rec.anchor,
            "param_domain": domain,
            "instances": len(rec.param_domain),
            "convergence_class": rec.convergence_class,
            "default_tolerance_digits": rec.default_tolerance_digits,
        })
    return out


def cmd_list(args) -> int:
    items = _listing()
    if args.format == "json":
        text = _dump_json(items)
    elif args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id", "description", "anchor", "param_domain", "convergence_class", "default_tolerance_digits"])
        for it in items:
            w.writerow([it["id"], it["description"], it["anchor"], json.dumps(it["param_domain"]),
                        it["convergence_class"], it["default_tolerance_digits"]])
        text = buf.getvalue()
    else:
        text = "".join(f"{it['id']:20s} {it['description']}  [{it['anchor']}]\n" for it in items)
    _emit(text, args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser(digits: int, workers: int) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="harmsums", description="Alternating harmonic-number sums to many digits.")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", help="evaluate a series spec (JSON) or a constant expression")
    e.add_argument("input", help='JSON series spec, e.g. \'{"kind":"AltOverN","term":[[1,3]],"p":1}\', or text like "zeta(2)"')
    e.add_argument("--digits", type=int, default=digits)
    e.add_argument("--format", choices=("text", "json"), default="text")
    e.set_defaults(func=cmd_eval)

    v = sub.add_parser("verify", help="verify catalog identities")
    v.add_argument("--filter", default="", help="id glob such as 'thm1.1-*' or class=<name>")
    v.add_argument("--digits", type=int, default=digits)
    v.add_argument("--tolerance", type=int, default=25)
    v.add_argument("--format", choices=("text", "json", "csv"), default="text")
    v.add_argument("--output", default=None)
    v.add_argument("--workers", type=int, default=workers)
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("table", help="direct vs reduced values of the binomial-weighted sums")
    t.add_argument("family", choices=("quadratic", "cubic"))
    t.add_argument("--p", type=int, choices=(0, 1), default=0)
    t.add_argument("--k", default="1..4", help="N or A..B")
    t.add_argument("--digits", type=int, default=digits)
    t.add_argument("--tolerance", type=int, default=25)
    t.add_argument("--format", choices=("text", "json", "csv"), default="text")
    t.add_argument("--output", default=None)
    t.set_defaults(func=cmd_table)

    ls = sub.add_parser("list", help="list catalog identities")
    ls.add_argument("--format", choices=("text", "json", "csv"), default="text")
    ls.add_argument("--output", default=None)
    ls.set_defaults(func=cmd_list)
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        digits = _env_int("HARMSUMS_DIGITS", 30)
        workers = _env_int("HARMSUMS_WORKERS", os.cpu_count() or 1)
    except UsageError as exc:
        print(f"harmsums: {exc}", file=sys.stderr)
        return EXIT_USAGE
    parser = build_parser(digits, workers)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    if getattr(args, "workers", 1) is not None and getattr(args, "workers", 1) < 1:
        print("harmsums: --workers must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"harmsums: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
