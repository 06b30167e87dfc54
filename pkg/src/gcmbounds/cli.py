"""Command-line front end.

Exit status: 0 on success, 1 when ``verify`` finds a failure, 2 on bad input
or a domain error, 3 when a computation fails to converge.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import csv
import io
import json
import math
import os
import re
import sys
from decimal import ROUND_DOWN, Decimal

from . import bounds, interp, lattices
from .bounds import BoundParams
from .errors import ConvergenceError, DomainError, PrecisionError

__all__ = ["main", "parse_alpha", "parse_rows", "build_parser"]

_DECIMAL = re.compile(r"^\+?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_SYMBOLS = {
    "pi": math.pi,
    "4pi/e": 4.0 * math.pi / math.e,
    "pi*e": math.pi * math.e,
}

# record energies quoted for alpha = pi, rho = 1 where no construction is computed here
LITERATURE_RECORDS = {
    3: 0.23153532,
    5: 0.34868410,
    6: 0.38874675,
    7: 0.42445404,
    9: 0.49771252,
}
LATTICE_FOR_DIM = {1: "Z1", 2: "A2", 4: "D4", 8: "E8", 24: "Leech"}


def parse_alpha(text):
    """A positive decimal literal or one of pi, 4pi/e, pi*e."""
    t = str(text).strip()
    if t in _SYMBOLS:
        return _SYMBOLS[t]
    if not _DECIMAL.match(t):
        raise argparse.ArgumentTypeError(f"expected a decimal or one of pi, 4pi/e, pi*e, got {text!r}")
    value = float(t)
    if not (value > 0) or not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
    return value


def _positive_real(text):
    t = str(text).strip()
    if not _DECIMAL.match(t) or not (0 < float(t) < math.inf):
        raise argparse.ArgumentTypeError(f"must be a positive decimal, got {text!r}")
    return float(t)


def _positive_int(text):
    t = str(text).strip()
    if not t.isdigit() or int(t) < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text!r}")
    return int(t)


def parse_rows(text):
    """Comma-separated dimensions and inclusive ranges, e.g. '1-9,24,100'."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        m = re.fullmatch(r"(\d+)(?:-(\d+))?", part)
        if not m:
            raise argparse.ArgumentTypeError(f"bad row item {part!r}")
        lo = int(m.group(1))
        hi = int(m.group(2)) if m.group(2) else lo
        if lo < 1 or hi < lo:
            raise argparse.ArgumentTypeError(f"bad row range {part!r}")
        out.extend(range(lo, hi + 1))
    return out


def _fmt_value(x):
    """x cut (not rounded) to eight significant digits, as a JSON number."""
    if x is None or not math.isfinite(x) or x == 0:
        return x
    d = Decimal(repr(float(x)))
    return float(d.quantize(Decimal(1).scaleb(d.adjusted() - 7), rounding=ROUND_DOWN))


def _truncate8(x):
    return str(Decimal(repr(float(x))).quantize(Decimal("1e-8"), rounding=ROUND_DOWN))


def _record(result, kind=None, notes=None):
    d = result.as_dict()
    if kind:
        d["kind"] = kind
    d["value"] = _fmt_value(d["value"])
    if notes:
        d["notes"] = list(d["notes"]) + list(notes)
    return d


def _threads():
    raw = os.environ.get("GCM_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise DomainError(f"GCM_THREADS must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1


def _map_ordered(fun, items):
    items = list(items)
    workers = min(_threads(), max(1, len(items)))
    if workers == 1:
        return [fun(x) for x in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fun, items))


# ---------------------------------------------------------------------------
# commands

def _cmd_bound(args):
    p = BoundParams(args.n, args.alpha, args.rho)
    kind = args.kind
    if kind == "main":
        res = bounds.main_lower_bound(p, tol=args.tol)
    elif kind == "normalized":
        res = bounds.normalized_main_bound(p, tol=args.tol)
    elif kind == "expectation":
        res = bounds.expectation_bound(p)
    elif kind == "conditional":
        res = bounds.conditional_expectation_bound(p)
    elif kind == "truncated":
        if args.r_cut is None:
            raise DomainError("--r-cut is required for --kind truncated")
        res = bounds.general_truncated_expectation(p, args.r_cut, args.k_div)
    else:
        res = bounds.dual_cap(p)
    return [_record(res)]


def _table_row(n, alpha, rho, tol, cache_dir):
    p = BoundParams(n, alpha, rho)
    ours = bounds.main_lower_bound(p, tol=tol).value
    table_point = alpha == math.pi and rho == 1.0
    if table_point and n in LITERATURE_RECORDS:
        record, source = LITERATURE_RECORDS[n], "literature"
    elif n in LATTICE_FOR_DIM:
        model = lattices.lattice_model(LATTICE_FOR_DIM[n])
        record, source = lattices.lattice_energy(model, alpha, rho, cache_dir=cache_dir).value, "computed"
    else:
        record, source = bounds.expectation_bound(p).value, "expectation"
    return {"n": n, "our_bound": ours, "record": record, "record_source": source}


def _cmd_table(args):
    tol = min(args.tol, 1e-10)
    return _map_ordered(lambda n: _table_row(n, args.alpha, args.rho, tol, args.cache_dir), args.rows)


def _cmd_aux(args):
    p = BoundParams(args.n, args.alpha, args.rho)
    h = interp.build_aux(p, args.M, args.precision)
    res = interp.lp_bound_via_aux(h, quadrature_tol=args.quadrature_tol)
    rep = interp.verify_minorant(h, 0.9 * float(h.radii[-1]), args.grid_points)
    notes = [f"h(0)={float(interp.aux_eval(h, 0.0))!r}",
             f"minorant_max_violation={rep.max_violation!r}",
             f"minorant_argmax={rep.argmax!r}"]
    return [_record(res, notes=notes)]


def _cmd_lattice(args):
    model = lattices.lattice_model(args.name)
    res = lattices.lattice_energy(model, args.alpha, args.rho, tol=args.tol, cache_dir=args.cache_dir)
    return [_record(res)]


def _cmd_asymptotics(args):
    rates = bounds.asymptotic_rate(args.alpha)
    notes = [f"upper_rate={rates.upper_rate!r}"]
    n = args.n
    if n is not None:
        p = BoundParams(n, args.alpha, args.rho)
        prof = bounds.gaussian_profile(p)
        notes += [f"c={prof.c!r}", f"K={prof.K!r}", f"t_m={prof.t_m!r}",
                  f"peak_index={prof.peak_index!r}", f"flagged={prof.flagged}"]
        if not prof.flagged and prof.peak_index >= 5.0:
            notes.append(f"profile_agreement={bounds.profile_agreement(p, args.window)!r}")
    rec = {
        "kind": "asymptotic_rate",
        "n": n,
        "alpha": args.alpha,
        "rho": args.rho if n is not None else None,
        "value": _fmt_value(rates.lower_rate),
        "log_value": math.log(rates.lower_rate),
        "terms_used": 0,
        "tail_bound": 0.0,
        "notes": notes,
    }
    return [rec]


def _cmd_powerlaw(args):
    out = []
    if args.which in ("upper", "both"):
        up = bounds.inverse_power_upper_bound(args.n, args.s, args.rho)
        out.append(_record(up, notes=[f"s={args.s!r}",
                                      f"asymptotic_value={up.extras['asymptotic_value']!r}"]))
    if args.which in ("lower", "both"):
        lo = bounds.inverse_power_lower_bound(args.n, args.s, args.rho, tol=args.tol)
        out.append(_record(lo, notes=[f"s={args.s!r}"]))
    return out


def _verify_checks(quick):
    """(name, passed, detail) for each cross-module check."""
    pi = math.pi
    checks = []

    def add(name, fn):
        try:
            ok, detail = fn()
        except (DomainError, ConvergenceError, PrecisionError, ArithmeticError) as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        checks.append((name, bool(ok), detail))

    def oracle():
        worst = 0.0
        grid = [(1, pi, 1.0), (2, pi, 1.0)] if quick else [
            (n, a, r) for n in (1, 2, 4) for a in (pi / 2, pi, 2 * pi) for r in (0.5, 1.0, 2.0)]
        for n, a, r in grid:
            p = BoundParams(n, a, r)
            via = interp.lp_bound_via_aux(interp.build_aux(p, 200)).value
            ref = bounds.main_lower_bound(p, tol=1e-14).value
            worst = max(worst, abs(via - ref) / ref)
        return worst <= 1e-6, f"max relative gap {worst:.3g}"

    def psd():
        worst = math.inf
        dims = (2, 3) if quick else range(1, 9)
        ks = (0, 2) if quick else range(0, 6)
        for n in dims:
            for k in ks:
                m = interp.psd_sample_check(n, k, 8, 20 if quick else 200, seed=n * 16 + k)
                worst = min(worst, m / interp.peel_kernel(n, k, 0.0))
        return worst >= -1e-9, f"min eigenvalue / scale {worst:.3g}"

    def bgf():
        worst = max(interp.bgf_residual(n, 1.0) for n in ((1, 2, 8) if quick else range(1, 9)))
        return worst <= 1e-6, f"max residual {worst:.3g}"

    def minorant():
        h = interp.build_aux(BoundParams(2, pi, 1.0), 200)
        rep = interp.verify_minorant(h, 0.9 * float(h.radii[-1]), 2000)
        return rep.max_violation <= 1e-8, f"max violation {rep.max_violation:.3g} at t={rep.argmax:.4g}"

    def coefficients():
        h = interp.build_aux(BoundParams(2, pi, 1.0), 40)
        lo = float(h.H.min())
        return lo >= -1e-20, f"min coefficient {lo:.3g}"

    def identity():
        res = interp.alg_identity_residual(-0.5, 1 + 1j, None, 30)
        return res <= 1e-12, f"residual {res:.3g}"

    def sandwich():
        bad = 0
        for n in (1, 2, 3, 8, 24):
            for a in (0.5, pi, 12.0):
                for r in (0.5, 1.0, 2.0):
                    p = BoundParams(n, a, r)
                    lb = bounds.main_lower_bound(p).value
                    if not (lb <= bounds.expectation_bound(p).value * (1 + 1e-12)
                            and lb <= bounds.dual_cap(p).value * (1 + 1e-12)):
                        bad += 1
        return bad == 0, f"{bad} violations"

    def lattice():
        bad = []
        for name, n in (("Z1", 1), ("A2", 2), ("D4", 4), ("E8", 8), ("Leech", 24)):
            e = lattices.lattice_energy(lattices.lattice_model(name), pi, 1.0).value
            lb = bounds.main_lower_bound(BoundParams(n, pi, 1.0)).value
            if e < lb * (1 - 1e-10):
                bad.append(name)
        return not bad, "energy >= bound" if not bad else "below bound: " + ",".join(bad)

    add("oracle_equivalence", oracle)
    add("psd_sampling", psd)
    add("bgf_residual", bgf)
    add("minorant_scan", minorant)
    add("coefficient_sign", coefficients)
    add("partial_fraction_identity", identity)
    add("sandwich_and_dual_cap", sandwich)
    add("lattice_above_bound", lattice)
    return checks


# ---------------------------------------------------------------------------
# output

def _emit_records(records, fmt, out):
    if fmt == "json":
        payload = records[0] if len(records) == 1 else records
        out.write(json.dumps(payload, sort_keys=False) + "\n")
    elif fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        keys = list(records[0].keys())
        writer.writerow(keys)
        for rec in records:
            writer.writerow(["|".join(v) if isinstance(v, list) else ("" if v is None else v)
                             for v in (rec[k] for k in keys)])
        out.write(buf.getvalue())
    else:
        for rec in records:
            out.write(" ".join(f"{k}={v}" for k, v in rec.items() if k != "notes"))
            for note in rec.get("notes", []):
                out.write(f"\n  {note}")
            out.write("\n")


def _emit_table(rows, fmt, out):
    shaped = [{"n": r["n"], "our_bound": _truncate8(r["our_bound"]),
               "record": _truncate8(r["record"]), "record_source": r["record_source"]} for r in rows]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "our_bound", "record", "record_source"])
        for r in shaped:
            writer.writerow([r["n"], r["our_bound"], r["record"], r["record_source"]])
        out.write(buf.getvalue())
    elif fmt == "json":
        out.write(json.dumps([{**r, "our_bound": float(r["our_bound"]), "record": float(r["record"])}
                              for r in shaped]) + "\n")
    else:
        out.write(f"{'n':>4}  {'our_bound':>11}  {'record':>11}  source\n")
        for r in shaped:
            out.write(f"{r['n']:>4}  {r['our_bound']:>11}  {r['record']:>11}  {r['record_source']}\n")


def build_parser():
    parser = argparse.ArgumentParser(prog="gcmbounds",
                                     description="Energy bounds for the Gaussian core model.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, n=True, alpha=True, rho=True, fmt=("json", "text")):
        if n:
            p.add_argument("--n", type=_positive_int, required=True, help="dimension")
        if alpha:
            p.add_argument("--alpha", type=parse_alpha, required=True,
                           help="steepness: decimal, pi, 4pi/e or pi*e")
        if rho:
            p.add_argument("--rho", type=_positive_real, default=1.0, help="density (default 1)")
        p.add_argument("--format", choices=fmt, default=fmt[0])

    p = sub.add_parser("bound", help="a single bound")
    p.add_argument("--kind", default="main",
                   choices=("main", "normalized", "expectation", "conditional", "truncated", "dual_cap"))
    common(p, fmt=("json", "text", "csv"))
    p.add_argument("--tol", type=_positive_real, default=1e-12)
    p.add_argument("--r-cut", type=_positive_real, dest="r_cut")
    p.add_argument("--k-div", type=_positive_real, dest="k_div", default=2.0)

    p = sub.add_parser("table", help="our bound against record energies")
    p.add_argument("--rows", type=parse_rows, default=parse_rows("1-9,24,100,200,500"))
    common(p, n=False, fmt=("csv", "json", "text"))
    p.add_argument("--tol", type=_positive_real, default=1e-12)
    p.add_argument("--cache-dir", dest="cache_dir")

    p = sub.add_parser("aux", help="build the interpolated auxiliary function and its LP bound")
    common(p, fmt=("json", "text", "csv"))
    p.add_argument("--M", type=_positive_int, default=200)
    p.add_argument("--precision", choices=("extended", "standard"), default="extended")
    p.add_argument("--quadrature-tol", type=_positive_real, dest="quadrature_tol", default=1e-6)
    p.add_argument("--grid-points", type=_positive_int, dest="grid_points", default=2000)

    p = sub.add_parser("lattice", help="Gaussian energy of a reference lattice")
    p.add_argument("--name", required=True, help="Zn (e.g. Z3), A2, D4, E8 or Leech")
    common(p, n=False, fmt=("json", "text", "csv"))
    p.add_argument("--tol", type=_positive_real, default=1e-12)
    p.add_argument("--cache-dir", dest="cache_dir")

    p = sub.add_parser("asymptotics", help="growth rates and the summand profile")
    p.add_argument("--n", type=_positive_int)
    common(p, n=False, fmt=("json", "text", "csv"))
    p.add_argument("--window", type=_positive_real, default=2.0)

    p = sub.add_parser("powerlaw", help="bounds for the potential t^-(n+s)")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--s", type=_positive_real, required=True)
    common(p, n=False, alpha=False, fmt=("json", "text", "csv"))
    p.add_argument("--which", choices=("upper", "lower", "both"), default="both")
    p.add_argument("--tol", type=_positive_real, default=1e-8)

    p = sub.add_parser("verify", help="run the cross-module checks")
    p.add_argument("--quick", action="store_true", help="smaller grids")
    p.add_argument("--format", choices=("text", "json"), default="text")
    return parser


_COMMANDS = {
    "bound": _cmd_bound,
    "aux": _cmd_aux,
    "lattice": _cmd_lattice,
    "asymptotics": _cmd_asymptotics,
    "powerlaw": _cmd_powerlaw,
}


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "table":
            _emit_table(_cmd_table(args), args.format, out)
            return 0
        if args.command == "verify":
            checks = _verify_checks(args.quick)
            if args.format == "json":
                out.write(json.dumps([{"check": c, "passed": ok, "detail": d} for c, ok, d in checks]) + "\n")
            else:
                width = max(len(c) for c, _, _ in checks)
                for c, ok, d in checks:
                    out.write(f"{c:<{width}}  {'PASS' if ok else 'FAIL'}  {d}\n")
            return 0 if all(ok for _, ok, _ in checks) else 1
        _emit_records(_COMMANDS[args.command](args), args.format, out)
        return 0
    except DomainError as exc:
        err.write(f"gcmbounds: error: {exc}\n")
        return 2
    except (ConvergenceError, PrecisionError) as exc:
        err.write(f"gcmbounds: error: {exc}\n")
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
