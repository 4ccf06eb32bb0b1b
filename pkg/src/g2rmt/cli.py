"""Command-line front end: g2rmt <command> [options].

Every command writes ``<command>.json`` (and CSV data where it makes sense)
into the output directory.  The JSON starts with a header carrying the
package version, the full configuration and the tolerances; apart from the
timestamp the file is a pure function of the configuration.

Exit codes: 0 all checks passed, 1 a check failed, 2 usage/domain error,
3 a resource cap was hit.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__

SCHEMA_VERSION = 1
OUTPUT_ENV = "G2RMT_OUTPUT_DIR"

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _range(text: str) -> range:
    if "-" in text:
        lo, hi = text.split("-", 1)
        return range(int(lo), int(hi) + 1)
    return range(int(text), int(text) + 1)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, complex):
        return [x.real, x.imag] if x.imag else x.real
    if hasattr(x, "numerator") and hasattr(x, "denominator") and not isinstance(x, int):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else int(x.numerator)
    return x


class Run:
    """Collects the payload and named checks of one command."""

    def __init__(self, args, tolerances: dict):
        self.args = args
        self.tolerances = tolerances
        self.payload: dict = {}
        self.checks: dict[str, bool] = {}
        self.outdir = Path(args.output_dir)

    def check(self, name: str, ok) -> bool:
        self.checks[name] = bool(ok)
        return bool(ok)

    def write_csv(self, name: str, header: list[str], rows) -> Path | None:
        if self.args.format == "json":
            return None
        path = self.outdir / name
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for r in rows:
                w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
        return path

    def finish(self) -> int:
        config = {k: v for k, v in vars(self.args).items() if k not in ("func", "output_dir")}
        doc = {
            "header": {
                "schema_version": SCHEMA_VERSION,
                "version": __version__,
                "command": self.args.command,
                "config": config,
                "tolerances": self.tolerances,
                "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            },
            "checks": self.checks,
            "passed": all(self.checks.values()),
            "payload": self.payload,
        }
        # the JSON report is always written; --format only controls the CSV side files
        path = self.outdir / f"{self.args.command}.json"
        path.write_text(json.dumps(_jsonable(doc), indent=1, sort_keys=True) + "\n")
        status = "PASS" if doc["passed"] else "FAIL"
        failed = [k for k, v in self.checks.items() if not v]
        print(f"{self.args.command}: {status} ({len(self.checks)} checks) -> {path}" + (f" failed: {failed}" if failed else ""))
        return EXIT_OK if doc["passed"] else EXIT_CHECK


# ---------------------------------------------------------------------------
# commands


def cmd_moments(args) -> int:
    from .moments import EXACT, DomainError, formula_for, _rep_key
    from .parallel import Pool
    from .torus import quad_moment

    run = Run(args, {"cross_mode": args.tol})
    modes = [m.strip() for m in args.mode.split(",")]
    for m in modes:
        if m not in ("exact", "gamma", "quadrature"):
            raise UsageError(f"unknown mode {m!r}")
    key = _rep_key(args.rep)
    formula = formula_for(key)
    rows = []
    with Pool(args.threads) as pool:
        for s in _floats(args.s):
            row = {"s": s}
            if "exact" in modes:
                if s < 0 or s != int(s):
                    raise DomainError(f"exact mode needs a non-negative integer s (got {s}); use gamma for Re s > {formula.domain_bound}")
                row["exact"] = EXACT[key](int(s))
            if "gamma" in modes:
                row["gamma"] = formula(s).real
            if "quadrature" in modes:
                row["quadrature"] = quad_moment(key, s, phi=args.phi, n=args.grid, pool=pool)
            vals = [float(row[m]) for m in modes if m in row]
            row["max_dev"] = max(vals) - min(vals) if len(vals) > 1 else 0.0
            run.check(f"s={s}", row["max_dev"] <= args.tol * max(1.0, abs(vals[0])))
            rows.append(row)
    run.payload = {"rep": key, "phi": args.phi, "rows": rows}
    run.write_csv("moments.csv", ["s"] + modes, [[r["s"]] + [float(r[m]) for m in modes] for r in rows])
    return run.finish()


def cmd_ct_verify(args) -> int:
    from .laurent import ct_product
    from .moments import macdonald_g2
    from .rootsys import build_g2

    run = Run(args, {"exact": True})
    g2 = build_g2()
    rows = []
    for ks in _range(args.ks):
        for kl in _range(args.kl):
            ct = ct_product(g2, {"short": ks, "long": kl}, term_cap=args.term_cap)
            mac = macdonald_g2(ks, kl)
            rows.append({"kS": ks, "kL": kl, "ct_product": ct, "macdonald": mac, "equal": ct == mac})
            run.check(f"k=({ks},{kl})", ct == mac)
    run.payload = {"rows": rows}
    run.write_csv("ct_verify.csv", ["kS", "kL", "ct_product", "macdonald", "equal"],
                  [[r["kS"], r["kL"], str(r["ct_product"]), str(r["macdonald"]), r["equal"]] for r in rows])
    return run.finish()


def cmd_density(args) -> int:
    from .densities import p1_curve, p2_curve
    from .moments import formula_for
    from .parallel import Pool

    run = Run(args, {"normalization": args.tol})
    formula = formula_for(args.rep)
    with Pool(args.threads) as pool:
        if args.kind == "P1":
            curve = p1_curve(formula, tail_terms=args.tail_terms, pool=pool)
        else:
            curve = p2_curve(formula, c=args.c, tail_terms=args.tail_terms, pool=pool)
    total = curve.integral()
    run.check("normalization", abs(total - 1) <= args.tol)
    run.check("nonnegative", bool(np.all(curve.ps >= 0)))
    first = curve.integral(np.exp if curve.kind == "P1" else (lambda x: x))
    run.payload = {**curve.to_json(), "first_moment": first, "first_moment_exact": formula(1).real}
    if args.format != "json":
        curve.write_csv(run.outdir / f"density_{curve.kind}_{formula.name}.csv")
    return run.finish()


def cmd_hist(args) -> int:
    from .parallel import Pool
    from .torus import value_histogram

    run = Run(args, {})
    with Pool(args.threads) as pool:
        h = value_histogram(args.rep, args.statistic, phi=args.phi, bins=args.bins, n=args.grid, pool=pool)
    run.check("normalized", abs(h.total() * 1.0 - h.meta["mass_in_range"]) <= 1e-9)
    run.payload = h.to_json()
    if args.format != "json":
        h.write_csv(run.outdir / f"hist_{args.statistic}.csv")
    return run.finish()


def cmd_zeta(args) -> int:
    from .curves import RHViolation, count_points, count_points_bruteforce, parse_curve, zeta_from_counts

    run = Run(args, {"rh": 1e-8, "functional_equation": 1e-9})
    curve = parse_curve(args.curve, args.p)
    g = curve.genus
    counts = [count_points(curve, m) for m in range(1, g + 1 + args.extra)]
    for m, n in enumerate(counts, 1):
        if args.p**m <= 10**4:
            run.check(f"bruteforce_N{m}", n == count_points_bruteforce(curve, m))
    try:
        z = zeta_from_counts(g, args.p, counts)
        run.check("rh", True)
        rng = np.random.default_rng(args.seed)
        pts = [complex(a, b) for a, b in rng.uniform(-0.5, 0.5, size=(5, 2)) / math.sqrt(args.p)]
        run.check("functional_equation", z.functional_equation_defect(pts) <= 1e-9)
        run.payload = {"curve": curve.describe(), **z.to_json(), "degree": len(z.coeffs) - 1}
    except RHViolation as exc:
        run.check("rh", False)
        run.payload = {"curve": curve.describe(), "counts": counts, "error": str(exc)}
    return run.finish()


def cmd_kloosterman(args) -> int:
    from .expsums import kloosterman_report
    from .parallel import Pool

    run = Run(args, {"imag": 1e-12, "unitarity": 1e-9, "ks": args.ks_threshold})
    with Pool(args.threads) as pool:
        rep = kloosterman_report(args.p, pool)
    run.check("weil_bound", rep.weil_violations == 0)
    run.check("real", rep.max_imag < 1e-12)
    run.check("unitary", rep.max_unitarity_defect <= 1e-9)
    if args.satotate:
        run.check("sato_tate_ks", rep.ks_stat < args.ks_threshold)
    run.payload = rep.to_json()
    run.write_csv(f"kloosterman_{args.p}.csv", ["a", "kl", "theta"],
                  [(a, float(v), float(t)) for a, v, t in zip(range(1, args.p), rep.values, rep.angles)])
    return run.finish()


def cmd_hk(args) -> int:
    from .expsums import UnitarityError, hk_group, hk_lpoly_all
    from .ffield import make_field

    run = Run(args, {"unitarity": 1e-6, "trace_range": 1e-6})
    f = make_field(args.p, args.r)
    try:
        samples = hk_lpoly_all(args.n, f)
        run.check("unitary", True)
    except UnitarityError as exc:
        run.check("unitary", False)
        run.payload = {"error": str(exc)}
        return run.finish()
    group = hk_group(args.n, args.p)
    traces = np.array([s.trace for s in samples])
    if args.n == 7 and args.p == 2:
        run.check("trace_range", bool(np.all((traces >= -2 - 1e-6) & (traces <= 7 + 1e-6))))
    if args.n % 2 == 1 and args.p == 2:
        run.check("root_at_one", all(abs(s.lpoly.normalized()(1.0)) < 1e-9 for s in samples))
        run.check("palindromic", all(s.lpoly.deflate_one().is_palindromic() for s in samples))
    elif args.n % 2 == 0:
        run.check("palindromic", all(s.lpoly.is_palindromic() for s in samples))
    run.payload = {"family": "hyperkloosterman", "n": args.n, "p": args.p, "q": f.q, "group": group,
                   "count": len(samples), "weil_violations": 0,
                   "moments": [float(np.mean(traces**k)) for k in range(1, 5)],
                   "samples": [{"a": s.parameter, "trace": s.trace, "lpoly": s.lpoly.to_json()} for s in samples]}
    run.write_csv(f"hk_n{args.n}_q{f.q}.csv", ["a", "trace"], [(s.parameter, s.trace) for s in samples])
    return run.finish()


def cmd_nmk(args) -> int:
    from .expsums import SignResolutionError, nmk_all, nmk_lpoly, nmk_normalize, nmk_power_traces
    from .parallel import Pool

    run = Run(args, {"trace_range": args.tol, "unitarity": 1e-6})
    with Pool(args.threads) as pool:
        vals = nmk_all(args.p, 1, pool)
        nm = vals[1:]
        if args.p % 4 == 1:
            run.check("real", float(np.max(np.abs(nm.imag))) <= 1e-9 * math.sqrt(args.p))
        else:
            run.check("imaginary", float(np.max(np.abs(nm.real))) <= 1e-9 * math.sqrt(args.p))
        try:
            norm = nmk_normalize(args.p, vals, tol=args.tol)
        except SignResolutionError as exc:
            run.check("trace_range", False)
            run.payload = {"error": str(exc)}
            return run.finish()
        run.check("trace_range", True)
        if args.p >= 101:
            run.check("sign_decisive", norm.decisive)
        run.payload = norm.to_json()
        if args.lpoly:
            tr = nmk_power_traces(args.p, 3, sign=norm.sign or 1, pool=pool)
            defects = [nmk_lpoly(t, args.p, tr).unitarity_defect() for t in range(1, args.p)]
            run.check("unitary", max(defects) <= 1e-6)
            run.payload["max_unitarity_defect"] = max(defects)
    run.payload["traces"] = norm.traces
    run.write_csv(f"nmk_{args.p}.csv", ["t", "trace"], list(zip(range(1, args.p), norm.traces)))
    return run.finish()


def cmd_equidist(args) -> int:
    from .expsums import g2_equidist_report
    from .parallel import Pool

    scale = 1 / math.sqrt(args.p)
    run = Run(args, {"moments": args.moment_c * scale, "zhat_mean": args.zhat_c * scale})
    with Pool(args.threads) as pool:
        rep = g2_equidist_report(args.p, with_zhat=not args.no_zhat, pool=pool)
    for k, dev in enumerate(rep.moment_deviation, 1):
        run.check(f"m{k}", abs(dev) < args.moment_c * scale)
    if rep.zhat_mean is not None:
        run.check("zhat_mean", abs(rep.zhat_mean - rep.zhat_target) < args.zhat_c * scale)
    run.payload = rep.to_json()
    return run.finish()


def cmd_gauss(args) -> int:
    from .expsums import gauss_angle_spectrum

    run = Run(args, {"discrepancy": args.threshold, "pairing": 1e-9})
    spec = gauss_angle_spectrum(args.p)
    run.check("count", len(spec.angles) == args.p - 2)
    run.check("pairing", spec.pairing_defect < 1e-9)
    run.check("discrepancy", spec.star_discrepancy < args.threshold)
    run.payload = spec.to_json()
    run.write_csv(f"gauss_angles_{args.p}.csv", ["j", "theta"], list(zip(range(1, args.p - 1), spec.angles)))
    return run.finish()


def cmd_family(args) -> int:
    from .curves import family_moment, scan_genus1
    from .parallel import Pool

    run = Run(args, {"relative_deviation": args.tol})
    with Pool(args.threads) as pool:
        rep = family_moment(args.g, args.q, args.s, samples=args.samples, seed=args.seed, pool=pool)
        if args.g == 1:
            run.check("hasse_bound", scan_genus1(args.q, pool).hasse_violations == 0)
    run.check("relative_deviation", rep.relative_deviation <= args.tol)
    run.payload = rep.to_json()
    return run.finish()


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-dir", default=None, help=f"output directory (default: ${OUTPUT_ENV} or .)")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--format", choices=["json", "csv", "both"], default="both")
    common.add_argument("--seed", type=int, default=0)

    ap = argparse.ArgumentParser(prog="g2rmt", description="G2 random-matrix moments and finite-field L-functions")
    ap.add_argument("--version", action="version", version=f"g2rmt {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moments", parents=[common], help="moments of |Z-hat|")
    p.add_argument("--rep", default="7")
    p.add_argument("--s", default="0,1,2")
    p.add_argument("--mode", default="exact")
    p.add_argument("--grid", type=int, default=512)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("ct-verify", parents=[common], help="constant terms against the closed form")
    p.add_argument("--ks", default="0-2")
    p.add_argument("--kl", default="0-2")
    p.add_argument("--term-cap", type=int, default=50_000_000)
    p.set_defaults(func=cmd_ct_verify)

    p = sub.add_parser("density", parents=[common], help="value density of |Z-hat| or log|Z-hat|")
    p.add_argument("--rep", default="7")
    p.add_argument("--kind", choices=["P1", "P2"], default="P1")
    p.add_argument("--c", type=float, default=0.5)
    p.add_argument("--tail-terms", type=int, default=8)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("hist", parents=[common], help="Haar histogram of a class function")
    p.add_argument("--rep", default="7")
    p.add_argument("--statistic", choices=["trace", "abs", "logabs"], default="trace")
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--grid", type=int, default=512)
    p.add_argument("--phi", type=float, default=0.0)
    p.set_defaults(func=cmd_hist)

    p = sub.add_parser("zeta", parents=[common], help="zeta function of a curve")
    p.add_argument("--curve", required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--extra", type=int, default=0, help="count this many N_m beyond N_g as a check")
    p.set_defaults(func=cmd_zeta)

    p = sub.add_parser("kloosterman", parents=[common], help="Kloosterman sums for all a")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--satotate", action="store_true")
    p.add_argument("--ks-threshold", type=float, default=0.03)
    p.set_defaults(func=cmd_kloosterman)

    p = sub.add_parser("hk", parents=[common], help="hyper-Kloosterman L-polynomials")
    p.add_argument("--n", type=int, default=7)
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--r", type=int, default=2)
    p.set_defaults(func=cmd_hk)

    p = sub.add_parser("nmk", parents=[common], help="the G2 sum NMK and its sign")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--lpoly", action="store_true", help="also build degree-7 L-polynomials (needs p^3 small)")
    p.set_defaults(func=cmd_nmk)

    p = sub.add_parser("equidist", parents=[common], help="NMK classes against Haar measure on G2")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--moment-c", type=float, default=5.0)
    p.add_argument("--zhat-c", type=float, default=10.0)
    p.add_argument("--no-zhat", action="store_true")
    p.set_defaults(func=cmd_equidist)

    p = sub.add_parser("gauss", parents=[common], help="Gauss sum angles")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--threshold", type=float, default=0.02)
    p.set_defaults(func=cmd_gauss)

    p = sub.add_parser("family", parents=[common], help="family moments of det(I - Theta_X)^s")
    p.add_argument("--g", type=int, default=1)
    p.add_argument("--q", type=int, default=1009)
    p.add_argument("--s", type=float, default=2.0)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--tol", type=float, default=0.1)
    p.set_defaults(func=cmd_family)
    return ap


def main(argv=None) -> int:
    from .densities import SlowDecayError
    from .ffield import FieldError, TableCapExceeded
    from .laurent import InstanceTooLarge
    from .moments import DomainError

    ap = build_parser()
    args = ap.parse_args(argv)
    if args.output_dir is None:
        args.output_dir = os.environ.get(OUTPUT_ENV, ".")
    if args.threads < 1:
        ap.error("--threads must be positive")
    out = Path(args.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        print(f"error: output directory {out} is not writable: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (InstanceTooLarge, TableCapExceeded, SlowDecayError) as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (UsageError, DomainError, FieldError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
