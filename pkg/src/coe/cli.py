"""``coe`` command-line tool: reproducible tables of capacity-of-entanglement results.

Every command writes a table (CSV or JSON) to ``--out`` or standard output.
JSON artifacts carry the full run configuration and provenance. Exit codes:
0 success, 2 invalid input, 3 numerical failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import subprocess
import sys
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import gaussian, specfun, syk2_analytic, syk2_numeric
from .errors import DomainError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

COMMANDS = ("page-curve", "coefficient", "variance", "convergence", "syk2-mc", "deficit", "kdf-eval", "crosscheck")


class ValidationError(DomainError):
    """Invalid command-line configuration."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _error_record("ValidationError", message, EXIT_VALIDATION)
        self.print_usage(sys.stderr)
        sys.exit(EXIT_VALIDATION)


def _error_record(kind: str, message: str, code: int) -> None:
    print(json.dumps({"error": kind, "message": message, "exit_code": code}), file=sys.stderr)


# --- output -----------------------------------------------------------------

def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "{:.12g}".format(float(value))
    return str(value)


def _json_cell(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else str(v)
    return value


def git_describe() -> str | None:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            capture_output=True, text=True, timeout=5, cwd=Path(__file__).resolve().parent,
        )
    except (OSError, subprocess.SubprocessError):
        return None
    if out.returncode != 0:
        return None
    return out.stdout.strip() or None


def render(records: Sequence[Mapping], fmt: str, config: Mapping | None = None,
           extra: Mapping | None = None) -> str:
    """Serialize uniform records as CSV (12 significant digits) or JSON."""
    if not records:
        raise ValidationError("no records to write")
    columns = list(records[0].keys())
    for rec in records:
        if list(rec.keys()) != columns:
            raise ValidationError("records do not share one schema")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for rec in records:
            writer.writerow([_format_cell(rec[c]) for c in columns])
        return buf.getvalue()
    if fmt == "json":
        payload = {
            "config": dict(config or {}),
            "columns": columns,
            "rows": [[_json_cell(rec[c]) for c in columns] for rec in records],
            "provenance": {
                "git_describe": git_describe(),
                "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            },
        }
        if extra:
            payload.update({k: _json_cell(v) for k, v in extra.items()})
        return json.dumps(payload, indent=2) + "\n"
    raise ValidationError(f"unknown format {fmt!r}")


def emit(records: Sequence[Mapping], fmt: str, path: str | None, config: Mapping | None = None,
         extra: Mapping | None = None) -> None:
    """Write records to ``path`` (``None`` or ``-`` for standard output)."""
    text = render(records, fmt, config, extra)
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


# --- argument parsing ---------------------------------------------------------

def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.split(",") if t.strip())


def _common(*, seed=False, threads=False, grid=False, sizes=False, mc=False, terms=False,
            tol: float | None = 1e-12) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--out", default=None, help="output path (default: standard output)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--config", default=None, help="flat key=value file overriding defaults")
    if tol is not None:
        p.add_argument("--tol", type=_positive_float, default=tol, help=f"absolute tolerance (default {tol:g})")
    if terms:
        p.add_argument("--max-terms", type=_positive_int, default=100_000)
    if grid:
        p.add_argument("--f", type=float, nargs="+", default=None, help="subsystem fraction(s)")
        p.add_argument("--f-min", type=float, default=None)
        p.add_argument("--f-max", type=float, default=None)
        p.add_argument("--f-steps", type=_positive_int, default=None)
    if sizes:
        p.add_argument("--V", type=_positive_int, nargs="+", required=False, default=None,
                       help="system size(s)")
        p.add_argument("--VA", type=_positive_int, default=None, help="subsystem size (instead of --f)")
    if seed:
        p.add_argument("--seed", type=_seed, default=0)
    if mc:
        p.add_argument("--realizations", type=_positive_int, default=100)
        p.add_argument("--states", type=_positive_int, default=1000)
        p.add_argument("--half-filled", action=argparse.BooleanOptionalAction, default=True,
                       help="sample only eigenstates with V/2 particles (default on)")
    if threads:
        p.add_argument("--threads", type=_positive_int, default=1)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND", parser_class=_Parser)

    p = sub.add_parser("page-curve", parents=[_common(tol=None)],
                       help="<C_A>/(V ln 2) against V_A/V for Haar-random Gaussian states")
    p.add_argument("--V", type=_positive_int, required=True)
    p.add_argument("--precision-bits", type=_positive_int, default=None)

    sub.add_parser("coefficient", parents=[_common(grid=True, tol=1e-11)],
                   help="SYK2 volume-law coefficients of capacity, entropy and Renyi-2")

    sub.add_parser("variance", parents=[_common(grid=True, sizes=True)],
                   help="mean and standard deviation of C_A over Haar-random Gaussian states")

    sub.add_parser("convergence", parents=[_common(grid=True, terms=True, tol=None)],
                   help="terms, partial sums and tail bounds of the coefficient series")

    sub.add_parser("syk2-mc", parents=[_common(grid=True, sizes=True, seed=True, mc=True, threads=True, tol=None)],
                   help="Monte Carlo eigenstate averages for GUE hopping Hamiltonians")

    p = sub.add_parser("deficit", parents=[_common(grid=True, sizes=True, seed=True, mc=True, threads=True, tol=None)],
                       help="finite-size deficits and their a0/V^2 + a1 fit")
    p.add_argument("--input", default=None, help="CSV with columns V,deficit to fit instead of sampling")

    p = sub.add_parser("kdf-eval", parents=[_common(terms=True, tol=1e-10)],
                       help="evaluate a Kampe de Feriet double series")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float, default=None, help="second argument (default: equal to --x)")
    defaults = syk2_analytic.CLOSED_FORM_KDF
    for name in ("a_top", "b_row", "c_row", "alpha_bot", "beta_bot", "gamma_bot"):
        p.add_argument("--" + name.replace("_", "-"), type=_floats, default=getattr(defaults, name),
                       help="comma-separated parameters (default: the closed-form coefficient's)")

    p = sub.add_parser("crosscheck", parents=[_common(seed=True, tol=None)],
                       help="run the route-agreement suite and print a pass/fail table")
    p.add_argument("--quick", action="store_true", help="skip the Monte Carlo rows")
    return parser


_SWITCHES = ("--half-filled", "--quick")


def _config_overrides(parser: argparse.ArgumentParser, argv: Sequence[str]) -> list[str]:
    """Turn ``--config`` file entries into leading flags so explicit flags win."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config is None:
        return list(argv)
    text = Path(known.config).read_text()
    command = next((a for a in argv if a in COMMANDS), None)
    if command is None:
        raise ValidationError("--config needs a command")
    extra: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{known.config}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in ("command", "config"):
            continue
        flag = "--" + key.replace("_", "-")
        if flag in _SWITCHES:
            if value.lower() not in ("true", "false"):
                raise ValidationError(f"{known.config}:{lineno}: {key} expects true or false")
            if value.lower() == "true":
                extra.append(flag)
            elif flag == "--half-filled":
                extra.append("--no-half-filled")
            continue
        extra.append(flag)
        extra.extend(value.replace(",", " ").split() if key in ("V", "f") else [value])
    idx = argv.index(command)
    return list(argv[: idx + 1]) + extra + list(argv[idx + 1:])


def _f_grid(args) -> np.ndarray:
    if args.f is not None:
        if any(v is not None for v in (args.f_min, args.f_max, args.f_steps)):
            raise ValidationError("use either --f or --f-min/--f-max/--f-steps")
        grid = np.asarray(args.f, dtype=float)
    elif args.f_min is not None and args.f_max is not None and args.f_steps is not None:
        grid = np.linspace(args.f_min, args.f_max, args.f_steps)
    else:
        raise ValidationError("give --f or all of --f-min, --f-max, --f-steps")
    if np.any((grid <= 0) | (grid >= 1)):
        raise ValidationError("subsystem fractions must lie in (0, 1)")
    return grid


def _subsystem(args, V: int) -> list[int]:
    """Subsystem sizes for system size ``V`` from ``--VA`` or the f grid."""
    if args.VA is not None:
        if args.f is not None or args.f_min is not None:
            raise ValidationError("use either --VA or a fraction")
        if args.VA > V:
            raise ValidationError(f"--VA {args.VA} exceeds --V {V}")
        return [args.VA]
    out = []
    for f in _f_grid(args):
        VA = int(round(f * V))
        if not 1 <= VA <= V:
            raise ValidationError(f"f={f} gives an empty subsystem at V={V}")
        out.append(VA)
    return out


def _sizes(args) -> list[int]:
    if not args.V:
        raise ValidationError("--V is required")
    return list(args.V)


# --- commands -------------------------------------------------------------------

def cmd_page_curve(args):
    curve = gaussian.page_curve(args.V, args.precision_bits)
    return [{"f": f, "coe_density": c} for f, c in zip(curve.f_grid, curve.coe)], None


def cmd_coefficient(args):
    curve = syk2_analytic.coefficient_curve(_f_grid(args), entropies=True, tol=args.tol)
    rows = [
        {"f": f, "coe": c, "ee": e, "renyi2": r}
        for f, c, e, r in zip(curve.f_grid, curve.coe, curve.ee, curve.renyi2)
    ]
    return rows, None


def cmd_variance(args):
    rows = []
    for V in _sizes(args):
        for VA in _subsystem(args, V):
            bp = gaussian.Bipartition(V, VA)
            var = gaussian.variance_coe(bp, args.tol)
            rows.append({"V": V, "f": bp.f, "mean": gaussian.avg_coe_exact(bp), "std": math.sqrt(max(var, 0.0))})
    return rows, None


def cmd_convergence(args):
    grid = _f_grid(args)
    if grid.size != 1:
        raise ValidationError("convergence takes a single --f")
    t = syk2_analytic.series_table(float(grid[0]), args.max_terms)
    rows = [
        {"k": k, "term": a, "partial_sum": s, "tail_bound": b}
        for k, a, s, b in zip(t.k, t.term, t.partial_sum, t.tail_bound)
    ]
    return rows, None


def _mc_rows(args):
    rows = []
    for V in _sizes(args):
        for VA in _subsystem(args, V):
            coe, ee, re2 = syk2_numeric.ensemble_average(
                V, VA, args.realizations, args.states, args.half_filled, args.seed, args.threads
            )
            f = VA / V
            rows.append({
                "V": V,
                "f": f,
                "coe_mean": coe.mean / VA,
                "coe_stderr": coe.std_error / VA,
                "ee_mean": ee.mean / VA,
                "renyi2_mean": re2.mean / VA,
                "deficit": abs(syk2_analytic.coe_coefficient(f) - coe.mean / VA),
            })
    return rows


def cmd_syk2_mc(args):
    return _mc_rows(args), None


def _read_deficits(path: str) -> tuple[list[float], list[float]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"V", "deficit"} <= set(reader.fieldnames):
            raise ValidationError(f"{path} needs columns V and deficit")
        pairs = [(float(r["V"]), float(r["deficit"])) for r in reader]
    return [p[0] for p in pairs], [p[1] for p in pairs]


def cmd_deficit(args):
    if args.input is not None:
        Vs, deficits = _read_deficits(args.input)
    else:
        mc = _mc_rows(args)
        fs = {r["f"] for r in mc}
        if len(fs) != 1 and args.VA is None:
            raise ValidationError("deficit fits one fraction at a time")
        Vs = [r["V"] for r in mc]
        deficits = [r["deficit"] for r in mc]
    a0, a1 = syk2_numeric.fit_inverse_square(Vs, deficits)
    rows = [{"V": V, "inv_V2": 1.0 / V ** 2, "deficit": d} for V, d in zip(Vs, deficits)]
    return rows, {"fit": {"a0": a0, "a1": a1}}


def cmd_kdf_eval(args):
    params = specfun.KdfParams(args.a_top, args.b_row, args.c_row, args.alpha_bot, args.beta_bot, args.gamma_bot)
    y = args.x if args.y is None else args.y
    res = specfun.kdf(params, args.x, y, args.tol, args.max_terms)
    return [{"x": args.x, "y": y, "value": res.value, "terms_used": res.terms_used,
             "tail_bound": res.tail_bound}], None


def crosscheck_rows(seed: int = 0, quick: bool = False) -> list[dict]:
    """Independent routes to the same quantities, with pass/fail against a tolerance."""
    rows = []

    def add(name, a, b, tol):
        diff = abs(a - b)
        rows.append({"check": name, "route_a": a, "route_b": b, "difference": diff, "tolerance": tol,
                     "pass": bool(diff <= tol)})

    s_half = syk2_analytic.HALF_FILLING_COE
    add("f=0.5 exact vs replica", s_half, syk2_analytic.replica_coefficient_half(), 1e-8)
    for f in (0.05, 0.15, 0.25, 0.35, 0.45):
        series = syk2_analytic.coefficient_series(f).value
        add(f"f={f} series vs quadrature", series, syk2_analytic.coefficient_quadrature(f), 1e-8)
        add(f"f={f} series vs closed form", series, syk2_analytic.coefficient_closed_form(f), 1e-8)
    for V, VA in ((2, 1), (8, 3), (12, 6), (20, 10)):
        bp = gaussian.Bipartition(V, VA)
        add(f"V={V} V_A={VA} finite sum vs quadrature", gaussian.avg_coe_exact(bp), gaussian.avg_coe_oracle(bp), 1e-8)
    if not quick:
        bp = gaussian.Bipartition(10, 5)
        caps = [gaussian.SpectrumSample(x).capacity() for x in gaussian.haar_sample_spectra(bp, 4000, seed)]
        se = float(np.std(caps, ddof=1) / math.sqrt(len(caps)))
        add("V=10 V_A=5 finite sum vs Haar Monte Carlo (3 s.e.)", gaussian.avg_coe_exact(bp), float(np.mean(caps)), 3 * se)
        coe, _, _ = syk2_numeric.ensemble_average(40, 20, 20, 200, True, seed)
        add("f=0.5 coefficient vs SYK2 Monte Carlo at V=40", s_half, coe.mean / 20, 3e-3)
    return rows


def cmd_crosscheck(args):
    return crosscheck_rows(args.seed, args.quick), None


def _print_table(rows) -> None:
    width = max(len(r["check"]) for r in rows)
    for r in rows:
        status = "PASS" if r["pass"] else "FAIL"
        print(f"{status}  {r['check']:<{width}}  diff={r['difference']:.3e}  tol={r['tolerance']:.1e}")


_HANDLERS = {
    "page-curve": cmd_page_curve,
    "coefficient": cmd_coefficient,
    "variance": cmd_variance,
    "convergence": cmd_convergence,
    "syk2-mc": cmd_syk2_mc,
    "deficit": cmd_deficit,
    "kdf-eval": cmd_kdf_eval,
    "crosscheck": cmd_crosscheck,
}


def dispatch(args: argparse.Namespace) -> int:
    """Run one parsed command and write its artifact; returns the exit status."""
    rows, extra = _HANDLERS[args.command](args)
    config = {k: (list(v) if isinstance(v, tuple) else v) for k, v in vars(args).items()}
    if args.command == "crosscheck" and args.out is None and args.format == "csv":
        _print_table(rows)
    else:
        emit(rows, args.format, args.out, config, extra)
    if extra and args.format == "csv":
        print(json.dumps(extra))
    if args.command == "crosscheck" and not all(r["pass"] for r in rows):
        return EXIT_NUMERICAL
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _config_overrides(parser, argv)
        args = parser.parse_args(argv)
        return dispatch(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except OSError as exc:
        _error_record(type(exc).__name__, str(exc), EXIT_IO)
        return EXIT_IO
    except ValueError as exc:
        _error_record(type(exc).__name__, str(exc), EXIT_VALIDATION)
        return EXIT_VALIDATION
    except ArithmeticError as exc:
        _error_record(type(exc).__name__, str(exc), EXIT_NUMERICAL)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
