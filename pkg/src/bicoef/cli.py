"""Command-line interface: ``bicoef analyze|verify|example``.

Problem files are ``key=value`` lines (``#`` starts a comment)::

    mode=general
    G=1
    H=1-z-w-z*w
    zeta_c=0.41421356

Exit status is 0 on success, 2 on input or pipeline errors and 3 when a
verification verdict fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from .errors import BicoefError, DuplicateMode, ExprError, GridSpecError, ProblemFileError
from .expansion import Analysis, EstimateReport
from .expr import eval_scalar, parse
from .oracle import ErrorReport, coeff_table, compare, delannoy, lagrange_exact
from .problem import Config, Problem
from .series import EXACT

EXIT_OK = 0
EXIT_ERROR = 2
EXIT_VERIFY_FAILED = 3

KEYS = (
    "mode", "name", "G", "H", "U", "V", "zeta_c", "omega_c",
    "theta_order", "delta_order", "J", "precision", "cone",
)
MODE_KEYS = {"general": ("G", "H"), "lagrange": ("U", "V")}


@dataclass(frozen=True)
class ProblemFile:
    problem: Problem
    zeta_c: complex
    omega_c: complex | None
    config: Config


def _number(text: str, key: str, line: int) -> complex:
    try:
        value = complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ProblemFileError(f"{key}: {text!r} is not a number", line) from None
    return value.real if value.imag == 0 else value


def _integer(text: str, key: str, line: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise ProblemFileError(f"{key}: {text!r} is not an integer", line) from None


def _cone(text: str, line: int):
    parts = text.split("..")
    try:
        lo, hi = (float(p) for p in parts)
    except ValueError:
        raise ProblemFileError(f"cone must be lambda_min..lambda_max, got {text!r}", line) from None
    if not lo < hi:
        raise ProblemFileError(f"cone {text!r} is empty", line)
    return lo, hi


def parse_problem_file(text: str, precision_override: str | None = None) -> ProblemFile:
    """Validate a problem file and fill in defaults."""
    entries: dict[str, tuple[str, int]] = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ProblemFileError(f"expected key=value, got {line!r}", ln)
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in KEYS:
            raise ProblemFileError(f"unknown key {key!r}", ln)
        if key in entries:
            raise ProblemFileError(f"duplicate key {key!r} (first set on line {entries[key][1]})", ln)
        if not value:
            raise ProblemFileError(f"empty value for {key!r}", ln)
        entries[key] = (value, ln)

    present = {m for m, keys in MODE_KEYS.items() if any(k in entries for k in keys)}
    if len(present) > 1:
        ln = max(entries[k][1] for k in ("G", "H", "U", "V") if k in entries)
        raise DuplicateMode("both general (G, H) and lagrange (U, V) expressions given", ln)
    if "mode" in entries:
        mode, mode_line = entries["mode"]
        if mode not in MODE_KEYS:
            raise ProblemFileError(f"mode must be general or lagrange, got {mode!r}", mode_line)
        if present and present != {mode}:
            raise ProblemFileError(f"mode={mode} does not match the expressions given", mode_line)
    elif present:
        mode = present.pop()
    else:
        raise ProblemFileError("no expressions given (need G and H, or U and V)")
    for k in MODE_KEYS[mode]:
        if k not in entries:
            raise ProblemFileError(f"mode={mode} needs {k}")

    exprs = {}
    for k in MODE_KEYS[mode]:
        value, ln = entries[k]
        try:
            exprs[k] = parse(value)
        except ExprError as exc:
            raise ProblemFileError(f"{k}: {exc}", ln) from None
    name = entries.get("name", ("", 0))[0]
    try:
        if mode == "general":
            problem = Problem(exprs["G"], exprs["H"], "general", name)
        else:
            problem = Problem.from_lagrange(exprs["U"], exprs["V"], name)
    except ValueError as exc:
        raise ProblemFileError(str(exc), entries[MODE_KEYS[mode][0]][1]) from None

    if "zeta_c" not in entries:
        raise ProblemFileError("zeta_c is required")
    zeta_c = _number(entries["zeta_c"][0], "zeta_c", entries["zeta_c"][1])
    omega_c = None
    if "omega_c" in entries:
        omega_c = _number(entries["omega_c"][0], "omega_c", entries["omega_c"][1])

    kw = {}
    for k, field_name in (("theta_order", "theta_order"), ("delta_order", "delta_order"), ("J", "J")):
        if k in entries:
            kw[field_name] = _integer(entries[k][0], k, entries[k][1])
    precision = entries.get("precision", ("standard", 0))[0]
    if precision_override:
        precision = precision_override
    if precision not in ("standard", "extended"):
        raise ProblemFileError(
            f"precision must be standard or extended, got {precision!r}", entries.get("precision", (0, None))[1]
        )
    kw["precision"] = precision
    if "cone" in entries:
        kw["cone"] = _cone(*entries["cone"])
    try:
        config = Config(**kw)
        config = replace(config, chart_order=max(config.chart_order, config.theta_order + config.delta_order + 12))
    except ValueError as exc:
        raise ProblemFileError(str(exc)) from None
    return ProblemFile(problem, zeta_c, omega_c, config)


# ---------------------------------------------------------------------------
# direction grids


def _int_range(text: str, what: str):
    body, _, step = text.partition(":")
    if ".." in body:
        lo, hi = body.split("..")
        lo, hi = int(lo), int(hi)
        st = int(step) if step else 1
        if st <= 0 or hi < lo:
            raise GridSpecError(f"bad {what} range {text!r}")
        return list(range(lo, hi + 1, st))
    if step:
        raise GridSpecError(f"step without a range in {text!r}")
    return [int(body)]


def _r_values(text: str, s: int):
    def ev(t):
        return eval_scalar(parse(t), {"s": s}, EXACT)

    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(round(ev(lo)), round(ev(hi)) + 1))
        return [round(ev(text))]
    except (ExprError, ValueError, TypeError) as exc:
        raise GridSpecError(f"bad r expression {text!r}: {exc}") from None


def parse_grid(spec: str):
    """``(r, s)`` pairs from a spec such as ``s=10..100:10,r=s`` or ``s=200,r=s-3..s+3``.

    ``s`` takes an integer, a range ``a..b`` or a stepped range ``a..b:k``;
    ``r`` is an expression in ``s`` (rounded to an integer) or a range of two
    such expressions. ``r`` defaults to ``s``.
    """
    parts = {}
    for item in spec.split(","):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in ("r", "s") or key in parts:
            raise GridSpecError(f"bad grid item {item!r}; expected s=... and optionally r=...")
        parts[key] = value.strip()
    if "s" not in parts:
        raise GridSpecError("grid needs s=...")
    try:
        s_values = _int_range(parts["s"], "s")
    except ValueError:
        raise GridSpecError(f"bad s values {parts['s']!r}") from None
    pairs = []
    for s in s_values:
        for r in _r_values(parts.get("r", "s"), s):
            pairs.append((r, s))
    return _validate_pairs(pairs)


def _validate_pairs(pairs):
    for r, s in pairs:
        if r < 0 or s <= 0:
            raise GridSpecError(f"direction ({r}, {s}) needs r >= 0 and s > 0")
    return sorted(set(pairs), key=lambda rs: (rs[1], rs[0]))


def _rs(text: str):
    try:
        r, s = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected r,s, got {text!r}") from None
    return r, s


def lambda_pairs(lam_spec: str, s_spec: str):
    """Directions ``r = round(lambda s)`` for ``lambda`` in ``a..b:step`` (or one value) and every ``s``."""
    try:
        s_values = _int_range(s_spec, "s")
        body, _, step = lam_spec.partition(":")
        if ".." in body:
            lo, hi = (float(x) for x in body.split(".."))
            st = float(step) if step else (hi - lo) / 10
            if st <= 0 or hi < lo:
                raise GridSpecError(f"bad lambda range {lam_spec!r}")
            count = int(math.floor((hi - lo) / st + 1e-9)) + 1
            lams = [lo + i * st for i in range(count)]
        else:
            lams = [float(body)]
    except ValueError:
        raise GridSpecError(f"bad lambda/s spec {lam_spec!r} / {s_spec!r}") from None
    return _validate_pairs([(round(lam * s), s) for s in s_values for lam in lams])


# ---------------------------------------------------------------------------
# running and rendering


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "pass" if x else "fail"
    if isinstance(x, (int, str)):
        return str(x)
    return f"{x:.15g}"


def _json_value(x):
    if x is None or isinstance(x, (bool, int, str)):
        return x
    if math.isinf(x) or math.isnan(x):
        return None
    return float(f"{x:.15g}")


COLUMNS = [
    "r", "s", "lambda", "zeta_re", "zeta_im", "omega_re", "omega_im", "p", "q", "n",
    "est_logmod", "est_phase", "est_value", "est_value_im", "terms_used", "note",
]
VERIFY_COLUMNS = ["exact", "exact_logmod", "rel_err", "floor", "verdict"]


def report_row(rep: EstimateReport) -> dict:
    value = rep.value
    note = "cancellation" if rep.cancels else ""
    lm = rep.estimate_logmod
    return {
        "r": rep.r, "s": rep.s, "lambda": rep.lam,
        "zeta_re": rep.zeta.real, "zeta_im": rep.zeta.imag,
        "omega_re": rep.omega.real, "omega_im": rep.omega.imag,
        "p": rep.p, "q": rep.q, "n": rep.n,
        "est_logmod": None if lm == -math.inf else lm,
        "est_phase": rep.estimate_phase,
        "est_value": None if value is None else value.real,
        "est_value_im": None if value is None else value.imag,
        "terms_used": rep.terms_used,
        "note": note,
    }


def _verify_columns(row: dict, err, prefactor_logmod: float):
    exact_n = err.exact
    if exact_n == 0:
        row["exact"], row["exact_logmod"] = 0.0, None
    else:
        lm = prefactor_logmod + math.log(abs(exact_n))
        row["exact_logmod"] = lm
        row["exact"] = (exact_n.real / abs(exact_n)) * math.exp(lm) if lm < 700 else None
    floor_lm = prefactor_logmod + math.log(err.floor)
    row["floor"] = math.exp(floor_lm) if abs(floor_lm) < 700 else None
    row["rel_err"] = err.rel_err
    row["verdict"] = err.verdict
    if exact_n == 0 and err.verdict:
        row["note"] = "cancellation"


def run_pairs(analysis: Analysis, pairs, jobs: int | None = None):
    ordered = sorted(pairs, key=lambda rs: (rs[1], rs[0]))
    if not ordered:
        return []
    # warm the cache for the first direction before fanning out
    first = analysis.estimate(*ordered[0])
    rest = ordered[1:]
    workers = jobs or min(8, os.cpu_count() or 1)
    if workers <= 1 or len(rest) < 2:
        return [first] + [analysis.estimate(r, s) for r, s in rest]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        out = list(pool.map(lambda rs: analysis.estimate(*rs), rest))
    return [first] + out


def render(rows, columns, fmt: str, summary: dict | None = None) -> str:
    if fmt == "json":
        doc = {"columns": columns, "rows": [{c: _json_value(row.get(c)) for c in columns} for row in rows]}
        if summary is not None:
            doc["summary"] = {k: _json_value(v) for k, v in summary.items()}
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    if fmt == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row.get(c)) for c in columns])
    else:
        cells = [columns] + [[_fmt(row.get(c)) for c in columns] for row in rows]
        widths = [max(len(r[i]) for r in cells) for i in range(len(columns))]
        for r in cells:
            buf.write("  ".join(v.rjust(wd) for v, wd in zip(r, widths)).rstrip() + "\n")
    if summary is not None:
        for k, v in summary.items():
            buf.write(f"# {k}: {_fmt(v)}\n")
    return buf.getvalue()


def _oracle_for(name: str | None, problem: Problem, pairs):
    if name == "delannoy":
        return delannoy
    if name == "lagrange":
        return lagrange_exact
    R = max(r for r, _ in pairs)
    S = max(s for _, s in pairs)
    return coeff_table(problem, R, S)


def execute(pf: ProblemFile, pairs, fmt: str, verify: bool, oracle_name=None, threshold=0.05, jobs=None):
    analysis = Analysis(pf.problem, pf.zeta_c, pf.omega_c, pf.config)
    reports = run_pairs(analysis, pairs, jobs)
    rows = [report_row(rep) for rep in reports]
    columns = list(COLUMNS)
    summary = None
    status = EXIT_OK
    if verify:
        err: ErrorReport = compare(reports, _oracle_for(oracle_name, pf.problem, pairs), threshold)
        by_rs = {(e.r, e.s): e for e in err.rows}
        for row, rep in zip(rows, reports):
            _verify_columns(row, by_rs[(rep.r, rep.s)], rep.log_prefactor.real)
        columns += VERIFY_COLUMNS
        summary = {"points": len(err.rows), "max_rel_err": err.max, "median_rel_err": err.median,
                   "trend_vs_s": err.trend, "passed": err.passed}
        status = EXIT_OK if err.passed else EXIT_VERIFY_FAILED
    return render(rows, columns, fmt, summary), status


EXAMPLES = {
    "delannoy": ("general", "G=1\nH=1-z-w-z*w\nzeta_c=0.41421356237309503\n"),
    "lagrange": ("lagrange", "U=1/(1-z)\nV=1-2*z\nzeta_c=0.5\n"),
}
EXAMPLE_GRIDS = {"delannoy": "s=10..100:10,r=s", "lagrange": "s=200,r=s-3..s+3"}


def example_file(name: str) -> str:
    mode, body = EXAMPLES[name]
    return f"mode={mode}\nname={name}\n{body}"


def _add_output_flags(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--json", dest="fmt", action="store_const", const="json", help="JSON output")
    g.add_argument("--csv", dest="fmt", action="store_const", const="csv", help="CSV output")
    p.set_defaults(fmt="text")
    p.add_argument("--jobs", type=int, default=None, help="worker threads for grid rows")


def _add_direction_flags(p):
    p.add_argument("--rs", type=_rs, action="append", default=[], metavar="R,S", help="one direction (repeatable)")
    p.add_argument("--lambda", dest="lam", metavar="A..B[:STEP]", help="direction range r/s")
    p.add_argument("--s", dest="s_range", metavar="M..N[:STEP]", help="s values for --lambda")
    p.add_argument("--grid", help="grid spec, e.g. s=10..100:10,r=s")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bicoef", description="Coefficient asymptotics of bivariate meromorphic functions.")
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="estimate coefficients along directions")
    pa.add_argument("file")
    _add_direction_flags(pa)
    pa.add_argument("--verify", action="store_true", help="compare with exact coefficients")
    pa.add_argument("--threshold", type=float, default=0.05)
    _add_output_flags(pa)

    pv = sub.add_parser("verify", help="compare estimates with exact coefficients on a grid")
    pv.add_argument("file")
    pv.add_argument("--grid", required=True)
    pv.add_argument("--threshold", type=float, default=0.05)
    _add_output_flags(pv)

    pe = sub.add_parser("example", help="run a built-in example problem")
    pe.add_argument("name", choices=sorted(EXAMPLES))
    _add_direction_flags(pe)
    pe.add_argument("--verify", action="store_true")
    pe.add_argument("--threshold", type=float, default=0.05)
    pe.add_argument("--show", action="store_true", help="print the problem file and exit")
    _add_output_flags(pe)
    return parser


def _collect_pairs(args, default_grid=None):
    pairs = list(args.rs)
    if args.lam or args.s_range:
        if not (args.lam and args.s_range):
            raise GridSpecError("--lambda and --s must be given together")
        pairs += lambda_pairs(args.lam, args.s_range)
    if args.grid:
        pairs += parse_grid(args.grid)
    if not pairs:
        if default_grid is None:
            raise GridSpecError("no directions given; use --rs, --lambda/--s or --grid")
        pairs = parse_grid(default_grid)
    return _validate_pairs(pairs)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    override = os.environ.get("BICOEF_PRECISION") or None
    try:
        if args.command == "example":
            text = example_file(args.name)
            if args.show:
                sys.stdout.write(text)
                return EXIT_OK
            pf = parse_problem_file(text, override)
            pairs = _collect_pairs(args, EXAMPLE_GRIDS[args.name])
            out, status = execute(pf, pairs, args.fmt, args.verify, args.name, args.threshold, args.jobs)
        else:
            try:
                with open(args.file) as fh:
                    text = fh.read()
            except OSError as exc:
                raise ProblemFileError(f"cannot read {args.file}: {exc.strerror}") from None
            pf = parse_problem_file(text, override)
            if args.command == "analyze":
                pairs = _collect_pairs(args)
                verify = args.verify
            else:
                pairs = parse_grid(args.grid)
                verify = True
            out, status = execute(pf, pairs, args.fmt, verify, None, args.threshold, args.jobs)
    except BicoefError as exc:
        print(f"bicoef: {exc.stage} error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_ERROR
    sys.stdout.write(out)
    return status


if __name__ == "__main__":
    sys.exit(main())
