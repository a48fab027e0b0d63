"""Command-line interface.

Subcommands::

    tradeoff                 export a trade-off curve as CSV
    calibrate gaussian|laplace
    sanitize                 release a contingency table
    simulate cost|tests      Monte Carlo studies
    test gof|hom             private chi-square tests on a released table

Every file written gets a ``<file>.json`` sidecar holding the resolved
configuration; JSON records printed to stdout embed it directly.  Exit
status is 0 on success, 1 on data or domain errors and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .calibrate import gaussian_sigma, laplace_b_freq, laplace_b_l1, laplace_b_universal
from .cost import simulate_costs
from .errors import DataError, GDPMechError
from .mechanisms import Mechanism, MechanismConfig, release
from .private_tests import gof_test, hom_test, simulate_tests
from .sensitivity import frequency_table_spec
from .tradeoff import (
    BiLaplace,
    EpsDeltaDP,
    EpsDP,
    FreqLaplace,
    GaussianGDP,
    UniLaplace,
    eps_from_mu,
    write_curve_csv,
)

SPEC_VERSION = 1
MECHANISMS = [m.value for m in Mechanism]
_SEED_MAX = 2**64 - 1


class UsageError(Exception):
    """Bad combination of flags; reported with exit status 2."""


# ---------------------------------------------------------------- csv io


def read_table_csv(path: str) -> tuple[list[str], np.ndarray]:
    """Read a headed numeric CSV; errors name the offending line and column."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from exc
    rows = [(i + 1, r) for i, r in enumerate(rows) if any(c.strip() for c in r)]
    if len(rows) < 2:
        raise DataError(f"{path}: need a header row and at least one data row")
    header = [h.strip() for h in rows[0][1]]
    width = len(header)
    data = []
    for line, r in rows[1:]:
        if len(r) != width:
            raise DataError(f"{path}: row {line}: expected {width} columns, found {len(r)}")
        vals = []
        for col, cell in enumerate(r, start=1):
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"{path}: row {line}, column {col}: non-numeric value {cell!r}") from None
            if not np.isfinite(v):
                raise DataError(f"{path}: row {line}, column {col}: non-finite value {cell!r}")
            vals.append(v)
        data.append(vals)
    return header, np.array(data, dtype=float)


def read_vector(path: str) -> np.ndarray:
    """One number per line; blank lines are skipped."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from exc
    out = []
    for i, ln in enumerate(lines, start=1):
        s = ln.strip()
        if not s:
            continue
        try:
            out.append(float(s))
        except ValueError:
            raise DataError(f"{path}: row {i}, column 1: non-numeric value {s!r}") from None
    if not out:
        raise DataError(f"{path}: empty vector")
    return np.array(out)


def table_to_csv(header: Sequence[str], cells: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in np.atleast_2d(cells):
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def rows_to_csv(rows: list[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def _emit(text: str, output: str | None, sidecar: dict) -> None:
    """Write ``text`` to ``output`` (or stdout) and the sidecar next to it."""
    if output is None:
        sys.stdout.write(text)
        return
    with open(output, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    with open(output + ".json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _emit_json(record: dict, output: str | None) -> None:
    text = json.dumps(record, sort_keys=True) + "\n"
    if output is None:
        sys.stdout.write(text)
    else:
        _emit(text, output, record)


# ---------------------------------------------------------------- helpers


def _config_dict(args: argparse.Namespace) -> dict:
    skip = {"func"}
    d = {k: v for k, v in vars(args).items() if k not in skip}
    d["spec_version"] = SPEC_VERSION
    d["version"] = __version__
    return d


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"{args.command}: missing required option(s) {flags}")


def _mechanism_config(args, p: int) -> MechanismConfig:
    _need(args, "mechanism", "mu")
    spec = frequency_table_spec(p)
    method = getattr(args, "method", None)
    return MechanismConfig.calibrated(args.mechanism, args.mu, spec, truncate=args.truncate,
                                      laplace_method=method)


def _seed_type(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= v <= _SEED_MAX:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _default_seed() -> int:
    env = os.environ.get("GDPMECH_SEED")
    if env is None or env.strip() == "":
        return 0
    try:
        return _seed_type(env.strip())
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"GDPMECH_SEED: {exc}") from None


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(float(t)) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or any(v < 0 for v in vals):
        raise argparse.ArgumentTypeError("expected nonnegative integers")
    return vals


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number {text!r}") from None
    if not (np.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


# ---------------------------------------------------------------- commands


def cmd_tradeoff(args) -> int:
    fam = args.family
    if fam == "gdp":
        _need(args, "mu")
        curve = GaussianGDP(args.mu)
    elif fam == "eps":
        eps = args.eps if args.eps is not None else (eps_from_mu(args.mu) if args.mu else None)
        if eps is None:
            raise UsageError("tradeoff --family eps needs --eps or --mu")
        curve = EpsDP(eps)
    elif fam == "epsdelta":
        _need(args, "eps", "delta")
        curve = EpsDeltaDP(args.eps, args.delta)
    elif fam == "laplace":
        _need(args, "delta1")
        curve = UniLaplace(args.delta1)
    elif fam == "bilaplace":
        _need(args, "delta1", "delta2")
        curve = BiLaplace(args.delta1, args.delta2)
    else:
        if args.b is None:
            _need(args, "mu")
            args.b = laplace_b_freq(args.mu).scale
        curve = FreqLaplace(args.b)
    grid = args.grid if args.grid is not None else 1001
    if grid < 2:
        raise UsageError("--grid must be at least 2")
    text = write_curve_csv(curve, None, grid)
    _emit(text, args.output, _config_dict(args) | {"curve": repr(curve)})
    return 0


def cmd_calibrate(args) -> int:
    _need(args, "mu")
    if args.kind == "gaussian":
        cal = gaussian_sigma(args.mu, args.delta2 if args.delta2 is not None else np.sqrt(2.0))
    else:
        method = args.method or "freq"
        if method == "freq":
            cal = laplace_b_freq(args.mu)
        else:
            delta1 = args.delta1 if args.delta1 is not None else 2.0
            cal = (laplace_b_l1 if method == "l1" else laplace_b_universal)(args.mu, delta1)
    rec = {
        "mu": cal.mu,
        "method": cal.method.value,
        "scale": cal.scale,
        "certified_gap": cal.certified_gap,
        "spec_version": SPEC_VERSION,
        "config": _config_dict(args),
    }
    _emit_json(rec, args.output)
    return 0


def cmd_sanitize(args) -> int:
    _need(args, "input")
    header, cells = read_table_csv(args.input)
    if np.any(cells < 0) or np.any(cells != np.round(cells)):
        raise DataError(f"{args.input}: cells must be nonnegative integer counts")
    p = cells.shape[1] if args.by_row else cells.size
    cfg = _mechanism_config(args, p)
    if args.by_row:
        recs = [release(cfg, row, seed) for row, seed in
                zip(cells, np.random.SeedSequence(args.seed).generate_state(cells.shape[0], np.uint64))]
        out = np.vstack([r.output for r in recs])
        seeds = [int(r.seed) for r in recs]
    else:
        rec = release(cfg, cells.ravel(), args.seed)
        out = rec.output.reshape(cells.shape)
        seeds = [int(args.seed)]
    if args.dump_basis:
        u = cfg.spec.basis
        with open(args.dump_basis, "w", encoding="utf-8", newline="") as fh:
            fh.write(table_to_csv([f"u{k + 1}" for k in range(u.shape[1])], u))
    sidecar = _config_dict(args) | {
        "release": cfg.to_dict() | {"input_dim": int(p), "seed": int(args.seed), "row_seeds": seeds},
    }
    _emit(table_to_csv(header, out), args.output, sidecar)
    return 0


def cmd_simulate_cost(args) -> int:
    _need(args, "pi0", "grid", "mu")
    pi = read_vector(args.pi0)
    mechs = args.mechanism or MECHANISMS
    rows = simulate_costs(pi, args.grid, args.mu, mechs, reps=args.reps or 10_000,
                          seed=args.seed, truncate=args.truncate, threads=args.threads)
    text = rows_to_csv(rows, ["n", "mechanism", "mean_cost", "std_error"])
    _emit(text, args.output, _config_dict(args))
    return 0


def cmd_simulate_tests(args) -> int:
    _need(args, "input")
    try:
        with open(args.input, encoding="utf-8") as fh:
            scenario = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read {args.input}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{args.input}: row {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(scenario, dict):
        raise DataError(f"{args.input}: scenario must be a JSON object")
    for flag, key in (("mu", "mu"), ("boot", "B"), ("reps", "K"), ("alpha", "alpha")):
        if getattr(args, flag) is not None:
            scenario[key] = getattr(args, flag)
    if args.mechanism:
        scenario["mechanisms"] = args.mechanism
    rows = simulate_tests(scenario, seed=args.seed, threads=args.threads)
    text = rows_to_csv(rows, ["mechanism", "n", "metric", "estimate", "std_error"])
    _emit(text, args.output, _config_dict(args) | {"scenario": scenario})
    return 0


def cmd_test(args) -> int:
    _need(args, "input")
    _, cells = read_table_csv(args.input)
    boot = args.boot if args.boot is not None else 5000
    alpha = args.alpha if args.alpha is not None else 0.05
    if args.kind == "gof":
        _need(args, "pi0")
        pi0 = read_vector(args.pi0)
        cfg = _mechanism_config(args, cells.size)
        rep = gof_test(cells, pi0, cfg, boot, alpha, args.seed, args.threads)
    else:
        cfg = _mechanism_config(args, cells.shape[1])
        rep = hom_test(cells, cfg, boot, alpha, args.seed, args.threads)
    _emit_json(rep.to_dict() | {"spec_version": SPEC_VERSION, "config": _config_dict(args)},
               args.output)
    return 0


# ---------------------------------------------------------------- parser


def _common(p: argparse.ArgumentParser, *, mech=False, io_=True, seed=False, threads=False):
    if io_:
        p.add_argument("--input", help="input file")
        p.add_argument("--output", help="output file (default: stdout)")
    if mech:
        p.add_argument("--mechanism", choices=MECHANISMS)
        p.add_argument("--mu", type=_positive_float)
        p.add_argument("--truncate", action="store_true", help="clip releases at zero")
        p.add_argument("--method", choices=["universal", "l1", "freq"],
                       help="Laplace calibration (default: freq)")
    if seed:
        p.add_argument("--seed", type=_seed_type, default=None,
                       help="unsigned 64-bit seed (default: $GDPMECH_SEED or 0)")
    if threads:
        p.add_argument("--threads", type=int, default=None, help="worker cap; never changes results")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gdpmech", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tradeoff", help="export a trade-off curve")
    p.add_argument("--family", choices=["gdp", "eps", "epsdelta", "laplace", "bilaplace", "freq"],
                   default="gdp")
    p.add_argument("--mu", type=_positive_float)
    p.add_argument("--eps", type=_positive_float)
    p.add_argument("--delta", type=float)
    p.add_argument("--delta1", type=float)
    p.add_argument("--delta2", type=float)
    p.add_argument("--b", type=_positive_float)
    p.add_argument("--grid", type=int, help="number of alpha points (default 1001)")
    p.add_argument("--output")
    p.set_defaults(func=cmd_tradeoff)

    p = sub.add_parser("calibrate", help="minimal noise scale for mu-GDP")
    p.add_argument("kind", choices=["gaussian", "laplace"])
    p.add_argument("--mu", type=_positive_float)
    p.add_argument("--delta1", type=_positive_float, help="L1 sensitivity (default 2)")
    p.add_argument("--delta2", type=_positive_float, help="L2 sensitivity (default sqrt 2)")
    p.add_argument("--method", choices=["universal", "l1", "freq"])
    p.add_argument("--output")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("sanitize", help="release a contingency table")
    _common(p, mech=True, seed=True)
    p.add_argument("--by-row", action="store_true",
                   help="release each row as its own frequency vector")
    p.add_argument("--dump-basis", metavar="PATH", help="write the sensitivity basis as CSV")
    p.set_defaults(func=cmd_sanitize)

    p = sub.add_parser("simulate", help="Monte Carlo studies")
    ssub = p.add_subparsers(dest="study", required=True)
    q = ssub.add_parser("cost", help="mean squared error by mechanism and n")
    q.add_argument("--pi0", help="cell probabilities, one per line")
    q.add_argument("--grid", type=_int_list, help="comma-separated sample sizes")
    q.add_argument("--mu", type=_positive_float)
    q.add_argument("--mechanism", choices=MECHANISMS, action="append")
    q.add_argument("--truncate", action="store_true")
    q.add_argument("--reps", type=int)
    q.add_argument("--output")
    _common(q, io_=False, seed=True, threads=True)
    q.set_defaults(func=cmd_simulate_cost)
    q = ssub.add_parser("tests", help="type I error and power of private tests")
    q.add_argument("--input", help="scenario JSON")
    q.add_argument("--output")
    q.add_argument("--mu", type=_positive_float)
    q.add_argument("--mechanism", choices=MECHANISMS, action="append")
    q.add_argument("--boot", type=int)
    q.add_argument("--reps", type=int, help="outer replications K")
    q.add_argument("--alpha", type=float)
    _common(q, io_=False, seed=True, threads=True)
    q.set_defaults(func=cmd_simulate_tests)

    p = sub.add_parser("test", help="private chi-square test on a released table")
    p.add_argument("kind", choices=["gof", "hom"])
    _common(p, mech=True, seed=True, threads=True)
    p.add_argument("--pi0", help="null probabilities, one per line (gof)")
    p.add_argument("--boot", type=int)
    p.add_argument("--alpha", type=float)
    p.set_defaults(func=cmd_test)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits on --help, --version and usage errors
        return int(exc.code or 0)
    try:
        if hasattr(args, "seed") and args.seed is None:
            args.seed = _default_seed()
        if getattr(args, "threads", None) is not None and args.threads < 1:
            raise UsageError("--threads must be >= 1")
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"gdpmech: error: {exc}", file=sys.stderr)
        return 2
    except (GDPMechError, OSError) as exc:
        print(f"gdpmech: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
