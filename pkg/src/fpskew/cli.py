"""Command-line front end.

Exit codes: 0 success, 1 usage or input error, 2 numerical failure. With
``--error-json`` failures are also reported as one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import checks
from . import montecarlo as mc
from . import population as popmod
from .benchmarks import REPRODUCTION_SEED
from .calibration import CalibrationError
from .designs import AllocationError, draw, sample_from_units, srswor, stratified_srswor
from .estimators import EstimatorKind, PopulationAux
from .variance import infer
from .wcdf import DegenerateError, EmptyCdfError

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2
NUMERICAL_ERRORS = (DegenerateError, EmptyCdfError, CalibrationError, popmod.DegeneratePopulationError, FloatingPointError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; we reserve 2 for numerical failures
    def error(self, message):
        raise UsageError(message)


def _write_text(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _population_from_args(args) -> popmod.FinitePopulation:
    if getattr(args, "population", None):
        pop = popmod.read_csv(args.population)
    else:
        pop = popmod.generate_population(args.seed, args.n, args.gamma)
    strata = getattr(args, "strata", None)
    if strata and pop.H == 0:
        pop = popmod.stratify_by_x(pop, strata)
    return pop


def _design(pop: popmod.FinitePopulation, kind: str, size: int, H: int):
    if kind == "srswor":
        return pop, srswor(pop.N, size)
    if pop.H == 0:
        pop = popmod.stratify_by_x(pop, H)
    return pop, stratified_srswor(pop.strata, size)


def _ids_to_rows(pop: popmod.FinitePopulation, ids) -> np.ndarray:
    pos = {int(i): k for k, i in enumerate(pop.ids.tolist())}
    try:
        return np.array([pos[int(i)] for i in ids], dtype=int)
    except KeyError as exc:
        raise UsageError(f"unit id {exc.args[0]} not in the population") from None


def cmd_gen_pop(args) -> int:
    pop = _population_from_args(args)
    if args.out in (None, "-"):
        rows = zip(pop.ids.tolist(), map(popmod._fmt, pop.x), map(popmod._fmt, pop.y), pop.strata.tolist())
        sys.stdout.write(_csv_text(["id", "x", "y", "stratum"], rows))
    else:
        popmod.write_csv(pop, args.out)
    return EXIT_OK


def cmd_draw(args) -> int:
    pop = popmod.read_csv(args.population)
    pop, design = _design(pop, args.design, args.size, args.strata)
    s = draw(design, args.seed)
    rows = [(int(pop.ids[u]), repr(float(p))) for u, p in zip(s.units.tolist(), s.pi1)]
    _write_text(_csv_text(["id", "pi"], rows), args.out)
    return EXIT_OK


def cmd_estimate(args) -> int:
    pop = popmod.read_csv(args.population)
    if args.census:
        pop, design = _design(pop, "srswor", pop.N, args.strata)
        sample = sample_from_units(design, np.arange(pop.N))
    else:
        if args.size is None:
            raise UsageError("--size is required unless --census is given")
        pop, design = _design(pop, args.design, args.size, args.strata)
        if args.units:
            ids = [int(v) for v in args.units.split(",") if v.strip()]
            rows = _ids_to_rows(pop, ids)
            if rows.size != design.n or np.unique(rows).size != rows.size:
                raise UsageError(f"--units must list {design.n} distinct ids")
            sample = sample_from_units(design, rows)
        elif args.seed is not None:
            sample = draw(design, args.seed)
        else:
            raise UsageError("give --seed, --units or --census")
    if args.target == "b2" and args.r is None:
        raise UsageError("--r is required for target b2")
    kind = EstimatorKind(args.basis, args.target, args.r if args.target == "b2" else None)
    rec = infer(
        kind,
        sample,
        pop.y[sample.units],
        pop.x[sample.units],
        PopulationAux(pop.N, pop.sum_x),
        method=args.variance,
        use_inverse_pi=args.use_inverse_pi,
    )
    out = rec.to_dict()
    out["n"] = sample.n
    out["units"] = pop.ids[sample.units].tolist()
    _write_text(json.dumps(mc._clean(out), indent=2, sort_keys=True, default=float) + "\n", args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = mc.load_config(args.config)
    if args.workers is not None:
        cfg.workers = args.workers
    if args.replications is not None:
        cfg.replications = args.replications
    report = mc.run(cfg)
    stem = args.stem or Path(args.config).stem
    for p in report.write(args.out_dir, stem):
        print(p)
    return EXIT_OK


def cmd_verify(args) -> int:
    results = checks.run_checks(quick=not args.full)
    print(checks.format_table(results))
    return EXIT_OK if checks.all_passed(results) else EXIT_NUMERICAL


def cmd_export_figure_data(args) -> int:
    pop = _population_from_args(args)
    rows = zip(map(popmod._fmt, pop.x), map(popmod._fmt, pop.y), pop.strata.tolist())
    _write_text(_csv_text(["x", "y", "stratum"], rows), args.out)
    return EXIT_OK


def _add_generation(p) -> None:
    p.add_argument("--n", type=int, default=800, help="population size N")
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=REPRODUCTION_SEED)
    p.add_argument("--strata", type=int, default=None, help="stratify into H x-strata of equal x total")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fpskew", description=__doc__.splitlines()[0])
    parser.add_argument("--error-json", action="store_true", help="report failures as JSON on stderr")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("gen-pop", help="generate a population CSV (id,x,y,stratum)")
    _add_generation(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen_pop)

    p = sub.add_parser("draw", help="draw one sample; prints id,pi")
    p.add_argument("--population", required=True)
    p.add_argument("--design", choices=("srswor", "stratified_srswor"), default="srswor")
    p.add_argument("--size", type=int, required=True, help="sample size n")
    p.add_argument("--strata", type=int, default=3, help="H used when the population carries no strata")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_draw)

    p = sub.add_parser("estimate", help="point estimate, variance and intervals as JSON")
    p.add_argument("--population", required=True)
    p.add_argument("--design", choices=("srswor", "stratified_srswor"), default="srswor")
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--strata", type=int, default=3)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--units", default=None, help="comma-separated population ids")
    g.add_argument("--census", action="store_true")
    p.add_argument("--basis", choices=("hajek", "ht", "calibration"), default="hajek")
    p.add_argument("--target", choices=("b2", "b3", "mean"), default="b3")
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--variance", choices=("syg", "ht"), default="syg")
    p.add_argument("--use-inverse-pi", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate", help="run a Monte Carlo scenario from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--stem", default=None, help="output file stem (default: config file stem)")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--replications", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run the oracle checks")
    p.add_argument("--full", action="store_true", help="use the large influence-function grid")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("export-figure-data", help="x,y,stratum scatter data")
    p.add_argument("--population", default=None)
    _add_generation(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_export_figure_data)
    return parser


def _fail(args_json: bool, code: int, exc: BaseException) -> int:
    msg = str(exc)
    if args_json:
        payload = {"error": type(exc).__name__, "message": msg, "exit_code": code}
        residual = getattr(exc, "residual", None)
        if residual is not None and math.isfinite(residual):
            payload["residual"] = residual
        sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    else:
        sys.stderr.write(f"fpskew: error: {msg}\n")
    return code


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    error_json = "--error-json" in argv
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        return args.func(args)
    except UsageError as exc:
        return _fail(error_json, EXIT_USAGE, exc)
    except NUMERICAL_ERRORS as exc:
        return _fail(error_json, EXIT_NUMERICAL, exc)
    except (ValueError, OSError, AllocationError, KeyError) as exc:
        return _fail(error_json, EXIT_USAGE, exc)


if __name__ == "__main__":
    sys.exit(main())
