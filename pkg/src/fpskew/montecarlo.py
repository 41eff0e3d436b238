"""Monte Carlo harness for the skewness estimators and their normal intervals.

Two independent replication sets are drawn per scenario. Set 1 gives the
mse of every estimator. Set 2 gives bias, interval coverage and tail errors,
and the variance-estimator summaries (avg sd, rel.bias, rel.stab), which are
scaled by the set-1 mse.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import norm

from . import population as popmod
from .benchmarks import REPRODUCTION_SEED
from .calibration import CalibrationError
from .designs import SamplingDesign, draw, srswor, stratified_srswor
from .estimators import EstimatorKind, PopulationAux, estimate, raking_weights
from .variance import infer
from .wcdf import DegenerateError

log = logging.getLogger(__name__)

SCHEMA = "fps-skew/1"
DEFAULT_ESTIMATORS = ("mean_Ha", "mean_cal", "b2_Ha(0.75)", "b2_cal(0.75)", "b3_Ha", "b3_cal")
EXPECTED_FAILURES = (DegenerateError, CalibrationError)


def krw_benchmark(n: int) -> float:
    """Relative stability of the unbiased variance estimator of a normal mean."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return math.sqrt(2.0 / (n - 1))


@dataclass
class SimulationConfig:
    N: int = 800
    gamma: float = 0.0
    population_seed: int = REPRODUCTION_SEED
    generator: str = popmod.DEFAULT_GENERATOR
    population_file: str | None = None
    design: str = "srswor"
    strata: int = 3
    n: int = 40
    estimators: tuple[str, ...] = DEFAULT_ESTIMATORS
    replications: int = 1000
    levels: tuple[float, ...] = (0.90, 0.95, 0.99)
    master_seed: int = 20240101
    variance_method: str = "syg"
    use_inverse_pi: bool = False
    workers: int = 1

    def __post_init__(self):
        self.estimators = tuple(self.estimators)
        self.levels = tuple(float(v) for v in self.levels)
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if not all(0 < lv < 1 for lv in self.levels):
            raise ValueError("levels must lie in (0, 1)")
        if self.design not in ("srswor", "stratified_srswor"):
            raise ValueError(f"unknown design {self.design!r}")
        for label in self.estimators:
            EstimatorKind.parse(label)

    @property
    def kinds(self) -> list[EstimatorKind]:
        return [EstimatorKind.parse(label) for label in self.estimators]

    def build_population(self) -> popmod.FinitePopulation:
        if self.population_file:
            pop = popmod.read_csv(self.population_file)
        else:
            pop = popmod.generate_population(self.population_seed, self.N, self.gamma, self.generator)
        if self.design == "stratified_srswor" and pop.H == 0:
            pop = popmod.stratify_by_x(pop, self.strata)
        return pop

    def build_design(self, pop: popmod.FinitePopulation) -> SamplingDesign:
        if self.design == "srswor":
            return srswor(pop.N, self.n)
        return stratified_srswor(pop.strata, self.n)


def _get_list(raw: str, conv=str):
    return tuple(conv(v.strip()) for v in raw.split(",") if v.strip())


def load_config(path: str | Path) -> SimulationConfig:
    """Read an INI-style run config (sections population/design/estimators/metrics/run)."""
    cp = configparser.ConfigParser()
    with open(path) as fh:
        cp.read_file(fh)
    kw: dict = {}
    if cp.has_section("population"):
        s = cp["population"]
        kw.update(N=s.getint("N", 800), gamma=s.getfloat("gamma", 0.0))
        kw["population_seed"] = s.getint("seed", REPRODUCTION_SEED)
        kw["generator"] = s.get("generator", popmod.DEFAULT_GENERATOR)
        kw["population_file"] = s.get("file", None) or None
    if cp.has_section("design"):
        s = cp["design"]
        kw.update(design=s.get("kind", "srswor"), n=s.getint("n", 40), strata=s.getint("strata", 3))
    if cp.has_section("estimators"):
        s = cp["estimators"]
        if "list" in s:
            kw["estimators"] = _get_list(s["list"])
        kw["variance_method"] = s.get("variance", "syg")
        kw["use_inverse_pi"] = s.getboolean("use_inverse_pi", False)
    if cp.has_section("metrics"):
        s = cp["metrics"]
        kw["replications"] = s.getint("replications", 1000)
        if "levels" in s:
            kw["levels"] = _get_list(s["levels"], float)
    if cp.has_section("run"):
        s = cp["run"]
        kw["master_seed"] = s.getint("master_seed", 20240101)
        kw["workers"] = s.getint("workers", 1)
    if kw.get("population_file"):
        kw["population_file"] = str((Path(path).parent / kw["population_file"]).resolve())
    return SimulationConfig(**kw)


def dump_config(cfg: SimulationConfig) -> str:
    cp = configparser.ConfigParser()
    cp["population"] = {"N": cfg.N, "gamma": cfg.gamma, "seed": cfg.population_seed, "generator": cfg.generator}
    if cfg.population_file:
        cp["population"]["file"] = cfg.population_file
    cp["design"] = {"kind": cfg.design, "n": cfg.n, "strata": cfg.strata}
    cp["estimators"] = {
        "list": ", ".join(cfg.estimators),
        "variance": cfg.variance_method,
        "use_inverse_pi": str(cfg.use_inverse_pi).lower(),
    }
    cp["metrics"] = {"replications": cfg.replications, "levels": ", ".join(f"{v:g}" for v in cfg.levels)}
    cp["run"] = {"master_seed": cfg.master_seed, "workers": cfg.workers}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


@dataclass(frozen=True)
class _Context:
    y: np.ndarray
    x: np.ndarray
    design: SamplingDesign
    aux: PopulationAux
    kinds: tuple[EstimatorKind, ...]
    master_seed: int
    method: str
    use_inverse_pi: bool
    levels: tuple[float, ...]


def replication_seed(master_seed: int, set_index: int, h: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(set_index, h))


def _one_replication(ctx: _Context, set_index: int, h: int):
    """Per estimator: (estimate, v2) or None when the estimator failed."""
    sample = draw(ctx.design, replication_seed(ctx.master_seed, set_index, h))
    y_s = ctx.y[sample.units]
    x_s = ctx.x[sample.units]
    weights = None
    cal_error = None
    if any(k.basis == "calibration" for k in ctx.kinds):
        try:
            weights = raking_weights(sample, x_s, ctx.aux)
        except CalibrationError as exc:
            cal_error = exc
    out = []
    for kind in ctx.kinds:
        if kind.basis == "calibration" and weights is None:
            out.append((None, type(cal_error).__name__))
            continue
        try:
            if set_index == 1:
                val = (estimate(kind, sample, y_s, x_s, ctx.aux, weights), math.nan)
            else:
                rec = infer(kind, sample, y_s, x_s, ctx.aux, ctx.method, ctx.use_inverse_pi, (), weights)
                val = (rec.estimate, rec.v2)
            out.append((val, None))
        except EXPECTED_FAILURES as exc:
            out.append((None, type(exc).__name__))
    return out


def _run_block(ctx: _Context, set_index: int, hs: range):
    return [_one_replication(ctx, set_index, h) for h in hs]


def _run_set(ctx: _Context, set_index: int, R: int, workers: int):
    if workers <= 1:
        return _run_block(ctx, set_index, range(R))
    size = max(1, math.ceil(R / (4 * workers)))
    blocks = [range(a, min(a + size, R)) for a in range(0, R, size)]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        parts = list(ex.map(_run_block, [ctx] * len(blocks), [set_index] * len(blocks), blocks))
    return [row for part in parts for row in part]


@dataclass
class EstimatorRow:
    estimator: str
    truth: float
    bias: float
    rmse: float
    bias2_over_mse: float
    avg_v: float
    rel_bias: float
    rel_stab_literal: float
    rel_stab_krw: float
    coverage: dict[float, float] = field(default_factory=dict)
    lte: dict[float, float] = field(default_factory=dict)
    rte: dict[float, float] = field(default_factory=dict)
    used_set1: int = 0
    used_set2: int = 0
    excluded_set1: int = 0
    excluded_set2: int = 0
    failures: dict[str, int] = field(default_factory=dict)


@dataclass
class SimulationReport:
    config: SimulationConfig
    truths: dict[str, float]
    rows: list[EstimatorRow]
    krw_benchmark: float
    population_summary: dict

    def row(self, label: str) -> EstimatorRow:
        for r in self.rows:
            if r.estimator == label:
                return r
        raise KeyError(label)

    def coverage_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["estimator", "level", "coverage", "lte", "rte"])
        for row in self.rows:
            for lv in self.config.levels:
                w.writerow([row.estimator, _num(lv), _num(row.coverage[lv]), _num(row.lte[lv]), _num(row.rte[lv])])
        return buf.getvalue()

    def metrics_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = ["bias", "rmse", "bias2_over_mse", "avg_v", "rel_bias", "rel_stab_literal", "rel_stab_krw"]
        w.writerow(["estimator", *cols])
        for row in self.rows:
            w.writerow([row.estimator, *(_num(getattr(row, c)) for c in cols)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        cfg = asdict(self.config)
        cfg.pop("workers")  # output must not depend on the worker count
        rows = []
        for r in self.rows:
            d = asdict(r)
            for k in ("coverage", "lte", "rte"):
                d[k] = {f"{lv:g}": v for lv, v in d[k].items()}
            rows.append(d)
        return {
            "schema": SCHEMA,
            "config": cfg,
            "seeds": {
                "population_seed": self.config.population_seed,
                "master_seed": self.config.master_seed,
                "replication_stream": "SeedSequence(master_seed, spawn_key=(set, h))",
            },
            "population": self.population_summary,
            "truths": self.truths,
            "krw_benchmark": self.krw_benchmark,
            "z_constants": {f"{lv:g}": round(float(norm.ppf(0.5 + lv / 2)), 6) for lv in self.config.levels},
            "estimators": rows,
            "notes": [
                "mse (rmse column, bias2/mse, rel.bias, rel.stab denominators) comes from replication set 1; "
                "all other columns come from set 2",
                "rel_stab_literal = sqrt(mean((V2 - mse)^2)) / mse - 1; rel_stab_krw omits the trailing -1",
                "b2(r) = -b2(1-r); both population values are listed under truths",
            ],
        }

    def to_json(self) -> str:
        return json.dumps(_clean(self.to_dict()), indent=2, sort_keys=True) + "\n"

    def write(self, out_dir: str | Path, stem: str = "report") -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = [out / f"{stem}_coverage.csv", out / f"{stem}_metrics.csv", out / f"{stem}.json"]
        for p, text in zip(paths, (self.coverage_csv(), self.metrics_csv(), self.to_json())):
            p.write_text(text)
        return paths


def _num(v: float) -> str:
    return "nan" if v is None or not math.isfinite(v) else repr(float(v))


def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def true_value(kind: EstimatorKind, pop: popmod.FinitePopulation) -> float:
    if kind.target == "mean":
        return float(np.mean(pop.y))
    params = popmod.true_parameters(pop, kind.r if kind.target == "b2" else 0.25)
    return params.b2 if kind.target == "b2" else params.b3


def summarize(
    label: str,
    truth: float,
    set1: list,
    set2: list,
    levels,
    z: dict[float, float],
) -> EstimatorRow:
    """Metric row for one estimator from its per-replication results."""
    failures: dict[str, int] = {}
    for val, err in (*set1, *set2):
        if val is None:
            failures[err] = failures.get(err, 0) + 1
    est1 = np.array([v[0] for v, _ in set1 if v is not None])
    ok2 = [v for v, _ in set2 if v is not None]
    est2 = np.array([v[0] for v in ok2])
    v2 = np.array([v[1] for v in ok2])
    nan = math.nan

    mse = float(np.mean((est1 - truth) ** 2)) if est1.size else nan
    bias = float(np.mean(est2) - truth) if est2.size else nan
    sd = np.sqrt(np.maximum(v2, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        rel_bias = float(np.mean(v2) / mse - 1.0) if est2.size else nan
        stab = float(np.sqrt(np.mean((v2 - mse) ** 2)) / np.float64(mse)) if est2.size else nan
        b2m = bias**2 / mse if mse else nan
    row = EstimatorRow(
        estimator=label,
        truth=truth,
        bias=bias,
        rmse=math.sqrt(mse),
        bias2_over_mse=b2m,
        avg_v=float(np.mean(sd)) if sd.size else nan,
        rel_bias=rel_bias,
        rel_stab_literal=stab - 1.0,
        rel_stab_krw=stab,
        used_set1=int(est1.size),
        used_set2=int(est2.size),
        excluded_set1=len(set1) - int(est1.size),
        excluded_set2=len(set2) - int(est2.size),
        failures=dict(sorted(failures.items())),
    )
    for lv in levels:
        lo = est2 - z[lv] * sd
        hi = est2 + z[lv] * sd
        m = max(est2.size, 1)
        left = int(np.sum(truth < lo))
        right = int(np.sum(truth > hi))
        row.lte[lv] = left / m
        row.rte[lv] = right / m
        row.coverage[lv] = (est2.size - left - right) / m
    return row


def run(config: SimulationConfig, population: popmod.FinitePopulation | None = None) -> SimulationReport:
    """Run both replication sets for one scenario and aggregate the metrics."""
    pop = population if population is not None else config.build_population()
    design = config.build_design(pop)
    kinds = tuple(config.kinds)
    ctx = _Context(
        y=pop.y,
        x=pop.x,
        design=design,
        aux=PopulationAux(pop.N, pop.sum_x),
        kinds=kinds,
        master_seed=config.master_seed,
        method=config.variance_method,
        use_inverse_pi=config.use_inverse_pi,
        levels=config.levels,
    )
    R = config.replications
    set1 = _run_set(ctx, 1, R, config.workers)
    set2 = _run_set(ctx, 2, R, config.workers)
    z = {lv: float(norm.ppf(0.5 + lv / 2)) for lv in config.levels}

    truths: dict[str, float] = {}
    rows = []
    for j, kind in enumerate(kinds):
        truth = true_value(kind, pop)
        truths[kind.label] = truth
        row = summarize(kind.label, truth, [r[j] for r in set1], [r[j] for r in set2], config.levels, z)
        if row.excluded_set1 or row.excluded_set2:
            log.info("%s: excluded %d + %d replications", kind.label, row.excluded_set1, row.excluded_set2)
        rows.append(row)

    params = popmod.true_parameters(pop, 0.25)
    truths.setdefault("b2(0.25)", params.b2)
    truths.setdefault("b2(0.75)", popmod.true_parameters(pop, 0.75).b2)
    truths.setdefault("b3", params.b3)
    truths.setdefault("mean", params.mu)
    summary = {
        "N": pop.N,
        "H": pop.H,
        "strata_sizes": np.bincount(pop.strata)[1:].tolist() if pop.H else [],
        "n_h": design.n_h.tolist() if design.n_h is not None else [design.n],
        "meta": {k: v for k, v in pop.meta.items() if k != "source"},
    }
    return SimulationReport(config, truths, rows, krw_benchmark(design.n), summary)
