import json
import math

import numpy as np
import pytest

from fpskew import montecarlo as mc
from fpskew import oracle
from fpskew.designs import srswor
from fpskew.population import FinitePopulation
from fpskew.variance import variance_hajek

MICRO_Y = np.array([1.0, 2.0, 4.0, 7.0, 11.0, 20.0, 3.0, 5.0])


def micro_pop(y=MICRO_Y):
    N = y.size
    return FinitePopulation(np.arange(1, N + 1), np.arange(1.0, N + 1), y, np.zeros(N, dtype=int))


def test_krw_benchmark():
    assert round(mc.krw_benchmark(40), 3) == 0.226
    assert round(mc.krw_benchmark(80), 3) == 0.159
    assert mc.krw_benchmark(2) == math.sqrt(2)
    with pytest.raises(ValueError):
        mc.krw_benchmark(1)


@pytest.mark.parametrize(
    "kw", [dict(replications=0), dict(levels=(0.9, 1.0)), dict(design="pps"), dict(estimators=("b9_Ha",))]
)
def test_config_validation(kw):
    with pytest.raises((ValueError, KeyError)):
        mc.SimulationConfig(**kw)


def test_config_round_trip(tmp_path):
    cfg = mc.SimulationConfig(
        N=300, gamma=1.0, population_seed=9, design="stratified_srswor", n=30, replications=17, workers=2
    )
    p = tmp_path / "c.cfg"
    p.write_text(mc.dump_config(cfg))
    assert mc.load_config(p) == cfg


def test_config_defaults(tmp_path):
    p = tmp_path / "empty.cfg"
    p.write_text("[population]\n")
    cfg = mc.load_config(p)
    assert cfg.replications == 1000 and cfg.levels == (0.9, 0.95, 0.99) and cfg.N == 800


def test_replication_seed_independent_of_schedule():
    a = mc.replication_seed(5, 2, 10).generate_state(4)
    b = mc.replication_seed(5, 2, 10).generate_state(4)
    c = mc.replication_seed(5, 1, 10).generate_state(4)
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_census_run():
    pop = micro_pop()
    cfg = mc.SimulationConfig(N=pop.N, n=pop.N, replications=5, estimators=("mean_Ha", "b3_cal", "b2_Ha(0.75)"))
    rep = mc.run(cfg, pop)
    for row in rep.rows:
        assert row.rmse == 0 and row.bias == 0
        assert row.coverage[0.95] == 1.0 and row.lte[0.95] == 0 and row.rte[0.95] == 0


def test_huge_variance_covers():
    z = {0.95: 1.959964}
    set1 = [((0.0, math.nan), None)] * 10
    set2 = [((v, 1e12), None) for v in np.linspace(-5, 5, 10)]
    row = mc.summarize("x", 0.0, set1, set2, (0.95,), z)
    assert row.coverage[0.95] == 1.0 and row.lte[0.95] == 0 and row.rte[0.95] == 0


def test_failures_counted():
    z = {0.9: 1.644854}
    set1 = [((1.0, math.nan), None), (None, "DegenerateError")]
    set2 = [((1.0, 0.0), None), (None, "DensityDegeneracyError"), (None, "DensityDegeneracyError")]
    row = mc.summarize("x", 1.0, set1, set2, (0.9,), z)
    assert row.excluded_set1 == 1 and row.excluded_set2 == 2
    assert row.failures == {"DegenerateError": 1, "DensityDegeneracyError": 2}
    assert row.used_set2 == 1


@pytest.fixture(scope="module")
def small_report():
    cfg = mc.SimulationConfig(N=200, gamma=1.0, design="stratified_srswor", n=20, replications=60, master_seed=3)
    return mc.run(cfg)


def test_report_invariants(small_report):
    rep = small_report
    assert [r.estimator for r in rep.rows] == list(mc.DEFAULT_ESTIMATORS)
    for row in rep.rows:
        for lv in rep.config.levels:
            assert row.coverage[lv] + row.lte[lv] + row.rte[lv] == pytest.approx(1.0, abs=1e-12)
        assert row.coverage[0.9] <= row.coverage[0.95] <= row.coverage[0.99]
        assert row.rel_stab_krw - row.rel_stab_literal == pytest.approx(1.0)
        assert row.avg_v > 0
    assert rep.truths["b2(0.75)"] == pytest.approx(-rep.truths["b2(0.25)"])


def test_report_outputs(small_report, tmp_path):
    rep = small_report
    paths = rep.write(tmp_path, "s")
    assert [p.name for p in paths] == ["s_coverage.csv", "s_metrics.csv", "s.json"]
    cov = paths[0].read_text().splitlines()
    assert cov[0] == "estimator,level,coverage,lte,rte"
    assert len(cov) == 1 + 3 * len(rep.rows)
    met = paths[1].read_text().splitlines()
    assert met[0] == "estimator,bias,rmse,bias2_over_mse,avg_v,rel_bias,rel_stab_literal,rel_stab_krw"
    doc = json.loads(paths[2].read_text())
    assert doc["schema"] == "fps-skew/1"
    assert "workers" not in doc["config"]
    assert doc["z_constants"] == {"0.9": 1.644854, "0.95": 1.959964, "0.99": 2.575829}
    assert doc["seeds"]["master_seed"] == 3
    assert all("excluded_set2" in r for r in doc["estimators"])


def test_deterministic_across_workers(tmp_path):
    base = dict(N=150, gamma=0.0, design="srswor", n=15, replications=24, master_seed=11)
    a = mc.run(mc.SimulationConfig(**base, workers=1))
    b = mc.run(mc.SimulationConfig(**base, workers=3))
    assert a.to_json() == b.to_json()
    assert a.coverage_csv() == b.coverage_csv() and a.metrics_csv() == b.metrics_csv()


def test_mean_rel_bias_micro():
    # SYG is design-unbiased for the Hajek mean under SRSWOR; rel.bias shrinks with R
    pop = micro_pop()
    design = srswor(pop.N, 3)
    truth, est = oracle.syg_expectation_check(design, pop.y, lambda s, ys: variance_hajek(s, ys, pop.N).v2_syg)
    assert est.expectation == pytest.approx(float(truth.variance), rel=1e-12)
    cfg = mc.SimulationConfig(N=pop.N, n=3, estimators=("mean_Ha",), replications=3000, master_seed=1)
    row = mc.run(cfg, pop).row("mean_Ha")
    assert abs(row.rel_bias) < 0.1
    assert row.rmse**2 == pytest.approx(float(truth.variance), rel=0.1)


def test_population_file(tmp_path):
    from fpskew import population as popmod

    pop = popmod.generate_population(2, 120, 1.0)
    popmod.write_csv(pop, tmp_path / "p.csv")
    (tmp_path / "c.cfg").write_text(
        "[population]\nfile = p.csv\n[design]\nn = 12\n[estimators]\nlist = mean_Ha, b3_Ha\n[metrics]\nreplications = 5\n"
    )
    cfg = mc.load_config(tmp_path / "c.cfg")
    rep = mc.run(cfg)
    assert rep.population_summary["N"] == 120
    assert rep.truths["mean_Ha"] == pytest.approx(pop.y.mean())
