import json
import math

import numpy as np
import pytest
from scipy import stats as sps

from conehull.errors import ConfigError
from conehull.harness import (
    CSV_COLUMNS,
    ExperimentConfig,
    ResultRecord,
    config_from_json,
    map_replicates,
    records_to_csv,
    run_experiment,
    strip_runtime_column,
)
from conehull.rng import RngStream
from conehull.stats import (
    Estimate,
    binomial_estimate,
    mean_estimate,
    ratio_estimate,
    two_sample_energy_test,
)


def test_estimate_ci_and_covers():
    e = Estimate(1.0, 0.1)
    lo, hi = e.ci(4)
    assert (lo, hi) == (0.6, 1.4)
    assert e.covers(1.35)
    assert not e.covers(1.5)


def test_mean_and_binomial_estimates():
    e = mean_estimate([1.0, 2.0, 3.0, 4.0])
    assert e.value == 2.5
    assert e.std_error == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2)
    b = binomial_estimate(50, 100)
    assert b.value == 0.5
    assert b.std_error == pytest.approx(0.05)


def test_ratio_estimate_consistency():
    rng = np.random.default_rng(0)
    b = rng.random(20_000) + 0.5
    a = 3.0 * b + rng.standard_normal(20_000) * 0.1
    r = ratio_estimate(a, b)
    assert abs(r.value - 3.0) <= 4 * r.std_error


# --- energy test ------------------------------------------------------------


def test_energy_test_detects_shift():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((500, 1))
    y = rng.standard_normal((500, 1)) + 1.0
    stat, p = two_sample_energy_test(x, y, 199, rng)
    assert p < 0.01
    assert stat > 0


def test_energy_test_null_p_uniform():
    rng = np.random.default_rng(2)
    pvals = []
    for _ in range(200):
        x = rng.standard_normal((60, 2))
        y = rng.standard_normal((60, 2))
        _, p = two_sample_energy_test(x, y, 99, rng)
        pvals.append(p)
    # level check at alpha = 0.05 within 4 binomial SEs
    alpha_hat = np.mean(np.asarray(pvals) <= 0.05)
    se = math.sqrt(0.05 * 0.95 / len(pvals))
    assert abs(alpha_hat - 0.05) <= 4 * se
    # and the p-values look uniform overall
    assert sps.kstest(pvals, "uniform").pvalue > 1e-3


def test_energy_test_split_sample_calibrated():
    # splitting one iid pool is a null case: p should rarely be small
    rng = np.random.default_rng(3)
    big = 0
    for _ in range(10):
        pool = rng.standard_cauchy((400, 3))
        _, p = two_sample_energy_test(pool[:200], pool[200:], 199, rng)
        big += p > 0.05
    assert big >= 8


# --- replicate map ----------------------------------------------------------


def _noise(rng, r):
    return float(rng.standard_normal() + r)


def test_map_replicates_deterministic_across_workers():
    a = map_replicates(_noise, 100, seed=5, workers=1)
    b = map_replicates(_noise, 100, seed=5, workers=3, block=16)
    assert a == b


def test_map_replicates_streams_are_replicate_indexed():
    vals = map_replicates(_noise, 10, seed=5, workers=1)
    expect = [_noise(RngStream(5, r).generator(), r) for r in range(10)]
    assert vals == expect


# --- configs and records ------------------------------------------------------


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(experiment="", seed=1).validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(experiment="x", reps=0).validate()
    with pytest.raises(ConfigError):
        config_from_json({"experiment": "x", "bogus": 1})
    cfg = config_from_json({"experiment": "wendel", "reps": 10, "seed": 3})
    assert cfg.experiment == "wendel"


def test_unknown_experiment_raises():
    with pytest.raises(ConfigError):
        run_experiment(ExperimentConfig(experiment="no-such-thing"))


def test_csv_roundtrip_and_runtime_strip():
    rec = ResultRecord(
        experiment="demo", d=2, n=5, reps=10, seed=1,
        estimate=0.5, std_error=0.1, ci_low=0.1, ci_high=0.9,
        exact_target=0.5, passed=True, runtime_ms=12.0,
    )
    text = records_to_csv([rec])
    lines = text.strip().split("\n")
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[1].startswith("demo,2,5,10,1,0.5,0.1,0.1,0.9,0.5,true,")
    stripped = strip_runtime_column(text)
    assert stripped.strip().split("\n")[1] == "demo,2,5,10,1,0.5,0.1,0.1,0.9,0.5,true"


def test_result_record_json():
    rec = ResultRecord(
        experiment="demo", d=2, n=None, reps=1, seed=0,
        estimate=1.0, std_error=0.0, ci_low=1.0, ci_high=1.0,
        exact_target=None, passed=None,
    )
    obj = rec.to_json()
    json.dumps(obj)
    assert obj["pass"] is None
