import csv
import math

import numpy as np
import pytest

from prrtc import BUNDLED_PROBLEMS
from prrtc.bench import (
    ABLATION_SUMMARY_HEADER,
    ECDF_HEADER,
    POOLED,
    AblationSpec,
    BenchRecord,
    Quantiles,
    config_hash,
    ecdf,
    format_summary,
    run_ablation,
    run_suite,
    summarize,
    trial_params,
    value_label,
    write_ecdf_csv,
    write_records_csv,
)
from prrtc.modelio import load_problem_dir, read_results_csv
from prrtc.planner import PlannerParams, Status


@pytest.fixture(scope="module")
def suite():
    return load_problem_dir(BUNDLED_PROBLEMS)


@pytest.fixture(scope="module")
def planar(suite):
    return [p for p in suite if p.model.name == "planar3"]


@pytest.fixture(scope="module")
def cages(suite):
    return [p for p in suite if "cage" in p.name]


W1 = PlannerParams(workers=1)


def rec(problem="p", status=Status.SOLVED, time_ms=1.0, cost=1.0, trial=0, sphere_tests=0, iterations=0):
    return BenchRecord(problem, trial, status, time_ms, cost, iterations, sphere_tests, 1, None, "h")


# --- records -------------------------------------------------------------------------


def test_record_invariants():
    with pytest.raises(ValueError):
        rec(status=Status.FAILED, cost=1.0)
    with pytest.raises(ValueError):
        rec(status=Status.SOLVED, cost=None)
    with pytest.raises(ValueError):
        rec(time_ms=0.0)
    rec(status=Status.INFEASIBLE, cost=None, time_ms=0.0)


def test_config_hash_stable_and_sensitive():
    assert config_hash(PlannerParams(workers=1)) == config_hash(PlannerParams(workers=1))
    assert config_hash(PlannerParams(workers=1)) != config_hash(PlannerParams(workers=2))
    assert len(config_hash(W1)) == 12


def test_trial_params_seed_and_overrides(planar):
    p = trial_params(W1.updated(sampler="uniform", seed=10), planar[0], 3)
    assert p.seed == 13
    assert trial_params(W1, planar[0], 3).seed == W1.seed


# --- run_suite -----------------------------------------------------------------------


def test_one_problem_three_trials(planar):
    records = run_suite(planar[:1], 3, W1)
    assert len(records) == 3
    assert [r.trial for r in records] == [0, 1, 2]
    assert all(r.problem == planar[0].name and r.time_ms > 0 for r in records)


def test_records_ordered_by_problem_then_trial(planar):
    records = run_suite(planar[:3], 2, W1)
    assert [(r.problem, r.trial) for r in records] == [(p.name, t) for p in planar[:3] for t in range(2)]


def test_deterministic_replay(planar):
    a, b = run_suite(planar, 2, W1), run_suite(planar, 2, W1)
    for x, y in zip(a, b):
        assert (x.status, x.cost, x.iterations, x.sphere_tests) == (y.status, y.cost, y.iterations, y.sphere_tests)


def test_bad_trials(planar):
    with pytest.raises(ValueError):
        run_suite(planar, 0, W1)


# --- summaries -----------------------------------------------------------------------


def test_singleton_quantiles():
    q = Quantiles.of([3.5])
    assert q == Quantiles(3.5, 3.5, 3.5, 3.5, 3.5, 3.5)


def test_hand_computed_quantiles():
    q = Quantiles.of(np.arange(1, 101))
    assert (q.median, q.q1, q.q3) == (50.5, 25.75, 75.25)
    assert q.mean == 50.5 and q.max == 100.0
    assert q.p95 == pytest.approx(95.05, abs=1e-12)


def test_quantiles_order_independent():
    rng = np.random.default_rng(0)
    v = rng.exponential(size=57)
    assert Quantiles.of(v) == Quantiles.of(rng.permutation(v))


def test_pooled_success_half():
    rows = summarize([rec("a"), rec("b", Status.FAILED, cost=None)])
    assert [r.name for r in rows] == ["a", "b", POOLED]
    assert rows[-1].success_rate == 0.5 and rows[-1].failed == 1
    assert rows[1].time_ms is None


def test_failed_runs_excluded_from_quantiles():
    rows = summarize([rec(time_ms=2.0, cost=3.0), rec(status=Status.FAILED, cost=None, time_ms=1000.0)])
    assert rows[0].time_ms.max == 2.0 and rows[0].cost.mean == 3.0


def test_summarize_empty():
    with pytest.raises(ValueError):
        summarize([])


def test_summary_is_pure():
    records = [rec("a", time_ms=t, cost=t) for t in (1.0, 2.0, 5.0)]
    assert summarize(records) == summarize(list(records))
    text = format_summary(summarize(records))
    assert "pooled" in text and "100%" in text


# --- ECDF ----------------------------------------------------------------------------


def test_ecdf_counts_failures_in_denominator():
    records = [rec(time_ms=3.0), rec(time_ms=1.0), rec(status=Status.FAILED, cost=None), rec(time_ms=2.0)]
    assert ecdf(records) == [(1.0, 0.25), (2.0, 0.5), (3.0, 0.75)]


def test_ecdf_monotone_and_bad_metric():
    rng = np.random.default_rng(1)
    records = [rec(time_ms=float(t), cost=float(c)) for t, c in rng.uniform(0.1, 9, size=(40, 2))]
    pts = ecdf(records, "cost")
    assert all(a[0] <= b[0] and a[1] < b[1] for a, b in zip(pts, pts[1:]))
    assert pts[-1][1] == 1.0
    assert ecdf([]) == []
    with pytest.raises(ValueError):
        ecdf(records, "iterations")


def test_ecdf_csv(tmp_path):
    f = tmp_path / "e.csv"
    write_ecdf_csv(f, [rec(time_ms=1.5, cost=2.5), rec(status=Status.FAILED, cost=None)])
    rows = list(csv.reader(f.open()))
    assert rows == [ECDF_HEADER, ["time_ms", "1.5", "0.5"], ["cost", "2.5", "0.5"]]


def test_records_csv_round_trip(tmp_path, planar):
    records = run_suite(planar[:2], 2, W1)
    f = tmp_path / "r.csv"
    write_records_csv(f, records)
    assert read_results_csv(f) == [r.as_row() for r in records]


# --- ablations -----------------------------------------------------------------------


def test_ablation_spec_validation():
    with pytest.raises(ValueError):
        AblationSpec("blocks", (1,))
    with pytest.raises(ValueError):
        AblationSpec("workers", ())
    with pytest.raises(ValueError):
        AblationSpec("workers", (0,))
    with pytest.raises(ValueError):
        AblationSpec("workers", (True,))
    with pytest.raises(ValueError):
        AblationSpec("early_exit", (1,))
    assert value_label(True) == "on" and value_label(False) == "off" and value_label(4) == "4"


def test_workers_ablation_groups(tmp_path, planar):
    groups = run_ablation(AblationSpec("workers", (1, 2, 4, 8)), planar[:1], 1, W1, out_dir=tmp_path)
    assert list(groups) == [1, 2, 4, 8]
    assert all(len(v) == 1 and v[0].workers == k for k, v in groups.items())
    for k in (1, 2, 4, 8):
        assert len(read_results_csv(tmp_path / f"workers_{k}.csv")) == 1
    rows = list(csv.reader((tmp_path / "workers_summary.csv").open()))
    assert rows[0] == ABLATION_SUMMARY_HEADER
    assert [r[1] for r in rows[1:]] == ["1", "2", "4", "8"]


def test_early_exit_metamorphic(cages):
    groups = run_ablation(AblationSpec("early_exit", (True, False)), cages, 1, W1)
    for on, off in zip(groups[True], groups[False]):
        assert (on.status, on.cost, on.iterations) == (off.status, off.cost, off.iterations)
        assert on.sphere_tests <= off.sphere_tests


@pytest.mark.parametrize("axis", ["two_stage", "batched_cc"])
def test_correctness_neutral_axes(planar, axis):
    groups = run_ablation(AblationSpec(axis, (True, False)), planar, 1, W1)
    assert [r.status for r in groups[True]] == [r.status for r in groups[False]]
    assert [r.cost for r in groups[True]] == [r.cost for r in groups[False]]


def test_dynamic_domain_ablation_runs(planar):
    groups = run_ablation(AblationSpec("dynamic_domain", (True, False)), planar[:2], 1, W1)
    assert all(math.isfinite(r.time_ms) for rs in groups.values() for r in rs)
