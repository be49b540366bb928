import json
import math
from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mavrp.bench import (
    RESULT_COLUMNS,
    ReportError,
    RunReport,
    compute_gap,
    compute_stats,
    load_report,
    report_json,
    run_bench,
    solve,
    suite_instances,
    write_reports,
)
from mavrp.config import RunConfig, load_suite
from mavrp.instance import generate
from mavrp.solution import validate

SUITE = """\
version: 1
name: mini
runs: 2
seed: 5
instances:
  - {geo: R, d: 1, a: 2, m: 2, n: 2, seed: 1}
  - {geo: R, d: 2, a: 2, m: 4, n: 5, seed: 2}
  - {geo: R, d: 2, a: 2, m: 4, n: 5, seed: 3}
alns: {iter_max: 20}
ahgslns: {N: 3, M: 2, gen_max: 2, iter_max: 3}
exact: {max_customers: 4}
variants:
  A1: {algo: alns, set: 1, criterion: record_to_record}
  A3: {algo: alns, set: 3, criterion: simulated_annealing}
  B2: {algo: ahgslns, set: 1}
"""


@pytest.fixture
def suite(tmp_path):
    path = tmp_path / "mini.yaml"
    path.write_text(SUITE)
    return load_suite(path)


@pytest.mark.parametrize(
    "heuristic, reference, expected",
    [(75.42, 75.42, 0.0), (81.89, 75.42, 8.58), (77.75, 75.42, 3.09), (102.23, 102.46, -0.22)],
)
def test_gap_examples(heuristic, reference, expected):
    assert abs(compute_gap(heuristic, reference) - expected) <= 0.01


@pytest.mark.parametrize("ref", [0.0, -3.0])
def test_gap_needs_positive_reference(ref):
    with pytest.raises(ValueError):
        compute_gap(1.0, ref)


def test_stats_examples():
    assert compute_stats([10, 10, 10]) == (10, 0, 0)
    assert compute_stats([8, 12]) == (10, 2, 20)
    assert compute_stats([42.0]) == (42.0, 0.0, 0.0)
    # std 1.38 on an average of 77.75 is a 1.77% coefficient of variation
    assert abs(1.38 / 77.75 * 100 - 1.77) <= 0.01
    avg, std, cov = compute_stats([77.75 - 1.38, 77.75 + 1.38])
    assert math.isclose(std, 1.38) and abs(cov - 1.77) <= 0.01
    with pytest.raises(ValueError):
        compute_stats([])


@given(st.lists(st.floats(1.0, 1e4), min_size=1, max_size=30))
def test_stats_properties(costs):
    avg, std, cov = compute_stats(costs)
    assert min(costs) - 1e-9 <= avg <= max(costs) + 1e-9
    assert std >= 0 and math.isclose(cov, std / avg * 100)


def test_report_self_check():
    rep = RunReport("x", "A1", "alns", "f", [0, 1], [10.0, 12.0])
    rep.summarize()
    rep.set_reference(10.0, "exact")
    rep.check()
    assert rep.gap_avg == pytest.approx(10.0) and rep.gap_best == 0.0
    rep.avg = 11.5
    with pytest.raises(ReportError):
        rep.check()


@pytest.mark.parametrize("algo", ["exact", "alns", "ahgslns"])
def test_solve_dispatch(algo):
    inst = generate("R", 1, 2, 2, 2, seed=1)
    cfg = RunConfig(seed=3)
    out = solve(inst, algo, cfg)
    assert validate(out.solution, inst) == []
    assert out.algo == algo
    with pytest.raises(ValueError):
        solve(inst, "tabu", cfg)


def test_suite_names_are_unique(suite):
    names = [inst.name for inst in suite_instances(suite)]
    assert names == ["R_1_2_2_2", "R_2_2_4_5", "R_2_2_4_5-2"]


def test_bench_reports(suite, tmp_path):
    res = run_bench(suite)
    assert len(res.reports) == 3 * 3
    first = [r for r in res.reports if r.instance == "R_1_2_2_2"]
    # small enough for the exact reference
    assert {r.reference_kind for r in first} == {"exact"}
    assert all(r.gap_best >= -1e-9 for r in first)
    later = [r for r in res.reports if r.instance != "R_1_2_2_2"]
    assert {r.reference_kind for r in later} == {"bks"}
    for rep in res.reports:
        assert rep.seeds == [5, 6] and len(rep.costs) == 2 and not rep.failures
        rep.check()
    out = write_reports(res, tmp_path / "out")
    header = (out / "results.csv").read_text().splitlines()[0]
    assert header == ",".join(RESULT_COLUMNS)
    table = (out / "table.csv").read_text().splitlines()
    assert table[0] == "instance,A1 best,A1 avg,A3 best,A3 avg,B2 best,B2 avg"
    assert len(table) == 4
    assert len(load_report(out)) == 9


def test_single_run_has_zero_spread(suite):
    res = run_bench(suite, runs=1)
    assert all(r.std == 0 and r.cov == 0 for r in res.reports)


def test_bench_is_deterministic_across_workers(suite, tmp_path):
    a = write_reports(run_bench(suite), tmp_path / "a")
    b = write_reports(run_bench(suite), tmp_path / "b")
    c = write_reports(run_bench(suite, workers=2), tmp_path / "c")
    for name in ("results.csv", "table.csv", "report.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes() == (c / name).read_bytes()


def test_tampered_report_is_rejected(suite, tmp_path):
    res = run_bench(suite, runs=1)
    data = json.loads(report_json(res.reports))
    data["reports"][0]["avg"] += 1.0
    path = tmp_path / "report.json"
    path.write_text(json.dumps(data))
    with pytest.raises(ReportError):
        load_report(path)


def test_failures_are_recorded_not_raised(suite):
    # one linehaul too heavy for any vehicle makes every run fail
    inst = generate("R", 1, 1, 2, 1, seed=0)
    heavy = replace(inst, linehauls=[replace(inst.linehauls[0], demand=99), *inst.linehauls[1:]])
    res = run_bench(suite, instances=[heavy], runs=1)
    assert all(len(r.failures) == 1 and not r.costs for r in res.reports)
    assert all(r.reference_kind == "none" for r in res.reports)
