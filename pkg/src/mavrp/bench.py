"""Benchmark metrics, the solve dispatcher and the batch runner.

Report files written by :func:`write_reports`:

``results.csv``
    one row per (instance, variant) with columns ``RESULT_COLUMNS``.
``table.csv``
    one row per instance with ``<variant> best`` and ``<variant> avg``
    columns in suite order.
``report.json``
    every field of every :class:`RunReport`, including per-run costs.
``timings.csv``
    wall-clock seconds per run. Kept apart so the other files stay
    identical between repeated runs.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .ahgslns import EvolutionTrace, ahgslns
from .config import RunConfig, Suite
from .construct import construct
from .exact import solve_exact
from .instance import Instance, generate, read_instance
from .palns import make_state, palns_run
from .solution import Solution, validate

ALGORITHMS = ("exact", "alns", "ahgslns")

RESULT_COLUMNS = (
    "instance",
    "variant",
    "runs",
    "failures",
    "best",
    "avg",
    "std",
    "cov",
    "reference",
    "reference_kind",
    "gap_best",
    "gap_avg",
)


class ReportError(ValueError):
    pass


def compute_gap(heuristic_cost: float, reference_cost: float) -> float:
    """Signed percentage gap; negative means the heuristic beat the reference."""
    if not reference_cost > 0:
        raise ValueError(f"reference cost must be positive, got {reference_cost}")
    return (heuristic_cost - reference_cost) / reference_cost * 100.0


def compute_stats(costs) -> tuple[float, float, float]:
    """``(avg, std, cov)`` with the population standard deviation and cov in percent."""
    costs = list(costs)
    if not costs:
        raise ValueError("no costs to summarize")
    t = len(costs)
    avg = math.fsum(costs) / t
    std = math.sqrt(math.fsum((c - avg) ** 2 for c in costs) / t)
    if avg == 0:
        cov = 0.0 if std == 0 else math.inf
    else:
        cov = std / avg * 100.0
    return avg, std, cov


# -- single solves ----------------------------------------------------------------


@dataclass
class SolveOutcome:
    algo: str
    cost: float
    solution: Solution
    proven: bool | None = None
    nodes: int | None = None
    trace: EvolutionTrace | None = None


def solve(inst: Instance, algo: str, cfg: RunConfig) -> SolveOutcome:
    """Solve ``inst`` with ``algo`` using the settings (and seed) in ``cfg``."""
    if algo == "exact":
        res = solve_exact(inst, budget=cfg.exact_budget)
        return SolveOutcome(algo, res.optimum, res.solution, proven=res.proven, nodes=res.nodes_explored)
    if algo == "alns":
        start = construct(inst, replace(cfg.construction, seed=cfg.seed))
        state = make_state(inst, start, cfg.alns.make_bank(), cfg.alns.make_criterion(), cfg.seed)
        state = palns_run(state, inst, cfg.alns.iter_max)
        return SolveOutcome(algo, state.best_cost, state.best)
    if algo == "ahgslns":
        res = ahgslns(inst, cfg.population_config())
        return SolveOutcome(algo, res.best_cost, res.best, trace=res.trace)
    raise ValueError(f"unknown algorithm {algo!r}; expected one of {ALGORITHMS}")


# -- reports ----------------------------------------------------------------------


@dataclass
class RunReport:
    instance: str
    variant: str
    algo: str
    fingerprint: str
    seeds: list[int]
    costs: list[float]
    failures: list[dict] = field(default_factory=list)
    best: float = math.nan
    avg: float = math.nan
    std: float = math.nan
    cov: float = math.nan
    reference: float = math.nan
    reference_kind: str = "none"  # "exact" (proven optimum), "bks" (best seen in batch) or "none"
    gap_best: float = math.nan
    gap_avg: float = math.nan

    def summarize(self) -> None:
        if self.costs:
            self.best = min(self.costs)
            self.avg, self.std, self.cov = compute_stats(self.costs)

    def set_reference(self, value: float, kind: str) -> None:
        self.reference, self.reference_kind = value, kind
        if self.costs and value > 0:
            self.gap_best = compute_gap(self.best, value)
            self.gap_avg = compute_gap(self.avg, value)

    def check(self) -> None:
        """Re-derive every statistic from ``costs`` and compare."""
        if not self.costs:
            return
        avg, std, cov = compute_stats(self.costs)
        expected = {"best": min(self.costs), "avg": avg, "std": std, "cov": cov}
        if self.reference_kind != "none" and self.reference > 0:
            expected["gap_best"] = compute_gap(expected["best"], self.reference)
            expected["gap_avg"] = compute_gap(avg, self.reference)
        for key, value in expected.items():
            got = getattr(self, key)
            if not math.isclose(got, value, rel_tol=1e-12, abs_tol=1e-12):
                raise ReportError(f"{self.instance}/{self.variant}: {key}={got} but costs give {value}")


@dataclass
class BenchResult:
    reports: list[RunReport]
    timings: list[dict]


def _run_job(job):
    inst, algo, cfg = job
    t0 = time.perf_counter()
    try:
        out = solve(inst, algo, cfg)
        bad = validate(out.solution, inst)
        if bad:
            raise RuntimeError(f"infeasible result: {bad[0]}")
        value = (out.cost, out.proven, out.trace)
        err = None
    except Exception as exc:  # recorded per run, never aborts the batch
        value = None
        err = "".join(traceback.format_exception_only(type(exc), exc)).strip()
    return value, err, time.perf_counter() - t0


def suite_instances(suite: Suite) -> list[Instance]:
    """Load or generate the suite's instances; repeated names get a ``-2``, ``-3`` ... suffix."""
    out = []
    seen: dict[str, int] = {}
    for spec in suite.instances:
        inst = read_instance(spec["path"]) if "path" in spec else generate(**spec)
        k = seen[inst.name] = seen.get(inst.name, 0) + 1
        if k > 1:
            inst = replace(inst, name=f"{inst.name}-{k}")
        out.append(inst)
    return out


def run_bench(
    suite: Suite,
    instances: list[Instance] | None = None,
    *,
    runs: int | None = None,
    base: RunConfig | None = None,
    workers: int = 1,
    on_trace=None,
) -> BenchResult:
    """Run every variant of ``suite`` ``runs`` times on each instance.

    Run ``r`` uses seed ``suite.seed + r`` for every variant. ``on_trace``
    is called with ``(instance, variant, seed, trace)`` for population runs.
    """
    instances = suite_instances(suite) if instances is None else instances
    runs = suite.runs if runs is None else runs
    if runs < 1:
        raise ValueError("runs must be >= 1")
    base = replace(base or RunConfig(), workers=1)
    seeds = [suite.seed + r for r in range(runs)]
    variant_cfgs = [(v, suite.variant_config(v, base)) for v in suite.variants]

    jobs, keys = [], []
    for i, inst in enumerate(instances):
        if inst.num_customers <= suite.exact_max_customers:
            jobs.append((inst, "exact", replace(base, exact_budget=suite.exact_budget)))
            keys.append((i, None, None))
        for v, cfg in variant_cfgs:
            for s in seeds:
                jobs.append((inst, v.algo, replace(cfg, seed=s)))
                keys.append((i, v, s))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_job, jobs, chunksize=1))
    else:
        results = [_run_job(j) for j in jobs]

    reports: dict[tuple[int, str], RunReport] = {}
    exact_ref: dict[int, float] = {}
    timings = []
    for i, inst in enumerate(instances):
        for v, cfg in variant_cfgs:
            reports[(i, v.name)] = RunReport(inst.name, v.name, v.algo, cfg.fingerprint(), [], [])
    for (i, v, s), (value, err, wall) in zip(keys, results):
        if v is None:
            if value is not None and value[1]:
                exact_ref[i] = value[0]
            timings.append({"instance": instances[i].name, "variant": "exact", "seed": "", "seconds": wall})
            continue
        rep = reports[(i, v.name)]
        rep.seeds.append(s)
        if value is None:
            rep.failures.append({"seed": s, "error": err})
        else:
            rep.costs.append(value[0])
            if on_trace is not None and value[2] is not None:
                on_trace(instances[i], v.name, s, value[2])
        timings.append({"instance": instances[i].name, "variant": v.name, "seed": s, "seconds": wall})

    ordered = []
    for i, inst in enumerate(instances):
        row = [reports[(i, v.name)] for v, _ in variant_cfgs]
        for rep in row:
            rep.summarize()
        if i in exact_ref:
            ref, kind = exact_ref[i], "exact"
        else:
            seen = [c for rep in row for c in rep.costs]
            ref, kind = (min(seen), "bks") if seen else (math.nan, "none")
        for rep in row:
            if kind != "none":
                rep.set_reference(ref, kind)
        ordered.extend(row)
    return BenchResult(ordered, timings)


def _fmt(x) -> str:
    if isinstance(x, float):
        return "" if math.isnan(x) else f"{x:.6f}"
    return str(x)


def results_csv(reports: list[RunReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for rep in reports:
        row = asdict(rep)
        row["runs"] = len(rep.seeds)
        row["failures"] = len(rep.failures)
        w.writerow([_fmt(row[c]) for c in RESULT_COLUMNS])
    return buf.getvalue()


def comparison_csv(reports: list[RunReport]) -> str:
    """Best and Avg per variant, one row per instance."""
    variants = list(dict.fromkeys(r.variant for r in reports))
    by_inst: dict[str, dict[str, RunReport]] = {}
    for rep in reports:
        by_inst.setdefault(rep.instance, {})[rep.variant] = rep
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["instance", *(f"{v} {k}" for v in variants for k in ("best", "avg"))])
    for name, row in by_inst.items():
        cells = []
        for v in variants:
            rep = row.get(v)
            cells += [_fmt(rep.best), _fmt(rep.avg)] if rep else ["", ""]
        w.writerow([name, *cells])
    return buf.getvalue()


def report_json(reports: list[RunReport]) -> str:
    data = {"version": 1, "reports": [asdict(r) for r in reports]}
    return json.dumps(data, indent=1, sort_keys=True, allow_nan=True) + "\n"


def timings_csv(timings: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, ["instance", "variant", "seed", "seconds"], lineterminator="\n")
    w.writeheader()
    for t in timings:
        w.writerow({**t, "seconds": f"{t['seconds']:.4f}"})
    return buf.getvalue()


def write_reports(result: BenchResult, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(results_csv(result.reports), encoding="utf-8")
    (out / "table.csv").write_text(comparison_csv(result.reports), encoding="utf-8")
    (out / "report.json").write_text(report_json(result.reports), encoding="utf-8")
    (out / "timings.csv").write_text(timings_csv(result.timings), encoding="utf-8")
    return out


def load_report(path: str | Path) -> list[RunReport]:
    """Read ``report.json`` (or a directory holding one) and verify its arithmetic."""
    path = Path(path)
    if path.is_dir():
        path = path / "report.json"
    data = json.loads(path.read_text(encoding="utf-8"))
    if data.get("version") != 1:
        raise ReportError(f"unsupported report version {data.get('version')!r}")
    reports = [RunReport(**r) for r in data["reports"]]
    for rep in reports:
        rep.check()
    return reports
