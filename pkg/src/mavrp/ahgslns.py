"""Population-based search: adaptive survival followed by cooperative evolution.

Each individual is a full PALNS state (best and current solution, operator
weights, acceptance criterion and destroy-degree parameters). The run has
two stages:

1. *Adaptive survival.* All ``N`` individuals run PALNS, the worst one is
   dropped, and this repeats until ``M`` remain.
2. *Cooperative evolution.* For ``gen_max`` generations every survivor runs
   PALNS. When the population best stalls, a crossover child replaces the
   worst individual and, after a longer stall, the worst half is swapped for
   fresh individuals.

PALNS calls within a round are independent, so they can go to a process
pool; results are merged by individual index, which keeps the output
identical to a single-process run.
"""

from __future__ import annotations

import json
import math
import random
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .acceptance import HillClimbing, RecordToRecord, SimulatedAnnealing, criterion_spec, make_criterion
from .construct import ConstructionConfig, construct
from .instance import Instance
from .operators import DESTROY_NAMES, RepairError, repair_greedy
from .palns import OperatorBank, PalnsState, WeightUpdateParams, make_state, palns_run
from .solution import Journey, PartialSolution, Solution, Trip, _collapse, makespan

# Ranges individuals draw their settings from.
DEFAULT_RANGES = {
    "rrt_deviation": (0.005, 0.05),
    "sa_worse_fraction": (0.01, 0.1),
    "sa_cooling": (0.95, 0.995),
    "min_frac": (0.05, 0.15),
    "max_frac": (0.25, 0.5),
    "p_rand": (2.0, 6.0),
}

CRITERION_NAMES = (HillClimbing.name, RecordToRecord.name, SimulatedAnnealing.name)


@dataclass(frozen=True)
class PopulationConfig:
    """Population sizes, budgets and stagnation triggers.

    Attributes:
        N: initial population size.
        M: number of elites kept after adaptive survival.
        gen_max: generations of cooperative evolution.
        iter_max: PALNS iterations per individual per round.
        l_c: crossover fires after ``ceil(l_c * gen_max)`` stalled generations.
        l_d: diversification fires after ``ceil(l_d * gen_max)`` stalled generations.
        seed: master seed; every random stream is derived from it.
        crossover: enable crossover (off for the survival-only variant).
        diversification: enable diversification.
        workers: process count for PALNS rounds; 1 runs in-process.
    """

    N: int = 6
    M: int = 3
    gen_max: int = 30
    iter_max: int = 20
    l_c: float = 0.1
    l_d: float = 0.2
    seed: int = 0
    crossover: bool = True
    diversification: bool = True
    workers: int = 1
    weight_params: WeightUpdateParams = field(default_factory=WeightUpdateParams)
    ranges: dict = field(default_factory=lambda: dict(DEFAULT_RANGES))

    def __post_init__(self):
        if self.M < 2:
            raise ValueError(f"M must be >= 2, got {self.M}")
        if self.N <= self.M:
            raise ValueError(f"N must exceed M, got N={self.N}, M={self.M}")
        if self.gen_max < 1 or self.iter_max < 1:
            raise ValueError("gen_max and iter_max must be >= 1")
        if not (0.0 <= self.l_c <= 1.0 and 0.0 <= self.l_d <= 1.0):
            raise ValueError("l_c and l_d must lie in [0, 1]")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def crossover_after(self) -> int:
        return max(1, math.ceil(self.l_c * self.gen_max))

    @property
    def diversify_after(self) -> int:
        return max(1, math.ceil(self.l_d * self.gen_max))


@dataclass
class Individual:
    uid: int
    state: PalnsState

    @property
    def fitness(self) -> float:
        return self.state.best_cost


@dataclass
class EvolutionTrace:
    """What happened during a run, one record per PALNS round plus events."""

    rounds: list[dict] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)

    def record_round(self, phase: str, index: int, population: list[Individual]) -> None:
        self.rounds.append(
            {
                "phase": phase,
                "round": index,
                "best": min(ind.fitness for ind in population),
                "fitness": {str(ind.uid): ind.fitness for ind in population},
                "weights": {
                    str(ind.uid): {
                        "destroy": list(ind.state.bank.destroy_weights),
                        "repair": list(ind.state.bank.repair_weights),
                    }
                    for ind in population
                },
            }
        )

    def log(self, kind: str, **data) -> None:
        self.events.append({"event": kind, "round": len(self.rounds), **data})

    def best_series(self) -> list[float]:
        return [r["best"] for r in self.rounds]

    def to_jsonl(self) -> str:
        lines = [json.dumps({"type": "round", **r}, sort_keys=True) for r in self.rounds]
        lines += [json.dumps({"type": "event", **e}, sort_keys=True) for e in self.events]
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")


@dataclass
class EvolutionResult:
    best: Solution
    best_cost: float
    population: list[Individual]
    trace: EvolutionTrace


# -- initialization -------------------------------------------------------------


def derive_seed(master: int, uid: int) -> int:
    """Independent 63-bit seed for individual ``uid`` under ``master``."""
    seq = np.random.SeedSequence(master, spawn_key=(uid,))
    return int(seq.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def random_settings(rng: random.Random, ranges: dict) -> tuple[dict, dict]:
    """Draw an acceptance criterion spec and per-operator destroy parameters."""
    name = rng.choice(CRITERION_NAMES)
    if name == RecordToRecord.name:
        spec = {"name": name, "deviation": rng.uniform(*ranges["rrt_deviation"])}
    elif name == SimulatedAnnealing.name:
        spec = {
            "name": name,
            "worse_fraction": rng.uniform(*ranges["sa_worse_fraction"]),
            "cooling": rng.uniform(*ranges["sa_cooling"]),
        }
    else:
        spec = {"name": name}
    params = {}
    for op in DESTROY_NAMES:
        p = {"min_frac": rng.uniform(*ranges["min_frac"]), "max_frac": rng.uniform(*ranges["max_frac"])}
        if op in ("worst", "history"):
            p["p_rand"] = rng.uniform(*ranges["p_rand"])
        params[op] = p
    return spec, params


def new_individual(inst: Instance, cfg: PopulationConfig, uid: int) -> Individual:
    seed = derive_seed(cfg.seed, uid)
    rng = random.Random(seed)
    spec, params = random_settings(rng, cfg.ranges)
    solution = construct(inst, ConstructionConfig(seed=rng.getrandbits(63)))
    bank = OperatorBank(params=params, weight_params=cfg.weight_params)
    state = make_state(inst, solution, bank, make_criterion(spec), rng.getrandbits(63))
    return Individual(uid, state)


def initialize(inst: Instance, cfg: PopulationConfig) -> list[Individual]:
    return [new_individual(inst, cfg, uid) for uid in range(cfg.N)]


# -- PALNS rounds -----------------------------------------------------------------


def _palns_job(args):
    state, inst, iter_max = args
    return palns_run(state, inst, iter_max)


def run_round(population: list[Individual], inst: Instance, iter_max: int, executor: Executor | None) -> None:
    """Advance every individual by ``iter_max`` PALNS iterations, in place."""
    jobs = [(ind.state, inst, iter_max) for ind in population]
    if executor is None:
        states = [_palns_job(j) for j in jobs]
    else:
        states = list(executor.map(_palns_job, jobs))
    for ind, state in zip(population, states):
        ind.state = state


def worst_index(population: list[Individual]) -> int:
    """Highest fitness; among ties the one furthest down the list."""
    worst = 0
    for i, ind in enumerate(population):
        if ind.fitness >= population[worst].fitness:
            worst = i
    return worst


def best_index(population: list[Individual]) -> int:
    """Lowest fitness; among ties the one earliest in the list."""
    best = 0
    for i, ind in enumerate(population):
        if ind.fitness < population[best].fitness:
            best = i
    return best


def adaptive_survival(
    population: list[Individual],
    inst: Instance,
    cfg: PopulationConfig,
    trace: EvolutionTrace | None = None,
    executor: Executor | None = None,
) -> list[Individual]:
    """Run PALNS and drop the worst individual until ``cfg.M`` remain."""
    population = list(population)
    round_no = 0
    while len(population) > cfg.M:
        run_round(population, inst, cfg.iter_max, executor)
        round_no += 1
        if trace is not None:
            trace.record_round("survival", round_no, population)
        gone = population.pop(worst_index(population))
        if trace is not None:
            trace.log("eliminate", uid=gone.uid, fitness=gone.fitness)
    return population


# -- crossover --------------------------------------------------------------------


def tournament(population: list[Individual], rng: random.Random, exclude: int | None = None) -> int:
    """Binary tournament: the fitter of two distinct random picks (ties to the lower index)."""
    pool = [i for i in range(len(population)) if i != exclude]
    if len(pool) == 1:
        return pool[0]
    a, b = rng.sample(pool, 2)
    fa, fb = population[a].fitness, population[b].fitness
    if fa < fb or (fa == fb and a < b):
        return a
    return b


def _drop_customers(journey: Journey, gone: set[int], keep: Trip | None = None) -> None:
    """Remove ``gone`` from every trip of ``journey`` except ``keep`` (by identity)."""
    tdx = len(journey.trips) - 1
    while tdx >= 0 and journey.trips:
        trip = journey.trips[tdx]
        if trip is not keep and gone.intersection(trip.customers):
            trip.customers = [c for c in trip.customers if c not in gone]
            if not trip.customers:
                _collapse(journey, tdx)
        tdx -= 1


def _journey_child(p1: Solution, p2: Solution, rng: random.Random) -> Solution | None:
    child = p1.copy()
    j = rng.randrange(len(child.journeys))
    donor = p2.journeys[j].copy()
    gone = set(donor.customers())
    for k, journey in enumerate(child.journeys):
        if k != j:
            _drop_customers(journey, gone)
    child.journeys[j] = donor
    return child


def _trip_child(p1: Solution, p2: Solution, rng: random.Random) -> Solution | None:
    slots = [
        (j, t)
        for j, (a, b) in enumerate(zip(p1.journeys, p2.journeys))
        for t in range(min(len(a.trips), len(b.trips)))
    ]
    if not slots:
        return None
    j, t = rng.choice(slots)
    child = p1.copy()
    donor = p2.journeys[j].trips[t].copy()
    journey = child.journeys[j]
    journey.trips[t] = donor
    gone = set(donor.customers)
    for k, other in enumerate(child.journeys):
        _drop_customers(other, gone, keep=donor if k == j else None)
    trips = journey.trips
    if not trips:
        return child
    idx = next(i for i, trip in enumerate(trips) if trip is donor)
    if idx > 0:
        trips[idx - 1].end = donor.start
    if idx < len(trips) - 1:
        donor.end = trips[idx + 1].start
    if len(trips) == 1 and not donor.customers:
        trips.clear()
    return child


def crossover_solution(p1: Solution, p2: Solution, mode: str, inst: Instance, rng: random.Random) -> Solution:
    """Child of two feasible solutions; raises :class:`RepairError` if it cannot be completed.

    ``mode="journey"`` takes one vehicle's whole journey from ``p2``;
    ``mode="trip"`` takes one trip at the same (vehicle, position) slot.
    Customers duplicated by the transplant are dropped from the rest of
    ``p1``, and customers left out are put back by greedy repair.
    """
    if mode == "journey":
        child = _journey_child(p1, p2, rng)
    elif mode == "trip":
        child = _trip_child(p1, p2, rng)
        if child is None:
            child = _journey_child(p1, p2, rng)
    else:
        raise ValueError(f"unknown crossover mode {mode!r}")
    present = set(child.customers())
    missing = [c for c in inst.customer_ids if c not in present]
    return repair_greedy(PartialSolution(child, missing), inst, rng)


def crossover(
    parent1: Individual,
    parent2: Individual,
    mode: str,
    inst: Instance,
    rng: random.Random,
    uid: int,
    seed: int,
) -> Individual:
    """Combine two individuals; the child takes settings from the fitter parent."""
    child_sol = crossover_solution(parent1.state.best, parent2.state.best, mode, inst, rng)
    fitter = parent1 if parent1.fitness <= parent2.fitness else parent2
    bank = fitter.state.bank.copy()
    criterion = make_criterion(criterion_spec(fitter.state.criterion))
    state = make_state(inst, child_sol, bank, criterion, seed)
    return Individual(uid, state)


# -- evolution --------------------------------------------------------------------


def evolve(
    survivors: list[Individual],
    inst: Instance,
    cfg: PopulationConfig,
    trace: EvolutionTrace | None = None,
    executor: Executor | None = None,
    next_uid: int | None = None,
) -> tuple[list[Individual], EvolutionTrace]:
    """Cooperative evolution over ``cfg.gen_max`` generations."""
    trace = trace if trace is not None else EvolutionTrace()
    population = list(survivors)
    uid = next_uid if next_uid is not None else max(ind.uid for ind in population) + 1
    rng = random.Random(derive_seed(cfg.seed, 1 << 30))
    best = min(ind.fitness for ind in population)
    since_cx = since_div = 0
    for gen in range(1, cfg.gen_max + 1):
        if cfg.crossover and since_cx >= cfg.crossover_after:
            since_cx = 0
            a = tournament(population, rng)
            b = tournament(population, rng, exclude=a)
            mode = rng.choice(("trip", "journey"))
            try:
                child = crossover(population[a], population[b], mode, inst, rng, uid, derive_seed(cfg.seed, uid))
            except RepairError:
                trace.log("crossover_failed", parents=[population[a].uid, population[b].uid], mode=mode)
            else:
                w = _replaceable_worst(population)
                trace.log(
                    "crossover",
                    parents=[population[a].uid, population[b].uid],
                    mode=mode,
                    child=uid,
                    child_fitness=child.fitness,
                    replaced=population[w].uid,
                )
                population[w] = child
            uid += 1
        if cfg.diversification and since_div >= cfg.diversify_after:
            since_div = 0
            for _ in range(math.ceil(len(population) / 2)):
                w = _replaceable_worst(population)
                fresh = new_individual(inst, cfg, uid)
                trace.log("diversify", replaced=population[w].uid, fresh=uid, fresh_fitness=fresh.fitness)
                population[w] = fresh
                uid += 1
        run_round(population, inst, cfg.iter_max, executor)
        trace.record_round("evolve", gen, population)
        now = min(ind.fitness for ind in population)
        if now < best:
            best = now
            since_cx = since_div = 0
        else:
            since_cx += 1
            since_div += 1
    return population, trace


def _replaceable_worst(population: list[Individual]) -> int:
    """Worst individual other than the current best, so the best always survives."""
    b = best_index(population)
    worst = None
    for i, ind in enumerate(population):
        if i == b:
            continue
        if worst is None or ind.fitness >= population[worst].fitness:
            worst = i
    return worst


def ahgslns(inst: Instance, cfg: PopulationConfig | None = None) -> EvolutionResult:
    """Full run: initialize, adaptive survival, cooperative evolution."""
    cfg = cfg or PopulationConfig()
    trace = EvolutionTrace()
    executor = ProcessPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        population = initialize(inst, cfg)
        start = min(ind.fitness for ind in population)
        trace.log("initialize", best=start, criteria=[ind.state.criterion.name for ind in population])
        population = adaptive_survival(population, inst, cfg, trace, executor)
        population, trace = evolve(population, inst, cfg, trace, executor, next_uid=cfg.N)
    finally:
        if executor is not None:
            executor.shutdown()
    b = best_index(population)
    best = population[b].state.best
    return EvolutionResult(best.copy(), makespan(best, inst), population, trace)
