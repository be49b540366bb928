"""Parameterized ALNS: roulette-wheel operator choice, adaptive weights and the run loop."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .acceptance import HillClimbing, RecordToRecord, SimulatedAnnealing, criterion_spec, make_criterion
from .instance import Instance
from .operators import DESTROY_NAMES, REPAIR_NAMES, RepairError, run_destroy, run_repair, update_history
from .solution import Solution, makespan

WEIGHT_FLOOR = 1e-6

NEW_BEST = "new_best"
BETTER = "better"
ACCEPTED = "accepted"
REJECTED = "rejected"
OUTCOMES = (NEW_BEST, BETTER, ACCEPTED, REJECTED)


@dataclass(frozen=True)
class WeightUpdateParams:
    reaction: float = 0.8
    sigma_best: float = 33.0
    sigma_better: float = 9.0
    sigma_accepted: float = 13.0
    sigma_rejected: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.reaction <= 1.0:
            raise ValueError("reaction factor must lie in [0, 1]")
        if min(self.sigma_best, self.sigma_better, self.sigma_accepted, self.sigma_rejected) < 0:
            raise ValueError("scores must be >= 0")

    def score(self, outcome: str) -> float:
        return {
            NEW_BEST: self.sigma_best,
            BETTER: self.sigma_better,
            ACCEPTED: self.sigma_accepted,
            REJECTED: self.sigma_rejected,
        }[outcome]


def select_operator(weights, rng: random.Random) -> int:
    """Roulette wheel: index ``i`` with probability ``w_i / sum(w)``."""
    if len(weights) == 0:
        raise ValueError("no operators to select from")
    if any(not w > 0 or math.isinf(w) for w in weights):
        raise ValueError(f"weights must be positive and finite, got {list(weights)}")
    pick = rng.random() * math.fsum(weights)
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if pick < acc:
            return i
    return len(weights) - 1


def update_weight(w: float, outcome: str, params: WeightUpdateParams) -> float:
    return params.reaction * w + (1.0 - params.reaction) * params.score(outcome)


@dataclass
class OperatorBank:
    """Destroy/repair operators with their weights, parameters and outcome counts.

    ``params`` is the per-operator parameter set: destroy entries carry the
    degree range as fractions of the customer count (``min_frac``,
    ``max_frac``) plus operator extras such as ``p_rand``; repair entries
    carry e.g. the regret degree ``k``.
    """

    destroy: list[str] = field(default_factory=lambda: list(DESTROY_NAMES))
    repair: list[str] = field(default_factory=lambda: list(REPAIR_NAMES))
    destroy_weights: list[float] = field(default_factory=list)
    repair_weights: list[float] = field(default_factory=list)
    params: dict[str, dict[str, float]] = field(default_factory=dict)
    weight_params: WeightUpdateParams = field(default_factory=WeightUpdateParams)
    counts: dict[str, dict[str, int]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.destroy or not self.repair:
            raise ValueError("operator bank needs at least one destroy and one repair operator")
        for name in self.destroy:
            if name not in DESTROY_NAMES:
                raise ValueError(f"unknown destroy operator {name!r}")
        for name in self.repair:
            if name not in REPAIR_NAMES:
                raise ValueError(f"unknown repair operator {name!r}")
        if not self.destroy_weights:
            self.destroy_weights = [1.0] * len(self.destroy)
        if not self.repair_weights:
            self.repair_weights = [1.0] * len(self.repair)
        if len(self.destroy_weights) != len(self.destroy) or len(self.repair_weights) != len(self.repair):
            raise ValueError("one weight per operator is required")
        defaults = default_operator_params()
        for name in (*self.destroy, *self.repair):
            self.params[name] = {**defaults.get(name, {}), **self.params.get(name, {})}
        for name in (*self.destroy, *self.repair):
            self.counts.setdefault(name, {o: 0 for o in OUTCOMES})

    def copy(self) -> OperatorBank:
        return OperatorBank(
            destroy=list(self.destroy),
            repair=list(self.repair),
            destroy_weights=list(self.destroy_weights),
            repair_weights=list(self.repair_weights),
            params={k: dict(v) for k, v in self.params.items()},
            weight_params=self.weight_params,
            counts={k: dict(v) for k, v in self.counts.items()},
        )

    def degree_range(self, name: str, num_customers: int) -> tuple[int, int]:
        p = self.params[name]
        lo = max(1, math.ceil(p["min_frac"] * num_customers))
        # a single-customer move cannot swap two customers, so allow pairs
        hi = max(lo, math.ceil(p["max_frac"] * num_customers), 3)
        return min(lo, num_customers), min(hi, num_customers)

    def record(self, d_idx: int, r_idx: int, outcome: str) -> None:
        wp = self.weight_params
        self.destroy_weights[d_idx] = max(WEIGHT_FLOOR, update_weight(self.destroy_weights[d_idx], outcome, wp))
        self.repair_weights[r_idx] = max(WEIGHT_FLOOR, update_weight(self.repair_weights[r_idx], outcome, wp))
        self.counts[self.destroy[d_idx]][outcome] += 1
        self.counts[self.repair[r_idx]][outcome] += 1


def default_operator_params(min_frac: float = 0.1, max_frac: float = 0.4, p_rand: float = 3.0) -> dict:
    out = {name: {"min_frac": min_frac, "max_frac": max_frac} for name in DESTROY_NAMES}
    out["worst"]["p_rand"] = p_rand
    out["history"]["p_rand"] = p_rand
    out["regret2"] = {"k": 2}
    out["regret3"] = {"k": 3}
    return out


@dataclass
class PalnsState:
    best: Solution
    current: Solution
    bank: OperatorBank
    criterion: HillClimbing | RecordToRecord | SimulatedAnnealing
    rng: random.Random
    best_cost: float = math.nan
    current_cost: float = math.nan
    iteration: int = 0
    history: dict[int, float] = field(default_factory=dict)
    best_trace: list[float] = field(default_factory=list)

    def copy(self) -> PalnsState:
        rng = random.Random()
        rng.setstate(self.rng.getstate())
        return PalnsState(
            best=self.best.copy(),
            current=self.current.copy(),
            bank=self.bank.copy(),
            criterion=make_criterion(criterion_spec(self.criterion)),
            rng=rng,
            best_cost=self.best_cost,
            current_cost=self.current_cost,
            iteration=self.iteration,
            history=dict(self.history),
            best_trace=list(self.best_trace),
        )


def make_state(inst: Instance, solution: Solution, bank: OperatorBank, criterion, seed: int) -> PalnsState:
    """Fresh state with ``best = current = solution``; calibrates annealing on its cost."""
    cost = makespan(solution, inst)
    if isinstance(criterion, SimulatedAnnealing) and criterion.temperature is None:
        criterion.calibrate(cost)
    state = PalnsState(
        best=solution.copy(),
        current=solution.copy(),
        bank=bank,
        criterion=criterion,
        rng=random.Random(seed),
        best_cost=cost,
        current_cost=cost,
    )
    update_history(state.history, inst, state.best)
    return state


def palns_run(state: PalnsState, inst: Instance, iter_max: int) -> PalnsState:
    """Run ``iter_max`` destroy/repair iterations on a copy of ``state`` and return it."""
    state = state.copy()
    rng = state.rng
    bank = state.bank
    ncust = inst.num_customers
    for _ in range(iter_max):
        state.iteration += 1
        if ncust == 0:
            state.best_trace.append(state.best_cost)
            continue
        d_idx = select_operator(bank.destroy_weights, rng)
        r_idx = select_operator(bank.repair_weights, rng)
        d_name = bank.destroy[d_idx]
        lo, hi = bank.degree_range(d_name, ncust)
        degree = rng.randint(lo, hi)
        partial = run_destroy(d_name, state.current, inst, degree, bank.params[d_name], state.history, rng)
        try:
            candidate = run_repair(bank.repair[r_idx], partial, inst, bank.params[bank.repair[r_idx]], rng)
        except RepairError:
            bank.record(d_idx, r_idx, REJECTED)
            state.best_trace.append(state.best_cost)
            continue
        cost = makespan(candidate, inst)
        accepted = state.criterion.accept(cost, state.current_cost, state.best_cost, rng)
        if cost < state.best_cost:
            outcome = NEW_BEST
        elif cost < state.current_cost:
            outcome = BETTER
        elif accepted:
            outcome = ACCEPTED
        else:
            outcome = REJECTED
        if accepted:
            state.current, state.current_cost = candidate, cost
        if cost < state.best_cost:
            state.best, state.best_cost = candidate, cost
            update_history(state.history, inst, candidate)
        bank.record(d_idx, r_idx, outcome)
        state.best_trace.append(state.best_cost)
    return state


def run_alns(
    inst: Instance,
    solution: Solution,
    iter_max: int,
    *,
    criterion=None,
    bank: OperatorBank | None = None,
    seed: int = 0,
) -> PalnsState:
    """Single-individual ALNS from ``solution``."""
    criterion = criterion if criterion is not None else RecordToRecord()
    bank = bank if bank is not None else OperatorBank()
    return palns_run(make_state(inst, solution, bank, criterion, seed), inst, iter_max)
