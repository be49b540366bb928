"""Exhaustive optimal-makespan search for tiny instances.

The search runs over the same trip-level model as :func:`validate`:

1. for every start node and customer subset, the cheapest load-feasible
   visiting order (Held-Karp over subsets; the load after visiting a set
   does not depend on the order, so capacity is a per-subset test);
2. for every remaining-customer subset and depot, the cheapest trip
   sequence that serves it (memoised recursion over first trips);
3. for every vehicle and subset, the cheapest journey (return trip plus
   trip sequence);
4. a pruned enumeration of customer partitions over vehicles.

Trips without customers other than the return trip are left out; under a
metric they never shorten a journey.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from .construct import InfeasibleInstanceError, check_demands, construct
from .instance import U, Instance
from .solution import Journey, Solution, Trip, makespan, validate

INF = math.inf


class BudgetExceeded(RuntimeError):
    pass


@dataclass
class ExactResult:
    optimum: float
    solution: Solution
    nodes_explored: int
    proven: bool


class _Search:
    def __init__(self, inst: Instance, budget: int):
        self.inst = inst
        self.budget = budget
        self.nodes = 0
        self.custs = list(inst.customer_ids)
        self.k = len(self.custs)
        self.full = (1 << self.k) - 1
        q = inst.demand
        self.q = [q[c] for c in self.custs]
        self.lh_mask = sum(1 << i for i, c in enumerate(self.custs) if q[c] > 0)
        self.bh_mask = self.full & ~self.lh_mask
        self.home_mask = {
            dep: sum(1 << i for i, c in enumerate(self.custs) if inst.home[c] == dep) for dep in inst.depot_ids
        }
        # pickups minus deliveries inside a set; load after visiting V is L0(A) + net[V]
        self.net = [0] * (1 << self.k)
        self.lh_sum = [0] * (1 << self.k)
        for mask in range(1, 1 << self.k):
            low = (mask & -mask).bit_length() - 1
            rest = mask & (mask - 1)
            self.net[mask] = self.net[rest] - self.q[low]
            self.lh_sum[mask] = self.lh_sum[rest] + (self.q[low] if self.q[low] > 0 else 0)
        self.paths: dict[tuple[int, int], dict | None] = {}
        self.trip_memo: dict[tuple[int, int], tuple] = {}
        self.seq_memo: dict[tuple[int, int, int], tuple] = {}

    def tick(self, n: int = 1) -> None:
        self.nodes += n
        if self.nodes > self.budget:
            raise BudgetExceeded

    def _held_karp(self, start: int, mask: int):
        """Cheapest feasible path from ``start`` through all of ``mask``, per final customer."""
        key = (start, mask)
        if key in self.paths:
            return self.paths[key]
        cap = self.inst.capacity
        dist = self.inst.dist
        custs = self.custs
        l0 = self.lh_sum[mask]
        net = self.net
        if l0 > cap:
            self.paths[key] = None
            return None
        bits = [i for i in range(self.k) if mask >> i & 1]
        table: dict[tuple[int, int], tuple[float, int]] = {}
        for i in bits:
            sub = 1 << i
            if 0 <= l0 + net[sub] <= cap:
                table[(sub, i)] = (dist[start][custs[i]], -1)
        frontier = sorted(sub for sub, _ in table)
        while frontier:
            nxt = set()
            for sub in frontier:
                for i in bits:
                    entry = table.get((sub, i))
                    if entry is None:
                        continue
                    ci = custs[i]
                    for j in bits:
                        if sub >> j & 1:
                            continue
                        grown = sub | 1 << j
                        load = l0 + net[grown]
                        if load > cap or load < 0:
                            continue
                        self.tick()
                        val = entry[0] + dist[ci][custs[j]]
                        old = table.get((grown, j))
                        if old is None or val < old[0]:
                            table[(grown, j)] = (val, i)
                        nxt.add(grown)
            frontier = sorted(nxt)
        ends = {i: table[(mask, i)] for i in bits if (mask, i) in table}
        result = (table, ends) if ends else None
        self.paths[key] = result
        return result

    def _order(self, start: int, mask: int, last: int) -> list[int]:
        table, _ = self.paths[(start, mask)]
        order = []
        sub, i = mask, last
        while i != -1:
            order.append(self.custs[i])
            _, prev = table[(sub, i)]
            sub &= ~(1 << i)
            i = prev
        return order[::-1]

    def best_trip(self, start: int, mask: int, end: int) -> tuple[float, int]:
        """Cheapest (cost, last customer index) for start -> all of mask -> end."""
        key = (start, mask, end)
        memo = self.trip_memo.get(key)
        if memo is not None:
            return memo
        hk = self._held_karp(start, mask)
        best = (INF, -1)
        if hk is not None:
            dist = self.inst.dist
            for i, (val, _) in hk[1].items():
                total = val + dist[self.custs[i]][end]
                if total < best[0]:
                    best = (total, i)
        self.trip_memo[key] = best
        return best

    def trips_from(self, mask: int, depot: int, left: int) -> tuple:
        """Cheapest trip sequence from ``depot`` serving ``mask`` with at most ``left`` trips.

        Returns ``(cost, first_trip_mask, end, last_index)``; ``end`` is ``U``
        for an open trip.
        """
        if mask == 0:
            return (0.0, 0, None, -1)
        left = min(left, mask.bit_count())
        if left == 0:
            return (INF, 0, None, -1)
        key = (mask, depot, left)
        memo = self.seq_memo.get(key)
        if memo is not None:
            return memo
        allowed = mask & ~(self.lh_mask & ~self.home_mask[depot])
        best = (INF, 0, None, -1)
        depots = list(self.inst.depot_ids)
        sub = allowed
        while sub:
            self.tick()
            rest = mask & ~sub
            if rest == 0 and sub & self.bh_mask == 0:
                val, last = self.best_trip(depot, sub, U)
                if val < best[0]:
                    best = (val, sub, U, last)
            for e in depots:
                val, last = self.best_trip(depot, sub, e)
                if val >= best[0]:
                    continue
                if rest:
                    tail = self.trips_from(rest, e, left - 1)[0]
                    val += tail
                if val < best[0]:
                    best = (val, sub, e, last)
            sub = (sub - 1) & allowed
        self.seq_memo[key] = best
        return best

    def journey(self, vehicle: int, mask: int) -> tuple:
        """Cheapest journey of ``vehicle`` serving exactly ``mask``: (cost, return mask, end, last)."""
        if mask == 0:
            return (0.0, 0, None, -1)
        dist = self.inst.dist
        best = (INF, 0, None, -1)
        pickups = mask & self.bh_mask
        sub = pickups
        while True:
            rest = mask & ~sub
            for e in self.inst.depot_ids:
                self.tick()
                if sub:
                    val, last = self.best_trip(vehicle, sub, e)
                else:
                    val, last = dist[vehicle][e], -1
                if val >= best[0]:
                    continue
                if rest:
                    val += self.trips_from(rest, e, self.inst.t_max)[0]
                if val < best[0]:
                    best = (val, sub, e, last)
            if sub == 0:
                break
            sub = (sub - 1) & pickups
        return best

    def build_journey(self, vehicle: int, mask: int) -> Journey:
        journey = Journey(vehicle)
        if mask == 0:
            return journey
        _, sub, e, last = self.journey(vehicle, mask)
        order = self._order(vehicle, sub, last) if sub else []
        journey.trips.append(Trip(vehicle, order, e, returning=True))
        rest = mask & ~sub
        depot, left = e, self.inst.t_max
        while rest:
            _, first, end, last = self.trips_from(rest, depot, left)
            journey.trips.append(Trip(depot, self._order(depot, first, last), end))
            rest &= ~first
            depot, left = end, left - 1
        return journey


def _same_start(inst: Instance, v1: int, v2: int) -> bool:
    return inst.positions[v1] == inst.positions[v2]


def solve_exact(inst: Instance, budget: int = 5_000_000) -> ExactResult:
    """Optimal makespan by exhaustive search, or the incumbent when ``budget`` runs out."""
    check_demands(inst)
    vehicles = list(inst.vehicle_ids)
    if inst.num_customers == 0:
        sol = Solution([Journey(v) for v in vehicles])
        return ExactResult(0.0, sol, 0, True)
    search = _Search(inst, budget)
    try:
        incumbent = construct(inst)
    except InfeasibleInstanceError:
        incumbent = None
    best_val = makespan(incumbent, inst) if incumbent is not None else INF
    best_split = None
    try:
        cost_cache: dict[tuple[int, int], float] = {}

        def cost(k: int, mask: int) -> float:
            key = (k, mask)
            if key not in cost_cache:
                cost_cache[key] = search.journey(vehicles[k], mask)[0]
            return cost_cache[key]

        def lowest(mask: int) -> int:
            return (mask & -mask).bit_length() if mask else search.k + 1

        def assign(k: int, remaining: int, prev_mask: int | None, acc: float, split: list[int]):
            nonlocal best_val, best_split
            if k == len(vehicles) - 1:
                search.tick()
                if prev_mask is not None and lowest(remaining) < lowest(prev_mask):
                    return
                val = max(acc, cost(k, remaining))
                if val == INF:
                    return
                if val < best_val - 1e-12 or (best_split is None and val <= best_val + 1e-12):
                    best_val, best_split = val, split + [remaining]
                return
            sub = remaining
            while True:
                search.tick()
                # vehicles sharing a start position are interchangeable; keep one ordering
                if prev_mask is None or lowest(sub) >= lowest(prev_mask):
                    c = cost(k, sub)
                    if c < best_val + 1e-12:
                        same_next = _same_start(inst, vehicles[k], vehicles[k + 1])
                        assign(k + 1, remaining & ~sub, sub if same_next else None, max(acc, c), split + [sub])
                if sub == 0:
                    break
                sub = (sub - 1) & remaining

        assign(0, search.full, None, 0.0, [])
    except BudgetExceeded:
        if incumbent is None:
            raise InfeasibleInstanceError("search budget exhausted before any feasible solution was found")
        return ExactResult(makespan(incumbent, inst), incumbent, search.nodes, False)

    if best_split is None:
        if incumbent is None:
            raise InfeasibleInstanceError("instance has no feasible solution")
        return ExactResult(makespan(incumbent, inst), incumbent, search.nodes, True)
    sol = Solution([search.build_journey(v, mask) for v, mask in zip(vehicles, best_split)])
    violations = validate(sol, inst)
    if violations:
        raise AssertionError(f"exact search built an infeasible solution: {violations}")
    return ExactResult(makespan(sol, inst), sol, search.nodes, True)
