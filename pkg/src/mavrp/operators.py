"""Destroy and repair operators.

Repair operators share one insertion move set. For a customer ``c`` and a
journey they consider

* ``INSERT``   -- place ``c`` between two consecutive nodes of a trip,
* ``OPEN``     -- append a linehaul to the closed, all-linehaul last trip and
  turn that trip into an open one,
* ``NEW_TRIP`` -- a new single-customer trip right after trip ``t``; the
  previous trip is redirected to the new start depot and the new trip ends
  where the previous one used to (a new last trip ends open for linehauls,
  at the nearest depot for backhauls),
* ``NEW_JOURNEY`` -- the first customer of an idle vehicle,
* ``CLOSE``    -- place a backhaul inside the open last trip, which then
  ends at the depot nearest to its final customer.

Moves are ranked by a makespan-aware cost
``delta + makespan_weight * max(0, f_k + delta - F)`` where ``delta`` is the
journey length increase, ``f_k`` the journey length and ``F`` the current
makespan. For a fixed journey this cost grows with ``delta``, which lets the
engine keep only the few cheapest moves per (customer, journey) pair.
"""

from __future__ import annotations

import heapq
import math
import random

from .instance import U, Instance
from .solution import (
    Journey,
    PartialSolution,
    Solution,
    Trip,
    clone_and_remove,
    journey_cost,
    remove_from_journey,
)

INSERT = 0
OPEN = 1
NEW_TRIP = 2
NEW_JOURNEY = 3
CLOSE = 4

MAKESPAN_WEIGHT = 100.0


class RepairError(RuntimeError):
    """No feasible insertion exists for a banked customer."""


# -- insertion engine ----------------------------------------------------------


class _TripView:
    __slots__ = ("path", "prefix_max", "suffix_max", "start", "end", "all_linehaul")

    def __init__(self, inst: Instance, trip: Trip):
        q = inst.demand
        custs = trip.customers
        self.path = [trip.start, *custs, trip.end]
        load = sum(q[c] for c in custs if q[c] > 0)
        loads = [load]
        for c in custs:
            load -= q[c]
            loads.append(load)
        pm = loads[:]
        for i in range(1, len(pm)):
            if pm[i - 1] > pm[i]:
                pm[i] = pm[i - 1]
        sm = loads[:]
        for i in range(len(sm) - 2, -1, -1):
            if sm[i + 1] > sm[i]:
                sm[i] = sm[i + 1]
        self.prefix_max = pm
        self.suffix_max = sm
        self.start = trip.start
        self.end = trip.end
        self.all_linehaul = all(q[c] > 0 for c in custs)


def journey_moves(inst: Instance, journey: Journey, views: list[_TripView], c: int) -> list[tuple]:
    """All feasible insertion moves of ``c`` into ``journey`` as ``(delta, kind, t, p, s)``."""
    dist = inst.dist
    q = inst.demand[c]
    cap = inst.capacity
    dc = dist[c]
    out = []
    ntrips = len(views)
    if ntrips == 0:
        v = journey.vehicle
        if q > 0:
            h = inst.home[c]
            out.append((dist[v][h] + dist[h][c], NEW_JOURNEY, 0, 0, h))
        else:
            out.append((dist[v][c] + dc[inst.nearest_depot[c]], NEW_JOURNEY, 0, 0, 0))
        return out

    can_add_trip = ntrips - 1 < inst.t_max
    if q > 0:
        h = inst.home[c]
        room = cap - q
        for t, tv in enumerate(views):
            path = tv.path
            last_idx = len(path) - 2
            if t > 0 and tv.start == h:
                pm = tv.prefix_max
                for p in range(last_idx + 1):
                    if pm[p] > room:
                        break
                    a, b = path[p], path[p + 1]
                    out.append((dist[a][c] + dc[b] - dist[a][b], INSERT, t, p, 0))
                if t == ntrips - 1 and tv.end != U and tv.all_linehaul and pm[last_idx] <= room:
                    a = path[last_idx]
                    out.append((dist[a][c] - dist[a][tv.end], OPEN, t, 0, 0))
            if can_add_trip:
                a = path[last_idx]
                base = dist[a][tv.end]
                if t < ntrips - 1:
                    out.append((dist[a][h] - base + dist[h][c] + dc[tv.end], NEW_TRIP, t, 0, h))
                else:
                    out.append((dist[a][h] - base + dist[h][c], NEW_TRIP, t, 0, h))
    else:
        room = cap + q  # q <= 0
        depots = inst.depot_ids
        nd = inst.nearest_depot[c]
        for t, tv in enumerate(views):
            path = tv.path
            last_idx = len(path) - 2
            sm = tv.suffix_max
            if tv.end != U:
                for p in range(last_idx + 1):
                    if sm[p] <= room:
                        a, b = path[p], path[p + 1]
                        out.append((dist[a][c] + dc[b] - dist[a][b], INSERT, t, p, 0))
            else:
                last = path[last_idx]
                e = inst.nearest_depot[last]
                close = dist[last][e]
                for p in range(last_idx):
                    if sm[p] <= room:
                        a, b = path[p], path[p + 1]
                        out.append((dist[a][c] + dc[b] - dist[a][b] + close, CLOSE, t, p, e))
                if sm[last_idx] <= room:
                    out.append((dist[last][c] + dc[nd], CLOSE, t, last_idx, nd))
            if can_add_trip:
                a = path[last_idx]
                da = dist[a]
                base = da[tv.end]
                tail = dc[tv.end] if t < ntrips - 1 else dc[nd]
                for s in depots:
                    out.append((da[s] - base + dist[s][c] + tail, NEW_TRIP, t, 0, s))
    return out


def apply_move(inst: Instance, journey: Journey, c: int, move: tuple) -> None:
    _, kind, t, p, s = move
    trips = journey.trips
    if kind == INSERT:
        trips[t].customers.insert(p, c)
    elif kind == OPEN:
        trips[t].customers.append(c)
        trips[t].end = U
    elif kind == CLOSE:
        trips[t].customers.insert(p, c)
        trips[t].end = s
    elif kind == NEW_TRIP:
        prev = trips[t]
        if t < len(trips) - 1:
            new_end = prev.end
        else:
            new_end = U if inst.demand[c] > 0 else inst.nearest_depot[c]
        prev.end = s
        trips.insert(t + 1, Trip(s, [c], new_end))
    else:
        v = journey.vehicle
        if inst.demand[c] > 0:
            trips[:] = [Trip(v, [], s, returning=True), Trip(s, [c], U)]
        else:
            trips[:] = [Trip(v, [c], inst.nearest_depot[c], returning=True)]


def move_cost(delta: float, f_k: float, span: float, weight: float = MAKESPAN_WEIGHT) -> float:
    excess = f_k + delta - span
    return delta + weight * excess if excess > 0.0 else delta


class InsertionEngine:
    """Caches per-journey trip tables and per-(customer, journey) move lists."""

    def __init__(self, inst: Instance, sol: Solution, keep: int, weight: float = MAKESPAN_WEIGHT):
        self.inst = inst
        self.sol = sol
        self.keep = keep
        self.weight = weight
        self.views = [None] * len(sol.journeys)
        self.lengths = [journey_cost(inst.dist, j) for j in sol.journeys]
        self.cache: dict[tuple[int, int], list[tuple]] = {}

    @property
    def span(self) -> float:
        return max(self.lengths, default=0.0)

    def _view(self, j: int) -> list[_TripView]:
        views = self.views[j]
        if views is None:
            views = [_TripView(self.inst, t) for t in self.sol.journeys[j].trips]
            self.views[j] = views
        return views

    def moves(self, c: int, j: int) -> list[tuple]:
        key = (c, j)
        found = self.cache.get(key)
        if found is None:
            found = journey_moves(self.inst, self.sol.journeys[j], self._view(j), c)
            if self.keep and len(found) > self.keep:
                found = heapq.nsmallest(self.keep, found)
            else:
                found.sort()
            self.cache[key] = found
        return found

    def ranked(self, c: int, limit: int) -> list[tuple[float, int, tuple]]:
        """The ``limit`` cheapest moves of ``c`` over all journeys as (cost, journey, move)."""
        span = self.span
        out = []
        for j in range(len(self.sol.journeys)):
            f_k = self.lengths[j]
            for mv in self.moves(c, j)[:limit]:
                out.append((move_cost(mv[0], f_k, span, self.weight), j, mv))
        out.sort(key=lambda x: (x[0], x[1], x[2]))
        return out[:limit]

    def insert(self, c: int, j: int, move: tuple) -> None:
        journey = self.sol.journeys[j]
        apply_move(self.inst, journey, c, move)
        self.lengths[j] = journey_cost(self.inst.dist, journey)
        self.views[j] = None
        for key in [k for k in self.cache if k[1] == j]:
            del self.cache[key]


def insert_customer(inst: Instance, sol: Solution, c: int, j: int, move: tuple) -> None:
    """Apply one insertion move in place (used by tests and crossover)."""
    apply_move(inst, sol.journeys[j], c, move)


def all_moves(inst: Instance, sol: Solution, c: int) -> list[tuple[int, tuple]]:
    """Every feasible insertion of ``c`` as ``(journey index, move)``."""
    out = []
    for j, journey in enumerate(sol.journeys):
        views = [_TripView(inst, t) for t in journey.trips]
        out.extend((j, mv) for mv in journey_moves(inst, journey, views, c))
    return out


# -- post-repair depot re-optimisation -------------------------------------------


def reoptimize_depots(inst: Instance, journey: Journey) -> None:
    """Re-choose the free depot at every trip junction to minimise journey length.

    A junction is the end of trip ``t`` and the start of trip ``t + 1``. It is
    pinned to the home depot when trip ``t + 1`` serves a linehaul and free
    otherwise; the end of a closed last trip is always free. The choice is a
    shortest path over the layered depot graph.
    """
    trips = journey.trips
    if not trips:
        return
    dist = inst.dist
    depots = list(inst.depot_ids)
    home = inst.home
    q = inst.demand

    def allowed(trip: Trip, current: int) -> list[int]:
        for c in trip.customers:
            if q[c] > 0:
                return [home[c]]
        return [current] + [x for x in depots if x != current]

    # cost of trip t from start s to end e, split into in/out legs
    def legs(trip: Trip):
        custs = trip.customers
        if not custs:
            return None, None, 0.0
        inner = 0.0
        for x, y in zip(custs, custs[1:]):
            inner += dist[x][y]
        return custs[0], custs[-1], inner

    info = [legs(t) for t in trips]

    def cost(t: int, s: int, e: int) -> float:
        first, last, inner = info[t]
        if first is None:
            return dist[s][e]
        return dist[s][first] + inner + dist[last][e]

    ntrips = len(trips)
    # layer[t] maps the start node of trip t to (best cost, back pointer)
    layers: list[dict[int, tuple[float, int]]] = [{trips[0].start: (0.0, -1)}]
    for t in range(ntrips - 1):
        nxt: dict[int, tuple[float, int]] = {}
        for e in allowed(trips[t + 1], trips[t].end):
            best = None
            for s, (acc, _) in layers[t].items():
                val = acc + cost(t, s, e)
                if best is None or val < best[0] - 1e-12:
                    best = (val, s)
            nxt[e] = best
        layers.append(nxt)
    last = trips[-1]
    ends = [U] if last.end == U else [last.end] + [x for x in depots if x != last.end]
    best_total = None
    for s, (acc, _) in layers[-1].items():
        for e in ends:
            val = acc + cost(ntrips - 1, s, e)
            if best_total is None or val < best_total[0] - 1e-12:
                best_total = (val, s, e)
    _, s, e = best_total
    last.end = e
    for t in range(ntrips - 1, 0, -1):
        trips[t].start = s
        trips[t - 1].end = s
        s = layers[t][s][1]


def _finish(inst: Instance, sol: Solution, touched: set[int]) -> Solution:
    for j in sorted(touched):
        reoptimize_depots(inst, sol.journeys[j])
    return sol


# -- repair ---------------------------------------------------------------------


def repair_greedy(partial: PartialSolution, inst: Instance, rng: random.Random | None = None) -> Solution:
    """Repeatedly perform the globally cheapest feasible insertion."""
    if not partial.bank:
        return partial.solution
    sol = partial.solution.copy()
    engine = InsertionEngine(inst, sol, keep=1)
    bank = list(partial.bank)
    touched = set()
    while bank:
        best = None
        for idx, c in enumerate(bank):
            ranked = engine.ranked(c, 1)
            if not ranked:
                raise RepairError(f"customer {c} has no feasible insertion")
            cost, j, mv = ranked[0]
            if best is None or cost < best[0]:
                best = (cost, idx, j, mv)
        _, idx, j, mv = best
        engine.insert(bank.pop(idx), j, mv)
        touched.add(j)
    return _finish(inst, sol, touched)


def repair_regret(partial: PartialSolution, inst: Instance, k: int = 2, rng: random.Random | None = None) -> Solution:
    """Insert the customer with the largest gap between its best and k-th best moves first."""
    if k < 2:
        raise ValueError("regret degree must be at least 2")
    if not partial.bank:
        return partial.solution
    sol = partial.solution.copy()
    engine = InsertionEngine(inst, sol, keep=k)
    bank = list(partial.bank)
    touched = set()
    while bank:
        pick = None
        for idx, c in enumerate(bank):
            ranked = engine.ranked(c, k)
            if not ranked:
                raise RepairError(f"customer {c} has no feasible insertion")
            regret = ranked[k - 1][0] - ranked[0][0] if len(ranked) >= k else math.inf
            key = (-regret, ranked[0][0])
            if pick is None or key < pick[0]:
                pick = (key, idx, ranked[0][1], ranked[0][2])
        _, idx, j, mv = pick
        engine.insert(bank.pop(idx), j, mv)
        touched.add(j)
    return _finish(inst, sol, touched)


def repair_random(partial: PartialSolution, inst: Instance, rng: random.Random) -> Solution:
    """Insert customers in random order, each at a uniformly drawn feasible move."""
    if not partial.bank:
        return partial.solution
    sol = partial.solution.copy()
    bank = list(partial.bank)
    rng.shuffle(bank)
    touched = set()
    for c in bank:
        moves = all_moves(inst, sol, c)
        if not moves:
            raise RepairError(f"customer {c} has no feasible insertion")
        j, mv = moves[rng.randrange(len(moves))]
        apply_move(inst, sol.journeys[j], c, mv)
        touched.add(j)
    return _finish(inst, sol, touched)


def open_last_trips(inst: Instance, sol: Solution) -> Solution:
    """Turn every closed, all-linehaul last trip into an open trip."""
    q = inst.demand
    for journey in sol.journeys:
        trips = journey.trips
        if len(trips) > 1:
            last = trips[-1]
            if last.end != U and last.customers and all(q[c] > 0 for c in last.customers):
                last.end = U
    return sol


def repair_greedy_open(partial: PartialSolution, inst: Instance, rng: random.Random | None = None) -> Solution:
    """Greedy repair followed by opening every eligible last trip."""
    if not partial.bank:
        return partial.solution
    return open_last_trips(inst, repair_greedy(partial, inst, rng))


# -- destroy --------------------------------------------------------------------


def removal_gains(inst: Instance, journey: Journey) -> list[tuple[float, int]]:
    """Journey length saved by removing each customer alone, as (gain, customer)."""
    dist = inst.dist
    trips = journey.trips
    ntrips = len(trips)
    out = []
    total = None
    for t, trip in enumerate(trips):
        custs = trip.customers
        k = len(custs)
        if k > 1:
            path = [trip.start, *custs, trip.end]
            for p in range(1, k + 1):
                a, c, b = path[p - 1], path[p], path[p + 1]
                out.append((dist[a][c] + dist[c][b] - dist[a][b], c))
        elif k == 1:
            c = custs[0]
            s, e = trip.start, trip.end
            if t == 0:
                if ntrips == 1:
                    gain = dist[s][c] + dist[c][e]
                else:
                    gain = dist[s][c] + dist[c][e] - dist[s][e]
            else:
                prev = trips[t - 1]
                before = prev.customers[-1] if prev.customers else prev.start
                if t < ntrips - 1:
                    gain = dist[before][s] + dist[s][c] + dist[c][e] - dist[before][e]
                elif ntrips == 2 and not prev.customers:
                    if total is None:
                        total = journey_cost(dist, journey)
                    gain = total
                else:
                    gain = dist[s][c] + dist[c][e]
            out.append((gain, c))
    return out


def _check_degree(inst: Instance, degree: int, served: int) -> None:
    if not 1 <= degree <= inst.num_customers or degree > served:
        raise ValueError(f"destroy degree {degree} outside [1, {min(inst.num_customers, served)}]")


def _rank_pick(rng: random.Random, size: int, p_rand: float) -> int:
    if math.isinf(p_rand):
        return 0
    return int(rng.random() ** p_rand * size)


def destroy_worst(sol: Solution, inst: Instance, degree: int, p_rand: float, rng: random.Random) -> PartialSolution:
    """Iteratively remove high-saving customers; ``p_rand`` sharpens the preference for the top one."""
    served = len(sol.customers())
    _check_degree(inst, degree, served)
    work = sol.copy()
    where = {c: j for j, journey in enumerate(work.journeys) for c in journey.customers()}
    gains = {j: removal_gains(inst, journey) for j, journey in enumerate(work.journeys)}
    removed = []
    while len(removed) < degree:
        pool = sorted(
            ((g, c) for lst in gains.values() for g, c in lst),
            key=lambda x: (-x[0], x[1]),
        )
        _, c = pool[_rank_pick(rng, len(pool), p_rand)]
        j = where.pop(c)
        remove_from_journey(work.journeys[j], c)
        gains[j] = removal_gains(inst, work.journeys[j])
        removed.append(c)
    return PartialSolution(work, removed)


def _assigned_depots(sol: Solution) -> dict[int, int]:
    out = {}
    for journey in sol.journeys:
        for t, trip in enumerate(journey.trips):
            depot = trip.end if t == 0 else trip.start
            for c in trip.customers:
                out[c] = depot
    return out


def destroy_related(sol: Solution, inst: Instance, degree: int, rng: random.Random) -> PartialSolution:
    """Remove a random seed customer and the ``degree - 1`` customers most related to it.

    Relatedness is distance to the seed normalised by the largest such
    distance, plus one when the two customers hang off different depots.
    """
    customers = sorted(sol.customers())
    _check_degree(inst, degree, len(customers))
    seed = customers[rng.randrange(len(customers))]
    depot_of = _assigned_depots(sol)
    row = inst.dist[seed]
    others = [c for c in customers if c != seed]
    scale = max((row[c] for c in others), default=0.0) or 1.0
    score = sorted(
        (row[c] / scale + (depot_of[c] != depot_of[seed]), c) for c in others
    )
    picked = [seed] + [c for _, c in score[: degree - 1]]
    return clone_and_remove(sol, picked)


def positional_costs(inst: Instance, sol: Solution) -> dict[int, float]:
    return {c: g for journey in sol.journeys for g, c in removal_gains(inst, journey)}


def update_history(history: dict[int, float], inst: Instance, sol: Solution) -> None:
    """Record each customer's lowest positional cost seen in a best solution."""
    for c, g in positional_costs(inst, sol).items():
        old = history.get(c)
        if old is None or g < old:
            history[c] = g


def destroy_history(
    sol: Solution,
    inst: Instance,
    degree: int,
    history: dict[int, float],
    rng: random.Random,
    p_rand: float = 3.0,
) -> PartialSolution:
    """Remove customers whose current positional cost most exceeds their historical best."""
    current = positional_costs(inst, sol)
    _check_degree(inst, degree, len(current))
    pool = sorted(
        ((g - history.get(c, g), c) for c, g in current.items()),
        key=lambda x: (-x[0], x[1]),
    )
    picked = []
    while len(picked) < degree:
        _, c = pool.pop(_rank_pick(rng, len(pool), p_rand))
        picked.append(c)
    return clone_and_remove(sol, picked)


def destroy_string(sol: Solution, inst: Instance, degree: int, rng: random.Random) -> PartialSolution:
    """Remove ``degree`` consecutive customers in journey order from a uniform start.

    The run follows trip and journey boundaries, so it may swallow whole
    trips and wraps from the last vehicle to the first.
    """
    order = sol.customers()
    _check_degree(inst, degree, len(order))
    start = rng.randrange(len(order))
    picked = [order[(start + i) % len(order)] for i in range(degree)]
    return clone_and_remove(sol, picked)


def destroy_trip(sol: Solution, inst: Instance, degree: int, rng: random.Random) -> PartialSolution:
    """Remove whole random trips until at least ``degree`` customers are banked."""
    served = len(sol.customers())
    _check_degree(inst, degree, served)
    trips = [t for journey in sol.journeys for t in journey.trips if t.customers]
    rng.shuffle(trips)
    picked: list[int] = []
    for trip in trips:
        if len(picked) >= degree:
            break
        picked.extend(trip.customers)
    return clone_and_remove(sol, picked)


DESTROY_NAMES = ("worst", "related", "history", "string", "trip")
REPAIR_NAMES = ("greedy", "regret2", "regret3", "random", "greedy_open")


def run_destroy(name, sol, inst, degree, params, history, rng):
    if name == "worst":
        return destroy_worst(sol, inst, degree, params.get("p_rand", 3.0), rng)
    if name == "related":
        return destroy_related(sol, inst, degree, rng)
    if name == "history":
        return destroy_history(sol, inst, degree, history, rng, params.get("p_rand", 3.0))
    if name == "string":
        return destroy_string(sol, inst, degree, rng)
    if name == "trip":
        return destroy_trip(sol, inst, degree, rng)
    raise KeyError(f"unknown destroy operator {name!r}")


def run_repair(name, partial, inst, params, rng):
    if name == "greedy":
        return repair_greedy(partial, inst, rng)
    if name == "regret2":
        return repair_regret(partial, inst, int(params.get("k", 2)), rng)
    if name == "regret3":
        return repair_regret(partial, inst, int(params.get("k", 3)), rng)
    if name == "random":
        return repair_random(partial, inst, rng)
    if name == "greedy_open":
        return repair_greedy_open(partial, inst, rng)
    raise KeyError(f"unknown repair operator {name!r}")
