"""Brute-force reference implementations used only by the tests.

Nothing here shares code paths with the solvers beyond ``validate`` and
``journey_cost``: feasibility is decided by the validator on explicitly
built solutions and costs are summed from scratch.
"""

from __future__ import annotations

import itertools

from mavrp.instance import U, Instance
from mavrp.solution import Journey, Solution, Trip, journey_cost, validate, COVERAGE


def _ordered_subsets(items):
    items = list(items)
    for r in range(1, len(items) + 1):
        for combo in itertools.combinations(items, r):
            yield from itertools.permutations(combo)


def enumerate_journeys(inst: Instance, vehicle: int, customers: frozenset):
    """Yield every journey (as a trip list) serving exactly ``customers``.

    Trips without customers other than the return trip are skipped; the
    return trip may be empty.
    """
    if not customers:
        yield []
        return
    depots = list(inst.depot_ids)
    backs = [c for c in customers if inst.is_backhaul(c)]

    def tails(remaining, start, used):
        if not remaining:
            yield []
            return
        if used >= inst.t_max:
            return
        for seq in _ordered_subsets(sorted(remaining)):
            rest = remaining - set(seq)
            ends = depots + ([U] if not rest else [])
            for e in ends:
                trip = Trip(start, list(seq), e)
                if rest:
                    for more in tails(rest, e, used + 1):
                        yield [trip, *more]
                else:
                    yield [trip]

    return_options = [()] + list(_ordered_subsets(sorted(backs)))
    for seq in return_options:
        rest = customers - set(seq)
        for e in depots:
            head = Trip(vehicle, list(seq), e, returning=True)
            for more in tails(rest, e, 0):
                yield [head, *more]


def _journey_ok(inst: Instance, journey: Journey) -> bool:
    sol = Solution([journey if v == journey.vehicle else Journey(v) for v in inst.vehicle_ids])
    return all(v.code == COVERAGE for v in validate(sol, inst))


def best_journey_costs(inst: Instance, vehicle: int, customers: frozenset) -> float:
    best = float("inf")
    for trips in enumerate_journeys(inst, vehicle, customers):
        journey = Journey(vehicle, trips)
        cost = journey_cost(inst.dist, journey)
        if cost < best and _journey_ok(inst, journey):
            best = cost
    return best


def brute_force_optimum(inst: Instance) -> float:
    """Optimal makespan by enumerating every customer-to-vehicle split and journey."""
    customers = list(inst.customer_ids)
    vehicles = list(inst.vehicle_ids)
    memo = {}

    def cost(v, s):
        key = (v, s)
        if key not in memo:
            memo[key] = best_journey_costs(inst, v, s)
        return memo[key]

    best = float("inf")
    for labels in itertools.product(range(len(vehicles)), repeat=len(customers)):
        parts = [frozenset(c for c, lab in zip(customers, labels) if lab == k) for k in range(len(vehicles))]
        val = max(cost(v, p) for v, p in zip(vehicles, parts))
        best = min(best, val)
    return best


def brute_force_moves(inst: Instance, sol: Solution, c: int) -> list[tuple[int, float, Solution]]:
    """Every insertion of ``c`` from the documented move set, built explicitly.

    Returns ``(journey index, journey length increase, new solution)`` for
    each candidate that the validator accepts once ``c`` is placed.
    """
    out = []
    lh = inst.is_linehaul(c)
    depots = list(inst.depot_ids)
    for j, journey in enumerate(sol.journeys):
        base = journey_cost(inst.dist, journey)
        trials = []
        if not journey.trips:
            if lh:
                h = inst.home[c]
                trials.append([Trip(journey.vehicle, [], h, returning=True), Trip(h, [c], U)])
            else:
                trials.append([Trip(journey.vehicle, [c], inst.nearest_depot[c], returning=True)])
        else:
            trips = journey.trips
            for t, trip in enumerate(trips):
                for p in range(len(trip.customers) + 1):
                    new = [x.copy() for x in trips]
                    new[t].customers.insert(p, c)
                    trials.append(new)
                last = t == len(trips) - 1
                if not lh and trip.end == U:
                    for p in range(len(trip.customers) + 1):
                        new = [x.copy() for x in trips]
                        new[t].customers.insert(p, c)
                        tail = new[t].customers[-1]
                        new[t].end = inst.nearest_depot[tail]
                        trials.append(new)
                if lh and last and trip.end != U:
                    new = [x.copy() for x in trips]
                    new[t].customers.append(c)
                    new[t].end = U
                    trials.append(new)
                starts = [inst.home[c]] if lh else depots
                for s in starts:
                    new = [x.copy() for x in trips]
                    if last:
                        end = U if lh else inst.nearest_depot[c]
                    else:
                        end = new[t].end
                    new[t].end = s
                    new.insert(t + 1, Trip(s, [c], end))
                    trials.append(new)
        for trips in trials:
            cand = sol.copy()
            cand.journeys[j] = Journey(journey.vehicle, trips)
            # every customer except the still-banked ones must be placed once
            if all(v.code == COVERAGE and "not served" in v.message for v in validate(cand, inst)):
                delta = journey_cost(inst.dist, cand.journeys[j]) - base
                out.append((j, delta, cand))
    return out


def explicit_gain(inst: Instance, journey: Journey, c: int) -> float:
    """Journey length saved by removing ``c``, measured on an actual removal."""
    from mavrp.solution import remove_from_journey

    after = journey.copy()
    remove_from_journey(after, c)
    return journey_cost(inst.dist, journey) - journey_cost(inst.dist, after)


def best_junction_cost(inst: Instance, journey: Journey) -> float:
    """Cheapest length over every legal choice of junction depots (exhaustive)."""
    trips = journey.trips
    depots = list(inst.depot_ids)
    options = []
    for t in range(len(trips)):
        if t == len(trips) - 1:
            options.append([U] if trips[t].end == U else depots)
        else:
            options.append(depots)
    best = float("inf")
    for ends in itertools.product(*options):
        cand = journey.copy()
        for t, e in enumerate(ends):
            cand.trips[t].end = e
            if t + 1 < len(cand.trips):
                cand.trips[t + 1].start = e
        sol = Solution([cand if v == journey.vehicle else Journey(v) for v in inst.vehicle_ids])
        if all(v.code == COVERAGE for v in validate(sol, inst)):
            best = min(best, journey_cost(inst.dist, cand))
    return best
