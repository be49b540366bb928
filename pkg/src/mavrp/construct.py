"""Three-phase random construction: customer assignment, savings routing, trip assignment."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .instance import Instance
from .solution import Journey, Solution, Trip, journey_cost, load_feasible, trip_cost


class InfeasibleInstanceError(ValueError):
    """Raised when no feasible solution can exist (or be built) for an instance."""


@dataclass(frozen=True)
class ConstructionConfig:
    seed: int = 0
    noise: float = 1.0  # amplitude of the uniform noise added to savings values
    backhaul_rule: str = "balanced"  # "balanced" or "nearest"

    def __post_init__(self):
        if self.noise < 0:
            raise ValueError("noise amplitude must be >= 0")
        if self.backhaul_rule not in ("balanced", "nearest"):
            raise ValueError(f"unknown backhaul rule {self.backhaul_rule!r}")


def check_demands(inst: Instance) -> None:
    bad = inst.infeasible_customers()
    if bad:
        raise InfeasibleInstanceError(
            f"customers {bad} have demand magnitude above the capacity {inst.capacity}"
        )


def assign_customers(inst: Instance, rule: str = "balanced") -> dict[int, list[int]]:
    """Phase 1: group customers by the depot their trips will leave from.

    Linehauls go to their home depot. Backhauls are processed from the one
    closest to any depot outward; under the ``balanced`` rule each picks the
    nearest depot among those currently holding the fewest customers.
    """
    dist = inst.dist
    groups = {dep: [] for dep in inst.depot_ids}
    for c in inst.linehaul_ids:
        groups[inst.home[c]].append(c)
    nearest = inst.nearest_depot
    order = sorted(inst.backhaul_ids, key=lambda c: (dist[c][nearest[c]], c))
    for c in order:
        if rule == "nearest":
            groups[nearest[c]].append(c)
            continue
        fewest = min(len(g) for g in groups.values())
        candidates = [dep for dep, g in groups.items() if len(g) == fewest]
        dep = min(candidates, key=lambda x: (dist[c][x], x))
        groups[dep].append(c)
    return groups


def savings_trips(inst: Instance, depot: int, customers: list[int], rng: random.Random, noise: float) -> list[list[int]]:
    """Phase 2: sequential Clarke-Wright savings from a randomly chosen first customer.

    A trip grows at either end by the unrouted customer with the largest
    (noisy) saving ``d(depot, i) + d(depot, j) - d(i, j)`` whose addition
    keeps the load profile within capacity; when none fits a new trip starts.
    """
    dist = inst.dist
    dd = dist[depot]
    unrouted = sorted(customers)
    trips = []
    while unrouted:
        seed = unrouted.pop(rng.randrange(len(unrouted)))
        route = [seed]
        while unrouted:
            head, tail = route[0], route[-1]
            best = None
            for j in unrouted:
                jitter_tail = rng.uniform(0.0, noise) if noise else 0.0
                jitter_head = rng.uniform(0.0, noise) if noise else 0.0
                s_tail = dd[tail] + dd[j] - dist[tail][j] + jitter_tail
                s_head = dd[j] + dd[head] - dist[j][head] + jitter_head
                if (best is None or s_tail > best[0]) and load_feasible(inst, route + [j]):
                    best = (s_tail, j, True)
                if (best is None or s_head > best[0]) and load_feasible(inst, [j] + route):
                    best = (s_head, j, False)
            if best is None:
                break
            _, j, at_tail = best
            unrouted.remove(j)
            if at_tail:
                route.append(j)
            else:
                route.insert(0, j)
        trips.append(route)
    return trips


def assign_trips(inst: Instance, trips: list[tuple[int, list[int]]]) -> Solution:
    """Phase 3: hand trips, longest first, to the vehicle with the shortest journey so far."""
    dist = inst.dist
    journeys = [Journey(v) for v in inst.vehicle_ids]
    lengths = [0.0] * len(journeys)
    ordered = sorted(
        enumerate(trips),
        key=lambda it: (-trip_cost(dist, Trip(it[1][0], it[1][1], it[1][0])), it[0]),
    )
    for _, (depot, route) in ordered:
        order = sorted(range(len(journeys)), key=lambda k: (lengths[k], k))
        for k in order:
            journey = journeys[k]
            if len(journey.trips) - 1 < inst.t_max or not journey.trips:
                break
        else:
            raise InfeasibleInstanceError(f"t_max={inst.t_max} leaves no room for all construction trips")
        if not journey.trips:
            journey.trips.append(Trip(journey.vehicle, [], depot, returning=True))
        else:
            journey.trips[-1].end = depot
        journey.trips.append(Trip(depot, list(route), depot))
        lengths[k] = journey_cost(dist, journey)
    return Solution(journeys)


def construct(inst: Instance, cfg: ConstructionConfig | None = None) -> Solution:
    """Build a feasible solution made of closed trips."""
    cfg = cfg or ConstructionConfig()
    check_demands(inst)
    rng = random.Random(cfg.seed)
    groups = assign_customers(inst, cfg.backhaul_rule)
    trips = []
    for depot in inst.depot_ids:
        for route in savings_trips(inst, depot, groups[depot], rng, cfg.noise):
            trips.append((depot, route))
    return assign_trips(inst, trips)
