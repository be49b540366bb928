"""Journey/trip solutions, makespan evaluation and the feasibility validator.

A solution holds one :class:`Journey` per vehicle. A journey is an ordered
list of trips; trip 0 is the vehicle's return trip (initial position to a
depot, picking up backhauls only), later trips leave from depots. Trip kinds
are implied by the endpoints:

* return -- starts at the vehicle node,
* open   -- ends at the dummy terminal ``u`` (node 0),
* closed -- anything else (start and end are depots).

An idle vehicle has an empty trip list. Customer-free trips other than the
return trip are never stored by the solvers; the validator still accepts
them as padding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .instance import U, Instance

RETURN = "return"
CLOSED = "closed"
OPEN = "open"

_TAGS = {RETURN: "R", CLOSED: "C", OPEN: "O"}
_KINDS = {v: k for k, v in _TAGS.items()}

SOLUTION_HEADER = "# mavrp-solution v1"


class SolutionError(ValueError):
    """Raised for malformed solutions (unknown node ids, bad files)."""


@dataclass(slots=True)
class Trip:
    start: int
    customers: list[int]
    end: int
    returning: bool = False  # trip 0 of a journey

    @property
    def kind(self) -> str:
        if self.returning:
            return RETURN
        return OPEN if self.end == U else CLOSED

    @property
    def is_padding(self) -> bool:
        return not self.returning and not self.customers and self.start == self.end

    def copy(self) -> Trip:
        return Trip(self.start, list(self.customers), self.end, self.returning)

    def nodes(self) -> list[int]:
        return [self.start, *self.customers, self.end]


@dataclass(slots=True)
class Journey:
    vehicle: int
    trips: list[Trip] = field(default_factory=list)

    def copy(self) -> Journey:
        return Journey(self.vehicle, [t.copy() for t in self.trips])

    def customers(self) -> list[int]:
        return [c for t in self.trips for c in t.customers]


@dataclass(slots=True)
class Solution:
    journeys: list[Journey]

    def copy(self) -> Solution:
        return Solution([j.copy() for j in self.journeys])

    def customers(self) -> list[int]:
        return [c for j in self.journeys for c in j.customers()]

    def locate(self) -> dict[int, tuple[int, int, int]]:
        """Map every served customer to (journey, trip, position)."""
        where = {}
        for jdx, journey in enumerate(self.journeys):
            for tdx, trip in enumerate(journey.trips):
                for pos, c in enumerate(trip.customers):
                    where[c] = (jdx, tdx, pos)
        return where


def empty_solution(inst: Instance) -> Solution:
    return Solution([Journey(v) for v in inst.vehicle_ids])


@dataclass
class PartialSolution:
    """A solution with some customers removed and parked in ``bank``."""

    solution: Solution
    bank: list[int]


def trip_cost(dist: list[list[float]], trip: Trip) -> float:
    prev = trip.start
    total = 0.0
    for c in trip.customers:
        total += dist[prev][c]
        prev = c
    return total + dist[prev][trip.end]


def journey_cost(dist: list[list[float]], journey: Journey) -> float:
    total = 0.0
    for trip in journey.trips:
        prev = trip.start
        for c in trip.customers:
            total += dist[prev][c]
            prev = c
        total += dist[prev][trip.end]
    return total


def makespan(sol: Solution, inst: Instance) -> float:
    """Longest journey travel time over all vehicles (0 for an all-idle fleet)."""
    n = inst.num_nodes
    for journey in sol.journeys:
        for trip in journey.trips:
            for node in (trip.start, trip.end, *trip.customers):
                if not 0 <= node <= n:
                    raise SolutionError(f"unknown node id {node}")
    dist = inst.dist
    return max((journey_cost(dist, j) for j in sol.journeys), default=0.0)


def trip_loads(inst: Instance, customers: Iterable[int]) -> list[int]:
    """Vehicle load on departure and after each visit.

    The trip leaves with every linehaul delivery on board; deliveries lower
    the load and pickups raise it.
    """
    customers = list(customers)
    q = inst.demand
    load = sum(q[c] for c in customers if q[c] > 0)
    loads = [load]
    for c in customers:
        load -= q[c]
        loads.append(load)
    return loads


def load_feasible(inst: Instance, customers: Iterable[int]) -> bool:
    cap = inst.capacity
    return all(0 <= x <= cap for x in trip_loads(inst, customers))


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self):
        return f"[{self.code}] {self.message}"


# Check order and codes used by validate().
COVERAGE = "a:coverage"
STRUCTURE = "b:structure"
HOME_DEPOT = "c:home-depot"
BACKHAUL_RETURN = "d:backhaul-return"
CAPACITY = "e:capacity"
TRIP_COUNT = "f:trip-count"
SELF_LOOP = "g:self-loop"


def validate(sol: Solution, inst: Instance) -> list[Violation]:
    """Return every feasibility violation of ``sol``; an empty list means feasible."""
    out: list[Violation] = []
    n_nodes = inst.num_nodes

    def known(node):
        return isinstance(node, int) and 0 <= node <= n_nodes

    # (a) coverage
    counts: dict[int, int] = {}
    for journey in sol.journeys:
        for trip in journey.trips:
            for c in trip.customers:
                counts[c] = counts.get(c, 0) + 1
    for c in inst.customer_ids:
        k = counts.get(c, 0)
        if k == 0:
            out.append(Violation(COVERAGE, f"customer {c} is not served"))
        elif k > 1:
            out.append(Violation(COVERAGE, f"customer {c} is served {k} times"))
    for c in sorted(counts):
        if not inst.is_customer(c):
            out.append(Violation(COVERAGE, f"node {c} appears as a customer but is not one"))

    # (b) journey / trip structure and chaining
    vehicles = [j.vehicle for j in sol.journeys]
    if sorted(vehicles) != list(inst.vehicle_ids):
        out.append(Violation(STRUCTURE, f"journeys must cover each vehicle once, got {vehicles}"))
    for journey in sol.journeys:
        v = journey.vehicle
        trips = journey.trips
        for tdx, trip in enumerate(trips):
            where = f"vehicle {v} trip {tdx}"
            if not (known(trip.start) and known(trip.end)):
                out.append(Violation(STRUCTURE, f"{where}: unknown endpoint {trip.start}->{trip.end}"))
                continue
            if tdx == 0:
                if not trip.returning or trip.start != v:
                    out.append(Violation(STRUCTURE, f"{where}: first trip must be the return trip from {v}"))
                if not inst.is_depot(trip.end):
                    out.append(Violation(STRUCTURE, f"{where}: return trip must end at a depot"))
                for c in trip.customers:
                    if inst.is_linehaul(c):
                        out.append(Violation(STRUCTURE, f"{where}: linehaul {c} served before visiting a depot"))
            else:
                if trip.returning or not inst.is_depot(trip.start):
                    out.append(Violation(STRUCTURE, f"{where}: trip must start at a depot"))
                if trip.end == U:
                    if tdx != len(trips) - 1:
                        out.append(Violation(STRUCTURE, f"{where}: open trip must be the last trip"))
                    if not trip.customers:
                        out.append(Violation(STRUCTURE, f"{where}: open trip without customers"))
                elif not inst.is_depot(trip.end):
                    out.append(Violation(STRUCTURE, f"{where}: closed trip must end at a depot"))
                if tdx > 0 and trips[tdx - 1].end != trip.start:
                    out.append(
                        Violation(
                            STRUCTURE,
                            f"{where}: starts at {trip.start} but previous trip ends at {trips[tdx - 1].end}",
                        )
                    )

    # (c) linehauls leave from their home depot
    home = inst.home
    for journey in sol.journeys:
        for tdx, trip in enumerate(journey.trips):
            if tdx == 0:
                continue
            for c in trip.customers:
                if inst.is_linehaul(c) and home[c] != trip.start:
                    out.append(
                        Violation(
                            HOME_DEPOT,
                            f"vehicle {journey.vehicle} trip {tdx}: linehaul {c} belongs to depot "
                            f"{home[c]} but the trip starts at {trip.start}",
                        )
                    )

    # (d) a trip with a backhaul must end at a depot
    for journey in sol.journeys:
        for tdx, trip in enumerate(journey.trips):
            if trip.end == U and any(inst.is_backhaul(c) for c in trip.customers):
                out.append(
                    Violation(
                        BACKHAUL_RETURN,
                        f"vehicle {journey.vehicle} trip {tdx}: backhaul served on an open trip",
                    )
                )

    # (e) load profile
    cap = inst.capacity
    for journey in sol.journeys:
        for tdx, trip in enumerate(journey.trips):
            custs = [c for c in trip.customers if inst.is_customer(c)]
            loads = trip_loads(inst, custs)
            if tdx == 0 and loads[0] != 0:
                out.append(Violation(CAPACITY, f"vehicle {journey.vehicle}: return trip must leave empty"))
            worst = max(loads)
            if worst > cap or min(loads) < 0:
                out.append(
                    Violation(
                        CAPACITY,
                        f"vehicle {journey.vehicle} trip {tdx}: load profile {loads} leaves [0, {cap}]",
                    )
                )

    # (f) trip count
    for journey in sol.journeys:
        used = sum(1 for tdx, t in enumerate(journey.trips) if tdx > 0 and not t.is_padding)
        if used > inst.t_max:
            out.append(
                Violation(TRIP_COUNT, f"vehicle {journey.vehicle}: {used} trips exceed t_max={inst.t_max}")
            )

    # (g) self loops on customer / vehicle nodes
    for journey in sol.journeys:
        for tdx, trip in enumerate(journey.trips):
            path = trip.nodes()
            for x, y in zip(path, path[1:]):
                if x == y and (inst.is_customer(x) or inst.is_vehicle(x)):
                    out.append(Violation(SELF_LOOP, f"vehicle {journey.vehicle} trip {tdx}: self loop at {x}"))
    return out


def is_feasible(sol: Solution, inst: Instance) -> bool:
    return not validate(sol, inst)


def remove_from_journey(journey: Journey, customer: int) -> None:
    """Excise one customer in place and re-stitch the trip chain."""
    for tdx, trip in enumerate(journey.trips):
        if customer in trip.customers:
            trip.customers.remove(customer)
            if not trip.customers:
                _collapse(journey, tdx)
            return
    raise SolutionError(f"customer {customer} is not in the journey of vehicle {journey.vehicle}")


def _collapse(journey: Journey, tdx: int) -> None:
    trips = journey.trips
    if tdx > 0:
        emptied = trips.pop(tdx)
        if tdx < len(trips):
            trips[tdx - 1].end = emptied.end
    if len(trips) == 1 and not trips[0].customers:
        trips.clear()


def clone_and_remove(sol: Solution, customers: Iterable[int]) -> PartialSolution:
    """Copy ``sol`` without ``customers``; the removed ids go to the bank in the given order."""
    bank = list(dict.fromkeys(customers))
    out = sol.copy()
    where = out.locate()
    by_journey: dict[int, set[int]] = {}
    for c in bank:
        if c not in where:
            raise SolutionError(f"customer {c} is not in the solution")
        by_journey.setdefault(where[c][0], set()).add(c)
    for jdx, gone in by_journey.items():
        journey = out.journeys[jdx]
        tdx = len(journey.trips) - 1
        while tdx >= 0:
            trip = journey.trips[tdx]
            if gone.intersection(trip.customers):
                trip.customers = [c for c in trip.customers if c not in gone]
                if not trip.customers:
                    _collapse(journey, tdx)
                    if not journey.trips:
                        break
            tdx -= 1
    return PartialSolution(out, bank)


# -- text format ---------------------------------------------------------------
#
#   # mavrp-solution v1
#   instance = R_2_2_5_7
#   vehicle 15: R 15 9 1 | C 1 3 4 2 | O 2 5 6 u
#
# One line per vehicle, in journey order; each trip is its kind tag followed
# by the node sequence start, customers..., end.


def _node_str(node: int) -> str:
    return "u" if node == U else str(node)


def format_solution(sol: Solution, inst: Instance | None = None) -> str:
    lines = [SOLUTION_HEADER]
    if inst is not None:
        lines.append(f"instance = {inst.name}")
        lines.append(f"makespan = {makespan(sol, inst)!r}")
    for journey in sol.journeys:
        trips = " | ".join(
            " ".join([_TAGS[t.kind], *(_node_str(x) for x in t.nodes())]) for t in journey.trips
        )
        lines.append(f"vehicle {journey.vehicle}: {trips}".rstrip())
    return "\n".join(lines) + "\n"


def parse_solution(text: str) -> Solution:
    journeys = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or "=" in line:
            continue
        head, sep, body = line.partition(":")
        if not sep or not head.startswith("vehicle "):
            raise SolutionError(f"line {lineno}: expected 'vehicle <id>: ...', got {line!r}")
        try:
            vehicle = int(head.split()[1])
        except (IndexError, ValueError):
            raise SolutionError(f"line {lineno}: bad vehicle id in {head!r}") from None
        trips = []
        for chunk in filter(None, (c.strip() for c in body.split("|"))):
            tag, *nodes = chunk.split()
            if tag not in _KINDS:
                raise SolutionError(f"line {lineno}: unknown trip tag {tag!r}")
            try:
                ids = [U if x == "u" else int(x) for x in nodes]
            except ValueError:
                raise SolutionError(f"line {lineno}: bad node id in {chunk!r}") from None
            if len(ids) < 2:
                raise SolutionError(f"line {lineno}: trip {chunk!r} needs a start and an end")
            kind = _KINDS[tag]
            trip = Trip(ids[0], ids[1:-1], ids[-1], returning=kind == RETURN)
            if trip.kind != kind:
                raise SolutionError(f"line {lineno}: trip {chunk!r} is tagged {kind} but reads as {trip.kind}")
            trips.append(trip)
        journeys.append(Journey(vehicle, trips))
    return Solution(journeys)


def write_solution(sol: Solution, path: str | Path, inst: Instance | None = None) -> None:
    Path(path).write_text(format_solution(sol, inst), encoding="utf-8")


def read_solution(path: str | Path) -> Solution:
    return parse_solution(Path(path).read_text(encoding="utf-8"))
