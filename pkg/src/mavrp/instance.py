"""MAVRP instance model, random generation and the canonical text format.

Node ids follow one global layout so that a single distance matrix serves
every lookup::

    0                      dummy terminal ``u`` of open trips
    1 .. d                 depots
    d+1 .. d+m             linehaul customers
    d+m+1 .. d+m+n         backhaul customers
    d+m+n+1 .. d+m+n+a     vehicle start nodes

Travel time is Euclidean distance at unit speed. Every arc into ``u`` costs 0.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

U = 0  # dummy terminal node id

LINEHAUL = "linehaul"
BACKHAUL = "backhaul"

FORMAT_HEADER = "# mavrp-instance v1"


class InstanceError(ValueError):
    """Raised for instances that break a structural invariant."""


class InstanceFormatError(InstanceError):
    """Raised by :func:`read_instance` with the offending line in the message."""


@dataclass(frozen=True)
class Depot:
    id: int
    position: tuple[float, float]


@dataclass(frozen=True)
class Vehicle:
    id: int
    start_position: tuple[float, float]


@dataclass(frozen=True)
class Customer:
    id: int
    kind: str
    position: tuple[float, float]
    demand: int
    home_depot: int | None = None

    @property
    def is_linehaul(self) -> bool:
        return self.kind == LINEHAUL


def distance(a: Sequence[float], b: Sequence[float]) -> float:
    """Euclidean travel time between two positions."""
    return math.hypot(a[0] - b[0], a[1] - b[1])


@dataclass(frozen=True)
class Instance:
    """An immutable MAVRP instance.

    The constructor checks the structural invariants (id layout, customer
    kinds, home depots, coordinates). Demand magnitudes above ``capacity``
    are allowed here so that solvers can report the instance as infeasible;
    :func:`read_instance` and :func:`generate` reject them up front.
    """

    name: str
    depots: tuple[Depot, ...]
    vehicles: tuple[Vehicle, ...]
    linehauls: tuple[Customer, ...]
    backhauls: tuple[Customer, ...]
    capacity: int
    t_max: int = 10
    map_side: float = 30.0

    def __post_init__(self):
        for attr in ("depots", "vehicles", "linehauls", "backhauls"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        d, m, n, a = self.d, self.m, self.n, self.a
        if d < 1:
            raise InstanceError("instance needs at least one depot")
        if a < 1:
            raise InstanceError("instance needs at least one vehicle")
        if self.capacity < 1:
            raise InstanceError(f"capacity must be a positive integer, got {self.capacity}")
        if self.t_max < 1:
            raise InstanceError(f"t_max must be a positive integer, got {self.t_max}")
        if not self.map_side > 0:
            raise InstanceError(f"map_side must be positive, got {self.map_side}")

        expected = (
            [(dep.id, i + 1) for i, dep in enumerate(self.depots)]
            + [(c.id, d + i + 1) for i, c in enumerate(self.linehauls)]
            + [(c.id, d + m + i + 1) for i, c in enumerate(self.backhauls)]
            + [(v.id, d + m + n + i + 1) for i, v in enumerate(self.vehicles)]
        )
        for got, want in expected:
            if got != want:
                raise InstanceError(f"node id {got} breaks the id layout (expected {want})")

        for c in self.linehauls:
            if c.kind != LINEHAUL:
                raise InstanceError(f"customer {c.id} listed as linehaul has kind {c.kind!r}")
            if c.demand <= 0:
                raise InstanceError(f"linehaul {c.id} must have positive demand, got {c.demand}")
            if c.home_depot is None or not 1 <= c.home_depot <= d:
                raise InstanceError(f"linehaul {c.id} has invalid home depot {c.home_depot}")
        for c in self.backhauls:
            if c.kind != BACKHAUL:
                raise InstanceError(f"customer {c.id} listed as backhaul has kind {c.kind!r}")
            if c.demand > 0:
                raise InstanceError(f"backhaul {c.id} must have demand <= 0, got {c.demand}")
            if c.home_depot is not None:
                raise InstanceError(f"backhaul {c.id} must not carry a home depot")

        side = self.map_side
        for node_id, pos in self.positions.items():
            x, y = pos
            if not (math.isfinite(x) and math.isfinite(y)):
                raise InstanceError(f"node {node_id} has non-finite coordinates")
            if not (0.0 <= x <= side and 0.0 <= y <= side):
                raise InstanceError(f"node {node_id} at {pos} lies outside [0, {side}]^2")

    @property
    def d(self) -> int:
        return len(self.depots)

    @property
    def a(self) -> int:
        return len(self.vehicles)

    @property
    def m(self) -> int:
        return len(self.linehauls)

    @property
    def n(self) -> int:
        return len(self.backhauls)

    @property
    def num_customers(self) -> int:
        return self.m + self.n

    @property
    def num_nodes(self) -> int:
        """Number of real nodes; valid ids are 1..num_nodes."""
        return self.d + self.m + self.n + self.a

    @property
    def depot_ids(self) -> range:
        return range(1, self.d + 1)

    @property
    def linehaul_ids(self) -> range:
        return range(self.d + 1, self.d + self.m + 1)

    @property
    def backhaul_ids(self) -> range:
        return range(self.d + self.m + 1, self.d + self.m + self.n + 1)

    @property
    def customer_ids(self) -> range:
        return range(self.d + 1, self.d + self.m + self.n + 1)

    @property
    def vehicle_ids(self) -> range:
        return range(self.d + self.m + self.n + 1, self.num_nodes + 1)

    def is_depot(self, node: int) -> bool:
        return 1 <= node <= self.d

    def is_linehaul(self, node: int) -> bool:
        return self.d < node <= self.d + self.m

    def is_backhaul(self, node: int) -> bool:
        return self.d + self.m < node <= self.d + self.m + self.n

    def is_customer(self, node: int) -> bool:
        return self.d < node <= self.d + self.m + self.n

    def is_vehicle(self, node: int) -> bool:
        return self.d + self.m + self.n < node <= self.num_nodes

    @cached_property
    def positions(self) -> dict[int, tuple[float, float]]:
        pos = {dep.id: dep.position for dep in self.depots}
        pos.update((c.id, c.position) for c in self.linehauls)
        pos.update((c.id, c.position) for c in self.backhauls)
        pos.update((v.id, v.start_position) for v in self.vehicles)
        return pos

    @cached_property
    def dist(self) -> list[list[float]]:
        """Travel-time matrix indexed by node id; row/column 0 is ``u``."""
        coords = np.zeros((self.num_nodes + 1, 2))
        for node_id, pos in self.positions.items():
            coords[node_id] = pos
        diff = coords[:, None, :] - coords[None, :, :]
        mat = np.sqrt((diff**2).sum(axis=-1))
        mat[:, U] = 0.0
        mat[U, :] = 0.0
        return mat.tolist()

    @cached_property
    def demand(self) -> list[int]:
        """Signed demand by node id (0 for non-customers)."""
        q = [0] * (self.num_nodes + 1)
        for c in self.linehauls + self.backhauls:
            q[c.id] = c.demand
        return q

    @cached_property
    def home(self) -> list[int]:
        """Home depot by node id (0 where undefined)."""
        h = [0] * (self.num_nodes + 1)
        for c in self.linehauls:
            h[c.id] = c.home_depot
        return h

    @cached_property
    def nearest_depot(self) -> list[int]:
        """Closest depot to every node, ties to the lower depot id."""
        dist = self.dist
        depots = list(self.depot_ids)
        out = [depots[0]] * (self.num_nodes + 1)
        for node in range(1, self.num_nodes + 1):
            out[node] = min(depots, key=lambda dep: (dist[node][dep], dep))
        return out

    def customer(self, node: int) -> Customer:
        if self.is_linehaul(node):
            return self.linehauls[node - self.d - 1]
        if self.is_backhaul(node):
            return self.backhauls[node - self.d - self.m - 1]
        raise InstanceError(f"node {node} is not a customer")

    def infeasible_customers(self) -> list[int]:
        """Customers whose demand magnitude exceeds the vehicle capacity."""
        return [c for c in self.customer_ids if abs(self.demand[c]) > self.capacity]


_NAME_RE = re.compile(r"^([A-Z]+)_(\d+)_(\d+)_(\d+)_(\d+)$")


def instance_name(geo: str, d: int, a: int, m: int, n: int) -> str:
    return f"{geo}_{d}_{a}_{m}_{n}"


def parse_name(name: str) -> tuple[str, int, int, int, int]:
    """Split ``R_2_2_5_7`` into ``("R", d, a, m, n)``."""
    match = _NAME_RE.match(name)
    if match is None:
        raise ValueError(f"not a generated instance name: {name!r}")
    geo, *counts = match.groups()
    d, a, m, n = (int(x) for x in counts)
    return geo, d, a, m, n


def generate(
    geo: str = "R",
    d: int = 2,
    a: int = 2,
    m: int = 5,
    n: int = 7,
    q_range: tuple[int, int] = (1, 3),
    seed: int = 0,
    *,
    capacity: int = 6,
    t_max: int = 10,
    map_side: float = 30.0,
) -> Instance:
    """Draw a random instance.

    Every coordinate (depots, vehicle starts, customers) is uniform on the
    square map, home depots are uniform over depots and demand magnitudes
    are uniform integers in the inclusive ``q_range``.
    """
    if geo != "R":
        raise ValueError(f"only the uniform random geography 'R' is supported, got {geo!r}")
    if d < 1:
        raise ValueError("need at least one depot")
    if a < 1:
        raise ValueError("need at least one vehicle")
    if m < 0 or n < 0 or m + n < 1:
        raise ValueError("need at least one customer")
    lo, hi = q_range
    if not 1 <= lo <= hi <= capacity:
        raise ValueError(f"q_range {q_range} must satisfy 1 <= lo <= hi <= capacity={capacity}")

    rng = np.random.default_rng(seed)
    depot_xy = rng.uniform(0.0, map_side, size=(d, 2))
    vehicle_xy = rng.uniform(0.0, map_side, size=(a, 2))
    line_xy = rng.uniform(0.0, map_side, size=(m, 2))
    line_q = rng.integers(lo, hi + 1, size=m)
    line_home = rng.integers(1, d + 1, size=m)
    back_xy = rng.uniform(0.0, map_side, size=(n, 2))
    back_q = rng.integers(lo, hi + 1, size=n)

    def pos(row) -> tuple[float, float]:
        return (float(row[0]), float(row[1]))

    depots = [Depot(i + 1, pos(depot_xy[i])) for i in range(d)]
    linehauls = [
        Customer(d + i + 1, LINEHAUL, pos(line_xy[i]), int(line_q[i]), int(line_home[i]))
        for i in range(m)
    ]
    backhauls = [
        Customer(d + m + i + 1, BACKHAUL, pos(back_xy[i]), -int(back_q[i]))
        for i in range(n)
    ]
    vehicles = [Vehicle(d + m + n + i + 1, pos(vehicle_xy[i])) for i in range(a)]
    return Instance(
        name=instance_name(geo, d, a, m, n),
        depots=depots,
        vehicles=vehicles,
        linehauls=linehauls,
        backhauls=backhauls,
        capacity=capacity,
        t_max=t_max,
        map_side=map_side,
    )


# -- canonical text format ---------------------------------------------------
#
#   # mavrp-instance v1
#   [meta]
#   name = R_2_2_5_7
#   capacity = 6
#   t_max = 10
#   map_side = 30.0
#   [depots]            id x y
#   [vehicles]          id x y
#   [linehauls]         id x y demand home_depot
#   [backhauls]         id x y demand
#
# Floats are written with repr(), which round-trips exactly.

_SECTIONS = ("meta", "depots", "vehicles", "linehauls", "backhauls")
_META_KEYS = ("name", "capacity", "t_max", "map_side")


def format_instance(inst: Instance) -> str:
    lines = [FORMAT_HEADER, "[meta]"]
    lines.append(f"name = {inst.name}")
    lines.append(f"capacity = {inst.capacity}")
    lines.append(f"t_max = {inst.t_max}")
    lines.append(f"map_side = {float(inst.map_side)!r}")
    lines.append("[depots]")
    lines += [f"{dep.id} {dep.position[0]!r} {dep.position[1]!r}" for dep in inst.depots]
    lines.append("[vehicles]")
    lines += [f"{v.id} {v.start_position[0]!r} {v.start_position[1]!r}" for v in inst.vehicles]
    lines.append("[linehauls]")
    lines += [
        f"{c.id} {c.position[0]!r} {c.position[1]!r} {c.demand} {c.home_depot}"
        for c in inst.linehauls
    ]
    lines.append("[backhauls]")
    lines += [f"{c.id} {c.position[0]!r} {c.position[1]!r} {c.demand}" for c in inst.backhauls]
    return "\n".join(lines) + "\n"


def write_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(format_instance(inst), encoding="utf-8")


def parse_instance(text: str) -> Instance:
    section = None
    seen_sections: list[str] = []
    meta: dict[str, str] = {}
    rows: dict[str, list[tuple[int, list[str]]]] = {s: [] for s in _SECTIONS[1:]}
    widths = {"depots": 3, "vehicles": 3, "linehauls": 5, "backhauls": 4}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SECTIONS:
                raise InstanceFormatError(f"line {lineno}: unknown section [{section}]")
            if section in seen_sections:
                raise InstanceFormatError(f"line {lineno}: duplicated section [{section}]")
            seen_sections.append(section)
            continue
        if section is None:
            raise InstanceFormatError(f"line {lineno}: content before the first section")
        if section == "meta":
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or key not in _META_KEYS:
                raise InstanceFormatError(f"line {lineno}: bad meta entry {line!r}")
            if key in meta:
                raise InstanceFormatError(f"line {lineno}: duplicated meta key {key!r}")
            meta[key] = value.strip()
        else:
            parts = line.split()
            if len(parts) != widths[section]:
                raise InstanceFormatError(
                    f"line {lineno}: [{section}] rows need {widths[section]} fields, got {len(parts)}"
                )
            rows[section].append((lineno, parts))

    for key in _META_KEYS:
        if key not in meta:
            raise InstanceFormatError(f"missing meta field {key!r}")

    def as_int(lineno, field_name, value):
        try:
            return int(value)
        except ValueError:
            raise InstanceFormatError(f"line {lineno}: field {field_name} is not an integer: {value!r}") from None

    def as_float(lineno, field_name, value):
        try:
            out = float(value)
        except ValueError:
            raise InstanceFormatError(f"line {lineno}: field {field_name} is not a number: {value!r}") from None
        if not math.isfinite(out):
            raise InstanceFormatError(f"line {lineno}: field {field_name} is not finite")
        return out

    capacity = as_int("meta", "capacity", meta["capacity"])
    t_max = as_int("meta", "t_max", meta["t_max"])
    map_side = as_float("meta", "map_side", meta["map_side"])

    seen_ids: dict[int, int] = {}

    def take_id(lineno, value):
        node_id = as_int(lineno, "id", value)
        if node_id in seen_ids:
            raise InstanceFormatError(
                f"line {lineno}: duplicated id {node_id} (first used on line {seen_ids[node_id]})"
            )
        seen_ids[node_id] = lineno
        return node_id

    depots = []
    for lineno, (i, x, y) in rows["depots"]:
        depots.append(Depot(take_id(lineno, i), (as_float(lineno, "x", x), as_float(lineno, "y", y))))
    vehicles = []
    for lineno, (i, x, y) in rows["vehicles"]:
        vehicles.append(Vehicle(take_id(lineno, i), (as_float(lineno, "x", x), as_float(lineno, "y", y))))
    depot_set = {dep.id for dep in depots}
    linehauls = []
    for lineno, (i, x, y, q, home) in rows["linehauls"]:
        node_id = take_id(lineno, i)
        demand = as_int(lineno, "demand", q)
        if home in ("-", "None", "none"):
            raise InstanceFormatError(f"line {lineno}: linehaul {node_id} is missing its home_depot")
        home_id = as_int(lineno, "home_depot", home)
        if demand <= 0:
            raise InstanceFormatError(
                f"line {lineno}: linehaul {node_id} has demand {demand}; linehaul demand must be > 0"
            )
        if abs(demand) > capacity:
            raise InstanceFormatError(
                f"line {lineno}: customer {node_id} demand {demand} exceeds capacity {capacity}"
            )
        if home_id not in depot_set:
            raise InstanceFormatError(f"line {lineno}: linehaul {node_id} home_depot {home_id} is not a depot")
        linehauls.append(
            Customer(node_id, LINEHAUL, (as_float(lineno, "x", x), as_float(lineno, "y", y)), demand, home_id)
        )
    backhauls = []
    for lineno, (i, x, y, q) in rows["backhauls"]:
        node_id = take_id(lineno, i)
        demand = as_int(lineno, "demand", q)
        if demand > 0:
            raise InstanceFormatError(
                f"line {lineno}: backhaul {node_id} has demand {demand}; backhaul demand must be <= 0"
            )
        if abs(demand) > capacity:
            raise InstanceFormatError(
                f"line {lineno}: customer {node_id} demand {demand} exceeds capacity {capacity}"
            )
        backhauls.append(Customer(node_id, BACKHAUL, (as_float(lineno, "x", x), as_float(lineno, "y", y)), demand))

    try:
        return Instance(
            name=meta["name"],
            depots=depots,
            vehicles=vehicles,
            linehauls=linehauls,
            backhauls=backhauls,
            capacity=capacity,
            t_max=t_max,
            map_side=map_side,
        )
    except InstanceFormatError:
        raise
    except InstanceError as exc:
        raise InstanceFormatError(str(exc)) from None


def read_instance(path: str | Path) -> Instance:
    return parse_instance(Path(path).read_text(encoding="utf-8"))
