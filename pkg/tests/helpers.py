"""Small builders shared by the test modules."""

from __future__ import annotations

import random

from mavrp.instance import BACKHAUL, LINEHAUL, Customer, Depot, Instance, Vehicle, generate

# criterion number -> verdict line, filled by test_acceptance and printed by conftest
ACCEPTANCE_LINES: dict[int, str] = {}


def make_instance(depots, vehicles, linehauls=(), backhauls=(), capacity=6, t_max=10, name="hand", map_side=30.0):
    """Instance from coordinates; ids follow the standard layout.

    ``linehauls`` holds ``(x, y, demand, home)`` where ``home`` is a 0-based
    depot index; ``backhauls`` holds ``(x, y, demand)``.
    """
    d, m, n = len(depots), len(linehauls), len(backhauls)
    deps = [Depot(i + 1, tuple(map(float, p))) for i, p in enumerate(depots)]
    lhs = [
        Customer(d + 1 + i, LINEHAUL, (float(x), float(y)), q, home + 1) for i, (x, y, q, home) in enumerate(linehauls)
    ]
    bhs = [Customer(d + m + 1 + i, BACKHAUL, (float(x), float(y)), q) for i, (x, y, q) in enumerate(backhauls)]
    vehs = [Vehicle(d + m + n + 1 + i, tuple(map(float, p))) for i, p in enumerate(vehicles)]
    return Instance(name, deps, vehs, lhs, bhs, capacity, t_max, map_side)


def tiny_spec(seed: int) -> tuple[int, int, int, int]:
    """Sizes of the tiny oracle instances: d, a <= 2 and 2 <= m + n <= 6."""
    r = random.Random(seed)
    d = r.randint(1, 2)
    a = r.randint(1, 2)
    k = r.randint(2, 6)
    m = r.randint(0, k)
    return d, a, m, k - m


def tiny_instance(seed: int) -> Instance:
    d, a, m, n = tiny_spec(seed)
    return generate("R", d, a, m, n, seed=seed)


def random_instance(seed: int, max_customers: int = 14) -> Instance:
    """Random instance of modest size with varied depot/vehicle counts and capacity."""
    r = random.Random(10_000 + seed)
    d = r.randint(1, 3)
    a = r.randint(1, 3)
    k = r.randint(1, max_customers)
    m = r.randint(0, k)
    cap = r.choice((3, 4, 6, 8))
    hi = r.randint(1, cap)
    # enough trips for one vehicle serving everyone alone
    return generate("R", d, a, m, k - m, (1, hi), seed, capacity=cap, t_max=max(10, k))


def searched_solution(seed: int, iters: int = 40, max_customers: int = 14):
    """A random instance and a feasible solution that has been through some search.

    Search output has open trips and mixed trips, which construction alone
    never produces.
    """
    from mavrp.construct import ConstructionConfig, construct
    from mavrp.palns import run_alns

    inst = random_instance(seed, max_customers)
    sol = construct(inst, ConstructionConfig(seed=seed))
    return inst, run_alns(inst, sol, iters, seed=seed).best
