import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import make_instance, tiny_instance
from mavrp.construct import ConstructionConfig, InfeasibleInstanceError, construct
from mavrp.exact import solve_exact
from mavrp.instance import Instance, generate
from mavrp.palns import run_alns
from mavrp.solution import makespan, validate
from oracles import brute_force_optimum


def test_single_linehaul_open_route():
    inst = make_instance([(0, 0)], [(0, 0)], linehauls=[(3, 4, 1, 0)])
    res = solve_exact(inst)
    assert res.proven
    assert res.optimum == pytest.approx(5.0, abs=1e-12)
    assert validate(res.solution, inst) == []


def test_no_customers():
    inst = make_instance([(0, 0)], [(1, 1), (2, 2)])
    res = solve_exact(inst)
    assert res.optimum == 0.0 and res.proven
    assert all(not j.trips for j in res.solution.journeys)


def test_oversized_demand_is_infeasible():
    inst = make_instance([(0, 0)], [(1, 1)], linehauls=[(3, 4, 7, 0)])
    with pytest.raises(InfeasibleInstanceError):
        solve_exact(inst)


@settings(max_examples=40, deadline=None)
@given(
    st.integers(1, 2),
    st.integers(1, 2),
    st.integers(0, 4),
    st.integers(0, 4),
    st.sampled_from((2, 3, 6)),
    st.integers(0, 10_000),
)
def test_matches_brute_force(d, a, m, n, cap, seed):
    if m + n == 0 or m + n > 4:
        m, n = min(m, 2) or 1, min(n, 2)
    inst = generate("R", d, a, m, n, (1, min(3, cap)), seed, capacity=cap, t_max=2)
    expected = brute_force_optimum(inst)
    if expected == math.inf:
        with pytest.raises(InfeasibleInstanceError):
            solve_exact(inst)
        return
    res = solve_exact(inst)
    assert res.proven
    assert validate(res.solution, inst) == []
    assert math.isclose(res.optimum, makespan(res.solution, inst), abs_tol=1e-9)
    assert math.isclose(res.optimum, expected, abs_tol=1e-9)


@pytest.mark.parametrize("seed", range(12))
def test_oracle_bounds_heuristics(seed):
    inst = tiny_instance(seed)
    res = solve_exact(inst)
    assert res.proven
    for run in range(3):
        sol = construct(inst, ConstructionConfig(seed=run))
        assert makespan(sol, inst) >= res.optimum - 1e-9
        best = run_alns(inst, sol, 100, seed=run).best_cost
        assert best >= res.optimum - 1e-9


def _relabel(inst: Instance, rng: random.Random) -> Instance:
    """Same instance with linehaul and backhaul ids shuffled within their class."""
    from dataclasses import replace

    lh = list(inst.linehauls)
    bh = list(inst.backhauls)
    rng.shuffle(lh)
    rng.shuffle(bh)
    first_l = inst.d + 1
    first_b = inst.d + inst.m + 1
    lh = [replace(c, id=first_l + i) for i, c in enumerate(lh)]
    bh = [replace(c, id=first_b + i) for i, c in enumerate(bh)]
    return replace(inst, linehauls=lh, backhauls=bh)


@pytest.mark.parametrize("seed", range(8))
def test_permutation_invariance(seed):
    inst = tiny_instance(seed)
    other = _relabel(inst, random.Random(seed))
    assert math.isclose(solve_exact(inst).optimum, solve_exact(other).optimum, abs_tol=1e-9)


def test_budget_exhaustion_returns_incumbent():
    inst = generate("R", 2, 2, 4, 4, seed=3)
    res = solve_exact(inst, budget=50)
    assert not res.proven
    assert validate(res.solution, inst) == []
    assert res.optimum == makespan(res.solution, inst)


def test_identical_vehicle_starts_are_not_pruned_wrongly():
    # both vehicles start at the same spot; the optimum needs them to split the work
    inst = make_instance(
        [(0, 0)],
        [(5, 5), (5, 5)],
        linehauls=[(10, 0, 1, 0), (0, 10, 1, 0)],
        backhauls=[(10, 10, -1)],
    )
    res = solve_exact(inst)
    assert math.isclose(res.optimum, brute_force_optimum(inst), abs_tol=1e-9)
    assert sum(1 for j in res.solution.journeys if j.trips) == 2


def test_frozen_optimum():
    # value confirmed by the brute-force enumerator in tests/oracles.py
    inst = generate("R", 2, 2, 2, 2, seed=0)
    assert solve_exact(inst).optimum == pytest.approx(58.71576442542137, abs=1e-9)
