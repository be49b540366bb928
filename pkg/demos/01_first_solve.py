"""
A first instance, solved three ways
===================================

Generate a small two-depot instance, build a starting plan with the
savings construction, improve it with ALNS and check the result against
the exact solver.
"""

from mavrp import ConstructionConfig, construct, generate, makespan, run_alns, solve_exact
from mavrp.solution import format_solution

# Two depots, two vehicles, three linehauls and three backhauls.
inst = generate("R", 2, 2, 3, 3, seed=7)
print(inst.name, "with", inst.num_customers, "customers")

# Node ids: depots first, then linehauls, backhauls and vehicles.
print("depots", list(inst.depot_ids), "linehauls", [c.id for c in inst.linehauls])
print("backhauls", [c.id for c in inst.backhauls], "vehicles", list(inst.vehicle_ids))

start = construct(inst, ConstructionConfig(seed=0))
print("\nconstruction makespan %.3f" % makespan(start, inst))
print(format_solution(start, inst))

# 200 destroy/repair iterations are plenty at this size
state = run_alns(inst, start, 200, seed=0)
print("after ALNS %.3f" % state.best_cost)
print(format_solution(state.best, inst))

# R = return trip (vehicle to its first depot), C = closed trip,
# O = open trip ending wherever the last linehaul is ("u").
exact = solve_exact(inst)
print("exact optimum %.3f (proven: %s)" % (exact.optimum, exact.proven))
print("ALNS gap %.2f%%" % ((state.best_cost - exact.optimum) / exact.optimum * 100))
