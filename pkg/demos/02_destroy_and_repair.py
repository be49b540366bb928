"""
Destroy, repair and adaptive weights
====================================

One destroy/repair step done by hand, then a short run to see how the
roulette weights drift toward the operators that pay off.
"""

import random

from mavrp import OperatorBank, RecordToRecord, construct, generate, makespan, validate
from mavrp.operators import removal_gains, run_destroy, run_repair
from mavrp.palns import make_state, palns_run
from mavrp.solution import format_solution

inst = generate("R", 2, 2, 6, 6, seed=3)
sol = construct(inst)
print("start %.3f" % makespan(sol, inst))
print(format_solution(sol, inst))

# What each customer saves its journey if removed on its own
for journey in sol.journeys:
    gains = sorted(removal_gains(inst, journey), reverse=True)
    print("vehicle", journey.vehicle, [(c, round(g, 2)) for g, c in gains])

rng = random.Random(0)
partial = run_destroy("worst", sol, inst, 3, {"p_rand": 3.0}, {}, rng)
print("\nbanked", partial.bank)
repaired = run_repair("regret2", partial, inst, {}, rng)
print("repaired %.3f, violations %s" % (makespan(repaired, inst), validate(repaired, inst)))

# A short run with all five destroy and five repair operators
bank = OperatorBank()
state = palns_run(make_state(inst, sol, bank, RecordToRecord(0.02), seed=1), inst, 300)
print("\nbest after 300 iterations %.3f" % state.best_cost)
for name, w in zip(state.bank.destroy, state.bank.destroy_weights):
    print("  destroy %-8s weight %6.2f  new bests %d" % (name, w, state.bank.counts[name]["new_best"]))
for name, w in zip(state.bank.repair, state.bank.repair_weights):
    print("  repair  %-11s weight %6.2f  new bests %d" % (name, w, state.bank.counts[name]["new_best"]))
