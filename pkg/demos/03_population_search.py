"""
Population search against single-criterion ALNS
===============================================

Run the hybrid population search and plain ALNS with the same total
iteration budget on a mid-sized instance, a few seeds each, and compare
the spread of the results.
"""

import numpy as np

from mavrp import PopulationConfig, ahgslns, construct, generate, run_alns
from mavrp.construct import ConstructionConfig

inst = generate("R", 2, 2, 10, 10, seed=5)

# Smaller than the benchmark budget so the script finishes in about a minute
cfg = dict(N=6, M=3, gen_max=10, iter_max=10)
alns_iters = cfg["gen_max"] * cfg["iter_max"]

pop, single = [], []
for seed in range(4):
    res = ahgslns(inst, PopulationConfig(seed=seed, **cfg))
    pop.append(res.best_cost)
    start = construct(inst, ConstructionConfig(seed=seed))
    single.append(run_alns(inst, start, alns_iters, seed=seed).best_cost)

pop, single = np.array(pop), np.array(single)
print("population  avg %.3f  std %.3f  best %.3f" % (pop.mean(), pop.std(), pop.min()))
print("single ALNS avg %.3f  std %.3f  best %.3f" % (single.mean(), single.std(), single.min()))

# The trace keeps the population best after every PALNS round
series = np.array(res.trace.best_series())
print("\nlast run: %d rounds, best went %.3f -> %.3f" % (series.size, series[0], series[-1]))
print("non-increasing:", bool(np.all(np.diff(series) <= 0)))
for event in res.trace.events:
    if event["event"] in ("crossover", "diversify"):
        print("  round %2d %s" % (event["round"], event["event"]))
