"""Solvers for a multi-depot, multi-trip vehicle routing problem with backhauls and open routes."""

from .acceptance import HillClimbing, RecordToRecord, SimulatedAnnealing
from .ahgslns import EvolutionTrace, Individual, PopulationConfig, ahgslns, adaptive_survival, evolve, initialize
from .bench import RunReport, compute_gap, compute_stats, load_report, run_bench, solve
from .config import RunConfig, load_config, load_suite
from .construct import ConstructionConfig, InfeasibleInstanceError, construct
from .exact import ExactResult, solve_exact
from .instance import Customer, Depot, Instance, Vehicle, distance, generate, read_instance, write_instance
from .palns import OperatorBank, PalnsState, WeightUpdateParams, palns_run, run_alns, select_operator, update_weight
from .solution import Journey, Solution, Trip, makespan, read_solution, validate, write_solution

__version__ = "0.1.0"

__all__ = [
    "Customer",
    "ConstructionConfig",
    "Depot",
    "EvolutionTrace",
    "ExactResult",
    "HillClimbing",
    "Individual",
    "InfeasibleInstanceError",
    "Instance",
    "Journey",
    "OperatorBank",
    "PalnsState",
    "PopulationConfig",
    "RecordToRecord",
    "RunConfig",
    "RunReport",
    "SimulatedAnnealing",
    "Solution",
    "Trip",
    "Vehicle",
    "WeightUpdateParams",
    "adaptive_survival",
    "ahgslns",
    "compute_gap",
    "compute_stats",
    "construct",
    "distance",
    "evolve",
    "generate",
    "initialize",
    "load_config",
    "load_report",
    "load_suite",
    "makespan",
    "palns_run",
    "read_instance",
    "read_solution",
    "run_alns",
    "run_bench",
    "select_operator",
    "solve",
    "solve_exact",
    "update_weight",
    "validate",
    "write_instance",
    "write_solution",
]
