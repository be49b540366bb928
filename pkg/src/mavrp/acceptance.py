"""Acceptance criteria for the destroy/repair loop."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass


@dataclass
class HillClimbing:
    name = "hill_climbing"

    def accept(self, candidate: float, current: float, best: float, rng: random.Random) -> bool:
        return candidate <= current

    def params(self) -> dict:
        return {}


@dataclass
class RecordToRecord:
    """Accept anything within ``deviation`` (a fraction) of the best cost so far."""

    deviation: float = 0.02
    name = "record_to_record"

    def __post_init__(self):
        if self.deviation < 0:
            raise ValueError("deviation must be >= 0")

    def accept(self, candidate, current, best, rng):
        return candidate <= best * (1.0 + self.deviation)

    def params(self) -> dict:
        return {"deviation": self.deviation}


@dataclass
class SimulatedAnnealing:
    """Metropolis acceptance with geometric cooling applied after every decision.

    Without an explicit ``temperature`` the criterion calibrates itself on the
    first call from the initial cost: a candidate ``worse_fraction`` worse
    than it is accepted with probability ``accept_prob``.
    """

    temperature: float | None = None
    cooling: float = 0.99
    worse_fraction: float = 0.05
    accept_prob: float = 0.5
    name = "simulated_annealing"

    def __post_init__(self):
        if not 0.0 < self.cooling <= 1.0:
            raise ValueError("cooling rate must lie in (0, 1]")
        if self.temperature is not None and self.temperature <= 0:
            raise ValueError("temperature must be > 0")
        if not 0.0 < self.accept_prob < 1.0:
            raise ValueError("accept_prob must lie in (0, 1)")

    def calibrate(self, initial_cost: float) -> None:
        delta = self.worse_fraction * initial_cost
        if delta <= 0:
            self.temperature = 1e-9
        else:
            self.temperature = delta / math.log(1.0 / self.accept_prob)

    def accept(self, candidate, current, best, rng):
        if self.temperature is None:
            self.calibrate(current)
        if candidate <= current:
            ok = True
        else:
            # floor keeps the state valid after long runs
            t = max(self.temperature, 1e-300)
            ok = rng.random() < math.exp((current - candidate) / t)
        self.temperature = max(self.temperature * self.cooling, 1e-300)
        return ok

    def params(self) -> dict:
        return {
            "temperature": self.temperature,
            "cooling": self.cooling,
            "worse_fraction": self.worse_fraction,
            "accept_prob": self.accept_prob,
        }


CRITERIA = {
    HillClimbing.name: HillClimbing,
    RecordToRecord.name: RecordToRecord,
    SimulatedAnnealing.name: SimulatedAnnealing,
}


def make_criterion(spec: dict):
    """Build a criterion from ``{"name": ..., **params}``."""
    spec = dict(spec)
    name = spec.pop("name")
    try:
        cls = CRITERIA[name]
    except KeyError:
        raise ValueError(f"unknown acceptance criterion {name!r}") from None
    return cls(**spec)


def criterion_spec(criterion) -> dict:
    return {"name": criterion.name, **criterion.params()}
