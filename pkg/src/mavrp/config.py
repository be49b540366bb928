"""YAML run configuration, parameter sets and benchmark suites.

A run config holds every tunable in one file::

    version: 1
    seed: 0
    workers: 1
    construction: {noise: 1.0, backhaul_rule: balanced}
    alns:
      iter_max: 600
      criterion: {name: record_to_record, deviation: 0.02}
      weights: {reaction: 0.8, sigma_best: 33, sigma_better: 9, sigma_accepted: 13, sigma_rejected: 0}
      operators:
        destroy: [worst, related, history, string, trip]
        repair: [greedy, regret2, regret3, random, greedy_open]
        params: {worst: {min_frac: 0.1, max_frac: 0.4, p_rand: 3.0}}
    ahgslns: {N: 6, M: 3, gen_max: 30, iter_max: 20, l_c: 0.1, l_d: 0.2,
              crossover: true, diversification: true, ranges: {...}}
    exact: {budget: 5000000}

Missing keys take their defaults; unknown keys are an error. The
environment variables ``MAVRP_SEED`` and ``MAVRP_WORKERS`` override
``seed`` and ``workers``.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np
import yaml

from .acceptance import make_criterion
from .ahgslns import DEFAULT_RANGES, PopulationConfig
from .construct import ConstructionConfig
from .operators import DESTROY_NAMES, REPAIR_NAMES
from .palns import OperatorBank, WeightUpdateParams

CONFIG_VERSION = 1
CONFIG_DIR = Path(__file__).parent / "configs"


class ConfigError(ValueError):
    pass


def _check_keys(section: str, data: dict, allowed) -> None:
    extra = set(data) - set(allowed)
    if extra:
        raise ConfigError(f"unknown key(s) in {section}: {sorted(extra)}")


def _dataclass_from(cls, section: str, data: dict | None):
    data = dict(data or {})
    _check_keys(section, data, [f.name for f in fields(cls)])
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{section}: {exc}") from None


@dataclass
class AlnsConfig:
    iter_max: int = 600
    criterion: dict = field(default_factory=lambda: {"name": "record_to_record", "deviation": 0.02})
    weights: WeightUpdateParams = field(default_factory=WeightUpdateParams)
    destroy: list[str] = field(default_factory=lambda: list(DESTROY_NAMES))
    repair: list[str] = field(default_factory=lambda: list(REPAIR_NAMES))
    params: dict = field(default_factory=dict)

    def make_bank(self) -> OperatorBank:
        return OperatorBank(
            destroy=list(self.destroy),
            repair=list(self.repair),
            params={k: dict(v) for k, v in self.params.items()},
            weight_params=self.weights,
        )

    def make_criterion(self):
        return make_criterion(self.criterion)


@dataclass
class RunConfig:
    seed: int = 0
    workers: int = 1
    construction: ConstructionConfig = field(default_factory=ConstructionConfig)
    alns: AlnsConfig = field(default_factory=AlnsConfig)
    population: PopulationConfig = field(default_factory=PopulationConfig)
    exact_budget: int = 5_000_000

    def to_dict(self) -> dict:
        alns = asdict(self.alns)
        alns.pop("params")
        params = self.alns.make_bank().params  # overrides merged with defaults
        destroy = alns.pop("destroy")
        repair = alns.pop("repair")
        alns["operators"] = {"destroy": destroy, "repair": repair, "params": params}
        pop = asdict(self.population)
        for key in ("seed", "workers", "weight_params"):
            pop.pop(key)
        cons = asdict(self.construction)
        cons.pop("seed")
        return {
            "version": CONFIG_VERSION,
            "seed": self.seed,
            "workers": self.workers,
            "construction": cons,
            "alns": alns,
            "ahgslns": pop,
            "exact": {"budget": self.exact_budget},
        }

    def fingerprint(self) -> str:
        """Short hash of every setting except seed and worker count."""
        data = self.to_dict()
        data.pop("seed")
        data.pop("workers")
        blob = json.dumps(data, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def population_config(self, seed: int | None = None) -> PopulationConfig:
        return replace(
            self.population,
            seed=self.seed if seed is None else seed,
            workers=self.workers,
            weight_params=self.alns.weights,
        )


def _env_int(name: str) -> int | None:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"environment variable {name} must be an integer, got {raw!r}") from None


def config_from_dict(data: dict | None, *, env: bool = True) -> RunConfig:
    data = dict(data or {})
    _check_keys("config", data, ["version", "seed", "workers", "construction", "alns", "ahgslns", "exact"])
    version = data.get("version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        raise ConfigError(f"unsupported config version {version!r}")
    seed = int(data.get("seed", 0))
    workers = int(data.get("workers", 1))
    if env:
        seed = _env_int("MAVRP_SEED") if _env_int("MAVRP_SEED") is not None else seed
        workers = _env_int("MAVRP_WORKERS") if _env_int("MAVRP_WORKERS") is not None else workers
    if workers < 1:
        raise ConfigError("workers must be >= 1")

    construction = _dataclass_from(ConstructionConfig, "construction", data.get("construction"))

    alns_raw = dict(data.get("alns") or {})
    _check_keys("alns", alns_raw, ["iter_max", "criterion", "weights", "operators"])
    ops = dict(alns_raw.pop("operators", None) or {})
    _check_keys("alns.operators", ops, ["destroy", "repair", "params"])
    weights = _dataclass_from(WeightUpdateParams, "alns.weights", alns_raw.pop("weights", None))
    alns = AlnsConfig(weights=weights, **{k: v for k, v in alns_raw.items()})
    if "destroy" in ops:
        alns.destroy = list(ops["destroy"])
    if "repair" in ops:
        alns.repair = list(ops["repair"])
    alns.params = {k: dict(v) for k, v in (ops.get("params") or {}).items()}
    if alns.iter_max < 0:
        raise ConfigError("alns.iter_max must be >= 0")
    try:
        alns.make_bank()
        alns.make_criterion()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"alns: {exc}") from None

    pop_raw = dict(data.get("ahgslns") or {})
    ranges = {**DEFAULT_RANGES, **(pop_raw.pop("ranges", None) or {})}
    _check_keys("ahgslns.ranges", ranges, DEFAULT_RANGES)
    ranges = {k: tuple(float(x) for x in v) for k, v in ranges.items()}
    for key in ("seed", "workers", "weight_params"):
        if key in pop_raw:
            raise ConfigError(f"ahgslns.{key} is set at the top level of the config")
    population = _dataclass_from(PopulationConfig, "ahgslns", {**pop_raw, "ranges": ranges})

    exact_raw = dict(data.get("exact") or {})
    _check_keys("exact", exact_raw, ["budget"])
    return RunConfig(
        seed=seed,
        workers=workers,
        construction=construction,
        alns=alns,
        population=population,
        exact_budget=int(exact_raw.get("budget", 5_000_000)),
    )


def _read_yaml(path: str | Path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def load_config(path: str | Path | None = None, *, env: bool = True) -> RunConfig:
    """Read a run config; ``None`` gives the defaults (still subject to env overrides)."""
    return config_from_dict(_read_yaml(path) if path is not None else {}, env=env)


# -- parameter sets and suites ----------------------------------------------------


@dataclass(frozen=True)
class ParameterSet:
    """One of the fixed settings the single-criterion variants run with."""

    min_frac: float
    max_frac: float
    reaction: float
    rrt_deviation: float = 0.02
    sa_worse_fraction: float = 0.05
    sa_cooling: float = 0.99

    def operator_params(self) -> dict:
        return {name: {"min_frac": self.min_frac, "max_frac": self.max_frac} for name in DESTROY_NAMES}

    def criterion(self, name: str) -> dict:
        if name == "record_to_record":
            return {"name": name, "deviation": self.rrt_deviation}
        if name == "simulated_annealing":
            return {"name": name, "worse_fraction": self.sa_worse_fraction, "cooling": self.sa_cooling}
        if name == "hill_climbing":
            return {"name": name}
        raise ConfigError(f"unknown acceptance criterion {name!r}")


def load_parameter_sets(path: str | Path | None = None) -> dict[int, ParameterSet]:
    data = _read_yaml(path or CONFIG_DIR / "parameter_sets.yaml")
    _check_keys("parameter sets", data, ["version", "sets"])
    if data.get("version") != CONFIG_VERSION:
        raise ConfigError(f"unsupported parameter-set version {data.get('version')!r}")
    out = {}
    for key, values in (data.get("sets") or {}).items():
        out[int(key)] = _dataclass_from(ParameterSet, f"sets.{key}", values)
    return out


@dataclass(frozen=True)
class Variant:
    name: str
    algo: str  # "alns" or "ahgslns"
    set: int = 1
    criterion: str | None = None
    crossover: bool = True
    diversification: bool = True


@dataclass
class Suite:
    name: str
    runs: int
    seed: int
    instances: list[dict]
    variants: list[Variant]
    sets: dict[int, ParameterSet]
    alns_iter_max: int = 600
    population: dict = field(default_factory=dict)
    exact_max_customers: int = 7
    exact_budget: int = 2_000_000

    def variant_config(self, variant: Variant, base: RunConfig | None = None) -> RunConfig:
        """Full run config for ``variant``, built on ``base`` (defaults if None)."""
        base = base or RunConfig()
        pset = self.sets[variant.set]
        weights = replace(base.alns.weights, reaction=pset.reaction)
        if variant.algo == "alns":
            alns = replace(
                base.alns,
                iter_max=self.alns_iter_max,
                criterion=pset.criterion(variant.criterion or "record_to_record"),
                weights=weights,
                params=pset.operator_params(),
            )
            return replace(base, alns=alns)
        if variant.algo == "ahgslns":
            pop = replace(
                base.population,
                crossover=variant.crossover,
                diversification=variant.diversification,
                **self.population,
            )
            return replace(base, alns=replace(base.alns, weights=weights), population=pop)
        raise ConfigError(f"unknown algorithm {variant.algo!r} in variant {variant.name}")


def _expand_instances(spec) -> list[dict]:
    """Instance specs as generator keyword dicts (or ``{"path": ...}``)."""
    if isinstance(spec, list):
        return [dict(item) for item in spec]
    if not isinstance(spec, dict) or "generate" not in spec:
        raise ConfigError("suite 'instances' must be a list or a {generate: ...} mapping")
    gen = dict(spec["generate"])
    _check_keys("instances.generate", gen, ["count", "geo", "d", "a", "m", "n", "seed"])
    rng = np.random.default_rng(int(gen.get("seed", 0)))
    out = []

    def draw(value):
        if isinstance(value, (list, tuple)):
            lo, hi = value
            return int(rng.integers(lo, hi + 1))
        return int(value)

    for i in range(int(gen.get("count", 1))):
        out.append(
            {
                "geo": gen.get("geo", "R"),
                "d": draw(gen.get("d", 2)),
                "a": draw(gen.get("a", 2)),
                "m": draw(gen.get("m", 5)),
                "n": draw(gen.get("n", 7)),
                "seed": int(gen.get("seed", 0)) * 1000 + i,
            }
        )
    return out


def load_suite(path: str | Path) -> Suite:
    path = Path(path)
    data = _read_yaml(path)
    _check_keys(
        "suite",
        data,
        ["version", "name", "runs", "seed", "instances", "parameter_sets", "alns", "ahgslns", "variants", "exact"],
    )
    if data.get("version") != CONFIG_VERSION:
        raise ConfigError(f"unsupported suite version {data.get('version')!r}")
    sets_ref = data.get("parameter_sets", "parameter_sets.yaml")
    if isinstance(sets_ref, dict):
        sets = {int(k): _dataclass_from(ParameterSet, f"sets.{k}", v) for k, v in sets_ref.items()}
    else:
        sets_path = Path(sets_ref)
        if not sets_path.is_absolute():
            local = path.parent / sets_path
            sets_path = local if local.exists() else CONFIG_DIR / sets_path
        sets = load_parameter_sets(sets_path)
    variants = []
    for name, spec in (data.get("variants") or {}).items():
        spec = dict(spec)
        _check_keys(f"variants.{name}", spec, ["algo", "set", "criterion", "crossover", "diversification"])
        v = Variant(name=str(name), **spec)
        if v.set not in sets:
            raise ConfigError(f"variant {name} uses undefined parameter set {v.set}")
        variants.append(v)
    if not variants:
        raise ConfigError("suite defines no variants")
    alns = dict(data.get("alns") or {})
    _check_keys("alns", alns, ["iter_max"])
    pop = dict(data.get("ahgslns") or {})
    _check_keys("ahgslns", pop, ["N", "M", "gen_max", "iter_max", "l_c", "l_d"])
    exact = dict(data.get("exact") or {})
    _check_keys("exact", exact, ["max_customers", "budget"])
    runs = int(data.get("runs", 10))
    if runs < 1:
        raise ConfigError("runs must be >= 1")
    return Suite(
        name=str(data.get("name", path.stem)),
        runs=runs,
        seed=int(data.get("seed", 0)),
        instances=_expand_instances(data.get("instances")),
        variants=variants,
        sets=sets,
        alns_iter_max=int(alns.get("iter_max", 600)),
        population=pop,
        exact_max_customers=int(exact.get("max_customers", 7)),
        exact_budget=int(exact.get("budget", 2_000_000)),
    )
