"""Generation loop, convergence checks and run records."""

from __future__ import annotations

import bisect
import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .levy import LevyParams
from .operators import (
    Batch,
    OperatorFractions,
    Population,
    crossover,
    inversion_crossover,
    levy_flights,
    mutation,
    population_update,
    scatter_search,
    three_opt,
    two_opt,
)
from .problem import EvalCounter, Evaluation, Problem, better, rank_key
from .space import DesignVector

__all__ = [
    "ConvergenceCriteria",
    "ConvergenceState",
    "GnoweeSettings",
    "RunResult",
    "SettingsError",
    "Termination",
    "check_convergence",
    "fitness_threshold",
    "run",
]

# A generation that evaluates nothing (every child duplicates its parent) is
# idle; this many in a row ends the run as stalled.
_MAX_IDLE_GENERATIONS = 1000


class SettingsError(ValueError):
    """Invalid or inconsistent run settings."""


class Termination(str, Enum):
    FITNESS = "FitnessReached"
    STALLED = "Stalled"
    BUDGET = "EvalBudget"


@dataclass(frozen=True)
class ConvergenceCriteria:
    max_evals: int = 200_000
    stall_evals: int = 10_000
    stall_tol: float = 1e-6
    fitness_rel_tol: float = 0.01
    known_optimum: float | None = None

    def __post_init__(self):
        for name in ("max_evals", "stall_evals"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise SettingsError(f"{name} must be a positive integer, got {v!r}")
        for name in ("stall_tol", "fitness_rel_tol"):
            if not getattr(self, name) > 0:
                raise SettingsError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.known_optimum is not None and not math.isfinite(self.known_optimum):
            raise SettingsError("known_optimum must be finite")


def fitness_threshold(known_optimum: float, tol: float) -> float:
    """Largest fitness counted as reaching ``known_optimum``.

    Relative tolerance for non-zero optima (measured on ``|f_opt|`` so that
    negative optima work too), absolute tolerance at zero.
    """
    if known_optimum == 0:
        return tol
    return known_optimum + tol * abs(known_optimum)


@dataclass
class GnoweeSettings:
    p: int = 25
    init_scheme: str = "lhc"
    levy: LevyParams = field(default_factory=LevyParams)
    fractions: OperatorFractions = field(default_factory=OperatorFractions)
    criteria: ConvergenceCriteria = field(default_factory=ConvergenceCriteria)
    seed: int = 0
    tsp_distance_bias: bool = False

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 3:
            raise SettingsError(f"population size p must be an integer >= 3, got {self.p!r}")
        self.init_scheme = str(self.init_scheme).lower()
        if self.init_scheme not in ("lhc", "uniform"):
            raise SettingsError(f"init_scheme must be 'lhc' or 'uniform', got {self.init_scheme!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise SettingsError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not isinstance(self.tsp_distance_bias, (bool, np.bool_)):
            raise SettingsError(f"tsp_distance_bias must be a bool, got {self.tsp_distance_bias!r}")
        self.tsp_distance_bias = bool(self.tsp_distance_bias)

    # Flat key names double as config-file keys and CLI flag names.
    _KEYS = {
        "population": ("p", None),
        "init": ("init_scheme", None),
        "alpha": ("levy", "alpha"),
        "gamma": ("levy", "gamma"),
        "levy_terms": ("levy", "n"),
        "beta": ("fractions", "beta"),
        "f_levy": ("fractions", "f_l"),
        "f_elite": ("fractions", "f_e"),
        "f_mh": ("fractions", "f_mh"),
        "f_mutation": ("fractions", "f_m"),
        "max_evals": ("criteria", "max_evals"),
        "stall_evals": ("criteria", "stall_evals"),
        "stall_tol": ("criteria", "stall_tol"),
        "fitness_tol": ("criteria", "fitness_rel_tol"),
        "known_optimum": ("criteria", "known_optimum"),
        "seed": ("seed", None),
        "tsp_distance_bias": ("tsp_distance_bias", None),
    }

    @classmethod
    def keys(cls) -> list[str]:
        return list(cls._KEYS)

    def to_dict(self) -> dict:
        out = {}
        for key, (attr, sub) in self._KEYS.items():
            v = getattr(self, attr)
            out[key] = v if sub is None else getattr(v, sub)
        return out

    @classmethod
    def from_dict(cls, doc: dict, base: "GnoweeSettings | None" = None) -> "GnoweeSettings":
        """Settings from a flat key/value mapping; missing keys keep ``base`` (or defaults)."""
        unknown = sorted(set(doc) - set(cls._KEYS))
        if unknown:
            raise SettingsError(f"unknown settings key(s): {', '.join(unknown)}")
        flat = (base or cls()).to_dict()
        flat.update(doc)
        try:
            groups: dict[str, dict] = {"levy": {}, "fractions": {}, "criteria": {}}
            top = {}
            for key, (attr, sub) in cls._KEYS.items():
                if sub is None:
                    top[attr] = flat[key]
                else:
                    groups[attr][sub] = flat[key]
            return cls(
                levy=LevyParams(**groups["levy"]),
                fractions=OperatorFractions(**groups["fractions"]),
                criteria=ConvergenceCriteria(**groups["criteria"]),
                **top,
            )
        except SettingsError:
            raise
        except (TypeError, ValueError) as exc:
            raise SettingsError(str(exc)) from exc

    def with_seed(self, seed: int) -> "GnoweeSettings":
        return dataclasses.replace(self, seed=int(seed))


@dataclass
class RunResult:
    best_vector: DesignVector
    best_values: object
    best_fitness: float
    best_evaluation: Evaluation
    total_evals: int
    termination: Termination
    history: list[tuple[int, float]]

    @property
    def feasible(self) -> bool:
        return self.best_evaluation.feasible


@dataclass
class ConvergenceState:
    """Best feasible fitness as a step function of the evaluation count."""

    total_evals: int = 0
    history: list[tuple[int, float]] = field(default_factory=list)

    @property
    def best_fitness(self) -> float | None:
        return self.history[-1][1] if self.history else None

    def best_at(self, evals: int) -> float | None:
        """Best feasible fitness known after ``evals`` evaluations."""
        k = bisect.bisect_right(self.history, (evals, math.inf))
        return self.history[k - 1][1] if k else None


def check_convergence(state: ConvergenceState, criteria: ConvergenceCriteria) -> Termination | None:
    best = state.best_fitness
    if best is not None and criteria.known_optimum is not None:
        if best <= fitness_threshold(criteria.known_optimum, criteria.fitness_rel_tol):
            return Termination.FITNESS
    if best is not None and state.total_evals >= criteria.stall_evals:
        ref = state.best_at(state.total_evals - criteria.stall_evals)
        if ref is not None and ref - best < criteria.stall_tol:
            return Termination.STALLED
    if state.total_evals >= criteria.max_evals:
        return Termination.BUDGET
    return None


class _Run:
    def __init__(self, problem: Problem, settings: GnoweeSettings):
        self.problem = problem
        self.space = problem.space
        self.settings = settings
        crit = settings.criteria
        if crit.known_optimum is None and problem.known_optimum is not None:
            crit = dataclasses.replace(crit, known_optimum=problem.known_optimum)
        self.criteria = crit
        self.rng = np.random.default_rng(settings.seed)
        self.counter = EvalCounter()
        self.state = ConvergenceState()
        self.best: tuple[DesignVector, Evaluation] | None = None
        self.distances = problem.distances if settings.tsp_distance_bias else None

    def note(self, design: DesignVector, ev: Evaluation):
        if self.best is None or better(ev, self.best[1]):
            self.best = (design.copy(), ev)
            if ev.feasible:
                self.state.history.append((ev.eval_id, ev.objective))
        self.state.total_evals = self.counter.count

    def budget_left(self) -> int:
        return self.criteria.max_evals - self.counter.count

    def initialize(self) -> Population:
        s = self.settings
        n = max(2 * s.p, 3 * self.space.design_length)
        n = min(n, max(s.p, self.budget_left()))
        if s.init_scheme == "lhc":
            designs = self.space.lhc_initialize(n, self.rng)
        else:
            designs = self.space.uniform_initialize(n, self.rng)
        evals = []
        for d in designs:
            ev = self.problem.evaluate(d, self.counter)
            evals.append(ev)
            self.note(d, ev)
        keep = sorted(range(n), key=lambda i: rank_key(evals[i]))[: s.p]
        return Population(self.space, [designs[i] for i in keep], [evals[i] for i in keep])

    def evaluate(self, pop: Population, batch: Batch) -> list[Evaluation | None]:
        same = batch.same_as_parent(pop)
        out: list[Evaluation | None] = [None] * len(batch)
        for r in range(len(batch)):
            if same[r]:
                continue
            if self.budget_left() <= 0:
                break
            design = batch.design(r)
            ev = self.problem.evaluate(design, self.counter)
            out[r] = ev
            self.note(design, ev)
        return out

    def steps(self):
        s, space = self.settings, self.space
        fr, levy, rng = s.fractions, s.levy, self.rng
        n_perm = space.perm_length if space.perm_index is not None else 0
        scalars = space.n_cont + space.n_disc > 0
        seq = []
        if n_perm >= 4:
            seq.append((lambda pop: three_opt(pop, rng), False))
        seq.append((lambda pop: levy_flights(pop, fr, levy, rng, self.distances), True))
        if scalars:
            seq.append((lambda pop: crossover(pop, fr, rng), False))
            seq.append((lambda pop: scatter_search(pop, fr, rng), False))
            seq.append((lambda pop: mutation(pop, fr, rng), False))
        if space.n_disc or n_perm >= 2:
            seq.append((lambda pop: inversion_crossover(pop, fr, rng), False))
        if n_perm >= 3:
            seq.append((lambda pop: two_opt(pop, fr, levy, rng, self.distances), False))
        return seq

    def result(self, termination: Termination) -> RunResult:
        design, ev = self.best
        return RunResult(
            best_vector=design,
            best_values=self.space.decode(design),
            best_fitness=ev.objective,
            best_evaluation=ev,
            total_evals=self.counter.count,
            termination=termination,
            history=list(self.state.history),
        )

    def execute(self) -> RunResult:
        pop = self.initialize()
        term = check_convergence(self.state, self.criteria)
        if term is not None:
            return self.result(term)
        steps = self.steps()
        idle = 0
        while True:
            evaluated_before = self.counter.count
            for make, mh in steps:
                batch = make(pop)
                if not len(batch):
                    continue
                evals = self.evaluate(pop, batch)
                population_update(pop, batch, evals, self.rng, mh=mh, f_mh=self.settings.fractions.f_mh)
                term = check_convergence(self.state, self.criteria)
                if term is not None:
                    return self.result(term)
            pop.generation += 1
            idle = idle + 1 if self.counter.count == evaluated_before else 0
            if idle >= _MAX_IDLE_GENERATIONS:
                return self.result(Termination.STALLED)


def run(problem: Problem, settings: GnoweeSettings | None = None) -> RunResult:
    """Minimize ``problem`` and return the best design found."""
    settings = settings or GnoweeSettings()
    if not isinstance(settings, GnoweeSettings):
        raise SettingsError("settings must be a GnoweeSettings instance")
    if problem.space.design_length == 0:
        raise SettingsError(f"problem {problem.name!r} has an empty design space")
    return _Run(problem, settings).execute()
