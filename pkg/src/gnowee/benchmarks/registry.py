"""Named benchmark problems and their bundled data files."""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np

from ..problem import Problem
from ..space import DesignSpace, VariableSpec
from . import engineering as eng
from .analytic import ANALYTIC
from .tsp import TspInstance, parse_tsplib

__all__ = [
    "DATA_ENV",
    "BenchmarkInfo",
    "UnknownProblemError",
    "data_file",
    "describe",
    "get_problem",
    "load_optima",
    "load_tsp",
    "problem_names",
]

DATA_ENV = "GNOWEE_DATA_DIR"

TSP_INSTANCES = ("eil51", "st70", "pr107", "bier127", "ch150")
NOT_IMPLEMENTED = ("mi-chemical-process",)


class UnknownProblemError(KeyError):
    def __str__(self):
        return str(self.args[0])


def data_file(relative: str) -> Path:
    """Locate a data file, preferring ``$GNOWEE_DATA_DIR`` over the bundled copy."""
    override = os.environ.get(DATA_ENV)
    if override:
        candidate = Path(override) / relative
        if candidate.is_file():
            return candidate
    bundled = Path(str(resources.files("gnowee.benchmarks") / "data")) / relative
    if bundled.is_file():
        return bundled
    where = f"{DATA_ENV} ({override}) or the bundled data" if override else f"the bundled data (set {DATA_ENV} to add files)"
    raise FileNotFoundError(f"data file {relative!r} not found in {where}")


def _parse_optima(text: str) -> dict[str, float]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split("|")]
        if len(parts) != 3:
            raise ValueError(f"optima file line {lineno}: expected 'name | value | source'")
        out[parts[0]] = float(parts[1])
    return out


@lru_cache(maxsize=8)
def _optima_cached(path: str, mtime: float) -> dict[str, float]:
    return _parse_optima(Path(path).read_text())


def load_optima() -> dict[str, float]:
    path = data_file("optima.txt")
    return dict(_optima_cached(str(path), path.stat().st_mtime))


def load_tsp(name: str) -> TspInstance:
    path = data_file(f"tsplib/{name}.tsp")
    best = load_optima().get(name)
    return parse_tsplib(path.read_text(), best_known=None if best is None else int(best))


class _TourObjective:
    # A class rather than a closure so that problems pickle for process pools.
    def __init__(self, instance: TspInstance):
        self.instance = instance

    def __call__(self, x) -> float:
        return float(self.instance.tour_length(x[0]))


def tsp_problem(instance: TspInstance, name: str | None = None) -> Problem:
    space = DesignSpace([VariableSpec.combinatorial(instance.dimension, looping=True, name="tour")])
    return Problem(
        name=name or instance.name,
        space=space,
        objective=_TourObjective(instance),
        best_known=instance.best_known,
        distances=instance.distances,
    )


def _analytic(key: str) -> Callable[[], Problem]:
    spec = ANALYTIC[key]

    def build():
        space = DesignSpace([VariableSpec.continuous(spec.lower, spec.upper, f"x{i + 1}") for i in range(spec.dim)])
        name = f"{key}-{spec.dim}d"
        return Problem(name, space, spec.func, known_optimum=load_optima().get(name, spec.optimum))

    return build


def _cont(bounds, names):
    return [VariableSpec.continuous(lo, hi, n) for (lo, hi), n in zip(bounds, names)]


_PV_BOUNDS = [(10.0, 50.0), (1e-8, 200.0), (0.0625, 6.1875), (0.0625, 6.1875)]


def _pressure_vessel():
    space = DesignSpace(_cont(_PV_BOUNDS, ["R", "L", "t_s", "t_h"]))
    return Problem(
        "pressure-vessel", space, eng.pressure_vessel_objective, eng.pressure_vessel_constraints,
        known_optimum=load_optima()["pressure-vessel"],
    )  # fmt: skip


def _mi_pressure_vessel():
    thickness = 0.0625 * np.arange(1, 100)
    space = DesignSpace(
        _cont(_PV_BOUNDS[:2], ["R", "L"])
        + [VariableSpec.discrete(thickness, "t_s"), VariableSpec.discrete(thickness, "t_h")]
    )
    return Problem(
        "mi-pressure-vessel", space, eng.pressure_vessel_objective, eng.pressure_vessel_constraints,
        known_optimum=load_optima()["mi-pressure-vessel"],
    )  # fmt: skip


def _welded_beam():
    space = DesignSpace(_cont([(0.1, 2.0), (0.1, 10.0), (0.1, 10.0), (0.1, 2.0)], ["h", "l", "t", "b"]))
    return Problem(
        "welded-beam", space, eng.welded_beam_objective, eng.welded_beam_constraints,
        known_optimum=load_optima()["welded-beam"],
    )  # fmt: skip


def _speed_reducer():
    bounds = [(2.6, 3.6), (0.7, 0.8), (17.0, 28.0), (7.3, 8.3), (7.3, 8.3), (2.9, 3.9), (5.0, 5.5)]
    space = DesignSpace(_cont(bounds, [f"x{i}" for i in range(1, 8)]))
    return Problem(
        "speed-reducer", space, eng.speed_reducer_objective, eng.speed_reducer_constraints,
        known_optimum=load_optima()["speed-reducer"],
    )  # fmt: skip


def _spring():
    space = DesignSpace(_cont([(0.05, 2.0), (0.25, 1.3), (2.0, 15.0)], ["d", "D", "N"]))
    return Problem(
        "spring", space, eng.spring_objective, eng.spring_constraints,
        known_optimum=load_optima()["spring"],
    )  # fmt: skip


def _mi_spring():
    space = DesignSpace(
        [
            VariableSpec.integer(1, 70, "N"),
            VariableSpec.continuous(0.6, 3.0, "D"),
            VariableSpec.discrete(eng.MI_SPRING_WIRE_DIAMETERS, "d"),
        ]
    )
    return Problem(
        "mi-spring", space, eng.mi_spring_objective, eng.mi_spring_constraints,
        known_optimum=load_optima()["mi-spring"],
    )  # fmt: skip


def _tsp(name: str) -> Callable[[], Problem]:
    return lambda: tsp_problem(load_tsp(name), name)


@dataclass(frozen=True)
class BenchmarkInfo:
    name: str
    kinds: str
    dimension: int
    optimum: float | None
    implemented: bool = True


_BUILDERS: dict[str, Callable[[], Problem]] = {
    **{f"{k}-{spec.dim}d": _analytic(k) for k, spec in ANALYTIC.items()},
    "pressure-vessel": _pressure_vessel,
    "mi-pressure-vessel": _mi_pressure_vessel,
    "welded-beam": _welded_beam,
    "speed-reducer": _speed_reducer,
    "spring": _spring,
    "mi-spring": _mi_spring,
    **{name: _tsp(name) for name in TSP_INSTANCES},
}


def problem_names() -> list[str]:
    return sorted([*_BUILDERS, *NOT_IMPLEMENTED])


def get_problem(name: str) -> Problem:
    if name in NOT_IMPLEMENTED:
        raise NotImplementedError(f"benchmark {name!r} is registered but not implemented")
    try:
        build = _BUILDERS[name]
    except KeyError:
        raise UnknownProblemError(f"unknown problem {name!r}; run 'gnowee list' for the registered names") from None
    return build()


def _kinds(space: DesignSpace) -> str:
    names = []
    for v in space.variables:
        if v.kind.value not in names:
            names.append(v.kind.value)
    return "+".join(names)


def describe() -> list[BenchmarkInfo]:
    """Registry summary, sorted by name; TSP entries need no data file to be listed."""
    optima = load_optima()
    out = []
    for name in problem_names():
        if name in NOT_IMPLEMENTED:
            out.append(BenchmarkInfo(name, "-", 0, None, implemented=False))
        elif name in TSP_INSTANCES:
            dim = int("".join(ch for ch in name if ch.isdigit()))
            out.append(BenchmarkInfo(name, "combinatorial", dim, optima.get(name)))
        else:
            p = get_problem(name)
            out.append(BenchmarkInfo(name, _kinds(p.space), p.space.design_length, p.reference_optimum))
    return out
