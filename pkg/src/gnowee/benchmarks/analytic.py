"""Unconstrained analytic test functions (minimization)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "ANALYTIC",
    "AnalyticSpec",
    "ackley",
    "analytic_suite",
    "dejong",
    "easom",
    "griewank",
    "rastrigin",
    "rosenbrock",
]


def ackley(x) -> float:
    x = np.asarray(x, dtype=float)
    d = x.size
    return float(
        -20.0 * np.exp(-0.2 * np.sqrt(np.sum(x * x) / d))
        - np.exp(np.sum(np.cos(2.0 * np.pi * x)) / d)
        + 20.0
        + math.e
    )


def dejong(x) -> float:
    """First De Jong function (sphere)."""
    x = np.asarray(x, dtype=float)
    return float(np.sum(x * x))


def easom(x) -> float:
    x1, x2 = np.asarray(x, dtype=float)
    return float(-math.cos(x1) * math.cos(x2) * math.exp(-((x1 - math.pi) ** 2) - (x2 - math.pi) ** 2))


def griewank(x) -> float:
    x = np.asarray(x, dtype=float)
    i = np.arange(1, x.size + 1)
    return float(np.sum(x * x) / 4000.0 - np.prod(np.cos(x / np.sqrt(i))) + 1.0)


def rastrigin(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(10.0 * x.size + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


def rosenbrock(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


@dataclass(frozen=True)
class AnalyticSpec:
    func: Callable
    dim: int
    lower: float
    upper: float
    optimum: float
    minimizer: tuple


ANALYTIC: dict[str, AnalyticSpec] = {
    "ackley": AnalyticSpec(ackley, 3, -32.768, 32.768, 0.0, (0.0,) * 3),
    "dejong": AnalyticSpec(dejong, 4, -5.12, 5.12, 0.0, (0.0,) * 4),
    "easom": AnalyticSpec(easom, 2, -100.0, 100.0, -1.0, (math.pi, math.pi)),
    "griewank": AnalyticSpec(griewank, 6, -600.0, 600.0, 0.0, (0.0,) * 6),
    "rastrigin": AnalyticSpec(rastrigin, 5, -5.12, 5.12, 0.0, (0.0,) * 5),
    "rosenbrock": AnalyticSpec(rosenbrock, 5, -5.0, 5.0, 0.0, (1.0,) * 5),
}


def analytic_suite(name: str, x) -> float:
    try:
        spec = ANALYTIC[name.lower()]
    except KeyError:
        raise KeyError(f"unknown analytic function {name!r}; choose from {sorted(ANALYTIC)}") from None
    return spec.func(x)
