"""Objective/constraint evaluation, feasibility-first comparison and evaluation counting."""

from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .space import DesignSpace, DesignVector

__all__ = ["EvalCounter", "Evaluation", "EvaluationError", "Problem", "better", "rank_key"]


class EvaluationError(RuntimeError):
    """An objective or constraint function raised; ``vector`` holds the offending design."""

    def __init__(self, message, vector=None):
        super().__init__(message)
        self.vector = vector


@dataclass(frozen=True)
class Evaluation:
    objective: float
    violation: float
    feasible: bool
    eval_id: int = 0


def rank_key(ev: Evaluation) -> tuple:
    """Sort key: feasible designs by objective, then infeasible ones by violation."""
    if ev.feasible:
        return (0, ev.objective)
    return (1, ev.violation)


def better(a: Evaluation, b: Evaluation) -> bool:
    """Strictly better under the feasibility-first rules; ties keep the incumbent."""
    if a.feasible != b.feasible:
        return a.feasible
    if a.feasible:
        return a.objective < b.objective
    return a.violation < b.violation


class EvalCounter:
    """Monotone, thread-safe evaluation counter."""

    def __init__(self, start: int = 0):
        self._it = itertools.count(start + 1)
        self._lock = threading.Lock()
        self._count = start

    def next(self) -> int:
        with self._lock:
            self._count = next(self._it)
            return self._count

    @property
    def count(self) -> int:
        return self._count


@dataclass
class Problem:
    """A single-objective problem over a :class:`DesignSpace`.

    ``objective``, ``inequality`` and ``equality`` receive the decoded value
    vector. ``inequality`` returns all ``g_j`` (satisfied when ``<= 0``) and
    ``equality`` all ``h_k`` (satisfied when ``|h_k| <= eq_tol``).
    """

    name: str
    space: DesignSpace
    objective: Callable
    inequality: Callable | None = None
    equality: Callable | None = None
    known_optimum: float | None = None
    # reference value used in reports only, never as a stopping threshold
    best_known: float | None = None
    eq_tol: float = 1e-4
    # pairwise distances for permutation problems; enables distance-biased cuts
    distances: np.ndarray | None = field(default=None, repr=False)

    @property
    def reference_optimum(self) -> float | None:
        return self.known_optimum if self.known_optimum is not None else self.best_known

    def violation(self, x) -> float:
        total = 0.0
        if self.inequality is not None:
            g = np.asarray(self.inequality(x), dtype=float)
            total += float(np.maximum(g, 0.0).sum())
        if self.equality is not None:
            h = np.asarray(self.equality(x), dtype=float)
            total += float(np.maximum(np.abs(h) - self.eq_tol, 0.0).sum())
        if math.isnan(total):
            total = math.inf
        return total

    def evaluate(self, vec: DesignVector, counter: EvalCounter) -> Evaluation:
        x = self.space.decode(vec)
        try:
            f = float(self.objective(x))
            viol = self.violation(x)
        except Exception as exc:
            raise EvaluationError(f"evaluation of {self.name} failed: {exc}", vec) from exc
        if math.isnan(f):
            f = math.inf
        return Evaluation(f, viol, viol == 0.0, counter.next())
