"""Gnowee: a hybrid metaheuristic for mixed-integer and combinatorial design optimization."""

from .engine import ConvergenceCriteria, GnoweeSettings, RunResult, SettingsError, Termination, run
from .levy import LevyParams, levy_sample, tlf_sample
from .operators import OperatorFractions
from .problem import Evaluation, EvaluationError, Problem, better
from .space import DesignSpace, DesignVector, Kind, SpaceError, VariableSpec

__all__ = [
    "ConvergenceCriteria",
    "DesignSpace",
    "DesignVector",
    "Evaluation",
    "EvaluationError",
    "GnoweeSettings",
    "Kind",
    "LevyParams",
    "OperatorFractions",
    "Problem",
    "RunResult",
    "SettingsError",
    "SpaceError",
    "Termination",
    "VariableSpec",
    "better",
    "levy_sample",
    "run",
    "tlf_sample",
]
