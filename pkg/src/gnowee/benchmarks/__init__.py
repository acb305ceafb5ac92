"""Benchmark problems: analytic functions, engineering designs and TSPLIB tours."""

from .analytic import ANALYTIC, ackley, analytic_suite, dejong, easom, griewank, rastrigin, rosenbrock
from .engineering import (
    MI_SPRING_WIRE_DIAMETERS,
    engineering_suite,
    mi_pressure_vessel,
    mi_spring,
    pressure_vessel,
    speed_reducer,
    spring,
    welded_beam,
)
from .registry import (
    DATA_ENV,
    BenchmarkInfo,
    UnknownProblemError,
    data_file,
    describe,
    get_problem,
    load_optima,
    load_tsp,
    problem_names,
    tsp_problem,
)
from .tsp import TsplibError, TspInstance, UnsupportedEdgeWeightType, distance_matrix, parse_tsplib, tour_length

__all__ = [
    "ANALYTIC",
    "DATA_ENV",
    "MI_SPRING_WIRE_DIAMETERS",
    "BenchmarkInfo",
    "TspInstance",
    "TsplibError",
    "UnknownProblemError",
    "UnsupportedEdgeWeightType",
    "ackley",
    "analytic_suite",
    "data_file",
    "dejong",
    "describe",
    "distance_matrix",
    "easom",
    "engineering_suite",
    "get_problem",
    "griewank",
    "load_optima",
    "load_tsp",
    "mi_pressure_vessel",
    "mi_spring",
    "parse_tsplib",
    "pressure_vessel",
    "problem_names",
    "rastrigin",
    "rosenbrock",
    "speed_reducer",
    "spring",
    "tour_length",
    "tsp_problem",
    "welded_beam",
]
