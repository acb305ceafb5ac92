"""Constrained engineering design problems.

Each problem has an ``*_objective`` and a ``*_constraints`` function of the
decoded design vector (constraints are satisfied when ``<= 0``), plus a
combined function returning both. Formulas and their sources are listed in
BENCHMARKS.md.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "MI_SPRING_WIRE_DIAMETERS",
    "engineering_suite",
    "mi_pressure_vessel",
    "mi_spring",
    "pressure_vessel",
    "speed_reducer",
    "spring",
    "welded_beam",
]


# -- pressure vessel: x = [R, L, t_s, t_h] -----------------------------------


def pressure_vessel_objective(x) -> float:
    r, length, ts, th = (float(v) for v in x)
    return 0.6224 * r * length * ts + 1.7781 * r * r * th + 3.1611 * length * ts * ts + 19.8621 * r * th * th


def pressure_vessel_constraints(x) -> np.ndarray:
    r, length, ts, th = (float(v) for v in x)
    return np.array(
        [
            -ts + 0.01932 * r,
            -th + 0.00954 * r,
            -math.pi * r * r * length - 4.0 / 3.0 * math.pi * r**3 + 750.0 * 1728.0,
            -240.0 + length,
        ]
    )


def pressure_vessel(x):
    return pressure_vessel_objective(x), pressure_vessel_constraints(x)


def mi_pressure_vessel(x):
    """Same formulas as :func:`pressure_vessel`; only the design space differs."""
    return pressure_vessel(x)


# -- welded beam: x = [h, l, t, b] -------------------------------------------


def welded_beam_objective(x) -> float:
    h, l, t, b = (float(v) for v in x)
    return 1.10471 * h * h * l + 0.04811 * t * b * (14.0 + l)


def welded_beam_constraints(x) -> np.ndarray:
    h, l, t, b = (float(v) for v in x)
    p, span, e, g = 6000.0, 14.0, 30e6, 12e6
    tau_p = p / (math.sqrt(2.0) * h * l)
    m = p * (span + l / 2.0)
    r = math.sqrt(l * l / 4.0 + ((h + t) / 2.0) ** 2)
    j = 2.0 * (math.sqrt(2.0) * h * l * (l * l / 12.0 + ((h + t) / 2.0) ** 2))
    tau_pp = m * r / j
    tau = math.sqrt(tau_p**2 + 2.0 * tau_p * tau_pp * l / (2.0 * r) + tau_pp**2)
    sigma = 6.0 * p * span / (b * t * t)
    delta = 4.0 * p * span**3 / (e * t**3 * b)
    p_c = 4.013 * e * math.sqrt(t * t * b**6 / 36.0) / span**2 * (1.0 - t / (2.0 * span) * math.sqrt(e / (4.0 * g)))
    return np.array(
        [
            tau - 13600.0,
            sigma - 30000.0,
            h - b,
            0.10471 * h * h + 0.04811 * t * b * (14.0 + l) - 5.0,
            0.125 - h,
            delta - 0.25,
            p - p_c,
        ]
    )


def welded_beam(x):
    return welded_beam_objective(x), welded_beam_constraints(x)


# -- speed reducer: x = [x1 .. x7], x3 the pinion tooth count ----------------


def speed_reducer_objective(x) -> float:
    x1, x2, x3, x4, x5, x6, x7 = (float(v) for v in x)
    return (
        0.7854 * x1 * x2**2 * (3.3333 * x3**2 + 14.9334 * x3 - 43.0934)
        - 1.508 * x1 * (x6**2 + x7**2)
        + 7.4777 * (x6**3 + x7**3)
        + 0.7854 * (x4 * x6**2 + x5 * x7**2)
    )


def speed_reducer_constraints(x) -> np.ndarray:
    x1, x2, x3, x4, x5, x6, x7 = (float(v) for v in x)
    return np.array(
        [
            27.0 / (x1 * x2**2 * x3) - 1.0,
            397.5 / (x1 * x2**2 * x3**2) - 1.0,
            1.93 * x4**3 / (x2 * x3 * x6**4) - 1.0,
            1.93 * x5**3 / (x2 * x3 * x7**4) - 1.0,
            math.sqrt((745.0 * x4 / (x2 * x3)) ** 2 + 16.9e6) / (110.0 * x6**3) - 1.0,
            math.sqrt((745.0 * x5 / (x2 * x3)) ** 2 + 157.5e6) / (85.0 * x7**3) - 1.0,
            x2 * x3 / 40.0 - 1.0,
            5.0 * x2 / x1 - 1.0,
            x1 / (12.0 * x2) - 1.0,
            (1.5 * x6 + 1.9) / x4 - 1.0,
            (1.1 * x7 + 1.9) / x5 - 1.0,
        ]
    )


def speed_reducer(x):
    return speed_reducer_objective(x), speed_reducer_constraints(x)


# -- tension/compression spring: x = [d, D, N] -------------------------------


def spring_objective(x) -> float:
    d, big_d, n = (float(v) for v in x)
    return (n + 2.0) * big_d * d * d


def spring_constraints(x) -> np.ndarray:
    d, big_d, n = (float(v) for v in x)
    return np.array(
        [
            1.0 - big_d**3 * n / (71785.0 * d**4),
            (4.0 * big_d**2 - d * big_d) / (12566.0 * (big_d * d**3 - d**4)) + 1.0 / (5108.0 * d * d) - 1.0,
            1.0 - 140.45 * d / (big_d * big_d * n),
            (big_d + d) / 1.5 - 1.0,
        ]
    )


def spring(x):
    return spring_objective(x), spring_constraints(x)


# -- mixed-integer spring: x = [N, D, d] -------------------------------------

MI_SPRING_WIRE_DIAMETERS = (
    0.009, 0.0095, 0.0104, 0.0118, 0.0128, 0.0132, 0.014, 0.015, 0.0162, 0.0173,
    0.018, 0.020, 0.023, 0.025, 0.028, 0.032, 0.035, 0.041, 0.047, 0.054,
    0.063, 0.072, 0.080, 0.092, 0.105, 0.120, 0.135, 0.148, 0.162, 0.177,
    0.192, 0.207, 0.225, 0.244, 0.263, 0.283, 0.307, 0.331, 0.362, 0.394,
    0.4375, 0.500,
)  # fmt: skip

_F_MAX, _S, _L_MAX, _D_MIN, _COIL_MAX = 1000.0, 189000.0, 14.0, 0.2, 3.0
_F_P, _SIGMA_PM, _SIGMA_W, _G = 300.0, 6.0, 1.25, 11.5e6


def mi_spring_objective(x) -> float:
    n, big_d, d = (float(v) for v in x)
    return math.pi**2 * big_d * d * d * (n + 2.0) / 4.0


def mi_spring_constraints(x) -> np.ndarray:
    n, big_d, d = (float(v) for v in x)
    c = big_d / d
    c_f = (4.0 * c - 1.0) / (4.0 * c - 4.0) + 0.615 / c
    k = _G * d**4 / (8.0 * n * big_d**3)
    s_p = _F_P / k
    l_f = _F_MAX / k + 1.05 * (n + 2.0) * d
    return np.array(
        [
            8.0 * c_f * _F_MAX * big_d / (math.pi * d**3) - _S,
            l_f - _L_MAX,
            _D_MIN - d,
            big_d + d - _COIL_MAX,
            3.0 - c,
            s_p - _SIGMA_PM,
            # s_p + (F_max - F_p)/K + 1.05(N+2)d - l_f, which cancels to zero;
            # written in cancelled form so rounding cannot make it positive
            (_F_P + (_F_MAX - _F_P) - _F_MAX) / k,
            _SIGMA_W - (_F_MAX - _F_P) / k,
        ]
    )


def mi_spring(x):
    return mi_spring_objective(x), mi_spring_constraints(x)


_SUITE = {
    "pressure-vessel": pressure_vessel,
    "mi-pressure-vessel": mi_pressure_vessel,
    "welded-beam": welded_beam,
    "speed-reducer": speed_reducer,
    "spring": spring,
    "mi-spring": mi_spring,
}


def engineering_suite(name: str, x):
    """``(objective, constraints)`` of the named engineering problem at ``x``."""
    try:
        func = _SUITE[name.lower()]
    except KeyError:
        raise KeyError(f"unknown engineering problem {name!r}; choose from {sorted(_SUITE)}") from None
    return func(x)
