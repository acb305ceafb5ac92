"""Lévy-stable sampling with the Mantegna algorithm and truncated Lévy flights.

Samples are generated as the ratio of two normal variates, pushed through
Mantegna's nonlinear transform, and summed::

    nu = x / |y|**(1/alpha)            x ~ N(0, sigma_x(alpha)), y ~ N(0, 1)
    w  = nu * ((K(alpha) - 1) * exp(-|nu| / C(alpha)) + 1)
    z  = gamma**(1/alpha) * n**(-1/alpha) * sum(w_1 .. w_n)

``sigma_x`` and ``K`` are closed form; ``C`` is the root of an integral
equation and is solved numerically once per ``alpha`` and cached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import gamma as gamma_fn

__all__ = [
    "TRUNC_SCALE",
    "ConvergenceError",
    "LevyParams",
    "c_integrals",
    "levy_sample",
    "mantegna_k",
    "mantegna_sigma_x",
    "solve_c",
    "tlf_sample",
]

#: |z| is divided by this before truncation to [0, 1].
TRUNC_SCALE = 10.0

_TLF_MAX_REDRAWS = 1000
_TAIL_CUTOFF = 1e-14


class ConvergenceError(RuntimeError):
    """Raised when the C(alpha) root finder cannot bracket or resolve a root."""


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (0, 2], got {alpha!r}")
    return alpha


@dataclass(frozen=True)
class LevyParams:
    """Index ``alpha``, scale ``gamma`` and summand count ``n`` of a Lévy draw."""

    alpha: float = 0.5
    gamma: float = 1.0
    n: int = 1

    def __post_init__(self):
        _check_alpha(self.alpha)
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")


@lru_cache(maxsize=None)
def mantegna_sigma_x(alpha: float) -> float:
    """Standard deviation of the numerator variate for ``sigma_y = 1``."""
    a = _check_alpha(alpha)
    num = gamma_fn(1.0 + a) * math.sin(math.pi * a / 2.0)
    den = gamma_fn((1.0 + a) / 2.0) * a * 2.0 ** ((a - 1.0) / 2.0)
    return float((num / den) ** (1.0 / a))


@lru_cache(maxsize=None)
def mantegna_k(alpha: float) -> float:
    a = _check_alpha(alpha)
    lead = a * gamma_fn((a + 1.0) / (2.0 * a)) / gamma_fn(1.0 / a)
    inner = a * gamma_fn((a + 1.0) / 2.0) / (gamma_fn(1.0 + a) * math.sin(math.pi * a / 2.0))
    return float(lead * inner ** (1.0 / a))


def _upper_limit(log_integrand, start: float = 1.0) -> float:
    # Doubling search for a point past which the integrand is negligible.
    u = start
    while log_integrand(u) > math.log(_TAIL_CUTOFF) or u < 4.0:
        u *= 2.0
    return u


@lru_cache(maxsize=None)
def _rhs_integral(alpha: float) -> float:
    a = alpha
    upper = _upper_limit(lambda q: -(q**a))
    value, _ = integrate.quad(
        lambda q: math.exp(-(q**a)), 0.0, upper, epsabs=0.0, epsrel=1e-13, limit=400
    )
    return value


def c_integrals(c: float, alpha: float) -> tuple[float, float]:
    """Left and right sides of the integral equation that defines C(alpha).

    The right side's cosine factor does not involve the integration variable,
    so it multiplies the integral of ``exp(-q**alpha)``.
    """
    a = _check_alpha(alpha)
    sx = mantegna_sigma_x(a)
    k = mantegna_k(a)
    coef = c * c / (2.0 * sx * sx)

    def log_f(q):
        return math.log(q) / a - q * q / 2.0 - coef * q ** (2.0 / a)

    upper = _upper_limit(log_f)
    lhs, _ = integrate.quad(
        lambda q: q ** (1.0 / a) * math.exp(-q * q / 2.0 - coef * q ** (2.0 / a)),
        0.0,
        upper,
        epsabs=0.0,
        epsrel=1e-13,
        limit=400,
    )
    lhs /= math.pi * sx
    rhs = math.cos(((k - 1.0) / math.e + 1.0) * c) * _rhs_integral(a) / math.pi
    return lhs, rhs


def _residual(c: float, alpha: float) -> float:
    lhs, rhs = c_integrals(c, alpha)
    return lhs - rhs


@lru_cache(maxsize=None)
def _solve_c_cached(alpha: float, rtol: float, max_iter: int) -> float:
    # Geometric scan for the first sign change, then plain bisection.
    lo = 1e-3
    f_lo = _residual(lo, alpha)
    if f_lo == 0.0:
        return lo
    hi = f_hi = None
    for _ in range(max_iter):
        c = lo * 1.25
        f_c = _residual(c, alpha)
        if f_c == 0.0:
            return c
        if math.copysign(1.0, f_c) != math.copysign(1.0, f_lo):
            hi, f_hi = c, f_c
            break
        lo, f_lo = c, f_c
    if hi is None:
        raise ConvergenceError(
            f"no sign change of the C(alpha) residual found for alpha={alpha} "
            f"within {max_iter} scan steps"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lhs, rhs = c_integrals(mid, alpha)
        f_mid = lhs - rhs
        if abs(f_mid) <= rtol * 1e-3 * max(abs(lhs), abs(rhs)) or hi - lo <= 4e-16 * hi:
            return mid
        if math.copysign(1.0, f_mid) == math.copysign(1.0, f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    mid = 0.5 * (lo + hi)
    lhs, rhs = c_integrals(mid, alpha)
    if abs(lhs - rhs) > rtol * max(abs(lhs), abs(rhs)):
        raise ConvergenceError(f"bisection for C(alpha={alpha}) did not converge")
    return mid


def solve_c(alpha: float, rtol: float = 1e-8, max_iter: int = 200) -> float:
    """Smallest positive root of the C(alpha) integral equation.

    ``max_iter`` bounds the bracketing scan; ``ConvergenceError`` is raised
    when no bracket is found within it.
    """
    return _solve_c_cached(_check_alpha(alpha), float(rtol), int(max_iter))


def levy_sample(params: LevyParams, rng: np.random.Generator, size=None):
    """Draw Lévy-stable samples; a float when ``size`` is None, else an array.

    Draw order is fixed: all ``x`` normals first, then all ``y`` normals, each
    of shape ``size + (n,)``.
    """
    a = params.alpha
    sx = mantegna_sigma_x(a)
    k = mantegna_k(a)
    c = solve_c(a)
    shape = (params.n,) if size is None else tuple(np.atleast_1d(size)) + (params.n,)
    x = rng.normal(0.0, sx, shape)
    y = rng.normal(0.0, 1.0, shape)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        nu = x / np.abs(y) ** (1.0 / a)
        w = nu * ((k - 1.0) * np.exp(-np.abs(nu) / c) + 1.0)
    z = params.gamma ** (1.0 / a) * params.n ** (-1.0 / a) * w.sum(axis=-1)
    if size is None:
        return float(z)
    return z


def tlf_sample(alpha: float, gamma: float, rng: np.random.Generator, size=None, n: int = 1):
    """Truncated Lévy flight on [0, 1] by rejection of ``|z| / TRUNC_SCALE > 1``."""
    params = LevyParams(alpha, gamma, n)
    if size is None:
        for _ in range(_TLF_MAX_REDRAWS):
            t = abs(levy_sample(params, rng)) / TRUNC_SCALE
            if t <= 1.0:
                return t
        raise RuntimeError("truncated Lévy flight exceeded its redraw cap")
    out = np.abs(levy_sample(params, rng, size)) / TRUNC_SCALE
    bad = ~(out <= 1.0)
    for _ in range(_TLF_MAX_REDRAWS):
        m = int(bad.sum())
        if m == 0:
            return out
        out[bad] = np.abs(levy_sample(params, rng, m)) / TRUNC_SCALE
        bad = ~(out <= 1.0)
    raise RuntimeError("truncated Lévy flight exceeded its redraw cap")
