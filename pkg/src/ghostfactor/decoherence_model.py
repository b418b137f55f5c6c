"""Noisy Gauss sums under exponential T2 decay and the figures of merit
built on them: cutoff, discernability, contrast and the pulse-count bound.

Decay enters through the dimensionless ``x = Gamma_2 * (tau + t_pi)``,
i.e. ``tau0 / T2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .gauss_core import quadratic_gauss_plateau, summand, summands
from .number_theory import ReducedResidue

__all__ = [
    "DiscernabilityReport",
    "ContrastReport",
    "InfeasibleTarget",
    "noisy_summand",
    "noisy_gauss_sum",
    "noisy_gauss_factor_closed",
    "noisy_gauss_worst_closed",
    "cutoff",
    "discernability_closed",
    "discernability_exact",
    "discernability_empirical",
    "discernability_ceiling",
    "adjusted_discernability",
    "discernability_report",
    "contrast",
    "lambert_w0",
    "max_discernability",
    "m_max",
    "largest_factorizable",
]


class InfeasibleTarget(ValueError):
    """The requested discernability cannot be reached at any pulse count."""


@dataclass(frozen=True)
class DiscernabilityReport:
    d_value: float
    m_used: int
    t2_factor: float
    t2_worst: float
    tau0: float

    def __post_init__(self):
        if not (-2.0 <= self.d_value <= 1.0 + 1e-9):
            raise ValueError(f"discernability {self.d_value} out of range")


@dataclass(frozen=True)
class ContrastReport:
    v_value: float
    a_mean: float


def noisy_summand(m: int, r: ReducedResidue, gamma2_tau0: float) -> float:
    if gamma2_tau0 < 0:
        raise ValueError("gamma2_tau0 must be nonnegative")
    return summand(m, r) * math.exp(-(m + 1) * gamma2_tau0)


def noisy_gauss_sum(m_max: int, r: ReducedResidue, gamma2_tau0: float) -> float:
    """Mean of the decaying summands over ``m = 0..m_max`` (direct sum)."""
    if gamma2_tau0 < 0:
        raise ValueError("gamma2_tau0 must be nonnegative")
    m = np.arange(m_max + 1)
    return float(np.mean(summands(m_max, r) * np.exp(-(m + 1) * gamma2_tau0)))


def noisy_gauss_factor_closed(m_max: int, gamma2_tau0: float) -> float:
    """Geometric-series form of the decaying ``q = 1`` sum."""
    x = gamma2_tau0
    if x < 0:
        raise ValueError("gamma2_tau0 must be nonnegative")
    if x == 0:
        return 1.0
    # written with negative exponents only so huge x cannot overflow
    return math.expm1(-(m_max + 1) * x) * math.exp(-x) / ((m_max + 1) * math.expm1(-x))


def noisy_gauss_worst_closed(m_max: int, gamma2_tau0: float) -> float:
    """Geometric-series form of the decaying ``q = 4`` sum, exact in ``floor(M/2)``."""
    x = gamma2_tau0
    if x < 0:
        raise ValueError("gamma2_tau0 must be nonnegative")
    half = m_max // 2
    if x == 0:
        return (half + 1) / (m_max + 1)
    return math.expm1(-(2 * half + 2) * x) * math.exp(-x) / ((m_max + 1) * math.expm1(-2 * x))


def cutoff(m_max: int, gamma2_tau0_factor: float, gamma2_tau0_worst: float | None = None,
           literal: bool = False) -> float:
    """Signal threshold halfway between the predicted factor and worst-ghost signals.

    ``literal=True`` instead returns the bare average of the two noisy Gauss
    sums, which is not a probability and sits at 0.75 rather than 0.875 in
    the noiseless limit; it is kept only for comparison.
    """
    if gamma2_tau0_worst is None:
        gamma2_tau0_worst = gamma2_tau0_factor
    cf = noisy_gauss_factor_closed(m_max, gamma2_tau0_factor)
    cw = noisy_gauss_worst_closed(m_max, gamma2_tau0_worst)
    if literal:
        return 0.5 * (cf + cw)
    return 0.5 * (0.5 * (1 + cf) + 0.5 * (1 + cw))


def discernability_closed(m_max: int, gamma2_tau0: float) -> float:
    """Large-M closed form ``(1 - e^{-Mx}) / ((M+1)(e^{2x} - 1))``."""
    x = gamma2_tau0
    if x < 0:
        raise ValueError("gamma2_tau0 must be nonnegative")
    if x == 0:
        return m_max / (2.0 * (m_max + 1))
    return math.expm1(-m_max * x) * math.exp(-2 * x) / ((m_max + 1) * math.expm1(-2 * x))


def discernability_exact(m_max: int, gamma2_tau0: float) -> float:
    """Exact ``C_factor - C_worst`` from the two geometric sums."""
    return noisy_gauss_factor_closed(m_max, gamma2_tau0) - noisy_gauss_worst_closed(m_max, gamma2_tau0)


def discernability_empirical(signal_factor: float, signal_worst: float) -> float:
    return 2.0 * (signal_factor - signal_worst)


def discernability_ceiling(q: int) -> float:
    """Noiseless, long-sequence discernability when the worst ghost has residue ``q``."""
    return 1.0 - quadratic_gauss_plateau(q)


def adjusted_discernability(m_max: int, t2_factor: float, t2_worst: float, tau0: float) -> float:
    """Discernability when factors and q=4 ghosts dephase with different T2."""
    if min(t2_factor, t2_worst, tau0) <= 0:
        raise ValueError("times must be positive")
    return noisy_gauss_factor_closed(m_max, tau0 / t2_factor) - noisy_gauss_worst_closed(m_max, tau0 / t2_worst)


def discernability_report(m_max: int, t2_factor: float, tau0: float,
                          t2_worst: float | None = None) -> DiscernabilityReport:
    t2_worst = t2_factor if t2_worst is None else t2_worst
    return DiscernabilityReport(
        d_value=adjusted_discernability(m_max, t2_factor, t2_worst, tau0),
        m_used=m_max,
        t2_factor=t2_factor,
        t2_worst=t2_worst,
        tau0=tau0,
    )


def contrast(signals: Mapping[int, float], factor_set: Iterable[int]) -> ContrastReport:
    """Michelson-style contrast from the mean ``|2 Pr - 1|`` of the nonfactors."""
    factors = set(factor_set)
    rest = [s for l, s in signals.items() if l not in factors]
    if not rest:
        raise ValueError("contrast needs at least one nonfactor")
    a = float(np.mean([abs(2.0 * s - 1.0) for s in rest]))
    return ContrastReport(v_value=(1.0 - a) / (1.0 + a), a_mean=a)


_INV_E = math.exp(-1.0)


def lambert_w0(x: float, tol: float = 1e-12, max_iter: int = 50) -> float:
    """Principal branch of the Lambert W function for real ``x >= -1/e``.

    Halley iteration from a branch-point series (near ``-1/e``), ``log1p``
    (moderate ``x``) or the two-term asymptotic ``log x - log log x``.
    """
    if math.isnan(x):
        raise ValueError("x is NaN")
    if x < -_INV_E:
        # allow rounding slop when callers pass a computed -1/e
        if x < -_INV_E * (1 + 4e-16):
            raise ValueError(f"lambert_w0 undefined for x = {x} < -1/e")
        return -1.0
    if x == 0:
        return 0.0
    if math.isinf(x):
        return math.inf

    if x < -0.25:
        p = math.sqrt(max(2.0 * (math.e * x + 1.0), 0.0))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    elif x < 3.0:
        w = math.log1p(x)
        w = w * (1.0 - math.log1p(w) / (2.0 + w))
    else:
        lx = math.log(x)
        w = lx - math.log(lx)

    for _ in range(max_iter):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w_new = w - step
        if abs(step) <= tol * (1.0 + abs(w_new)):
            w = w_new
            break
        w = w_new
    return max(w, -1.0)


def max_discernability(tau0_over_t2: float, m_limit: int = 10**7) -> tuple[int, float]:
    """Peak of the large-M closed form over integer pulse counts."""
    x = tau0_over_t2
    # the continuous maximiser sits near sqrt(2/x); scan a window around it
    guess = math.sqrt(2.0 / x) if x > 0 else m_limit
    hi = int(min(m_limit, max(10, 10 * guess)))
    ms = np.arange(1, hi + 1)
    d = -np.expm1(-ms * x) / ((ms + 1) * np.expm1(2 * x)) if x > 0 else ms / (2.0 * (ms + 1))
    k = int(np.argmax(d))
    return int(ms[k]), float(d[k])


def m_max(d_target: float, t2: float, tau0: float) -> int:
    """Largest pulse count keeping the large-M discernability above ``d_target``.

    Inverts ``discernability_closed`` on its decreasing side with the
    principal Lambert W branch, with ``M0 = t2 / tau0`` kept real.
    """
    if not 0 < d_target < 1:
        raise ValueError("d_target must be in (0, 1)")
    if t2 <= 0 or tau0 <= 0:
        raise ValueError("t2 and tau0 must be positive")
    m0 = t2 / tau0
    mu = math.expm1(2.0 / m0)
    a = 1.0 / (mu * d_target)
    arg = -(a / m0) * math.exp(-(a - 1.0) / m0)
    if arg < -_INV_E * (1 + 4e-16):
        raise InfeasibleTarget(
            f"D_target={d_target} exceeds the maximum discernability "
            f"{max_discernability(1.0 / m0)[1]:.4f} reachable with T2/tau0={m0:.4g}"
        )
    value = m0 * lambert_w0(max(arg, -_INV_E)) + a - 1.0
    if value < 0:
        raise InfeasibleTarget(f"D_target={d_target} is not reachable with T2/tau0={m0:.4g}")
    return int(math.floor(value + 1e-9))


def largest_factorizable(m: int) -> tuple[int, float]:
    """``N`` bound from the Type I lower limit ``(N/4)^(1/4) <= M``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    n_bound = 4 * m**4
    return n_bound, math.log10(n_bound)
