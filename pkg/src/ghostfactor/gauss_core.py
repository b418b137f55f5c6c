"""Ideal (noiseless) real Gauss summands and truncated sums."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .number_theory import ReducedResidue, reduce_residue

__all__ = [
    "GaussSumValue",
    "summand",
    "summands",
    "gauss_sum",
    "quadratic_gauss_plateau",
    "brute_force_plateau",
    "signal",
]


@dataclass(frozen=True)
class GaussSumValue:
    value: float
    m_used: int


def summand(m: int, r: ReducedResidue) -> float:
    """``cos(2 pi m^2 p/q)`` with ``m^2 p`` reduced mod ``q`` first."""
    if r.q == 1:
        return 1.0
    k = (m * m * r.p) % r.q
    return math.cos(2.0 * math.pi * k / r.q)


def summands(m_max: int, r: ReducedResidue) -> np.ndarray:
    """All summands for ``m = 0..m_max`` as an array."""
    if r.q == 1:
        return np.ones(m_max + 1)
    m = np.arange(m_max + 1, dtype=object)
    k = np.array((m * m * r.p) % r.q, dtype=np.float64)
    return np.cos(2.0 * np.pi * k / r.q)


def gauss_sum(m_max: int, r: ReducedResidue) -> GaussSumValue:
    """Truncated Gauss sum ``C^(M) = mean(summand(0..M))``."""
    if m_max < 0:
        raise ValueError("m_max must be nonnegative")
    if r.q == 1:
        return GaussSumValue(1.0, m_max)
    return GaussSumValue(float(np.mean(summands(m_max, r))), m_max)


def brute_force_plateau(q: int) -> float:
    """Full-period mean ``(1/q) sum cos(2 pi m^2 / q)`` by direct summation."""
    if q < 1:
        raise ValueError("q must be >= 1")
    return math.fsum(math.cos(2.0 * math.pi * ((m * m) % q) / q) for m in range(q)) / q


def quadratic_gauss_plateau(q: int) -> float:
    """Value a ``p = 1`` trial factor settles at over complete periods.

    Gauss's closed form ``1/sqrt(q)`` covers ``q % 4 in {0, 1}``; for the
    other residues the direct sum is returned (it vanishes up to rounding).
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if q % 4 in (0, 1):
        return 1.0 / math.sqrt(q)
    return brute_force_plateau(q)


def signal(m_max: int, n: int, l: int) -> float:
    """Expected measured probability ``(1 + C^(M)) / 2`` for trial factor ``l``."""
    return 0.5 * (1.0 + gauss_sum(m_max, reduce_residue(n, l)).value)
