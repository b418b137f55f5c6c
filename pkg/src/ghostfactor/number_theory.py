"""Exact integer machinery: residue reduction, preprocessing, trial factors
and the ghost-factor taxonomy.

Everything here works on Python ints, so N may be arbitrarily large.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

__all__ = [
    "ReducedResidue",
    "PreprocessRecord",
    "TrialFactorClass",
    "reduce_residue",
    "preprocess",
    "trial_factors",
    "type_one_horizon",
    "classify",
]

PREPROCESS_MODES = ("none", "basic", "extended")


@dataclass(frozen=True)
class ReducedResidue:
    """Coprime pair with ``N/l = integer + p/q``.

    Factors are stored as ``p = 0, q = 1``.
    """

    p: int
    q: int

    def __post_init__(self):
        if self.q < 1:
            raise ValueError(f"q must be >= 1, got {self.q}")
        if self.q == 1:
            if self.p != 0:
                raise ValueError("factor residue must have p = 0")
        elif not (0 <= self.p < self.q) or math.gcd(self.p, self.q) != 1:
            raise ValueError(f"({self.p}, {self.q}) is not a reduced residue")

    @property
    def is_factor(self) -> bool:
        return self.q == 1

    def __str__(self):
        return f"{self.p}/{self.q}"

    @classmethod
    def parse(cls, text: str) -> "ReducedResidue":
        """Parse ``"P/Q"`` (e.g. ``"1/4"``)."""
        try:
            p_text, q_text = text.split("/")
            p, q = int(p_text), int(q_text)
        except ValueError as exc:
            raise ValueError(f"residue must look like P/Q, got {text!r}") from exc
        if q == 1:
            p = 0
        return cls(p % q if q > 1 else 0, q)


@dataclass(frozen=True)
class PreprocessRecord:
    n: int
    n2: int
    n5: int
    reduced_n: int
    n9: Optional[int] = None

    def reconstruct(self) -> int:
        return 2**self.n2 * 5**self.n5 * 9 ** (self.n9 or 0) * self.reduced_n


class TrialFactorClass(str, enum.Enum):
    FACTOR = "Factor"
    WELL_BEHAVED = "WellBehaved"
    TYPE_I_GHOST = "TypeIGhost"
    TYPE_II_GHOST = "TypeIIGhost"

    def __str__(self):
        return self.value


def reduce_residue(n: int, l: int) -> ReducedResidue:
    """Reduce ``n/l`` to its fractional part ``p/q`` in lowest terms."""
    if n < 1 or l < 1:
        raise ValueError("n and l must be positive")
    g = math.gcd(n, l)
    q = l // g
    if q == 1:
        return ReducedResidue(0, 1)
    return ReducedResidue((n // g) % q, q)


def _digit_sum(n: int) -> int:
    return sum(int(c) for c in str(n))


def preprocess(n: int, extended: bool = False) -> PreprocessRecord:
    """Strip factors of 2 and 5 (and 9 when ``extended``) from ``n``.

    The 5 and 9 stages use the decimal last-digit and digit-sum tests, the
    same cheap checks an experimentalist would do by hand.
    """
    if n < 1:
        raise ValueError("n must be positive")
    original = n
    n2 = 0
    while n % 2 == 0:
        n //= 2
        n2 += 1
    n5 = 0
    while n % 10 == 5:
        n //= 5
        n5 += 1
    n9 = None
    if extended:
        n9 = 0
        while _digit_sum(n) % 9 == 0:
            n //= 9
            n9 += 1
    return PreprocessRecord(n=original, n2=n2, n5=n5, reduced_n=n, n9=n9)


def trial_factors(reduced_n: int, l_max: int, mode: str | bool = "basic") -> list[int]:
    """Trial factors ``2 <= l <= l_max`` to run for ``reduced_n``.

    ``mode`` is ``"none"``, ``"basic"`` (odd, not a multiple of 5) or
    ``"extended"`` (additionally not a multiple of 9). A bool is accepted
    as shorthand for ``"basic"`` / ``"none"``.
    """
    if isinstance(mode, bool):
        mode = "basic" if mode else "none"
    if mode not in PREPROCESS_MODES:
        raise ValueError(f"unknown preprocessing mode {mode!r}")
    if l_max < 2:
        return []
    if mode == "none":
        return list(range(2, l_max + 1))
    out = [l for l in range(3, l_max + 1, 2) if l % 5]
    if mode == "extended":
        out = [l for l in out if l % 9]
    return out


def type_one_horizon(n: int) -> int:
    """Smallest pulse count meeting ``(N/4)**(1/4) <= M``, exactly."""
    m = max(1, math.isqrt(math.isqrt(max(n // 4, 1))))
    while 4 * m**4 < n:
        m += 1
    while m > 1 and 4 * (m - 1) ** 4 >= n:
        m -= 1
    return m


def classify(n: int, l: int, m_lower: int | None = None, epsilon: float = 0.1) -> TrialFactorClass:
    """Place trial factor ``l`` of ``n`` in the four-way taxonomy.

    Type II ghosts are the residues whose full-period sum plateaus
    (``q % 4 in {0, 1}``). Among the rest, a trial factor whose truncated
    Gauss sum at ``m_lower`` pulses still exceeds ``epsilon`` in magnitude
    is a Type I ghost.
    """
    # imported here to keep gauss_core -> number_theory the only hard edge
    from .gauss_core import gauss_sum

    if not 0 < epsilon < 1:
        raise ValueError("epsilon must be in (0, 1)")
    r = reduce_residue(n, l)
    if r.q == 1:
        return TrialFactorClass.FACTOR
    if r.q % 4 in (0, 1):
        return TrialFactorClass.TYPE_II_GHOST
    if m_lower is None:
        m_lower = type_one_horizon(n)
    if abs(gauss_sum(m_lower, r).value) > epsilon:
        return TrialFactorClass.TYPE_I_GHOST
    return TrialFactorClass.WELL_BEHAVED
