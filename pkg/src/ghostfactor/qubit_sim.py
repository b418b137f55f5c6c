"""Liouville-space simulation of the Gauss-sum pi-pulse train.

States are Bloch 4-vectors ``(1, x, y, z)``; the overall ``1/sqrt(2)`` of the
vectorized density operator is dropped since every map here is linear.

Conventions
-----------
* ``r = (0, 0, +1)`` is the ground state ``|0>``, the relaxation target.
* Rotations are right-handed: ``rotation_superop(pi/2, pi/2)`` takes
  ``+z`` to ``+x``.
* A detuning ``delta_omega`` makes the free evolution precess as
  ``rotation_superop_z(-delta_omega * t)``, which reproduces the sign of the
  textbook Bloch-Redfield free-evolution matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LiouvilleState",
    "PulseSchedule",
    "DecoherenceParams",
    "rotation_matrix",
    "rotation_superop",
    "rotation_superop_z",
    "damping_superop",
    "dephasing_superop",
    "bloch_redfield_superop",
    "gauss_phases",
    "residue_phases",
    "sequence_probabilities",
    "evolve_sequence",
    "rodriguez_compose",
    "composed_probability",
    "closed_form_rotation",
    "monte_carlo_detuned_probabilities",
    "monte_carlo_detuned_signal",
    "shot_rng",
]


@dataclass
class LiouvilleState:
    r: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        if self.r.shape != (3,):
            raise ValueError("Bloch vector must have 3 components")
        if np.linalg.norm(self.r) > 1 + 1e-9:
            raise ValueError(f"|r| = {np.linalg.norm(self.r)} exceeds 1")

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate(([1.0], self.r))

    @classmethod
    def from_vector(cls, v) -> "LiouvilleState":
        v = np.asarray(v, dtype=float)
        return cls(v[1:] / v[0])

    def prob_one(self) -> float:
        """Probability of measuring ``|1>``."""
        return 0.5 * (1.0 - self.r[2])


@dataclass
class PulseSchedule:
    """Timing of the pulse train; times in ns, rates in rad/ns."""

    tau: float
    t_pi: float
    m_max: int
    omega_rabi: float | None = None
    phi_i: float = math.pi / 2
    phi_f: float = math.pi / 2

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")
        if self.t_pi <= 0:
            raise ValueError("t_pi must be positive")
        if self.m_max < 0:
            raise ValueError("m_max must be nonnegative")
        if self.omega_rabi is None:
            self.omega_rabi = math.pi / self.t_pi
        if abs(self.omega_rabi * self.t_pi - math.pi) > 1e-9:
            raise ValueError("omega_rabi * t_pi must equal pi")

    @property
    def tau0(self) -> float:
        return self.tau + self.t_pi


@dataclass
class DecoherenceParams:
    """Relaxation/dephasing times in ns (``inf`` disables) and detuning in rad/ns."""

    t1: float = math.inf
    t2: float = math.inf
    delta_omega: float = 0.0

    def __post_init__(self):
        if self.t1 <= 0 or self.t2 <= 0:
            raise ValueError("t1 and t2 must be positive")
        if self.t2 > 2 * self.t1 * (1 + 1e-12):
            raise ValueError("unphysical: t2 must not exceed 2*t1")

    @property
    def gamma1(self) -> float:
        return 0.0 if math.isinf(self.t1) else 1.0 / self.t1

    @property
    def gamma2(self) -> float:
        return 0.0 if math.isinf(self.t2) else 1.0 / self.t2


def rotation_matrix(theta, axis) -> np.ndarray:
    """Rodrigues 3x3 rotation by ``theta`` about unit ``axis``; broadcasts."""
    theta = np.asarray(theta, dtype=float)
    n = np.asarray(axis, dtype=float)
    c = np.cos(theta)[..., None, None]
    s = np.sin(theta)[..., None, None]
    nx, ny, nz = n[..., 0], n[..., 1], n[..., 2]
    zero = np.zeros_like(nx)
    cross = np.stack(
        [
            np.stack([zero, -nz, ny], axis=-1),
            np.stack([nz, zero, -nx], axis=-1),
            np.stack([-ny, nx, zero], axis=-1),
        ],
        axis=-2,
    )
    outer = n[..., :, None] * n[..., None, :]
    return c * np.eye(3) + (1.0 - c) * outer + s * cross


def _embed(rot3: np.ndarray) -> np.ndarray:
    out = np.zeros(rot3.shape[:-2] + (4, 4))
    out[..., 0, 0] = 1.0
    out[..., 1:, 1:] = rot3
    return out


def _equatorial(phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    return np.stack([np.cos(phi), np.sin(phi), np.zeros_like(phi)], axis=-1)


def rotation_superop(theta: float, phi: float) -> np.ndarray:
    """``diag(1, R(theta, cos(phi) x + sin(phi) y))``."""
    return _embed(rotation_matrix(theta, _equatorial(phi)))


def rotation_superop_z(theta: float) -> np.ndarray:
    return _embed(rotation_matrix(theta, np.array([0.0, 0.0, 1.0])))


def damping_superop(gamma1_t: float) -> np.ndarray:
    """Amplitude damping with survival factor ``exp(-gamma1_t)``."""
    if gamma1_t < 0:
        raise ValueError("gamma1_t must be nonnegative")
    a = math.exp(-gamma1_t)
    out = np.diag([1.0, math.sqrt(a), math.sqrt(a), a])
    out[3, 0] = 1.0 - a
    return out


def dephasing_superop(chi: float) -> np.ndarray:
    """Pure dephasing with coherence factor ``exp(-chi)``."""
    if chi < 0:
        raise ValueError("chi must be nonnegative")
    d = math.exp(-chi)
    return np.diag([1.0, d, d, 1.0])


def _decay_superop(t: float, dec: DecoherenceParams) -> np.ndarray:
    g1, g2 = dec.gamma1, dec.gamma2
    return damping_superop(g1 * t) @ dephasing_superop(max(g2 - 0.5 * g1, 0.0) * t)


def bloch_redfield_superop(t: float, dec: DecoherenceParams) -> np.ndarray:
    """Free evolution for time ``t``: the direct Bloch-Redfield matrix."""
    g1, g2 = dec.gamma1, dec.gamma2
    a = math.exp(-g1 * t)
    e2 = math.exp(-g2 * t)
    c, s = math.cos(dec.delta_omega * t), math.sin(dec.delta_omega * t)
    return np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, c * e2, s * e2, 0.0],
            [0.0, -s * e2, c * e2, 0.0],
            [1.0 - a, 0.0, 0.0, a],
        ]
    )


def gauss_phases(n: int, l: int, m: int) -> np.ndarray:
    """Pulse axis angles ``phi_0..phi_m`` for trial factor ``l`` of ``n``.

    ``phi_k = (-1)^k pi (2k-1) n / l`` with the product reduced mod ``2l``
    in integer arithmetic, so the angles stay exact for huge ``n``.
    """
    out = np.zeros(m + 1)
    for k in range(1, m + 1):
        out[k] = (-1) ** k * math.pi * (((2 * k - 1) * n) % (2 * l)) / l
    return out


def residue_phases(p: int, q: int, m: int) -> np.ndarray:
    """Pulse angles for a sequence whose ``N/l`` is exactly ``p/q``."""
    return gauss_phases(p, q, m) if q > 1 else np.zeros(m + 1)


def _pulse_superops(schedule: PulseSchedule, phases, delta) -> np.ndarray:
    """Pulse maps, shape ``(..., m+1, 4, 4)`` for detunings ``delta`` of shape ``(...)``.

    With detuning the drive-frame rotation vector is
    ``omega_rabi * n_phi - delta * z`` acting for ``t_pi``.
    """
    phases = np.asarray(phases, dtype=float)
    delta = np.asarray(delta, dtype=float)[..., None]
    om = schedule.omega_rabi
    vec = om * _equatorial(phases)
    vec = np.broadcast_to(vec, delta.shape[:-1] + vec.shape).copy()
    vec[..., 2] = -delta
    rate = np.linalg.norm(vec, axis=-1)
    return _embed(rotation_matrix(rate * schedule.t_pi, vec / rate[..., None]))


def _run_blocks(schedule, phases, dec, delta, detuned_pulses):
    """Forward pass returning ``Pr(|1>)`` after each prefix of the pulse train.

    ``delta`` has shape ``(shots,)``; the result has shape ``(shots, m+1)``.
    """
    phases = np.asarray(phases, dtype=float)
    delta = np.atleast_1d(np.asarray(delta, dtype=float))
    shots, m1 = delta.shape[0], phases.shape[0]

    half = schedule.tau0 / 2
    decay = _decay_superop(half, dec)
    free = np.einsum("ij,sjk->sik", decay, _embed(rotation_matrix(-delta * schedule.tau / 2, [0.0, 0.0, 1.0])))
    if detuned_pulses:
        pulses = _pulse_superops(schedule, phases, delta)
    else:
        pulses = np.broadcast_to(rotation_superop(math.pi, phases), (shots, m1, 4, 4))
    init = rotation_superop(math.pi / 2, schedule.phi_i) @ np.array([1.0, 0.0, 0.0, 1.0])
    readout_z = rotation_superop(math.pi / 2, schedule.phi_f)[3]

    v = np.broadcast_to(init, (shots, 4)).copy()
    probs = np.empty((shots, m1))
    for k in range(m1):
        v = np.einsum("sij,sj->si", free, v)
        v = np.einsum("sij,sj->si", pulses[:, k], v)
        v = np.einsum("sij,sj->si", free, v)
        probs[:, k] = 0.5 * (1.0 - v @ readout_z)
    return probs


def sequence_probabilities(
    schedule: PulseSchedule, phases, dec: DecoherenceParams | None = None, detuned_pulses: bool = False
) -> np.ndarray:
    """``Pr(m)`` for every prefix ``m = 0..len(phases)-1`` of one pulse train.

    Each block is free evolution over ``(tau + t_pi)/2``, the pulse, and
    another half interval. With ``detuned_pulses`` the pulse itself is a
    finite rotation about the detuning-tilted axis; otherwise it is an ideal
    pi rotation and a constant detuning echoes away exactly.
    """
    dec = dec or DecoherenceParams()
    return _run_blocks(schedule, phases, dec, [dec.delta_omega], detuned_pulses)[0]


def evolve_sequence(
    schedule: PulseSchedule, phases, dec: DecoherenceParams | None = None, detuned_pulses: bool = False
) -> float:
    """Probability of ``|1>`` after the ``m = schedule.m_max`` pulse train."""
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (schedule.m_max + 1,):
        raise ValueError(f"expected {schedule.m_max + 1} phases, got {phases.shape[0] if phases.ndim else 0}")
    return float(sequence_probabilities(schedule, phases, dec, detuned_pulses)[-1])


def rodriguez_compose(phases) -> tuple[float, np.ndarray]:
    """Resultant ``(gamma, axis)`` of ``R(pi, phi_m) ... R(pi, phi_0)``.

    Composition is carried in half-angle form, one pi pulse at a time. For
    a net identity the axis is reported as ``+z``.
    """
    phases = list(phases)
    if not phases:
        raise ValueError("need at least one phase")
    w, v = 1.0, np.zeros(3)
    for phi in phases:
        n = np.array([math.cos(phi), math.sin(phi), 0.0])
        # second rotation has cos(pi/2) = 0, sin(pi/2) = 1
        w, v = -float(n @ v), w * n + np.cross(n, v)
    s = float(np.linalg.norm(v))
    gamma = 2.0 * math.atan2(s, w)
    axis = v / s if s > 1e-15 else np.array([0.0, 0.0, 1.0])
    return gamma, axis


def composed_probability(phases) -> float:
    """``Pr(|1>)`` for ideal pulses, from the composed rotation alone.

    Equals ``(1 + cos gamma_eff)/2`` with ``cos gamma_eff`` the x-component
    of the rotated ``+x`` Bloch vector.
    """
    gamma, n = rodriguez_compose(phases)
    cos_eff = math.cos(gamma) + (1.0 - math.cos(gamma)) * n[0] ** 2
    return 0.5 * (1.0 + cos_eff)


def closed_form_rotation(n: int, l: int, m: int) -> np.ndarray:
    """Closed-form Bloch rotation of pulses ``1..m`` of the Gauss train.

    With ``theta = pi m^2 n / l`` this is the SU(2) element
    ``cos(theta) + i sin(theta) sigma_z`` for even ``m`` (a z rotation by
    ``-2 theta``) and ``cos(theta) sigma_x + sin(theta) sigma_y`` for odd
    ``m``. The leading ``phi_0 = 0`` pulse is not included, so the full
    train is ``rotation_matrix(pi, x) @ closed_form_rotation(n, l, m)``;
    that pulse leaves ``+x`` alone and so never changes ``Pr(m)``.
    """
    theta = math.pi * ((m * m * n) % (2 * l)) / l
    if m % 2 == 0:
        return rotation_matrix(-2 * theta, np.array([0.0, 0.0, 1.0]))
    return rotation_matrix(math.pi, _equatorial(theta))


def shot_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent stream for ``(seed, *key)``; order of creation is irrelevant.

    The key length is mixed in because seed sequences ignore trailing zeros,
    so ``(seed, l)`` and ``(seed, l, 0)`` would otherwise coincide.
    """
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, len(key), *(int(k) for k in key)])


def monte_carlo_detuned_probabilities(
    schedule: PulseSchedule,
    n: int,
    l: int,
    delta_max: float,
    shots: int,
    seed: int,
    dec: DecoherenceParams | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Shot-averaged ``Pr(m)`` and its standard error for ``m = 0..M``.

    Every shot draws one detuning ``delta ~ U[0, delta_max]`` held for the
    whole train, from the stream ``(seed, l, shot)``.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if delta_max < 0:
        raise ValueError("delta_max must be nonnegative")
    dec = dec or DecoherenceParams()
    deltas = np.array([shot_rng(seed, l, s).uniform(0.0, delta_max) for s in range(shots)])
    probs = _run_blocks(schedule, gauss_phases(n, l, schedule.m_max), dec, deltas, True)
    mean = probs.mean(axis=0)
    err = probs.std(axis=0, ddof=1) / math.sqrt(shots) if shots > 1 else np.zeros_like(mean)
    return mean, err


def monte_carlo_detuned_signal(
    schedule: PulseSchedule,
    n: int,
    l: int,
    delta_max: float,
    shots: int,
    seed: int,
    dec: DecoherenceParams | None = None,
) -> tuple[float, float]:
    """Detuning-averaged signal ``<Pr>^(M)`` with its shot standard error."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    dec = dec or DecoherenceParams()
    deltas = np.array([shot_rng(seed, l, s).uniform(0.0, delta_max) for s in range(shots)])
    probs = _run_blocks(schedule, gauss_phases(n, l, schedule.m_max), dec, deltas, True)
    per_shot = probs.mean(axis=1)
    err = float(per_shot.std(ddof=1) / math.sqrt(shots)) if shots > 1 else 0.0
    return float(per_shot.mean()), err
