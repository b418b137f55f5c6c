"""Finite-pulse filter functions of the Gauss-sum pulse trains and the
dephasing they imply for a given noise spectrum.

The control matrix ``R_ctrl(t)`` of block ``k`` (duration ``tau0``) is
``P_{k-1}`` during the first ``tau/2``, ``P_{k-1} R(Omega t', phi_k)`` during
the pulse and ``P_{k-1} R(pi, phi_k)`` for the last ``tau/2``, with
``P_{k-1} = R(pi, phi_0) R(pi, phi_1) ... R(pi, phi_{k-1})``.

Internally everything is computed from ``F(w) = int R_ctrl(t) e^{iwt} dt``;
then ``R_w = -i w F`` and ``g = F F^dagger``, which stays finite at ``w -> 0``.
Frequencies are angular, in rad/ns.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate

from .qubit_sim import PulseSchedule, rodriguez_compose, rotation_matrix

__all__ = [
    "ControlSpectrum",
    "SpectralDensity",
    "DecayEnvelope",
    "ConvergenceError",
    "DEFAULT_BAND",
    "r_omega_general",
    "r_omega_m0",
    "r_omega_q1",
    "r_omega_q4",
    "q4_sign",
    "r_omega_quadrature",
    "filter_matrix",
    "control_spectrum",
    "coherence_integral",
    "decay_envelope",
    "read_spectrum_csv",
    "write_control_spectrum_csv",
    "write_decay_envelope_csv",
]

DEFAULT_BAND = (2 * math.pi * 1e-4, 2 * math.pi * 10.0)
_Z_ONLY = np.diag([0.0, 0.0, 1.0])


class ConvergenceError(RuntimeError):
    """Grid refinement of the coherence integral did not settle."""


def _seg(w, duration):
    """``int_0^duration e^{iwt} dt``, written with sinc so ``w = 0`` is regular."""
    return duration * np.exp(0.5j * w * duration) * np.sinc(w * duration / (2 * np.pi))


def _cross(n):
    return np.array([[0.0, -n[2], n[1]], [n[2], 0.0, -n[0]], [-n[1], n[0], 0.0]])


def _pulse_integral(w, schedule: PulseSchedule, phi: float) -> np.ndarray:
    """``int_0^{t_pi} R(Omega t, phi) e^{iwt} dt`` for an array of ``w``; shape ``(nw, 3, 3)``.

    Uses ``cos``/``sin`` integrals as sums of shifted exponentials, which has
    no singularity at ``w = +-Omega``.
    """
    om, tp = schedule.omega_rabi, schedule.t_pi
    n = np.array([math.cos(phi), math.sin(phi), 0.0])
    nn = np.outer(n, n)
    plus, minus = _seg(w + om, tp), _seg(w - om, tp)
    c = 0.5 * (plus + minus)
    s = (plus - minus) / 2j
    return (
        _seg(w, tp)[:, None, None] * nn
        + c[:, None, None] * (np.eye(3) - nn)
        + s[:, None, None] * _cross(n)
    )


def _block_integral(w, schedule: PulseSchedule, phi: float) -> np.ndarray:
    """Integral over one block of ``R_ctrl / P_{k-1}``, relative to the block start."""
    half = schedule.tau / 2
    free = _seg(w, half)[:, None, None]
    n = np.array([math.cos(phi), math.sin(phi), 0.0])
    flip = rotation_matrix(math.pi, n)
    return (
        free * np.eye(3)
        + np.exp(1j * w * half)[:, None, None] * _pulse_integral(w, schedule, phi)
        + (np.exp(1j * w * (half + schedule.t_pi)) * _seg(w, half))[:, None, None] * flip
    )


def _prefix_rotation(phases, k: int) -> np.ndarray:
    """``P_{k-1} = R(pi, phi_0) ... R(pi, phi_{k-1})``, composed by Rodrigues."""
    if k == 0:
        return np.eye(3)
    gamma, axis = rodriguez_compose(list(phases[:k])[::-1])
    return rotation_matrix(gamma, axis)


def _fourier_prefixes(omega, schedule: PulseSchedule, phases):
    """Yield ``F_m(w)`` for ``m = 0..len(phases)-1`` (cumulative over blocks)."""
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    total = np.zeros((w.size, 3, 3), dtype=complex)
    for k in range(len(phases)):
        shift = np.exp(1j * k * w * schedule.tau0)[:, None, None]
        total = total + shift * (_prefix_rotation(phases, k) @ _block_integral(w, schedule, phases[k]))
        yield total


def _check_phases(m: int, phases) -> np.ndarray:
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (m + 1,):
        raise ValueError(f"need {m + 1} phases for m={m}, got {phases.size}")
    return phases


def _fourier(omega, m: int, schedule: PulseSchedule, phases) -> np.ndarray:
    phases = _check_phases(m, phases)
    out = None
    for out in _fourier_prefixes(omega, schedule, phases):
        pass
    return out


def r_omega_general(omega, m: int, schedule: PulseSchedule, phases) -> np.ndarray:
    """``R_w = -i w int_0^t R_ctrl(t') e^{iwt'} dt'`` from the block sum.

    ``omega`` may be a scalar (returns ``(3, 3)``) or an array (``(n, 3, 3)``).
    """
    w = np.asarray(omega, dtype=float)
    out = -1j * np.atleast_1d(w)[:, None, None] * _fourier(w, m, schedule, phases)
    return out[0] if w.ndim == 0 else out


def _echo_ratio(w: float, schedule: PulseSchedule) -> complex:
    """``(1 + e^{iwt_pi}) / (w^2 - Omega^2)``, with its limit at ``w = +-Omega``."""
    om, tp = schedule.omega_rabi, schedule.t_pi
    if abs(abs(w) - om) < 1e-9 * max(1.0, om):
        # L'Hopital: derivative of numerator over derivative of denominator
        return 1j * tp * np.exp(1j * w * tp) / (2 * w)
    return (1 + np.exp(1j * w * tp)) / (w * w - om * om)


def r_omega_m0(omega, schedule: PulseSchedule) -> np.ndarray:
    """Displayed single-pulse (``m = 0``, ``phi_0 = 0``) matrix, written out entrywise."""
    w = float(omega)
    tau, tp, om = schedule.tau, schedule.t_pi, schedule.omega_rabi
    h = np.exp(0.5j * w * tau)
    e1 = np.exp(1j * w * (tau / 2 + tp))
    ep = np.exp(1j * w * tp)
    free = (1 - h) * np.diag([1 + e1, 1 - e1, 1 - e1])
    k = h * _echo_ratio(w, schedule)
    pulse = np.array(
        [
            [h * (1 - ep), 0, 0],
            [0, k * w * w, -k * 1j * w * om],
            [0, k * 1j * w * om, k * w * w],
        ]
    )
    return free + pulse


def r_omega_q1(omega, m: int, schedule: PulseSchedule) -> np.ndarray:
    """Factor sequence (all ``phi_k = 0``): geometric prefactor times the ``m = 0`` matrix."""
    w = float(omega)
    z = np.exp(1j * w * schedule.tau0)
    pre = np.diag(
        [
            (1 - z ** (m + 1)) / (1 - z),
            (1 + (-1) ** m * z ** (m + 1)) / (1 + z),
            (1 + (-1) ** m * z ** (m + 1)) / (1 + z),
        ]
    )
    return pre @ r_omega_m0(w, schedule)


def q4_sign(k: int) -> int:
    """``+1`` when ``(k - 1) % 4`` is 0 or 1, else ``-1``."""
    return 1 if (k - 1) % 4 in (0, 1) else -1


def r_omega_q4(omega, m: int, schedule: PulseSchedule) -> np.ndarray:
    """Worst-ghost (``p/q = 1/4``) sequence from explicit per-block matrices.

    Every pulse after the first is a pi rotation about ``+-(x - y)/sqrt(2)``,
    so ``P_{k-1}`` alternates between a pi rotation about x (odd ``k``) and a
    quarter turn about z (even ``k``); only the pulse direction carries the
    ``q4_sign`` pattern.
    """
    w = float(omega)
    tau, tp, om = schedule.tau, schedule.t_pi, schedule.omega_rabi
    h = np.exp(0.5j * w * tau)
    e1 = np.exp(1j * w * (tau / 2 + tp))
    ep = np.exp(1j * w * tp)
    a_odd = (1 - h) * np.array([[1, -e1, 0], [e1, -1, 0], [0, 0, e1 - 1]])
    a_even = (1 - h) * np.array([[e1, -1, 0], [1, -e1, 0], [0, 0, 1 - e1]])

    # pulse integral: along the axis, transverse cosine part, sine part
    k_pre = h * _echo_ratio(w, schedule)
    par = h * (1 - ep)
    perp = k_pre * w * w
    rot = k_pre * 1j * w * om
    uu = 0.5 * np.array([[1, -1, 0], [-1, 1, 0], [0, 0, 0]])
    perp_proj = np.eye(3) - uu
    ux = _cross(np.array([1.0, -1.0, 0.0]) / math.sqrt(2))
    rx = np.diag([1.0, -1.0, -1.0])
    rz = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])

    total = r_omega_m0(w, schedule).astype(complex)
    for k in range(1, m + 1):
        s = (-1) ** (k + 1) * q4_sign(k)
        prefix = rx if k % 2 else rz
        a_k = a_odd if k % 2 else a_even
        b_k = prefix @ (par * uu + perp * perp_proj + s * rot * ux)
        total = total + np.exp(1j * w * k * schedule.tau0) * (a_k + b_k)
    return total


def _ctrl_matrix(t: float, schedule: PulseSchedule, flips: list[np.ndarray], phases) -> np.ndarray:
    k = min(int(t // schedule.tau0), len(phases) - 1)
    s = t - k * schedule.tau0
    prefix = np.eye(3)
    for f in flips[:k]:
        prefix = prefix @ f
    half = schedule.tau / 2
    n = np.array([math.cos(phases[k]), math.sin(phases[k]), 0.0])
    if s < half:
        return prefix
    if s < half + schedule.t_pi:
        return prefix @ rotation_matrix(schedule.omega_rabi * (s - half), n)
    return prefix @ flips[k]


def r_omega_quadrature(omega: float, m: int, schedule: PulseSchedule, phases,
                       epsabs: float = 1e-11, epsrel: float = 1e-11) -> np.ndarray:
    """Brute-force adaptive quadrature of ``-i w int R_ctrl e^{iwt} dt``.

    Integrates segment by segment so every piece is smooth.
    """
    phases = _check_phases(m, phases)
    flips = [rotation_matrix(math.pi, np.array([math.cos(p), math.sin(p), 0.0])) for p in phases]
    w = float(omega)

    def integrand(t):
        r = _ctrl_matrix(t, schedule, flips, phases) * np.exp(1j * w * t)
        return np.concatenate([r.real.ravel(), r.imag.ravel()])

    edges = []
    for k in range(m + 1):
        t0 = k * schedule.tau0
        edges += [t0, t0 + schedule.tau / 2, t0 + schedule.tau / 2 + schedule.t_pi]
    edges.append((m + 1) * schedule.tau0)
    acc = np.zeros(18)
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a <= 0:
            continue
        # clamp into the open segment: R_ctrl jumps at the edges
        eps = 1e-9 * (b - a)
        val, _ = integrate.quad_vec(
            lambda t, a=a, b=b, eps=eps: integrand(min(max(t, a + eps), b - eps)),
            a, b, epsabs=epsabs, epsrel=epsrel,
        )
        acc += val
    f = (acc[:9] + 1j * acc[9:]).reshape(3, 3)
    return -1j * w * f


def filter_matrix(omega, m: int, schedule: PulseSchedule, phases) -> np.ndarray:
    """``g_ij(w) = [R_w R_w^dagger]_ij / w^2``; Hermitian PSD by construction."""
    w = np.asarray(omega, dtype=float)
    f = _fourier(w, m, schedule, phases)
    g = f @ np.conj(np.swapaxes(f, -1, -2))
    return g[0] if w.ndim == 0 else g


@dataclass
class ControlSpectrum:
    omega_grid: np.ndarray
    r_omega: np.ndarray
    g: np.ndarray


def control_spectrum(omega_grid, m: int, schedule: PulseSchedule, phases) -> ControlSpectrum:
    w = np.asarray(omega_grid, dtype=float)
    if w.ndim != 1 or np.any(np.diff(w) <= 0):
        raise ValueError("omega_grid must be strictly ascending")
    f = _fourier(w, m, schedule, phases)
    g = f @ np.conj(np.swapaxes(f, -1, -2))
    return ControlSpectrum(omega_grid=w, r_omega=-1j * w[:, None, None] * f, g=g)


@dataclass
class SpectralDensity:
    """Noise power spectral density on ``band`` (rad/ns), normalised so
    ``(1/pi) int_band S dw = sigma**2``.

    ``kind`` is ``"white"``, ``"pink"`` (``S ~ 1/w``) or ``"tabulated"``.
    ``axes`` weights the 3x3 noise components, ``S_ij = S(w) axes_ij``;
    the default couples to the z component only.
    """

    kind: str
    sigma: float
    band: tuple[float, float] = DEFAULT_BAND
    table: tuple[np.ndarray, np.ndarray] | None = None
    axes: np.ndarray = field(default_factory=lambda: _Z_ONLY.copy())

    def __post_init__(self):
        if self.kind not in ("white", "pink", "tabulated"):
            raise ValueError(f"unknown spectrum kind {self.kind!r}")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        lo, hi = self.band
        if not hi > lo >= 0:
            raise ValueError("band must satisfy 0 <= omega_min < omega_max")
        if self.kind == "pink" and lo <= 0:
            raise ValueError("1/f spectrum needs omega_min > 0")
        if self.kind == "tabulated":
            if self.table is None:
                raise ValueError("tabulated spectrum needs a table")
            w, s = (np.asarray(a, dtype=float) for a in self.table)
            if np.any(np.diff(w) <= 0) or np.any(s < 0):
                raise ValueError("table must have ascending omega and nonnegative S")
            self.table = (w, s)
        self.axes = np.asarray(self.axes, dtype=float)

    @classmethod
    def white(cls, sigma: float, band=DEFAULT_BAND) -> "SpectralDensity":
        return cls("white", sigma, tuple(band))

    @classmethod
    def pink(cls, sigma: float, band=DEFAULT_BAND) -> "SpectralDensity":
        return cls("pink", sigma, tuple(band))

    @classmethod
    def tabulated(cls, omega, values, sigma: float | None = None) -> "SpectralDensity":
        """From samples; rescaled to ``sigma`` when given."""
        w = np.asarray(omega, dtype=float)
        s = np.asarray(values, dtype=float)
        raw = math.sqrt(integrate.trapezoid(s, w) / math.pi)
        if sigma is not None:
            if raw == 0:
                raise ValueError("cannot rescale an all-zero spectrum")
            s = s * (sigma / raw) ** 2
        return cls("tabulated", raw if sigma is None else sigma, (float(w[0]), float(w[-1])), (w, s))

    def __call__(self, omega) -> np.ndarray:
        w = np.asarray(omega, dtype=float)
        lo, hi = self.band
        inside = (w >= lo) & (w <= hi)
        if self.kind == "white":
            level = math.pi * self.sigma**2 / (hi - lo)
            return np.where(inside, level, 0.0)
        if self.kind == "pink":
            amp = math.pi * self.sigma**2 / math.log(hi / lo)
            return np.where(inside, amp / np.where(inside, w, 1.0), 0.0)
        tw, ts = self.table
        return np.interp(w, tw, ts, left=0.0, right=0.0)

    def scaled(self, factor: float) -> "SpectralDensity":
        """Same shape with power multiplied by ``factor``."""
        if self.kind == "tabulated":
            tw, ts = self.table
            return SpectralDensity("tabulated", self.sigma * math.sqrt(factor), self.band, (tw, ts * factor), self.axes)
        return SpectralDensity(self.kind, self.sigma * math.sqrt(factor), self.band, None, self.axes)


@dataclass
class DecayEnvelope:
    m: np.ndarray
    total_time: np.ndarray
    chi: np.ndarray

    @property
    def envelope(self) -> np.ndarray:
        return np.exp(-self.chi)


def _log_grid(band, points):
    lo, hi = band
    lo = max(lo, 1e-9 * hi)
    return np.geomspace(lo, hi, points)


def _chi_on_grid(grid, spectrum: SpectralDensity, prefixes):
    s = spectrum(grid)
    weights = spectrum.axes
    out = []
    for f in prefixes:
        g = f @ np.conj(np.swapaxes(f, -1, -2))
        # symmetric spectrum: negative frequencies contribute the conjugate
        proj = np.einsum("ij,wij->w", weights, g).real
        # trapezoid in log(w): dw = w du
        out.append(2.0 / math.pi * integrate.trapezoid(s * proj * grid, np.log(grid)))
    return np.array(out)


def _refine(evaluate, points, rtol, max_points):
    prev = evaluate(points)
    while True:
        points = 2 * points - 1
        if points > max_points:
            raise ConvergenceError(
                f"coherence integral not converged to rtol={rtol} with {max_points} grid points"
            )
        cur = evaluate(points)
        scale = np.maximum(np.abs(cur), 1e-300)
        if np.all(np.abs(cur - prev) <= rtol * scale):
            return cur
        prev = cur


def coherence_integral(m: int, schedule: PulseSchedule, phases, spectrum: SpectralDensity,
                       points: int = 2048, rtol: float = 1e-4, max_points: int = 2**18) -> float:
    """``chi = (1/pi) sum_ij int S_ij g_ij dw`` over the spectrum's band.

    Trapezoid rule on a log-spaced grid, doubled until the relative change
    drops below ``rtol``.
    """
    phases = _check_phases(m, phases)
    if spectrum.sigma == 0:
        return 0.0

    def evaluate(npts):
        grid = _log_grid(spectrum.band, npts)
        *_, last = _fourier_prefixes(grid, schedule, phases)
        return _chi_on_grid(grid, spectrum, [last])

    return float(_refine(evaluate, points, rtol, max_points)[0])


def decay_envelope(m_max: int, schedule: PulseSchedule, phases, spectrum: SpectralDensity,
                   points: int = 2048, rtol: float = 1e-4, max_points: int = 2**18) -> DecayEnvelope:
    """``chi`` and ``exp(-chi)`` for every prefix ``m = 0..m_max`` of the train."""
    phases = _check_phases(m_max, phases)
    ms = np.arange(m_max + 1)
    times = (ms + 1) * schedule.tau0
    if spectrum.sigma == 0:
        return DecayEnvelope(ms, times, np.zeros(m_max + 1))

    def evaluate(npts):
        grid = _log_grid(spectrum.band, npts)
        return _chi_on_grid(grid, spectrum, _fourier_prefixes(grid, schedule, phases))

    chi = _refine(evaluate, points, rtol, max_points)
    return DecayEnvelope(ms, times, np.maximum(chi, 0.0))


def read_spectrum_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Two-column ``omega_rad_per_ns, s_value`` table; a header row is optional."""
    path = Path(path)
    rows = []
    try:
        with path.open(newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                try:
                    rows.append((float(row[0]), float(row[1])))
                except ValueError:
                    if rows:
                        raise
    except OSError as exc:
        raise OSError(f"cannot read spectrum {path}: {exc}") from exc
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least two spectrum samples")
    arr = np.array(rows)
    return arr[:, 0], arr[:, 1]


_AX = "xyz"


def write_control_spectrum_csv(spec: ControlSpectrum, path) -> None:
    header = ["omega_rad_per_ns"]
    for name in ("r", "g"):
        for i in range(3):
            for j in range(3):
                header += [f"{name}_{_AX[i]}{_AX[j]}_re", f"{name}_{_AX[i]}{_AX[j]}_im"]
    with Path(path).open("w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(header)
        for w, r, g in zip(spec.omega_grid, spec.r_omega, spec.g):
            row = [repr(float(w))]
            for mat in (r, g):
                for z in mat.ravel():
                    row += [repr(float(z.real)), repr(float(z.imag))]
            out.writerow(row)


def write_decay_envelope_csv(env: DecayEnvelope, path) -> None:
    with Path(path).open("w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["m", "total_time_ns", "chi", "envelope"])
        for m, t, c, e in zip(env.m, env.total_time, env.chi, env.envelope):
            out.writerow([int(m), repr(float(t)), repr(float(c)), repr(float(e))])
