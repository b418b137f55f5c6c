"""Factorization campaigns: run every trial factor, inject measurement noise,
apply the cutoff and collect the figures of merit into a report."""
from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .decoherence_model import (
    contrast,
    cutoff,
    discernability_closed,
    discernability_empirical,
    noisy_gauss_factor_closed,
    noisy_gauss_sum,
    noisy_gauss_worst_closed,
)
from .gauss_core import signal as ideal_signal, summands
from .number_theory import (
    PREPROCESS_MODES,
    PreprocessRecord,
    TrialFactorClass,
    classify,
    preprocess,
    reduce_residue,
    trial_factors,
)
from .qubit_sim import DecoherenceParams, PulseSchedule, monte_carlo_detuned_probabilities, shot_rng

__all__ = [
    "ConfigError",
    "CampaignConfig",
    "TrialRecord",
    "FactorizationReport",
    "run_campaign",
    "identify",
    "emit_report",
    "load_report_json",
    "load_records_csv",
    "write_records_csv",
    "read_config_file",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ("l", "p", "q", "class", "signal", "std_err", "above_cutoff")


class ConfigError(ValueError):
    """Campaign configuration is malformed or inconsistent."""


@dataclass
class CampaignConfig:
    """Everything needed to reproduce one campaign.

    ``t2_worst`` (if set) applies to q = 4 trial factors; ``class_t2`` maps a
    class name (e.g. ``"TypeIIGhost"``) to a T2 for the remaining residues.
    """

    n: int
    l_max: int
    m_max: int
    tau: float
    t_pi: float
    t2: float = math.inf
    t2_worst: float | None = None
    t1: float = math.inf
    preprocess: str = "basic"
    measurement_sigma: float = 0.04
    detune_max: float = 0.0
    shots: int = 1
    seed: int = 0
    class_t2: dict[str, float] = field(default_factory=dict)

    def validate(self) -> None:
        if self.n < 2:
            raise ConfigError("number must be >= 2")
        if self.l_max < 2:
            raise ConfigError("lmax must be >= 2")
        if self.m_max < 0:
            raise ConfigError("pulses must be >= 0")
        if self.tau < 0 or self.t_pi <= 0:
            raise ConfigError("tau must be >= 0 and tpi > 0")
        for name in ("t2", "t1"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.t2_worst is not None and not self.t2_worst > 0:
            raise ConfigError("t2-worst must be positive")
        if self.preprocess not in PREPROCESS_MODES:
            raise ConfigError(f"preprocess must be one of {PREPROCESS_MODES}")
        if self.measurement_sigma < 0:
            raise ConfigError("sigma must be >= 0")
        if self.detune_max < 0:
            raise ConfigError("detune-max must be >= 0")
        if self.detune_max > 0 and self.shots < 1:
            raise ConfigError("shots must be >= 1 when detuning is enabled")
        t2s = [self.t2, *([self.t2_worst] if self.t2_worst else []), *self.class_t2.values()]
        if any(t > 2 * self.t1 for t in t2s):
            raise ConfigError("every T2 must satisfy T2 <= 2 T1")
        valid = {c.value for c in TrialFactorClass}
        for key, value in self.class_t2.items():
            if key not in valid or not value > 0:
                raise ConfigError(f"bad per-class T2 override {key}={value}")
        try:
            self.schedule
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def schedule(self) -> PulseSchedule:
        return PulseSchedule(tau=self.tau, t_pi=self.t_pi, m_max=self.m_max)

    def t2_for(self, q: int, cls: TrialFactorClass) -> float:
        if q == 4 and self.t2_worst is not None:
            return self.t2_worst
        if q == 1:
            return self.t2
        return self.class_t2.get(cls.value, self.t2)

    def dec_for(self, q: int, cls: TrialFactorClass) -> DecoherenceParams:
        t2 = self.t2_for(q, cls)
        return DecoherenceParams(t1=self.t1, t2=t2)


@dataclass
class TrialRecord:
    l: int
    p: int
    q: int
    cls: str
    ideal_signal: float
    signal: float
    std_err: float
    above_cutoff: bool
    at_cutoff: bool = False


@dataclass
class FactorizationReport:
    config: dict
    preprocess: dict
    cutoff: float
    identified_factors: list[int]
    discernability: dict
    contrast: dict | None
    records: list[TrialRecord]
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "preprocess": self.preprocess,
            "cutoff": self.cutoff,
            "identified_factors": self.identified_factors,
            "discernability": self.discernability,
            "contrast": self.contrast,
            "warnings": self.warnings,
            "records": [asdict(r) for r in self.records],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "FactorizationReport":
        return cls(
            config=dict(data["config"]),
            preprocess=dict(data["preprocess"]),
            cutoff=data["cutoff"],
            identified_factors=list(data["identified_factors"]),
            discernability=dict(data["discernability"]),
            contrast=None if data["contrast"] is None else dict(data["contrast"]),
            records=[TrialRecord(**r) for r in data["records"]],
            warnings=list(data.get("warnings", [])),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @property
    def signals(self) -> dict[int, float]:
        return {r.l: r.signal for r in self.records}


def identify(signals: Mapping[int, float], cutoff_value: float) -> set[int]:
    """Trial factors whose signal is strictly above the cutoff.

    A signal exactly at the cutoff counts as a nonfactor and raises a warning.
    """
    ties = sorted(l for l, s in signals.items() if s == cutoff_value)
    if ties:
        warnings.warn(f"signals exactly at the cutoff treated as nonfactors: {ties}", stacklevel=2)
    return {l for l, s in signals.items() if s > cutoff_value}


def _per_m_probabilities(config: CampaignConfig, n: int, l: int, q: int, cls) -> tuple[np.ndarray, np.ndarray]:
    """Mean ``Pr(m)`` for ``m = 0..M`` and its standard error before measurement noise."""
    dec = config.dec_for(q, cls)
    if config.detune_max > 0:
        return monte_carlo_detuned_probabilities(
            config.schedule, n, l, config.detune_max, config.shots, config.seed, dec
        )
    x = config.schedule.tau0 / dec.t2
    m = np.arange(config.m_max + 1)
    pr = 0.5 * (1.0 + summands(config.m_max, reduce_residue(n, l)) * np.exp(-(m + 1) * x))
    return pr, np.zeros_like(pr)


def _measured_signal(config: CampaignConfig, n: int, l: int, q: int, cls) -> tuple[float, float]:
    pr, se = _per_m_probabilities(config, n, l, q, cls)
    sigma = config.measurement_sigma
    count = config.m_max + 1
    if sigma == 0 and config.detune_max == 0:
        x = config.schedule.tau0 / config.t2_for(q, cls)
        return 0.5 * (1.0 + noisy_gauss_sum(config.m_max, reduce_residue(n, l), x)), 0.0
    noise = shot_rng(config.seed, l).normal(1.0, sigma, count) if sigma > 0 else np.ones(count)
    measured = np.clip(pr * noise, 0.0, 1.0)
    err = math.sqrt(float(np.sum((pr * sigma) ** 2 + se**2))) / count
    return float(np.mean(measured)), err


def _contrast_block(records: list[TrialRecord]) -> dict | None:
    rest = [r for r in records if r.cls != TrialFactorClass.FACTOR.value]
    if not rest:
        return None
    rep = contrast({r.l: r.signal for r in records}, [r.l for r in records if r.cls == TrialFactorClass.FACTOR.value])
    da = 2.0 * math.sqrt(sum(r.std_err**2 for r in rest)) / len(rest)
    return {"v": rep.v_value, "a_mean": rep.a_mean, "std_err": 2.0 * da / (1.0 + rep.a_mean) ** 2}


def _discernability_block(config: CampaignConfig, records: list[TrialRecord]) -> dict:
    x_f = config.schedule.tau0 / config.t2
    x_w = config.schedule.tau0 / (config.t2_worst if config.t2_worst is not None else config.t2)
    m = config.m_max
    block = {
        "predicted_closed_form": discernability_closed(m, x_f),
        "predicted_exact": noisy_gauss_factor_closed(m, x_f) - noisy_gauss_worst_closed(m, x_f),
        "predicted_adjusted": noisy_gauss_factor_closed(m, x_f) - noisy_gauss_worst_closed(m, x_w),
        "empirical": None,
        "empirical_std_err": None,
        "empirical_pooled_err": None,
        "weakest_factor": None,
        "worst_nonfactor": None,
    }
    facs = [r for r in records if r.cls == TrialFactorClass.FACTOR.value]
    rest = [r for r in records if r.cls != TrialFactorClass.FACTOR.value]
    if facs and rest:
        f = min(facs, key=lambda r: (r.signal, r.l))
        w = max(rest, key=lambda r: (r.signal, -r.l))
        block["empirical"] = discernability_empirical(f.signal, w.signal)
        block["empirical_std_err"] = 2.0 * math.hypot(f.std_err, w.std_err)
        block["empirical_pooled_err"] = 2.0 * math.sqrt(
            float(np.mean([r.std_err**2 for r in facs])) + float(np.mean([r.std_err**2 for r in rest]))
        )
        block["weakest_factor"] = f.l
        block["worst_nonfactor"] = w.l
    return block


def run_campaign(config: CampaignConfig) -> FactorizationReport:
    """Run all trial factors for ``config`` and assemble the report.

    Each trial factor draws from its own ``(seed, l)`` stream, so the result
    does not depend on evaluation order.
    """
    config.validate()
    if config.preprocess == "none":
        record = PreprocessRecord(n=config.n, n2=0, n5=0, reduced_n=config.n)
    else:
        record = preprocess(config.n, extended=config.preprocess == "extended")
    n = record.reduced_n
    notes: list[str] = []
    if n == 1:
        raise ConfigError(f"{config.n} has no factors left after preprocessing")

    m = config.m_max
    schedule = config.schedule
    x_f = schedule.tau0 / config.t2
    x_w = schedule.tau0 / (config.t2_worst if config.t2_worst is not None else config.t2)
    cut = cutoff(m, x_f, x_w)

    records = []
    for l in trial_factors(n, config.l_max, config.preprocess):
        r = reduce_residue(n, l)
        cls = classify(n, l)
        sig, err = _measured_signal(config, n, l, r.q, cls)
        records.append(
            TrialRecord(
                l=l, p=r.p, q=r.q, cls=cls.value,
                ideal_signal=ideal_signal(m, n, l),
                signal=sig, std_err=err,
                above_cutoff=sig > cut, at_cutoff=sig == cut,
            )
        )
    ties = [r.l for r in records if r.at_cutoff]
    if ties:
        notes.append(f"signals exactly at the cutoff treated as nonfactors: {ties}")
    found = sorted(r.l for r in records if r.above_cutoff)

    con = _contrast_block(records)
    if con is None:
        notes.append("no nonfactors in range; contrast omitted")
        warnings.warn(notes[-1], stacklevel=2)
    disc = _discernability_block(config, records)
    if disc["empirical"] is None:
        notes.append("need at least one factor and one nonfactor for the empirical discernability")

    return FactorizationReport(
        config=asdict(config),
        preprocess=asdict(record),
        cutoff=cut,
        identified_factors=found,
        discernability=disc,
        contrast=con,
        records=records,
        warnings=notes,
    )


def _csv_row(r: TrialRecord) -> list[str]:
    return [str(r.l), str(r.p), str(r.q), r.cls, repr(r.signal), repr(r.std_err), str(r.above_cutoff).lower()]


def write_records_csv(records: Iterable[TrialRecord], fh) -> None:
    out = csv.writer(fh, lineterminator="\n")
    out.writerow(CSV_COLUMNS)
    for r in records:
        out.writerow(_csv_row(r))


def load_records_csv(path) -> list[TrialRecord]:
    """Read the per-trial-factor CSV back; ``ideal_signal`` is not stored there and comes back as NaN."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise OSError(f"cannot read report {path}: {exc}") from exc
    return [
        TrialRecord(
            l=int(row["l"]), p=int(row["p"]), q=int(row["q"]), cls=row["class"],
            ideal_signal=math.nan, signal=float(row["signal"]), std_err=float(row["std_err"]),
            above_cutoff=row["above_cutoff"] == "true",
        )
        for row in rows
    ]


def load_report_json(path) -> FactorizationReport:
    path = Path(path)
    try:
        return FactorizationReport.from_dict(json.loads(path.read_text()))
    except OSError as exc:
        raise OSError(f"cannot read report {path}: {exc}") from exc


def emit_report(report: FactorizationReport, fmt: str, path=None) -> str:
    """Write ``report`` as ``"csv"`` or ``"json"`` to ``path`` (or just return the text)."""
    if fmt == "json":
        text = report.to_json()
    elif fmt == "csv":
        buf = io.StringIO()
        write_records_csv(report.records, buf)
        text = buf.getvalue()
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if path is not None:
        path = Path(path)
        try:
            path.write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write report to {path}: {exc}") from exc
    return text


def read_config_file(path) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment. Keys are CLI flag names."""
    path = Path(path)
    out: dict[str, str] = {}
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        out[key.lstrip("-")] = value
    return out
