"""Decay envelopes for the factor (q = 1) and worst-ghost (q = 4) pulse
trains under white and 1/f dephasing noise of equal variance."""
import argparse
from pathlib import Path

from ghostfactor.filter_function import SpectralDensity, decay_envelope, write_decay_envelope_csv
from ghostfactor.qubit_sim import PulseSchedule, residue_phases


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/decay")
    ap.add_argument("--pulses", type=int, default=20)
    ap.add_argument("--sigma", type=float, default=0.01, help="rad/ns")
    ap.add_argument("--tau", type=float, default=30.0)
    ap.add_argument("--tpi", type=float, default=25.0)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sched = PulseSchedule(tau=args.tau, t_pi=args.tpi, m_max=args.pulses)

    for spec in (SpectralDensity.white(args.sigma), SpectralDensity.pink(args.sigma)):
        envs = {}
        for label, (p, q) in (("factor", (0, 1)), ("ghost", (1, 4))):
            envs[label] = decay_envelope(args.pulses, sched, residue_phases(p, q, args.pulses), spec)
            write_decay_envelope_csv(envs[label], out / f"{spec.kind}_{label}.csv")
        f, g = envs["factor"].envelope[-1], envs["ghost"].envelope[-1]
        print(f"{spec.kind:5s} m={args.pulses}: factor envelope {f:.5f}, q=4 envelope {g:.5f}")


if __name__ == "__main__":
    main()
