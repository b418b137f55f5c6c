"""Pulse-count and problem-size bounds: the naive M0 = T2/tau0 against the
discernability-limited M_max, and the largest N each allows."""
import argparse

from ghostfactor.decoherence_model import InfeasibleTarget, largest_factorizable, m_max, max_discernability


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--target", type=float, default=0.12)
    ap.add_argument("--m0", type=float, nargs="*", default=[20, 56, 100, 300, 1000])
    args = ap.parse_args()
    print("M0, best D, M_max, log10 N (M0), log10 N (M_max)")
    for m0 in args.m0:
        best = max_discernability(1.0 / m0)[1]
        try:
            bound = m_max(args.target, m0, 1.0)
            tail = f"{bound}, {largest_factorizable(round(m0))[1]:.2f}, {largest_factorizable(bound)[1]:.2f}"
        except InfeasibleTarget:
            tail = "infeasible"
        print(f"{m0:g}, {best:.3f}, {tail}")


if __name__ == "__main__":
    main()
