#!/usr/bin/env python3
"""Settling-time medians on full and line networks, optionally for other SYNC/coupling settings."""
import argparse
from dataclasses import replace

import numpy as np

from oscising.annealer import convergence_study, study_config
from oscising.sde import Schedule


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--A-s", type=float, default=1.0)
    ap.add_argument("--coupling", choices=["sinusoid", "smooth_square"], default="sinusoid")
    ap.add_argument("--tol", type=float, default=1e-3)
    ap.add_argument("--samples", type=int, default=10)
    args = ap.parse_args()

    base = study_config()
    cfg = replace(base, coupling=args.coupling, schedule=Schedule.constant(1.0, args.A_s),
                  options=replace(base.options, stop_tol=args.tol))
    for kind, sizes in (("full", (10, 50, 100, 200)), ("line", (10, 50, 100))):
        rows = convergence_study([(kind, n) for n in sizes], args.samples, cfg)
        med = []
        for n in sizes:
            times = [r.settling_time for r in rows if r.n == n]
            unsettled = sum(not r.settled for r in rows if r.n == n)
            med.append(float(np.median(times)))
            print(f"{kind:<5} n={n:<4} median {med[-1]:7.2f}  unsettled {unsettled}")
        print(f"{kind:<5} max/min median ratio {max(med) / min(med):.2f}")


if __name__ == "__main__":
    main()
