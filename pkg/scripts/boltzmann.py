#!/usr/bin/env python3
"""Basin occupancy of one noisy oscillator locked against the reference.

Compares the measured up/down ratio with the Boltzmann factor of the two
binarized states and with the exact stationary density (quadrature).
"""
import argparse
import math

import numpy as np
from scipy import integrate

from oscising.ising import IsingProblem
from oscising.sde import Schedule, SimOptions, effective_temperature, simulate


def stationary_ratio(A_c, A_s, kT):
    def dens(x):
        return math.exp(-(A_c * math.cos(x) - 0.5 * A_s * math.cos(2 * x)) / kT)
    up = integrate.quad(dens, -math.pi / 2, math.pi / 2)[0]
    return up / integrate.quad(dens, math.pi / 2, 3 * math.pi / 2)[0]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--A-c", type=float, default=0.0225)
    ap.add_argument("--A-s", type=float, default=0.2)
    ap.add_argument("--A-n", type=float, default=0.3)
    ap.add_argument("--t-end", type=float, default=1e6)
    ap.add_argument("--dt", type=float, default=0.05)
    ap.add_argument("--seeds", type=int, nargs="+", default=[8])
    args = ap.parse_args()

    kT = effective_temperature(args.A_n)
    boltz = math.exp(-2 * args.A_c / kT)
    exact = stationary_ratio(args.A_c, args.A_s, kT)
    print(f"kT {kT:.4f}  Boltzmann factor {boltz:.4f}  stationary ratio {exact:.4f}")
    prob = IsingProblem(1, [], [], [], h=[1.0])
    for seed in args.seeds:
        tr, _ = simulate(prob, Schedule.constant(args.A_c, args.A_s, args.A_n),
                         options=SimOptions(dt=args.dt, t_end=args.t_end, seed=seed,
                                            record_stride=400))
        up = np.cos(tr.phases[:, 0]) >= 0
        ratio = up.mean() / (1 - up.mean())
        print(f"seed {seed}: ratio {ratio:.4f} ({ratio / boltz - 1:+.1%} vs Boltzmann), "
              f"{np.count_nonzero(np.diff(up))} basin changes")


if __name__ == "__main__":
    main()
