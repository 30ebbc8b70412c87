#!/usr/bin/env python3
"""MAX-CUT benchmark with the two ablations (no noise, no SYNC).

    python scripts/run_g22.py path/to/G22 --runs 100
    python scripts/run_g22.py --standin --runs 20     # random 2000-node, 19990-edge graph

Prints one line per variant and writes a JSON summary next to ``--out``.
"""
import argparse
import json
import os
import time
from dataclasses import replace

from oscising.annealer import g22_config, multi_run, random_gset_like
from oscising.ising import IsingProblem, load_gset


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("gset", nargs="?")
    ap.add_argument("--standin", action="store_true", help="use a random graph of the same size")
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--out", default="g22_results.json")
    args = ap.parse_args()
    if args.gset is None and not args.standin:
        ap.error("give a G-set file or --standin")

    graph = random_gset_like(2000, 19990, seed=22) if args.standin else load_gset(args.gset)
    problem = IsingProblem.from_graph(graph)
    base = g22_config(runs=args.runs, master_seed=args.seed, threads=args.threads)
    variants = {
        "noisy+sync": base,
        "no-noise": replace(base, schedule=base.schedule.replace(noise=((0.0, 0.0),))),
        "no-sync": replace(base, schedule=base.schedule.replace(sync=((0.0, 0.0),))),
    }
    summary = {"graph": "stand-in" if args.standin else args.gset, "n": graph.n, "m": graph.m}
    for name, cfg in variants.items():
        start = time.perf_counter()
        _, stats = multi_run(problem, cfg, graph=graph)
        elapsed = time.perf_counter() - start
        summary[name] = {**stats.to_dict(), "elapsed_seconds": elapsed}
        print(f"{name:<11} mean {stats.mean_cut:9.1f}  best {stats.best_cut:7.0f}  "
              f"failed {stats.failed}  {elapsed:7.1f} s", flush=True)
    with open(args.out, "w") as fh:
        json.dump(summary, fh, indent=2)


if __name__ == "__main__":
    main()
