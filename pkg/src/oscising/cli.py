"""Command-line front end: ``oscising {solve,adder,study,adler}``."""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .annealer import (
    PRESETS,
    SolveConfig,
    adder_config,
    convergence_study,
    invertible_solve,
    multi_run,
    study_config,
    write_runs_csv,
    write_study_csv,
)
from .dynamics import adler_steady_states
from .ising import IsingProblem, ParseError, brute_force_ground, encode_half_adder, load_gset

EXIT_OK, EXIT_INPUT, EXIT_DIVERGED = 0, 2, 3
ORACLE_MAX_N = 24
COUPLING_NAMES = {"sin": "sinusoid", "square": "smooth_square"}


@dataclass
class CliConfig:
    """A solve run as a single JSON document: the solver config plus I/O settings."""

    solve: SolveConfig = field(default_factory=SolveConfig)
    input: str | None = None
    out: str | None = None
    emit_traces: bool = False
    emit_phases: bool = False

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k != "solve"}
        d["solve"] = self.solve.to_dict()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "CliConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        d["solve"] = SolveConfig.from_dict(d.get("solve", {}))
        return cls(**d)


class UsageError(Exception):
    pass


def _fail(msg: str, code: int = EXIT_INPUT) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


# ----------------------------------------------------------------------------
# solve


def _resolve_solve(args) -> CliConfig:
    if args.config:
        cfg = CliConfig.from_dict(json.loads(Path(args.config).read_text()))
    else:
        cfg = CliConfig(solve=PRESETS[args.preset]())
    s = cfg.solve
    opts = s.options
    if args.dt is not None:
        opts = replace(opts, dt=args.dt)
    if args.t_end is not None:
        opts = replace(opts, t_end=args.t_end)
    if args.traces:
        opts = replace(opts, record_phases=True)
    over = {"options": opts}
    for name, value in (("runs", args.runs), ("master_seed", args.seed), ("rho", args.rho),
                        ("detune_sigma", args.detune_sigma), ("threads", args.threads)):
        if value is not None:
            over[name] = value
    if args.coupling is not None:
        over["coupling"] = COUPLING_NAMES[args.coupling]
    if args.traces:
        over["keep_traces"] = True
    cfg.solve = replace(s, **over)
    if args.gset is not None:
        cfg.input = args.gset
    if args.out is not None:
        cfg.out = args.out
    cfg.emit_traces = cfg.emit_traces or args.traces
    return cfg


def cmd_solve(args) -> int:
    try:
        cfg = _resolve_solve(args)
    except (OSError, ValueError, TypeError) as exc:
        return _fail(f"bad config: {exc}")
    if args.dump_config:
        print(cfg.to_json())
        return EXIT_OK
    if cfg.input is None:
        return _fail("no input graph given")
    try:
        graph = load_gset(cfg.input)
    except FileNotFoundError:
        return _fail(f"no such file: {cfg.input}")
    except (OSError, ParseError, UnicodeDecodeError) as exc:
        return _fail(f"{cfg.input}: {exc}")
    problem = IsingProblem.from_graph(graph)
    oracle_H = None
    if args.oracle:
        if problem.n > ORACLE_MAX_N:
            return _fail(f"--oracle needs n <= {ORACLE_MAX_N} (got {problem.n})")
        oracle_H = brute_force_ground(problem)[0]

    start = time.perf_counter()
    reports, stats = multi_run(problem, cfg.solve, graph=graph, oracle_H=oracle_H)
    elapsed = time.perf_counter() - start

    out = Path(cfg.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    doc = stats.to_dict()
    doc["elapsed_seconds"] = elapsed
    (out / "stats.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    write_runs_csv(reports, out / "runs.csv")
    (out / "config.json").write_text(cfg.to_json() + "\n")
    if cfg.emit_traces:
        for r in reports:
            if r.trace is not None:
                r.trace.to_csv(out / f"trace_{r.run_index:04d}.csv")
                if cfg.emit_phases or args.traces:
                    r.trace.phases_to_csv(out / f"phases_{r.run_index:04d}.csv")

    if stats.failed == stats.runs:
        return _fail(f"all {stats.runs} runs diverged", EXIT_DIVERGED)
    print(f"runs {stats.runs} (failed {stats.failed})  mean cut {stats.mean_cut:.6g}  "
          f"best cut {stats.best_cut:.6g}")
    if stats.success_rate is not None:
        print(f"oracle H {stats.oracle_H:.12g}  success_rate {stats.success_rate:.4f}")
    return EXIT_OK


# ----------------------------------------------------------------------------
# adder


def parse_clamps(spec: str, names) -> dict:
    clamps = {}
    for part in filter(None, (p.strip() for p in spec.split(","))):
        name, eq, value = part.partition("=")
        name = name.strip()
        if not eq or name not in names:
            raise UsageError(f"bad clamp {part!r}; expected name=0|1 with name in {list(names)}")
        if value.strip() not in ("0", "1"):
            raise UsageError(f"clamp {name} must be 0 or 1, got {value.strip()!r}")
        if names.index(name) in clamps:
            raise UsageError(f"{name} clamped twice")
        clamps[names.index(name)] = int(value)
    if not clamps:
        raise UsageError("no clamps given")
    return clamps


def cmd_adder(args) -> int:
    ha = encode_half_adder()
    names = list(ha.variables)
    try:
        clamps = parse_clamps(args.clamps, names)
    except UsageError as exc:
        return _fail(str(exc))
    config = adder_config() if args.seed is None else adder_config(master_seed=args.seed)
    ground = brute_force_ground(ha.spin)[0]
    tally: dict[tuple, list] = {}
    for r in range(args.runs):
        res = invertible_solve(ha.spin, clamps, config, seed=config.run_seed(r), ground_H=ground)
        key = tuple(int(x) for x in res.assignment)
        tally.setdefault(key, [res.valid, 0])[1] += 1
    order = sorted(tally.items(), key=lambda kv: (-kv[1][1], kv[0]))
    for key, (valid, count) in order:
        cells = " ".join(f"{n}={v}" for n, v in zip(names, key))
        print(f"{cells}  {'valid' if valid else 'INVALID'}  {count}/{args.runs}")
    return EXIT_OK


# ----------------------------------------------------------------------------
# study


def _kind(value: str) -> str:
    if value in ("full", "line"):
        return value
    if value.startswith("sparse"):
        _, _, p = value.partition(":")
        try:
            if p and not 0 < float(p) <= 1:
                raise ValueError
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad sparsity in {value!r}") from None
        return value
    raise argparse.ArgumentTypeError(f"unknown kind {value!r} (full, line, sparse[:p])")


def _sizes(value: str):
    try:
        sizes = [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {value!r}") from None
    if not sizes or min(sizes) < 2:
        raise argparse.ArgumentTypeError("sizes must be integers >= 2")
    return sizes


def cmd_study(args) -> int:
    config = study_config()
    if args.seed is not None:
        config = replace(config, master_seed=args.seed)
    if args.t_end is not None:
        config = replace(config, options=replace(config.options, t_end=args.t_end))
    spec = [(args.kind, n) for n in args.sizes]
    rows = convergence_study(spec, args.samples, config)
    write_study_csv(rows, args.out or sys.stdout)
    return EXIT_OK


# ----------------------------------------------------------------------------
# adler


def cmd_adler(args) -> int:
    try:
        roots = adler_steady_states(args.omega0, args.omega1, args.A, args.harmonic, args.phase_u)
    except ValueError as exc:
        return _fail(str(exc))
    if not roots:
        print("no lock: |omega1 - omega0| > omega0 * A")
    for x, stable in roots:
        print(f"{x:.12f}  {'stable' if stable else 'unstable'}")
    return EXIT_OK


# ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="oscising", description="Oscillator Ising machine simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="anneal a G-set graph (MAX-CUT)")
    s.add_argument("gset", nargs="?", help="graph in G-set format")
    s.add_argument("--preset", choices=sorted(PRESETS), default="g22")
    s.add_argument("--config", help="JSON config (as written by --dump-config)")
    s.add_argument("--runs", type=int)
    s.add_argument("--seed", type=int, help="master seed")
    s.add_argument("--dt", type=float)
    s.add_argument("--t-end", type=float)
    s.add_argument("--coupling", choices=sorted(COUPLING_NAMES))
    s.add_argument("--rho", type=float)
    s.add_argument("--detune-sigma", type=float)
    s.add_argument("--oracle", action="store_true", help="compare with brute force (n <= 24)")
    s.add_argument("--threads", type=int)
    s.add_argument("--out", help="output directory (default: current)")
    s.add_argument("--traces", action="store_true", help="write per-run trace CSVs")
    s.add_argument("--dump-config", action="store_true", help="print the resolved config and exit")
    s.set_defaults(func=cmd_solve)

    a = sub.add_parser("adder", help="clamped half adder, e.g. 'a=1,b=1' or 's=1'")
    a.add_argument("clamps")
    a.add_argument("--runs", type=int, default=20)
    a.add_argument("--seed", type=int)
    a.set_defaults(func=cmd_adder)

    st = sub.add_parser("study", help="settling-time study on random networks (CSV)")
    st.add_argument("--kind", type=_kind, default="full")
    st.add_argument("--sizes", type=_sizes, default=[10, 50, 100, 200])
    st.add_argument("--samples", type=int, default=10)
    st.add_argument("--seed", type=int)
    st.add_argument("--t-end", type=float)
    st.add_argument("--out", help="CSV path (default: stdout)")
    st.set_defaults(func=cmd_study)

    ad = sub.add_parser("adler", help="locked states of the Adler equation")
    ad.add_argument("omega0", type=float)
    ad.add_argument("omega1", type=float)
    ad.add_argument("A", type=float)
    ad.add_argument("--harmonic", type=int, choices=(1, 2), default=1)
    ad.add_argument("--phase-u", type=float, default=0.0)
    ad.set_defaults(func=cmd_adler)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
