"""Multi-restart solving, benchmark statistics, scaling studies and clamped logic."""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ._kernels import derive_seed
from .coupling import make_coupling
from .dynamics import readout
from .ising import (
    IsingProblem,
    WeightedGraph,
    brute_force_ground,
    cut_size,
    ising_energy,
    spin_to_binary,
)
from .sde import IntegrationDiverged, Schedule, SimOptions, Simulation, Trace

PI = math.pi


@dataclass
class SolveConfig:
    schedule: Schedule = field(default_factory=Schedule)
    options: SimOptions = field(default_factory=SimOptions)
    runs: int = 1
    master_seed: int = 0
    coupling: str = "sinusoid"
    rho: float | None = None
    detune_sigma: float = 0.0
    threads: int = 1
    keep_traces: bool = False

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.detune_sigma < 0:
            raise ValueError("detune_sigma must be >= 0")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def coupling_fn(self):
        return make_coupling(self.coupling, self.rho)

    def run_seed(self, run_index: int) -> int:
        return derive_seed(self.master_seed, run_index)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["schedule"] = self.schedule.to_dict()
        d["options"] = asdict(self.options)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SolveConfig":
        d = dict(d)
        unknown = set(d) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "schedule" in d:
            d["schedule"] = Schedule.from_dict(d["schedule"])
        if "options" in d:
            opts = d["options"]
            bad = set(opts) - set(SimOptions.__dataclass_fields__)
            if bad:
                raise ValueError(f"unknown option keys: {sorted(bad)}")
            d["options"] = SimOptions(**opts)
        return cls(**d)


def small_config(**kw) -> SolveConfig:
    """Frozen profile for small dense instances (n <= ~20, weights O(1)).

    Coupling ramps 0 -> 5 over [0, 10] and on to 10 by t = 80, SYNC is off
    until t = 10 and then ramps to 3, noise cools from 0.7 to 0.1 and is
    switched off at t = 80; the last 10 time units relax deterministically.
    """
    cfg = SolveConfig(
        schedule=Schedule(coupling=((0.0, 0.0), (10.0, 5.0), (80.0, 10.0)),
                          sync=((0.0, 0.0), (10.0, 0.0), (80.0, 3.0)),
                          noise=((0.0, 0.7), (75.0, 0.1), (80.0, 0.0))),
        options=SimOptions(dt=0.01, t_end=90.0, record_stride=1000, record_phases=False),
        runs=100,
        coupling="smooth_square",
    )
    return replace(cfg, **kw)


def g22_config(**kw) -> SolveConfig:
    """Frozen profile for G-set sized sparse graphs (2000 vertices, unit weights)."""
    cfg = SolveConfig(
        schedule=Schedule(
            coupling=((0.0, 0.0), (80.0, 2.0)),
            sync=((0.0, 0.0), (25.0, 1.0), (50.0, 0.0), (75.0, 1.0), (100.0, 0.0)),
            noise=((0.0, 0.15),),
        ),
        options=SimOptions(dt=0.01, t_end=100.0, record_stride=500, record_phases=False),
        runs=100,
        coupling="smooth_square",
    )
    return replace(cfg, **kw)


PRESETS = {"small": small_config, "g22": g22_config}


@dataclass
class RunReport:
    run_index: int
    seed: int
    spins: np.ndarray | None
    H: float | None
    cut: float | None
    binarity: float | None
    trace: Trace | None = None
    failed: bool = False
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "run_index": self.run_index,
            "seed": self.seed,
            "H": self.H,
            "cut": self.cut,
            "binarity": self.binarity,
            "failed": self.failed,
            "error": self.error,
            "spins": None if self.spins is None else [int(x) for x in self.spins],
        }


@dataclass
class EnsembleStats:
    runs: int
    failed: int
    mean_H: float | None
    best_H: float | None
    mean_cut: float | None = None
    best_cut: float | None = None
    worst_cut: float | None = None
    oracle_H: float | None = None
    success_rate: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _detuning(seed: int, n: int, sigma: float):
    if sigma == 0:
        return None
    return np.random.default_rng([seed & ((1 << 64) - 1), 1]).normal(0.0, sigma, n)


def _one_run(sim: Simulation, problem: IsingProblem, config: SolveConfig, r: int) -> RunReport:
    seed = config.run_seed(r)
    if config.detune_sigma:
        sim = replace(sim, detuning=np.append(_detuning(seed, problem.n, config.detune_sigma), 0.0))
    try:
        trace, state = sim.run(replace(config.options, seed=seed))
    except IntegrationDiverged as exc:
        return RunReport(r, seed, None, None, None, None, failed=True, error=str(exc))
    spins, binarity = readout(state)
    spins = spins[:-1]
    H = ising_energy(spins, problem)
    cut = None
    if sim.graph is not None:
        cut = cut_size(spins, sim.graph)
        if abs(H - (sim.graph.total_weight() - 2 * cut)) > 1e-9 * (1 + abs(H)):
            raise AssertionError(f"run {r}: H and cut disagree")
    return RunReport(r, seed, spins, H, cut, binarity, trace if config.keep_traces else None)


def ensemble_stats(reports, oracle_H: float | None = None) -> EnsembleStats:
    ok = [r for r in reports if not r.failed]
    Hs = np.array([r.H for r in ok])
    stats = EnsembleStats(
        runs=len(reports),
        failed=len(reports) - len(ok),
        mean_H=float(Hs.mean()) if len(ok) else None,
        best_H=float(Hs.min()) if len(ok) else None,
    )
    if ok and ok[0].cut is not None:
        cuts = np.array([r.cut for r in ok])
        stats.mean_cut = float(cuts.mean())
        stats.best_cut = float(cuts.max())
        stats.worst_cut = float(cuts.min())
    if oracle_H is not None:
        stats.oracle_H = float(oracle_H)
        tol = 1e-9 * (1.0 + abs(oracle_H))
        hits = sum(abs(r.H - oracle_H) <= tol for r in ok)
        stats.success_rate = hits / len(ok) if ok else 0.0
    return stats


def multi_run(problem: IsingProblem, config: SolveConfig, graph: WeightedGraph | None = None,
              oracle_H: float | None = None):
    """Run ``config.runs`` independent anneals; returns ``(reports, stats)``.

    Run ``r`` is seeded with ``derive_seed(master_seed, r)``, so the result
    does not depend on ``config.threads``.  Diverged runs are reported as
    failed and left out of the statistics.
    """
    sim = Simulation.build(problem, config.schedule, config.coupling_fn(), graph=graph)
    work = range(config.runs)
    if config.threads > 1 and config.runs > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            reports = list(pool.map(lambda r: _one_run(sim, problem, config, r), work))
    else:
        reports = [_one_run(sim, problem, config, r) for r in work]
    reports.sort(key=lambda rep: rep.run_index)
    return reports, ensemble_stats(reports, oracle_H)


def write_runs_csv(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["run_index", "seed", "H", "cut", "binarity", "failed"])
        for r in reports:
            wr.writerow([r.run_index, r.seed, r.H, r.cut, r.binarity, int(r.failed)])


# ----------------------------------------------------------------------------
# Random networks


WEIGHT_DISTS = ("uniform01", "uniform02", "pm1")


def _weights(rng, dist: str, m: int) -> np.ndarray:
    if dist == "uniform01":
        return rng.uniform(0.0, 1.0, m)
    if dist == "uniform02":
        return rng.uniform(0.0, 2.0, m)
    if dist == "pm1":
        return rng.choice(np.array([-1.0, 1.0]), m)
    raise ValueError(f"unknown weight distribution {dist!r}")


def generate_network(kind: str, n: int, weight_dist: str = "uniform01", seed: int = 0,
                     p: float | None = None) -> WeightedGraph:
    """Random weighted graph: ``full``, ``sparse`` (each pair kept with prob. ``p``) or ``line``."""
    rng = np.random.default_rng(seed)
    if kind == "full":
        i, j = np.triu_indices(n, 1)
    elif kind == "sparse":
        if p is None or not 0 < p <= 1:
            raise ValueError("sparse networks need 0 < p <= 1")
        i, j = np.triu_indices(n, 1)
        keep = rng.random(len(i)) < p
        i, j = i[keep], j[keep]
    elif kind == "line":
        i = np.arange(n - 1)
        j = i + 1
    else:
        raise ValueError(f"unknown network kind {kind!r}")
    return WeightedGraph(n, i, j, _weights(rng, weight_dist, len(i)))


def random_gset_like(n: int = 2000, m: int = 19990, seed: int = 0) -> WeightedGraph:
    """Uniform random simple graph with exactly ``m`` unit-weight edges."""
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    pick = np.sort(rng.choice(len(iu), size=m, replace=False))
    i, j = iu[pick], ju[pick]
    return WeightedGraph(n, i, j, np.ones(m))


# ----------------------------------------------------------------------------
# Convergence study


def study_config(**kw) -> SolveConfig:
    """Deterministic constant-strength profile used for settling-time comparisons."""
    cfg = SolveConfig(
        schedule=Schedule.constant(1.0, 1.0, 0.0),
        options=SimOptions(dt=0.01, t_end=100.0, record_stride=10, stop_tol=1e-3),
    )
    return replace(cfg, **kw)


@dataclass
class StudyRow:
    kind: str
    n: int
    sample: int
    settling_time: float
    final_energy: float
    settled: bool
    times: np.ndarray = field(default=None, repr=False)
    energy: np.ndarray = field(default=None, repr=False)


def _parse_kind(kind: str):
    if kind.startswith("sparse"):
        _, _, p = kind.partition(":")
        return "sparse", float(p) if p else 0.1
    return kind, None


def convergence_study(spec, samples_per_point: int = 10, config: SolveConfig | None = None,
                      weight_dist: str = "uniform01"):
    """Settling times of deterministic runs on random networks.

    ``spec`` lists ``(kind, n)`` pairs; kind is ``full``, ``line`` or
    ``sparse:<p>``.  The settling time is the first recorded time with
    ``max |dphi/dt| < stop_tol``; runs that never settle report ``t_end``.
    """
    config = config or study_config()
    if any(v != 0 for _, v in config.schedule.noise):
        raise ValueError("convergence study needs a noiseless schedule")
    rows = []
    for kind, n in spec:
        base, p = _parse_kind(kind)
        for sample in range(samples_per_point):
            seed = derive_seed(config.master_seed, _point_key(kind, n, sample))
            graph = generate_network(base, n, weight_dist, seed, p)
            sim = Simulation.build(IsingProblem.from_graph(graph), config.schedule, config.coupling_fn())
            trace, _ = sim.run(replace(config.options, seed=seed))
            settled = trace.stopped_at is not None
            rows.append(StudyRow(kind, n, sample,
                                 trace.stopped_at if settled else config.options.t_end,
                                 float(trace.energy[-1]), settled, trace.times, trace.energy))
    return rows


def _point_key(kind: str, n: int, sample: int) -> int:
    code = sum(ord(c) * 131 ** k for k, c in enumerate(kind)) & 0xFFFFFFFF
    return (code << 32) ^ (n << 12) ^ sample


STUDY_HEADER = ["kind", "n", "sample", "settling_time", "final_energy"]


def write_study_csv(rows, dest) -> None:
    """Write the study table to a path or an open text stream."""
    if hasattr(dest, "write"):
        _study_rows(csv.writer(dest), rows)
        return
    with open(dest, "w", newline="") as fh:
        _study_rows(csv.writer(fh), rows)


def _study_rows(wr, rows) -> None:
    wr.writerow(STUDY_HEADER)
    for r in rows:
        wr.writerow([r.kind, r.n, r.sample, repr(r.settling_time), repr(r.final_energy)])


# ----------------------------------------------------------------------------
# Invertible logic


def adder_config(**kw) -> SolveConfig:
    """Frozen profile for clamped logic: SYNC ramps 0 -> 2 while the noise cools."""
    cfg = SolveConfig(
        schedule=Schedule(coupling=((0.0, 1.0),), sync=((0.0, 0.0), (40.0, 2.0)),
                          noise=((0.0, 0.5), (35.0, 0.1), (40.0, 0.0))),
        options=SimOptions(dt=0.01, t_end=45.0, record_stride=500, record_phases=False),
    )
    return replace(cfg, **kw)


@dataclass
class LogicResult:
    assignment: np.ndarray       # 0/1 per variable, clamped ones included
    valid: bool
    H: float
    binarity: float
    seed: int


def invertible_solve(problem: IsingProblem, clamps: dict, config: SolveConfig | None = None,
                     seed: int | None = None, ground_H: float | None = None) -> LogicResult:
    """Solve a spin-domain logic encoding with some variables clamped.

    ``clamps`` maps variable index -> logic value (1 pins the oscillator at
    phase 0, 0 at phase pi).  The result is valid when the full assignment
    attains ``ground_H`` (by default the brute-force ground energy).
    """
    config = config or adder_config()
    phases = {}
    for idx, val in clamps.items():
        if val not in (0, 1):
            raise ValueError(f"clamp value for {idx} must be 0 or 1")
        if not 0 <= idx < problem.n:
            raise IndexError(f"clamp index {idx} out of range")
        phases[idx] = 0.0 if val == 1 else PI
    if ground_H is None:
        ground_H = brute_force_ground(problem)[0]
    seed = config.master_seed if seed is None else seed
    sim = Simulation.build(problem, config.schedule, config.coupling_fn(), clamps=phases)
    _, state = sim.run(replace(config.options, seed=seed))
    spins, binarity = readout(state)
    spins = spins[:-1]
    H = ising_energy(spins, problem)
    valid = abs(H - ground_H) <= 1e-9 * (1.0 + abs(ground_H))
    return LogicResult(spin_to_binary(spins), bool(valid), H, binarity, seed)
