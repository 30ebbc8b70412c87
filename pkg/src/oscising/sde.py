"""Noisy phase dynamics: schedules, Euler-Maruyama stepping and trace capture."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .coupling import CouplingFunction, make_coupling
from .dynamics import DynParams, PhaseState, lyapunov, readout, rhs
from .ising import DimensionError, IsingProblem, WeightedGraph, cut_size, homogenize


class IntegrationDiverged(RuntimeError):
    def __init__(self, step: int, time: float):
        super().__init__(f"integration diverged at step {step} (t={time:g})")
        self.step = step
        self.time = time


def _breakpoints(points, name):
    pts = tuple((float(t), float(v)) for t, v in points)
    if not pts:
        raise ValueError(f"{name}: schedule needs at least one breakpoint")
    ts = [t for t, _ in pts]
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError(f"{name}: breakpoint times must be strictly increasing")
    for t, v in pts:
        if not (math.isfinite(t) and math.isfinite(v)) or v < 0:
            raise ValueError(f"{name}: values must be finite and non-negative")
    return pts


@dataclass(frozen=True)
class Schedule:
    """Piecewise-linear profiles ``(t, value)`` for A_c, A_s and A_n, clamped at the ends."""

    coupling: tuple = ((0.0, 1.0),)
    sync: tuple = ((0.0, 0.0),)
    noise: tuple = ((0.0, 0.0),)

    def __post_init__(self):
        for name in ("coupling", "sync", "noise"):
            object.__setattr__(self, name, _breakpoints(getattr(self, name), name))

    @classmethod
    def constant(cls, A_c: float, A_s: float = 0.0, A_n: float = 0.0) -> "Schedule":
        return cls(((0.0, A_c),), ((0.0, A_s),), ((0.0, A_n),))

    def replace(self, **kw) -> "Schedule":
        d = self.to_dict()
        d.update(kw)
        return Schedule(d["coupling"], d["sync"], d["noise"])

    def arrays(self):
        ts = tuple(np.array([t for t, _ in p]) for p in (self.coupling, self.sync, self.noise))
        vs = tuple(np.array([v for _, v in p]) for p in (self.coupling, self.sync, self.noise))
        return ts, vs

    def to_dict(self) -> dict:
        return {k: [list(p) for p in getattr(self, k)] for k in ("coupling", "sync", "noise")}

    @classmethod
    def from_dict(cls, d: dict) -> "Schedule":
        unknown = set(d) - {"coupling", "sync", "noise"}
        if unknown:
            raise ValueError(f"unknown schedule keys: {sorted(unknown)}")
        return cls(**{k: tuple(tuple(p) for p in v) for k, v in d.items()})


def schedule_eval(schedule: Schedule, t: float) -> tuple[float, float, float]:
    """(A_c, A_s, A_n) at time ``t``."""
    ts, vs = schedule.arrays()
    return tuple(float(_kernels.pwl(float(t), a, b)) for a, b in zip(ts, vs))


def effective_temperature(A_n: float) -> float:
    """kT of the stationary Gibbs law for additive noise of amplitude A_n."""
    if A_n < 0:
        raise ValueError("noise amplitude must be non-negative")
    return 0.5 * A_n * A_n


@dataclass
class SimOptions:
    dt: float = 0.01
    t_end: float = 20.0
    seed: int = 0
    record_stride: int = 10
    stop_tol: float = 0.0
    init: str = "half"          # "half": U[0, pi), "full": U[0, 2pi)
    record_phases: bool = True

    def __post_init__(self):
        if not (self.dt > 0 and self.t_end > 0 and self.dt <= self.t_end):
            raise ValueError("need 0 < dt <= t_end")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if self.stop_tol < 0:
            raise ValueError("stop_tol must be >= 0")
        if self.init not in ("half", "full"):
            raise ValueError("init must be 'half' or 'full'")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass
class Trace:
    times: np.ndarray
    energy: np.ndarray
    binarity: np.ndarray
    cut: np.ndarray = None
    phases: np.ndarray = None
    stopped_at: float | None = None   # time of early stop, if any

    def __len__(self):
        return len(self.times)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["time", "energy", "cut", "binarity"])
            cut = self.cut if self.cut is not None else [float("nan")] * len(self)
            for row in zip(self.times, self.energy, cut, self.binarity):
                wr.writerow([repr(float(x)) for x in row])

    def phases_to_csv(self, path) -> None:
        if self.phases is None:
            raise ValueError("trace was recorded without phases")
        n = self.phases.shape[1]
        header = "time," + ",".join(f"phi{i}" for i in range(n))
        np.savetxt(path, np.column_stack([self.times, self.phases]), delimiter=",",
                   header=header, comments="", fmt="%.17g")

    def summary(self) -> dict:
        return {
            "records": len(self),
            "t_final": float(self.times[-1]),
            "energy_final": float(self.energy[-1]),
            "cut_final": None if self.cut is None else float(self.cut[-1]),
            "binarity_final": float(self.binarity[-1]),
            "stopped_at": self.stopped_at,
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary())


def em_step(state: PhaseState, params: DynParams, dt: float, A_n: float, noise,
            step: int = 0) -> PhaseState:
    """One Euler-Maruyama step ``phi + rhs dt + A_n sqrt(dt) noise`` (pinned entries fixed)."""
    noise = np.asarray(noise, dtype=np.float64)
    if noise.shape != state.phases.shape:
        raise DimensionError("noise vector has the wrong length")
    phi = state.phases + rhs(state, params) * dt
    phi = phi + np.where(params.free, A_n * math.sqrt(dt) * noise, 0.0)
    if not np.all(np.isfinite(phi)):
        raise IntegrationDiverged(step, state.time + dt)
    return PhaseState(phi, state.time + dt)


def initial_phases(n: int, seed: int, init: str = "half") -> np.ndarray:
    rng = np.random.default_rng([int(seed) & ((1 << 64) - 1), 0])
    hi = math.pi if init == "half" else 2.0 * math.pi
    return rng.uniform(0.0, hi, n)


@dataclass
class Simulation:
    """Everything the integrator needs, prepared once and reusable across seeds."""

    problem: IsingProblem               # homogenized; last index is the reference
    schedule: Schedule
    coupling: CouplingFunction
    detuning: np.ndarray
    pinned: np.ndarray
    pinned_phases: np.ndarray
    graph: WeightedGraph | None = None
    _sched: tuple = field(default=None, repr=False)

    @classmethod
    def build(cls, problem: IsingProblem, schedule: Schedule, coupling=None, detuning=None,
              clamps=None, graph=None) -> "Simulation":
        hom = homogenize(problem)
        n = hom.n
        det = np.zeros(n)
        if detuning is not None:
            d = np.asarray(detuning, dtype=np.float64)
            if d.shape != (problem.n,):
                raise DimensionError("detuning must have one entry per spin")
            det[:-1] = d
        pinned = np.zeros(n, dtype=bool)
        pinned[-1] = True
        pinned_phases = np.zeros(n)
        for idx, phase in (clamps or {}).items():
            if not 0 <= idx < problem.n:
                raise IndexError(f"clamp index {idx} out of range")
            pinned[idx] = True
            pinned_phases[idx] = phase
        det[pinned] = 0.0
        if graph is not None and graph.n != problem.n:
            raise DimensionError("graph and problem sizes differ")
        return cls(hom, schedule, coupling or make_coupling(), det, pinned, pinned_phases, graph)

    def params_at(self, t: float) -> DynParams:
        A_c, A_s, _ = schedule_eval(self.schedule, t)
        return DynParams(self.problem, A_c, A_s, self.detuning, self.coupling, self.pinned)

    def _record(self, phi, t, out):
        params = self.params_at(t)
        spins, binarity = readout(phi)
        out["times"].append(t)
        out["energy"].append(lyapunov(phi, params))
        out["binarity"].append(binarity)
        if self.graph is not None:
            out["cut"].append(cut_size(spins[:-1], self.graph))
        if out["phases"] is not None:
            out["phases"].append(phi.copy())

    def run(self, options: SimOptions, initial=None):
        """Integrate over [0, t_end]; returns ``(trace, final_state)``."""
        n = self.problem.n
        if initial is None:
            phi = np.zeros(n)
            phi[:-1] = initial_phases(n - 1, options.seed, options.init)
        else:
            phi = np.array(initial, dtype=np.float64)
            if phi.shape != (n,):
                raise DimensionError("initial phases must include the reference")
        phi[self.pinned] = self.pinned_phases[self.pinned]
        free = ~self.pinned
        graph = self.problem.kernel_graph()
        ts, vs = self.schedule.arrays()
        kind, rho = self.coupling.kind_code, float(self.coupling.rho)
        seed = _kernels.as_seed(options.seed)

        rec = {"times": [], "energy": [], "binarity": [], "cut": [],
               "phases": [] if options.record_phases else None}
        self._record(phi, 0.0, rec)
        total = options.n_steps
        k = 0
        stopped_at = None
        while k < total:
            k1 = min(k + options.record_stride, total)
            k, status = _kernels.integrate(
                phi, free, graph, self.detuning, kind, rho,
                ts, vs[0], vs[1], vs[2], options.dt, seed, k, k1, options.stop_tol)
            if status == _kernels.DIVERGED:
                raise IntegrationDiverged(k, k * options.dt)
            self._record(phi, k * options.dt, rec)
            if status == _kernels.STOPPED:
                stopped_at = k * options.dt
                break
        trace = Trace(
            times=np.array(rec["times"]),
            energy=np.array(rec["energy"]),
            binarity=np.array(rec["binarity"]),
            cut=np.array(rec["cut"]) if self.graph is not None else None,
            phases=np.array(rec["phases"]) if rec["phases"] is not None else None,
            stopped_at=stopped_at,
        )
        return trace, PhaseState(phi, k * options.dt)


def simulate(problem: IsingProblem, schedule: Schedule, coupling: CouplingFunction = None,
             detuning=None, options: SimOptions = None, *, graph: WeightedGraph = None,
             clamps: dict = None, initial=None):
    """Fixed-step Euler-Maruyama run of the oscillator network for ``problem``.

    A reference oscillator is appended (pinned at phase 0) and ``clamps``
    maps spin index -> pinned phase.  Noise for oscillator ``i`` at step
    ``k`` is a pure function of ``(options.seed, k, i)``.
    """
    sim = Simulation.build(problem, schedule, coupling, detuning, clamps, graph)
    return sim.run(options or SimOptions(), initial)
