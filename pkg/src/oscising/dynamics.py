"""Deterministic phase dynamics: vector field, Lyapunov energy, readout, Adler locking."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .coupling import CouplingFunction, make_coupling
from .ising import DimensionError, IsingProblem

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class PhaseState:
    phases: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        phases = np.array(self.phases, dtype=np.float64)
        if phases.ndim != 1:
            raise DimensionError("phases must be a vector")
        if not np.all(np.isfinite(phases)):
            raise ValueError("non-finite phase")
        phases.setflags(write=False)
        object.__setattr__(self, "phases", phases)


@dataclass(frozen=True, eq=False)
class DynParams:
    """Parameters of the phase vector field.

    ``problem`` is homogenized: its last oscillator is the phase reference.
    ``pinned`` marks oscillators whose phase is frozen (rate 0, no noise);
    by default only the reference is pinned.
    """

    problem: IsingProblem
    A_c: float = 1.0
    A_s: float = 0.0
    detuning: np.ndarray = None
    coupling_fn: CouplingFunction = field(default_factory=make_coupling)
    pinned: np.ndarray = None

    def __post_init__(self):
        n = self.problem.n
        det = np.zeros(n) if self.detuning is None else np.array(self.detuning, dtype=np.float64)
        if det.shape != (n,):
            raise DimensionError(f"detuning has shape {det.shape}, expected ({n},)")
        if not np.all(np.isfinite(det)):
            raise ValueError("non-finite detuning")
        for name in ("A_c", "A_s"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and non-negative")
        if self.pinned is None:
            pinned = np.zeros(n, dtype=bool)
            pinned[-1] = True
        else:
            pinned = np.array(self.pinned, dtype=bool)
            if pinned.shape != (n,):
                raise DimensionError("pinned mask has the wrong length")
        det.setflags(write=False)
        pinned.setflags(write=False)
        object.__setattr__(self, "detuning", det)
        object.__setattr__(self, "pinned", pinned)

    @property
    def free(self) -> np.ndarray:
        return ~self.pinned

    def with_strengths(self, A_c: float, A_s: float) -> "DynParams":
        return DynParams(self.problem, A_c, A_s, self.detuning, self.coupling_fn, self.pinned)


def _phases(state, n: int) -> np.ndarray:
    phi = state.phases if isinstance(state, PhaseState) else np.asarray(state, dtype=np.float64)
    if phi.shape != (n,):
        raise DimensionError(f"state has {phi.shape}, expected ({n},)")
    return np.ascontiguousarray(phi, dtype=np.float64)


def rhs(state, params: DynParams) -> np.ndarray:
    """dphi_i/dt = dw_i + A_c sum_j J_ij g(phi_i - phi_j) - A_s sin(2 phi_i); 0 on pinned."""
    p = params.problem
    phi = _phases(state, p.n)
    out = np.empty(p.n)
    cf = params.coupling_fn
    _kernels.drift(phi, params.free, p.kernel_graph(), params.detuning, cf.kind_code,
                   float(cf.rho), float(params.A_c), float(params.A_s), out)
    return out


def lyapunov(state, params: DynParams) -> float:
    """E = A_c sum_{i<j} J_ij V(phi_i - phi_j) - (A_s/2) sum_i cos(2 phi_i) - sum_i dw_i phi_i.

    With this sign on the detuning term ``rhs = -grad E`` on free coordinates.
    """
    p = params.problem
    phi = _phases(state, p.n)
    pair = p.w @ params.coupling_fn.V(phi[p.i] - phi[p.j]) if p.m else 0.0
    return float(params.A_c * pair
                 - 0.5 * params.A_s * np.cos(2.0 * phi).sum()
                 - params.detuning @ phi)


def readout(state):
    """Spins relative to the last (reference) oscillator and the binarity metric.

    ``s_i = +1`` iff ``cos(phi_i - phi_ref) >= 0``; binarity is
    ``min_i |cos(phi_i - phi_ref)|`` over the non-reference oscillators.
    """
    phi = state.phases if isinstance(state, PhaseState) else np.asarray(state, dtype=np.float64)
    c = np.cos(phi - phi[-1])
    spins = np.where(c >= 0, 1, -1).astype(np.int64)
    spins[-1] = 1
    binarity = float(np.abs(c[:-1]).min()) if len(c) > 1 else 1.0
    return spins, binarity


def adler_steady_states(omega0: float, omega1: float, A: float, harmonic: int = 1,
                        phase_u: float = 0.0):
    """Locked phase differences of ``d(dphi)/dt = w0 - w1 + w0 A sin(k dphi - phase_u)``.

    Returns sorted ``(dphi*, stable)`` pairs in [0, 2pi); a root is stable
    when the slope ``w0 A k cos(k dphi* - phase_u)`` is negative (the tangent
    double root at the edge of the locking range counts as unstable).  Empty when
    ``|w1 - w0| > w0 A`` (no lock).
    """
    if harmonic not in (1, 2):
        raise ValueError("harmonic must be 1 or 2")
    if not (omega0 > 0 and A > 0):
        raise ValueError("omega0 and A must be positive")
    r = (omega1 - omega0) / (omega0 * A)
    if abs(r) > 1.0:
        return []
    base = math.asin(r)
    roots = []
    for arg in (base, math.pi - base):
        for k in range(harmonic):
            x = math.fmod((arg + phase_u + TWO_PI * k) / harmonic, TWO_PI)
            if x < 0:
                x += TWO_PI
            if x >= TWO_PI:
                x -= TWO_PI
            slope = omega0 * A * harmonic * math.cos(harmonic * x - phase_u)
            if not any(abs(x - y) < 1e-12 or abs(abs(x - y) - TWO_PI) < 1e-12 for y, _ in roots):
                roots.append((x, slope < -1e-12 * omega0 * A * harmonic))
    return sorted(roots)
