"""Pairwise coupling functions ``g`` and their potentials ``V`` (``V' = -g``)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

TWO_PI = 2.0 * math.pi
GRID_POINTS = 4096
DEFAULT_RHO = 4.0

SINUSOID = "sinusoid"
SMOOTH_SQUARE = "smooth_square"


@dataclass(frozen=True, eq=False)
class CouplingFunction:
    """Odd 2pi-periodic coupling ``g`` with even potential ``V``, ``V(0) = 1``.

    ``kind_code``/``rho`` are what the compiled integrator needs to evaluate
    ``g`` itself; ``V`` is only used for energies.
    """

    kind: str
    rho: float = 0.0
    _spline: CubicHermiteSpline = field(default=None, repr=False)

    @property
    def kind_code(self) -> int:
        return 0 if self.kind == SINUSOID else 1

    def g(self, delta):
        delta = np.asarray(delta, dtype=np.float64)
        if self.kind == SINUSOID:
            return np.sin(delta)
        return np.tanh(self.rho * np.sin(delta)) / math.tanh(self.rho)

    def V(self, delta):
        delta = np.asarray(delta, dtype=np.float64)
        if self.kind == SINUSOID:
            return np.cos(delta)
        return self._spline(np.mod(delta, TWO_PI))

    def grid(self, points: int = GRID_POINTS):
        """``(delta, g, V)`` sampled on a uniform grid over [0, 2pi]."""
        x = np.linspace(0.0, TWO_PI, points + 1)
        return x, self.g(x), self.V(x)

    def to_csv(self, path, points: int = GRID_POINTS) -> None:
        x, g, v = self.grid(points)
        np.savetxt(path, np.column_stack([x, g, v]), delimiter=",",
                   header="delta,g,V", comments="", fmt="%.17g")


def _potential_nodes(g, x: np.ndarray, order: int = 8) -> np.ndarray:
    """V(x_k) = 1 - int_0^{x_k} g, by Gauss-Legendre on each grid cell."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    a, b = x[:-1], x[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    cell = (g(mid[:, None] + half[:, None] * nodes) * weights).sum(axis=1) * half
    return 1.0 - np.concatenate([[0.0], np.cumsum(cell)])


def make_coupling(kind: str = SINUSOID, rho: float | None = None) -> CouplingFunction:
    """Build a coupling function.

    ``sinusoid``: g = sin, V = cos.
    ``smooth_square``: g = tanh(rho sin d) / tanh(rho); V is integrated once on
    a 4096-cell grid and served by a cubic Hermite interpolant whose node
    slopes are exactly ``-g``.
    """
    aliases = {"sin": SINUSOID, "square": SMOOTH_SQUARE}
    kind = aliases.get(kind, kind)
    if kind == SINUSOID:
        return CouplingFunction(SINUSOID)
    if kind != SMOOTH_SQUARE:
        raise ValueError(f"unknown coupling kind {kind!r}")
    rho = DEFAULT_RHO if rho is None else float(rho)
    if not rho > 0 or not math.isfinite(rho):
        raise ValueError("rho must be a positive finite number")
    proto = CouplingFunction(SMOOTH_SQUARE, rho)
    x = np.linspace(0.0, TWO_PI, GRID_POINTS + 1)
    v = _potential_nodes(proto.g, x)
    # integral of an odd periodic function over a period is zero
    v[-1] = v[0]
    spline = CubicHermiteSpline(x, v, -proto.g(x))
    return CouplingFunction(SMOOTH_SQUARE, rho, spline)
