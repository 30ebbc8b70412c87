"""Ising problems: representation, G-set ingestion, energies and exact oracles.

Conventions used throughout the package:

* indices are 0-based (the G-set format is 1-based on disk only);
* couplings are stored once per unordered pair ``i < j`` and the Hamiltonian is

      H(s) = sum_i h_i s_i + sum_{i<j} J_ij s_i s_j

* a MAX-CUT graph maps to ``J_ij = w_ij``, ``h = 0`` so that
  ``H = sum_{i<j} J_ij - 2 * cut``.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAX_BRUTE_FORCE_SPINS = 24


class ParseError(ValueError):
    """Malformed G-set input; ``line`` is the 1-based offending line."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DimensionError(ValueError):
    pass


def _frozen(a, dtype=np.float64) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected weighted graph with edges ``(i, j, w)``, ``i < j``."""

    n: int
    i: np.ndarray
    j: np.ndarray
    w: np.ndarray
    duplicates: int = 0

    def __post_init__(self):
        object.__setattr__(self, "i", _frozen(self.i, np.int64))
        object.__setattr__(self, "j", _frozen(self.j, np.int64))
        object.__setattr__(self, "w", _frozen(self.w))
        if self.n < 1:
            raise ValueError("graph needs at least one vertex")
        if not (len(self.i) == len(self.j) == len(self.w)):
            raise DimensionError("edge arrays differ in length")
        if len(self.i):
            if np.any(self.i >= self.j) or self.i.min() < 0 or self.j.max() >= self.n:
                raise ValueError("edges must satisfy 0 <= i < j < n")
            keys = self.i * self.n + self.j
            if len(np.unique(keys)) != len(keys):
                raise ValueError("duplicate edge")
        if not np.all(np.isfinite(self.w)):
            raise ValueError("non-finite edge weight")

    @classmethod
    def from_edges(cls, n: int, edges, duplicates: int = 0) -> "WeightedGraph":
        edges = list(edges)
        norm = [(min(a, b), max(a, b), float(w)) for a, b, w in edges]
        i, j, w = (zip(*norm) if norm else ((), (), ()))
        return cls(n, list(i), list(j), list(w), duplicates)

    @property
    def m(self) -> int:
        return len(self.w)

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        return [(int(a), int(b), float(c)) for a, b, c in zip(self.i, self.j, self.w)]

    def total_weight(self) -> float:
        return math.fsum(self.w)


@dataclass(frozen=True, eq=False)
class IsingProblem:
    """Ising instance over ``n`` variables with sparse symmetric couplings.

    ``domain`` is ``"spin"`` (variables in {-1, +1}) or ``"binary"``
    (variables in {0, 1}, used for penalty-form logic encodings).
    """

    n: int
    i: np.ndarray
    j: np.ndarray
    w: np.ndarray
    h: np.ndarray = None
    domain: str = "spin"
    _csr: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("problem needs at least one spin")
        i = np.asarray(self.i, dtype=np.int64)
        j = np.asarray(self.j, dtype=np.int64)
        w = np.asarray(self.w, dtype=np.float64)
        if not (len(i) == len(j) == len(w)):
            raise DimensionError("coupling arrays differ in length")
        if len(i):
            if np.any(i == j):
                raise ValueError("self-couplings are not allowed")
            lo, hi = np.minimum(i, j), np.maximum(i, j)
            if lo.min() < 0 or hi.max() >= self.n:
                raise ValueError("coupling index out of range")
            order = np.lexsort((hi, lo))
            i, j, w = lo[order], hi[order], w[order]
            keys = i * self.n + j
            if np.any(keys[1:] == keys[:-1]):
                raise ValueError("duplicate coupling pair")
        h = np.zeros(self.n) if self.h is None else np.asarray(self.h, dtype=np.float64)
        if h.shape != (self.n,):
            raise DimensionError(f"fields have shape {h.shape}, expected ({self.n},)")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(h))):
            raise ValueError("non-finite coupling or field")
        if self.domain not in ("spin", "binary"):
            raise ValueError(f"unknown domain {self.domain!r}")
        object.__setattr__(self, "i", _frozen(i, np.int64))
        object.__setattr__(self, "j", _frozen(j, np.int64))
        object.__setattr__(self, "w", _frozen(w))
        object.__setattr__(self, "h", _frozen(h))

    @classmethod
    def from_graph(cls, graph: WeightedGraph) -> "IsingProblem":
        return cls(graph.n, graph.i, graph.j, graph.w)

    @classmethod
    def from_dense(cls, J, h=None, domain: str = "spin") -> "IsingProblem":
        """Build from a symmetric matrix whose upper triangle holds ``J_ij``."""
        J = np.asarray(J, dtype=np.float64)
        if J.ndim != 2 or J.shape[0] != J.shape[1]:
            raise DimensionError("J must be square")
        if not np.allclose(J, J.T, rtol=0, atol=0):
            raise ValueError("J must be symmetric")
        i, j = np.nonzero(np.triu(J, 1))
        return cls(J.shape[0], i, j, J[i, j], h, domain)

    def dense(self) -> np.ndarray:
        J = np.zeros((self.n, self.n))
        J[self.i, self.j] = self.w
        J[self.j, self.i] = self.w
        return J

    def csr(self):
        """Symmetric adjacency as ``(indptr, indices, weights)``, columns ascending."""
        if self._csr is None:
            rows = np.concatenate([self.i, self.j])
            cols = np.concatenate([self.j, self.i])
            vals = np.concatenate([self.w, self.w])
            order = np.lexsort((cols, rows))
            rows, cols, vals = rows[order], cols[order], vals[order]
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(np.bincount(rows, minlength=self.n), out=indptr[1:])
            object.__setattr__(self, "_csr", (indptr, cols.copy(), vals.copy()))
        return self._csr

    def kernel_graph(self) -> tuple:
        """CSR adjacency plus the edge list, as consumed by the compiled drift."""
        return self.csr() + (self.i, self.j, self.w)

    @property
    def m(self) -> int:
        return len(self.w)

    def to_json(self) -> str:
        doc = {
            "n": self.n,
            "edges": [[int(a), int(b), float(c)] for a, b, c in zip(self.i, self.j, self.w)],
            "h": [float(x) for x in self.h],
        }
        if self.domain != "spin":
            doc["domain"] = self.domain
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "IsingProblem":
        doc = json.loads(text)
        edges = doc.get("edges", [])
        i = [e[0] for e in edges]
        j = [e[1] for e in edges]
        w = [e[2] for e in edges]
        return cls(int(doc["n"]), i, j, w, doc.get("h"), doc.get("domain", "spin"))


# ----------------------------------------------------------------------------
# G-set ingestion


def parse_gset(text) -> WeightedGraph:
    """Parse the G-set text format (``n m`` header, then ``i j w`` lines, 1-based)."""
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("ascii")
    lines = [(k + 1, ln.split()) for k, ln in enumerate(text.splitlines())]
    lines = [(k, toks) for k, toks in lines if toks]
    if not lines:
        raise ParseError(1, "empty input")
    lineno, head = lines[0]
    if len(head) != 2:
        raise ParseError(lineno, "header must be '<n> <m>'")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise ParseError(lineno, "header must hold two integers") from None
    if n < 1 or m < 0:
        raise ParseError(lineno, "header values out of range")
    body = lines[1:]

    edges: dict[tuple[int, int], float] = {}
    duplicates = 0
    for lineno, toks in body[:m]:
        if len(toks) != 3:
            raise ParseError(lineno, "edge line must be '<i> <j> <w>'")
        try:
            a, b = int(toks[0]), int(toks[1])
            w = float(toks[2])
        except ValueError:
            raise ParseError(lineno, "malformed number") from None
        for v in (a, b):
            if not 1 <= v <= n:
                raise ParseError(lineno, f"vertex {v} outside [1, {n}]")
        if a == b:
            raise ParseError(lineno, "self-loop")
        if not math.isfinite(w):
            raise ParseError(lineno, "non-finite weight")
        key = (min(a, b) - 1, max(a, b) - 1)
        if key in edges:
            duplicates += 1
        edges[key] = w
    if len(body) != m:
        where = body[m][0] if len(body) > m else (body[-1][0] + 1 if body else lineno + 1)
        raise ParseError(where, f"expected {m} edge lines, found {len(body)}")
    return WeightedGraph.from_edges(n, [(a, b, w) for (a, b), w in edges.items()], duplicates)


def load_gset(path) -> WeightedGraph:
    return parse_gset(Path(path).read_bytes())


def format_gset(graph: WeightedGraph) -> str:
    out = [f"{graph.n} {graph.m}"]
    for a, b, w in graph.edges:
        out.append(f"{a + 1} {b + 1} {int(w) if float(w).is_integer() else repr(w)}")
    return "\n".join(out) + "\n"


# ----------------------------------------------------------------------------
# Energies


def _check_config(config, n: int, domain: str = "spin") -> np.ndarray:
    s = np.asarray(config)
    if s.shape != (n,):
        raise DimensionError(f"config has shape {s.shape}, expected ({n},)")
    allowed = (-1, 1) if domain == "spin" else (0, 1)
    if not np.all(np.isin(s, allowed)):
        raise ValueError(f"config entries must be in {allowed}")
    return s.astype(np.float64)


def ising_energy(config, problem: IsingProblem) -> float:
    """H = sum_i h_i s_i + sum_{i<j} J_ij s_i s_j (variables per ``problem.domain``)."""
    s = _check_config(config, problem.n, problem.domain)
    return float(problem.h @ s + problem.w @ (s[problem.i] * s[problem.j]))


def cut_size(config, graph: WeightedGraph) -> float:
    s = _check_config(config, graph.n)
    cut = s[graph.i] != s[graph.j]
    return float(graph.w[cut].sum())


def homogenize(problem: IsingProblem) -> IsingProblem:
    """Absorb the fields into couplings with an appended reference spin.

    The new spin has index ``n`` and is meant to be held at +1; each field
    ``h_k`` becomes the coupling ``J_{k,n} = h_k`` so that
    ``H_new(s, +1) == H_old(s)`` under the unordered-pair convention.
    """
    if problem.domain != "spin":
        raise ValueError("homogenize expects a spin-domain problem")
    k = np.flatnonzero(problem.h)
    return IsingProblem(
        problem.n + 1,
        np.concatenate([problem.i, k]),
        np.concatenate([problem.j, np.full(len(k), problem.n)]),
        np.concatenate([problem.w, problem.h[k]]),
    )


def brute_force_ground(problem: IsingProblem, tol: float = 1e-9):
    """Exhaustive minimum over all 2**n assignments.

    Returns ``(H_min, minimizers)``; minimizers are sorted lexicographically
    (with -1 < +1, or 0 < 1 in the binary domain).  Values within
    ``tol * (1 + |H_min|)`` of the minimum count as ties.
    """
    n = problem.n
    if n > MAX_BRUTE_FORCE_SPINS:
        raise ValueError(f"brute force refused for n={n} > {MAX_BRUTE_FORCE_SPINS}")
    lo = -1.0 if problem.domain == "spin" else 0.0
    J = np.triu(problem.dense(), 1)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    chunk = 1 << min(n, 16)
    total = 1 << n

    energies = np.empty(total)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        bits = (idx[:, None] >> shifts) & 1
        S = np.where(bits == 1, 1.0, lo)
        energies[start:start + len(idx)] = S @ problem.h + np.einsum("ki,ij,kj->k", S, J, S)
    h_min = float(energies.min())
    hits = np.flatnonzero(energies <= h_min + tol * (1.0 + abs(h_min)))
    bits = (hits[:, None] >> shifts) & 1
    configs = np.where(bits == 1, 1, int(lo)).astype(np.int64)
    return h_min, [c for c in configs]


def binary_to_spin(x) -> np.ndarray:
    x = np.asarray(x)
    if not np.all(np.isin(x, (0, 1))):
        raise ValueError("binary vector entries must be 0 or 1")
    return (2 * x - 1).astype(np.int64)


def spin_to_binary(s) -> np.ndarray:
    s = np.asarray(s)
    if not np.all(np.isin(s, (-1, 1))):
        raise ValueError("spin entries must be -1 or +1")
    return ((s + 1) // 2).astype(np.int64)


def all_configs(n: int, domain: str = "spin"):
    vals = (-1, 1) if domain == "spin" else (0, 1)
    for c in itertools.product(vals, repeat=n):
        yield np.array(c, dtype=np.int64)


# ----------------------------------------------------------------------------
# Invertible logic


@dataclass(frozen=True, eq=False)
class HalfAdder:
    """Penalty encoding of ``a + b = 2c + s`` over variables ``(c, s, a, b)``.

    ``J_matrix`` and ``h_x`` are in matrix form, ``H = h_x.x + x^T J x``
    (ordered pairs).  ``binary`` carries the same energy under the package's
    unordered-pair convention (couplings ``2 * J_matrix``).  ``spin`` uses
    ``h = h_x + J 1 = [2, 1, -1, -1]`` with couplings ``J_matrix``; its
    energy equals ``2 * H_x + const``, so it has the same ground set.
    """

    variables: tuple
    J_matrix: np.ndarray
    h_x: np.ndarray
    binary: IsingProblem
    spin: IsingProblem

    def index(self, name: str) -> int:
        return self.variables.index(name)

    @staticmethod
    def penalty(c, s, a, b) -> int:
        return (a + b - 2 * c - s) ** 2

    def truth_set(self) -> list[tuple[int, int, int, int]]:
        return [x for x in itertools.product((0, 1), repeat=4) if self.penalty(*x) == 0]


def encode_half_adder() -> HalfAdder:
    J = np.array([
        [0, 2, -2, -2],
        [2, 0, -1, -1],
        [-2, -1, 0, 1],
        [-2, -1, 1, 0],
    ], dtype=np.float64)
    h_x = np.array([4.0, 1.0, 1.0, 1.0])
    binary = IsingProblem.from_dense(2 * J, h_x, domain="binary")
    spin = IsingProblem.from_dense(J, h_x + J.sum(axis=1))
    J.setflags(write=False)
    h_x.setflags(write=False)
    return HalfAdder(("c", "s", "a", "b"), J, h_x, binary, spin)
