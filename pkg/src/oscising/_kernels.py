"""Compiled inner loops: drift evaluation, counter-based noise, Euler-Maruyama.

Everything here is serial and accumulates pairwise terms in CSR column
order, so results are bit-reproducible; parallelism happens one level up
(independent runs on separate threads, which is why every kernel is nogil).
"""
import math

import numba as nb
import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_STEP_MUL = np.uint64(0xD1B54A32D192ED03)
_STEP_ADD = np.uint64(0x8CB92BA72F3D8DD7)
_CTR_MUL = np.uint64(0xABC98388FB8FAC03)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1
_INV53 = 1.0 / 9007199254740992.0
_TINY = 1e-280

OK, STOPPED, DIVERGED = 0, 1, 2


@nb.njit(cache=True, nogil=True)
def mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@nb.njit(cache=True, nogil=True)
def counter_hash(seed, step, ctr):
    z = mix64(np.uint64(seed) + _GOLDEN)
    z = mix64(z ^ (np.uint64(step) * _STEP_MUL + _STEP_ADD))
    return mix64(z ^ (np.uint64(ctr) * _CTR_MUL + _GOLDEN))


@nb.njit(cache=True, nogil=True)
def counter_normal(seed, step, osc):
    """Standard normal that is a pure function of ``(seed, step, osc)`` (Box-Muller)."""
    b1 = counter_hash(seed, step, np.uint64(2) * np.uint64(osc))
    b2 = counter_hash(seed, step, np.uint64(2) * np.uint64(osc) + np.uint64(1))
    u1 = (float(b1 >> np.uint64(11)) + 1.0) * _INV53
    u2 = float(b2 >> np.uint64(11)) * _INV53
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


@nb.njit(cache=True, nogil=True)
def counter_normals(seed, step, n):
    out = np.empty(n)
    for i in range(n):
        out[i] = counter_normal(seed, step, i)
    return out


@nb.njit(cache=True, nogil=True)
def pwl(t, ts, vs):
    """Piecewise-linear interpolation through ``(ts, vs)``, clamped at both ends."""
    m = ts.size
    if t <= ts[0]:
        return vs[0]
    if t >= ts[m - 1]:
        return vs[m - 1]
    k = 1
    while ts[k] < t:
        k += 1
    frac = (t - ts[k - 1]) / (ts[k] - ts[k - 1])
    return vs[k - 1] + (vs[k] - vs[k - 1]) * frac


@nb.njit(cache=True, nogil=True)
def fast_tanh(y):
    # absolute error ~1e-16; about 3x cheaper than libm tanh
    return 1.0 - 2.0 / (math.exp(2.0 * y) + 1.0)


@nb.njit(cache=True, nogil=True)
def drift(phi, free, graph, detune, kind, rho, ac, as_, out):
    """dphi/dt = detune + A_c sum_j J_ij g(phi_i - phi_j) - A_s sin(2 phi_i), 0 where pinned.

    ``graph`` is ``(indptr, indices, weights, ei, ej, ew)``: the symmetric CSR
    adjacency plus the unordered edge list.  The sinusoid uses the factored
    row sums; the smooth square visits each edge once, in edge order.
    """
    indptr, indices, weights, ei, ej, ew = graph
    n = phi.size
    _drift(phi, free, indptr, indices, weights, ei, ej, ew, detune, kind, rho, ac, as_,
           out, np.empty(n), np.empty(n))


@nb.njit(cache=True, nogil=True, inline="always")
def _drift(phi, free, indptr, indices, weights, ei, ej, ew, detune, kind, rho, ac, as_,
           out, sn, cs):
    n = phi.size
    for i in range(n):
        sn[i] = math.sin(phi[i])
        cs[i] = math.cos(phi[i])
    if kind == 0:
        for i in range(n):
            a = 0.0
            b = 0.0
            for p in range(indptr[i], indptr[i + 1]):
                j = indices[p]
                a += weights[p] * cs[j]
                b += weights[p] * sn[j]
            out[i] = ac * (sn[i] * a - cs[i] * b)
    else:
        scale = ac / math.tanh(rho)
        for i in range(n):
            out[i] = 0.0
        for e in range(ei.size):
            i = ei[e]
            j = ej[e]
            v = ew[e] * fast_tanh(rho * (sn[i] * cs[j] - cs[i] * sn[j]))
            out[i] += v
            out[j] -= v
        for i in range(n):
            out[i] *= scale
    for i in range(n):
        if free[i]:
            out[i] += detune[i] - as_ * 2.0 * sn[i] * cs[i]
        else:
            out[i] = 0.0


@nb.njit(cache=True, nogil=True)
def integrate(phi, free, graph, detune, kind, rho,
              sched_t, ac_v, as_v, an_v, dt, seed, k0, k1, stop_tol):
    """Advance ``phi`` in place from step ``k0`` to ``k1`` (Euler-Maruyama).

    Schedule values are taken at ``t_k = k * dt``.  Returns ``(k, status)``:
    ``STOPPED`` when the noiseless drift fell below ``stop_tol`` before step
    ``k``; ``DIVERGED`` when step ``k`` produced a non-finite phase.
    """
    indptr, indices, weights, ei, ej, ew = graph
    tc, ts, tn = sched_t
    n = phi.size
    buf = np.empty(n)
    sn = np.empty(n)
    cs = np.empty(n)
    sqdt = math.sqrt(dt)
    for k in range(k0, k1):
        t = k * dt
        ac = pwl(t, tc, ac_v)
        as_ = pwl(t, ts, as_v)
        an = pwl(t, tn, an_v)
        _drift(phi, free, indptr, indices, weights, ei, ej, ew, detune, kind, rho, ac, as_,
               buf, sn, cs)
        if an == 0.0 and stop_tol > 0.0:
            worst = 0.0
            for i in range(n):
                if free[i] and abs(buf[i]) > worst:
                    worst = abs(buf[i])
            if worst < stop_tol:
                return k, STOPPED
        bad = False
        for i in range(n):
            if free[i]:
                x = phi[i] + buf[i] * dt
                if an != 0.0:
                    x += an * sqdt * counter_normal(seed, k, i)
                if not math.isfinite(x):
                    bad = True
                elif abs(x) < _TINY:
                    x = 0.0     # keep subnormals out of the hot loop
                phi[i] = x
        if bad:
            return k, DIVERGED
    return k1, OK


def as_seed(seed: int) -> np.uint64:
    return np.uint64(int(seed) & _MASK64)


def derive_seed(master: int, index: int) -> int:
    """Independent 64-bit stream seed for ``index`` under ``master``."""
    return int(counter_hash(as_seed(master), np.uint64(0xFFFFFFFFFFFFFFFF), np.uint64(index)))
