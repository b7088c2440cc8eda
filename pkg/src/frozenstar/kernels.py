"""Kernels of the frozen-edge characteristic functions.

For a frozen edge with ``alpha = 0``

    d0(rho) = sin(rho pi)/rho + rho**-2 * int_0^pi N(t) cos(rho t) dt
    d1(rho) = cos(rho pi)     + rho**-1 * int_0^pi W(t) sin(rho t) dt

with ``N = sum_k N_k``, ``W = sum_k W_k`` and, for one frozen point ``a``,

    N_k(s) = 1/2 [-q(s-pi+a) 1(pi-a,pi) - q(pi+a-s) 1(a,pi)
                  + q(pi-a+s) 1(0,a) + q(pi-a-s) 1(0,pi-a)]
    W_k(s) = 1/2 [ q(pi+a-s) 1(a,pi) + q(s+pi-a) 1(0,a)
                  - q(pi-a-s) 1(0,pi-a) + q(s-pi+a) 1(pi-a,pi)]

so ``N_k + W_k = q(pi-a+s) 1(0,a)``.  The kernels jump at ``a`` and
``pi - a``; grid samples that fall on a jump carry the mean of both sides.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .edge import frozen_values
from .errors import InputError
from .potential import EdgeSpec, PotentialFn, _check_frozen_args, _sin_over, trig_integrals


@dataclass(frozen=True, eq=False)
class KernelPair:
    N: np.ndarray
    W: np.ndarray
    per_arg_N: np.ndarray | None = None
    breakpoints: tuple = ()

    def __post_init__(self):
        N = np.asarray(self.N)
        W = np.asarray(self.W)
        if np.iscomplexobj(N) or np.iscomplexobj(W):
            raise InputError("kernels must be real-valued")
        if N.shape != W.shape or N.ndim != 1 or N.size < 2:
            raise InputError("N and W must be 1-D arrays of equal length")
        object.__setattr__(self, "N", N.astype(float))
        object.__setattr__(self, "W", W.astype(float))

    @property
    def M(self) -> int:
        return self.N.size - 1

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, np.pi, self.M + 1)

    def integral_N(self) -> float:
        return piecewise_integral(self.grid, self.N, self.breakpoints)


def _indicator(s, lo, hi):
    inside = ((s > lo) & (s < hi)).astype(float)
    edge = ((s == lo) & (lo > 0)) | ((s == hi) & (hi < np.pi))
    ends = ((s == lo) & (lo == 0)) | ((s == hi) & (hi == np.pi))
    return inside + 0.5 * edge + ends


def _pieces(q: PotentialFn, a: float, s: np.ndarray):
    """The four shifted terms shared by both kernels."""
    return (q(s - np.pi + a) * _indicator(s, np.pi - a, np.pi),
            q(np.pi + a - s) * _indicator(s, a, np.pi),
            q(np.pi - a + s) * _indicator(s, 0.0, a),
            q(np.pi - a - s) * _indicator(s, 0.0, np.pi - a))


def _grid(q: PotentialFn, M):
    return np.linspace(0.0, np.pi, (q.M if M is None else int(M)) + 1)


def n_kernel_components(q: PotentialFn, frozen_args, M=None) -> np.ndarray:
    """``N_k`` for every frozen point, shape ``(n, M+1)``."""
    a = _check_frozen_args(frozen_args)
    s = _grid(q, M)
    out = []
    for ak in a:
        p1, p2, p3, p4 = _pieces(q, ak, s)
        out.append(0.5 * (-p1 - p2 + p3 + p4))
    return np.array(out).reshape(a.size, s.size)


def n_kernel(q: PotentialFn, frozen_args, M=None) -> np.ndarray:
    return n_kernel_components(q, frozen_args, M).sum(axis=0)


def w_kernel(q: PotentialFn, frozen_args, M=None) -> np.ndarray:
    a = _check_frozen_args(frozen_args)
    s = _grid(q, M)
    W = np.zeros_like(s)
    for ak in a:
        p1, p2, p3, p4 = _pieces(q, ak, s)
        W += 0.5 * (p2 + p3 - p4 + p1)
    return W


def breakpoints_for(frozen_args) -> tuple:
    a = _check_frozen_args(frozen_args)
    pts = np.unique(np.concatenate([a, np.pi - a]))
    return tuple(float(v) for v in pts)


def kernel_pair(q: PotentialFn, frozen_args, M=None) -> KernelPair:
    comps = n_kernel_components(q, frozen_args, M)
    return KernelPair(comps.sum(axis=0), w_kernel(q, frozen_args, M), comps,
                      breakpoints_for(frozen_args))


def piecewise_nodes(t, f, breakpoints=()):
    """Nodes/values of a grid function split at jump points.

    On each smooth piece the interior grid samples are kept and the values
    at the piece ends are extrapolated linearly from that side, so a jump
    shows up as a zero-width cell.
    """
    t = np.asarray(t, dtype=float)
    f = np.asarray(f, dtype=float)
    cuts = [float(b) for b in breakpoints if t[0] < b < t[-1]]
    if not cuts:
        return t, f
    h = (t[-1] - t[0]) / (t.size - 1)
    edges = [t[0]] + sorted(cuts) + [t[-1]]
    nodes, vals = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        inner = (t > lo + 1e-9 * h) & (t < hi - 1e-9 * h)
        ti, fi = t[inner], f[inner]
        if lo == t[0]:
            ti, fi = np.concatenate([[t[0]], ti]), np.concatenate([[f[0]], fi])
        if hi == t[-1]:
            ti, fi = np.concatenate([ti, [t[-1]]]), np.concatenate([fi, [f[-1]]])
        if ti.size >= 2:
            f_lo = fi[0] + (fi[1] - fi[0]) * (lo - ti[0]) / (ti[1] - ti[0])
            f_hi = fi[-1] + (fi[-1] - fi[-2]) * (hi - ti[-1]) / (ti[-1] - ti[-2])
        else:
            f_lo = f_hi = float(np.interp(0.5 * (lo + hi), t, f))
        if ti.size == 0 or ti[0] > lo:
            ti, fi = np.concatenate([[lo], ti]), np.concatenate([[f_lo], fi])
        if ti[-1] < hi:
            ti, fi = np.concatenate([ti, [hi]]), np.concatenate([fi, [f_hi]])
        nodes.append(ti)
        vals.append(fi)
    return np.concatenate(nodes), np.concatenate(vals)


def _pieces_of(t, breakpoints):
    """Index masks of the samples strictly inside every smooth piece."""
    h = (t[-1] - t[0]) / (t.size - 1)
    cuts = [t[0]] + sorted(float(b) for b in breakpoints if t[0] < b < t[-1]) + [t[-1]]
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        m = (t > lo + 1e-9 * h) & (t < hi - 1e-9 * h)
        m |= (t == lo) & (lo == t[0])
        m |= (t == hi) & (hi == t[-1])
        yield lo, hi, m


def piecewise_integral(t, f, breakpoints=()) -> float:
    """Integral of a grid function that is smooth between jump points.

    Each piece is integrated through a not-a-knot cubic spline of its own
    samples, extended to the piece ends, so the result is fourth order.
    """
    t = np.asarray(t, dtype=float)
    f = np.asarray(f, dtype=float)
    total = 0.0
    for lo, hi, m in _pieces_of(t, breakpoints):
        ti, fi = t[m], f[m]
        if ti.size >= 4:
            total += float(CubicSpline(ti, fi).integrate(lo, hi, extrapolate=True))
        else:
            tn, fn = piecewise_nodes(t, f, breakpoints)
            sel = (tn >= lo) & (tn <= hi)
            total += float(np.trapezoid(fn[sel], tn[sel]))
    return total


def represented_values(pair: KernelPair, rho):
    """``(d0, d1)`` rebuilt from the kernels."""
    rho = np.asarray(rho, dtype=float)
    tN, fN = piecewise_nodes(pair.grid, pair.N, pair.breakpoints)
    tW, fW = piecewise_nodes(pair.grid, pair.W, pair.breakpoints)
    icN, _ = trig_integrals(tN, fN, rho)
    _, isW = trig_integrals(tW, fW, rho)
    d0 = _sin_over(rho, np.pi) + icN / rho**2
    d1 = np.cos(rho * np.pi) + isW
    return d0, d1


def kernel_representation_check(edge: EdgeSpec, pair: KernelPair, rho_samples) -> float:
    """Largest combined deviation of both representations over the samples."""
    if not edge.is_frozen or edge.alpha != 0:
        raise InputError("representation check needs a frozen edge with alpha = 0")
    rho = np.asarray(rho_samples, dtype=float)
    if np.any(rho <= 0):
        raise InputError("rho samples must be positive")
    d0, d1 = frozen_values(edge, rho)
    r0, r1 = represented_values(pair, rho)
    return float(np.max(np.abs(d0 - r0) + np.abs(d1 - r1)))
