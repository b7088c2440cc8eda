"""Characteristic functions of a single edge.

For an edge with boundary order ``alpha`` at the outer vertex, ``d0`` and
``d1`` denote the characteristic functions of the interval problem with a
Dirichlet (``beta = 0``) or Neumann (``beta = 1``) condition at ``x = pi``.

* ordinary edge: ``z(pi)``, ``z'(pi)`` with ``z = S`` (alpha 0) or ``C``
  (alpha 1), integrated with classical RK4;
* frozen edge: the reduced 2x2 determinant built from ``phi_alpha`` at the
  frozen points and the transform ``w_q``.

Internally everything is parametrised by ``rho`` (``lambda = rho**2``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, ResolutionError
from .potential import EdgeSpec, _sin_over

BASE_STEPS = 2048
MAX_STEPS = 2**18


def rho_of(lam):
    """Principal square root, kept real for real non-negative input."""
    lam = np.asarray(lam)
    if not np.iscomplexobj(lam) and np.all(lam >= 0):
        return np.sqrt(lam.astype(float))
    return np.sqrt(lam.astype(complex))


def phi_gamma(gamma: int, x, rho):
    """``sin(rho x)/rho`` for ``gamma = 0`` (limit ``x`` at 0), ``cos(rho x)`` for 1."""
    rho = np.asarray(rho)
    if gamma == 0:
        return _sin_over(rho, x)
    if gamma == 1:
        return np.cos(rho * x)
    raise InputError(f"gamma must be 0 or 1, got {gamma!r}")


def phi_gamma_prime(gamma: int, x, rho):
    rho = np.asarray(rho)
    if gamma == 0:
        return np.cos(rho * x)
    return -rho * np.sin(rho * x)


@dataclass(frozen=True)
class EdgeCharValues:
    d00: complex
    d01: complex
    lam: complex
    rho: complex


@dataclass(frozen=True)
class FrozenNodeSolution:
    """``D`` is the constant ``A(lambda)`` (alpha 0) or ``B(lambda)`` (alpha 1);
    ``node_values`` are the solution values at the frozen arguments."""

    D: float
    node_values: np.ndarray
    degenerate: bool = False


# ---------------------------------------------------------------------------
# ordinary edges
# ---------------------------------------------------------------------------

def steps_for(rho) -> np.ndarray:
    """RK4 step count per ``rho``: ``max(2048, 64*ceil|rho|)`` rounded up to
    ``2048 * 2**j`` so batches share a step size."""
    need = np.maximum(BASE_STEPS, 64 * np.ceil(np.abs(rho)))
    j = np.ceil(np.log2(need / BASE_STEPS)).astype(int)
    return BASE_STEPS * 2 ** np.maximum(j, 0)


def _cosh_sinhc(s2):
    """``cosh(sqrt(s2))`` and ``sinh(sqrt(s2))/sqrt(s2)``, both entire in ``s2``."""
    if np.iscomplexobj(s2):
        r = np.sqrt(s2)
        safe = np.where(r == 0, 1.0, r)
        return np.cosh(r), np.where(r == 0, 1.0, np.sinh(safe) / safe)
    pos = np.sqrt(np.maximum(s2, 0.0))
    neg = np.sqrt(np.maximum(-s2, 0.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        ch = np.where(s2 >= 0, np.cosh(pos), np.cos(neg))
        sh = np.where(s2 >= 0, np.sinh(pos) / pos, np.sin(neg) / neg)
    return ch, np.where(s2 == 0, 1.0, sh)


def _shoot(q, y0, yp0, lam, n):
    """Integrate ``y'' = (q - lam) y`` on ``[0, pi]`` with ``n`` Magnus steps.

    Each step is the exponential of the fourth-order Magnus generator built
    from ``a = q - lam`` at the two Gauss points of the step (exact when q is
    constant, so accuracy does not decay with ``|rho|``).  The traceless 2x2
    exponential is ``cosh(s) I + sinh(s)/s Omega`` with ``s**2 = -det Omega``.
    The step matrices are multiplied pairwise.
    """
    h = np.pi / n
    left = np.arange(n) * h
    g = np.sqrt(3) / 6
    q1, q2 = q(left + (0.5 - g) * h), q(left + (0.5 + g) * h)
    c = np.sqrt(3) * h * h / 12
    y = np.empty(lam.shape, dtype=lam.dtype)
    yp = np.empty(lam.shape, dtype=lam.dtype)
    chunk = max(1, (1 << 22) // n)
    for s in range(0, lam.size, chunk):
        lm = lam[None, s:s + chunk]
        diag = (c * (q1 - q2))[:, None] + 0 * lm
        low = h * (0.5 * (q1 + q2)[:, None] - lm)
        ch, sh = _cosh_sinhc(diag * diag + h * low)
        t11 = ch + sh * diag
        t12 = sh * h
        t21 = sh * low
        t22 = ch - sh * diag
        while t11.shape[0] > 1:
            if t11.shape[0] % 2:
                # identity at the end of the chain (applied last)
                pad = np.zeros_like(t11[:1])
                t11, t12, t21, t22 = (np.concatenate([t, pad + e]) for t, e in
                                      ((t11, 1), (t12, 0), (t21, 0), (t22, 1)))
            # later step multiplies from the left
            b11, b12, b21, b22 = t11[0::2], t12[0::2], t21[0::2], t22[0::2]
            c11, c12, c21, c22 = t11[1::2], t12[1::2], t21[1::2], t22[1::2]
            t11 = c11 * b11 + c12 * b21
            t12 = c11 * b12 + c12 * b22
            t21 = c21 * b11 + c22 * b21
            t22 = c21 * b12 + c22 * b22
        y[s:s + chunk] = t11[0] * y0 + t12[0] * yp0
        yp[s:s + chunk] = t21[0] * y0 + t22[0] * yp0
    return y, yp


def ordinary_values(edge: EdgeSpec, rho):
    """``(z(pi), z'(pi))`` for every ``rho`` in the array."""
    rho = np.asarray(rho)
    flat = rho.reshape(-1)
    dtype = np.result_type(flat.dtype, float)
    out0 = np.empty(flat.shape, dtype=dtype)
    out1 = np.empty(flat.shape, dtype=dtype)
    if flat.size == 0:
        return out0.reshape(rho.shape), out1.reshape(rho.shape)
    n_steps = steps_for(flat)
    if n_steps.max() > MAX_STEPS:
        worst = float(np.max(np.abs(flat)))
        need = int(64 * np.ceil(worst))
        raise ResolutionError(
            f"|rho| = {worst:.3g} needs {need} integration steps (M >= {need}); "
            f"limit is {MAX_STEPS}")
    y0, yp0 = (0.0, 1.0) if edge.alpha == 0 else (1.0, 0.0)
    for n in np.unique(n_steps):
        sel = n_steps == n
        lam = (flat[sel] ** 2).astype(dtype)
        y, yp = _shoot(edge.q, y0, yp0, lam, int(n))
        out0[sel] = y
        out1[sel] = yp
    return out0.reshape(rho.shape), out1.reshape(rho.shape)


# ---------------------------------------------------------------------------
# frozen edges
# ---------------------------------------------------------------------------

def frozen_values(edge: EdgeSpec, rho):
    """Reduced-determinant values ``(d0, d1)`` of a frozen edge."""
    rho = np.asarray(rho)
    a = edge.frozen_args
    w, wp = edge.q.transforms(np.append(a, np.pi), rho)
    sum_phi = np.sum(phi_gamma(edge.alpha, a, rho[..., None]), axis=-1)
    sum_w = np.sum(w[..., :-1], axis=-1) - 1.0
    d0 = sum_phi * w[..., -1] - sum_w * phi_gamma(edge.alpha, np.pi, rho)
    d1 = sum_phi * wp[..., -1] - sum_w * phi_gamma_prime(edge.alpha, np.pi, rho)
    return d0, d1


def edge_values(edge: EdgeSpec, rho):
    """``(d0, d1)`` arrays for either kind of edge, parametrised by rho."""
    if edge.is_frozen:
        return frozen_values(edge, rho)
    return ordinary_values(edge, rho)


# ---------------------------------------------------------------------------
# public, lambda-parametrised operations
# ---------------------------------------------------------------------------

def _check_beta(beta):
    if beta not in (0, 1):
        raise InputError(f"beta must be 0 or 1, got {beta!r}")


def delta_frozen_edge(edge: EdgeSpec, lam, beta: int):
    if not edge.is_frozen:
        raise InputError("delta_frozen_edge needs a non-empty frozen set")
    _check_beta(beta)
    return frozen_values(edge, rho_of(lam))[beta]


def delta_ordinary_edge(edge: EdgeSpec, lam, beta: int):
    if edge.is_frozen:
        raise InputError("delta_ordinary_edge needs an empty frozen set")
    _check_beta(beta)
    return ordinary_values(edge, rho_of(lam))[beta]


def delta_edge(edge: EdgeSpec, lam) -> EdgeCharValues:
    rho = rho_of(lam)
    d0, d1 = edge_values(edge, rho)
    return EdgeCharValues(d00=d0[()], d01=d1[()], lam=np.asarray(lam)[()], rho=rho[()])


def _node_system(edge: EdgeSpec, rho):
    a = edge.frozen_args
    w, _ = edge.q.transforms(a, rho)
    W = np.repeat(w.reshape(-1)[:, None], a.size, axis=1) - np.eye(a.size)
    v = phi_gamma(edge.alpha, a, rho)
    return W, v


def frozen_node_values(edge: EdgeSpec, lam, tol: float = 1e-10) -> FrozenNodeSolution:
    """Solve ``W u = -D v`` for the solution values at the frozen points.

    ``D = 1`` whenever ``v`` lies in the column space of ``W`` (always, if
    ``W`` is regular); otherwise ``D = 0`` and ``u`` spans the null space.
    """
    if not edge.is_frozen:
        raise InputError("frozen_node_values needs a non-empty frozen set")
    rho = rho_of(np.asarray(lam))
    if rho.ndim:
        raise InputError("frozen_node_values takes a scalar lambda")
    W, v = _node_system(edge, rho)
    U, s, Vh = np.linalg.svd(W)
    cutoff = tol * max(s[0], 1.0)
    rank = int(np.sum(s > cutoff))
    if rank == W.shape[0]:
        return FrozenNodeSolution(1.0, np.linalg.solve(W, -v))
    # component of v outside the column space
    outside = v - U[:, :rank] @ (U[:, :rank].conj().T @ v)
    if np.linalg.norm(outside) <= cutoff * max(np.linalg.norm(v), 1.0):
        u = np.linalg.lstsq(W, -v, rcond=tol)[0]
        return FrozenNodeSolution(1.0, u, degenerate=True)
    u = Vh[-1].conj()
    k = np.argmax(np.abs(u))
    u = u * (abs(u[k]) / u[k])
    return FrozenNodeSolution(0.0, u)


def node_residual(edge: EdgeSpec, lam, sol: FrozenNodeSolution) -> np.ndarray:
    """Row residuals of the continuity system at the frozen points."""
    W, v = _node_system(edge, rho_of(np.asarray(lam)))
    return W @ sol.node_values + sol.D * v
