"""Recover the potential on the frozen edge from spectral data.

Given the potentials of the other ``p - 1`` edges, the frozen set of the last
edge and two eigenvalue subsequences ``mu0 ~ k``, ``mu1 ~ k - 1/2``:

1. ``g_{k,j} = -sum_l d1_l(mu^2) / d0_l(mu^2)`` over the known edges;
2. each eigenvalue gives one linear equation in the kernels ``N`` and ``W``;
   they are expanded in ``{cos m x}_{m=0..K}`` and ``{sin m x}_{m=1..K}`` and
   the truncated system is solved by least squares;
3. ``c_n = int N cos(n x) / sum_k sin(n a_k)``;
4. ``q(t) = sum_n (2 c_n / pi) sin n(pi - t)``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .edge import edge_values
from .errors import AssumptionViolation, InputError
from .kernels import KernelPair, breakpoints_for, piecewise_nodes
from .potential import (DEFAULT_M, PotentialFn, _check_frozen_args,
                        potential_from_sine_series, trig_integrals)
from .spectrum import EigenSubsequences

log = logging.getLogger(__name__)

D00_THRESHOLD = 1e-10
COND_WARN = 1e8


class IllConditionedWarning(UserWarning):
    pass


class SkippedModesWarning(UserWarning):
    pass


@dataclass(frozen=True)
class GSequences:
    g0: np.ndarray
    g1: np.ndarray

    @property
    def K(self) -> int:
        return int(self.g0.size)


@dataclass(frozen=True, eq=False)
class InverseSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    K: int
    w_basis: str = "sin"

    @property
    def basis_dims(self) -> tuple:
        return self.K + 1, self.K


@dataclass(frozen=True, eq=False)
class KernelSolution:
    pair: KernelPair
    n_coeffs: np.ndarray
    w_coeffs: np.ndarray
    residual_norm: float
    condition: float


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    q_reconstructed: PotentialFn
    c: np.ndarray
    kernel_pair: KernelPair
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class InverseConfig:
    K: int | None = None
    K_min: int = 4
    D: int | None = None
    M: int = DEFAULT_M
    d00_threshold: float = D00_THRESHOLD
    tau_sin: float | None = None
    rescaled: bool = True
    w_basis: str = "sin"


# ---------------------------------------------------------------------------
# step 1
# ---------------------------------------------------------------------------

def g_sequence(known_edges, mu: EigenSubsequences, threshold: float = D00_THRESHOLD) -> GSequences:
    """``g_{k,j}`` with ``j = 0`` on ``mu0`` and ``j = 1`` on ``mu1``."""
    known_edges = tuple(known_edges)
    if not known_edges:
        raise InputError("at least one known edge is required")
    for l, e in enumerate(known_edges, start=1):
        if e.alpha != 0:
            raise InputError(f"known edge {l} has alpha=1; only alpha=0 is supported")
    K = mu.K
    out = []
    for j, m in enumerate((mu.mu0[:K], mu.mu1[:K])):
        g = np.zeros(K)
        for l, e in enumerate(known_edges, start=1):
            d0, d1 = (np.real(v) for v in edge_values(e, m))
            bad = np.abs(d0) < threshold * (1 + np.abs(d1))
            if np.any(bad):
                k = int(np.flatnonzero(bad)[0]) + 1
                raise AssumptionViolation(
                    f"assumption (i) violated: d00 of known edge l={l} vanishes at "
                    f"mu_(k={k}, j={j}) = {m[k - 1]!r}", l=l, k=k, j=j, mu=float(m[k - 1]))
            g -= d1 / d0
        zero = g == 0
        if np.any(zero):
            k = int(np.flatnonzero(zero)[0]) + 1
            raise AssumptionViolation(f"assumption (i) violated: g_(k={k}, j={j}) = 0",
                                      k=k, j=j)
        out.append(g)
    return GSequences(*out)


# ---------------------------------------------------------------------------
# step 2
# ---------------------------------------------------------------------------

def _trial_freqs(K, w_basis):
    if w_basis == "sin":
        return np.arange(1, K + 1, dtype=float)
    if w_basis == "sin_half":
        return np.arange(1, K + 1) - 0.5
    raise InputError(f"w_basis must be 'sin' or 'sin_half', got {w_basis!r}")


def cos_products(mu, m):
    """``int_0^pi cos(m x) cos(mu x) dx`` for all pairs, shape ``(len(mu), len(m))``."""
    mu, m = np.asarray(mu, float)[:, None], np.asarray(m, float)[None, :]
    return 0.5 * np.pi * (np.sinc(mu - m) + np.sinc(mu + m))


def sin_products(mu, m):
    mu, m = np.asarray(mu, float)[:, None], np.asarray(m, float)[None, :]
    return 0.5 * np.pi * (np.sinc(mu - m) - np.sinc(mu + m))


def assemble_inverse_system(g: GSequences, mu: EigenSubsequences, K: int,
                            rescaled: bool = True, w_basis: str = "sin") -> InverseSystem:
    if K > min(mu.mu0.size, mu.mu1.size, g.K):
        raise InputError(f"K={K} exceeds the available eigenvalue pairs")
    if K < 1:
        raise InputError("K must be >= 1")
    m_cos = np.arange(K + 1, dtype=float)
    m_sin = _trial_freqs(K, w_basis)
    rows, rhs = [], []
    for j, (m, gj) in enumerate(((mu.mu0[:K], g.g0[:K]), (mu.mu1[:K], g.g1[:K]))):
        C = cos_products(m, m_cos)
        S = sin_products(m, m_sin)
        s, c = np.sin(m * np.pi), np.cos(m * np.pi)
        if not rescaled:
            # g d0 = d1 written with the kernels
            a, b = gj / m**2, -1 / m
            r = c - gj * s / m
        elif j == 0:
            a, b = np.ones_like(m), -m / gj
            r = -m * s + m**2 / gj * c
        else:
            a, b = gj / m, -np.ones_like(m)
            r = -gj * s + m * c
        rows.append(np.hstack([a[:, None] * C, b[:, None] * S]))
        rhs.append(r)
    mean_row = np.zeros(2 * K + 1)
    mean_row[0] = np.pi
    A = np.vstack(rows + [mean_row])
    b = np.concatenate(rhs + [[0.0]])
    return InverseSystem(A, b, K, w_basis)


def solve_kernel_pair(system: InverseSystem, M: int = DEFAULT_M, frozen_args=None) -> KernelSolution:
    """QR least squares, then the expansions sampled on an ``M + 1`` grid."""
    A, b = system.matrix, system.rhs
    Q, R = scipy.linalg.qr(A, mode="economic")
    cond = float(np.linalg.cond(R))
    if not np.isfinite(cond) or cond > COND_WARN:
        warnings.warn(f"inverse system condition estimate {cond:.3g} exceeds {COND_WARN:.0e}",
                      IllConditionedWarning, stacklevel=2)
    try:
        x = scipy.linalg.solve_triangular(R, Q.T @ b)
    except (np.linalg.LinAlgError, ValueError):
        x = scipy.linalg.lstsq(A, b)[0]
    if not np.all(np.isfinite(x)):
        x = scipy.linalg.lstsq(A, b)[0]
    K = system.K
    n, w = x[:K + 1], x[K + 1:]
    t = np.linspace(0.0, np.pi, M + 1)
    N = np.cos(np.outer(t, np.arange(K + 1))) @ n
    W = np.sin(np.outer(t, _trial_freqs(K, system.w_basis))) @ w
    bp = breakpoints_for(frozen_args) if frozen_args is not None else ()
    res = float(np.linalg.norm(A @ x - b))
    return KernelSolution(KernelPair(N, W, None, bp), n, w, res, cond)


# ---------------------------------------------------------------------------
# steps 3 and 4
# ---------------------------------------------------------------------------

def sine_denominators(frozen_args, D: int) -> np.ndarray:
    a = _check_frozen_args(frozen_args)
    n = np.arange(1, D + 1)
    return np.sin(np.outer(n, a)).sum(axis=1)


def fourier_coefficients(N, frozen_args, D: int, tau_sin: float | None = None,
                         breakpoints=None):
    """``c_n`` for ``n = 1..D``; modes with a tiny denominator go to ``skipped``."""
    N = np.asarray(N, dtype=float)
    M = N.size - 1
    a = _check_frozen_args(frozen_args)
    if D > M / 4:
        raise InputError(f"D={D} must be <= M/4 = {M / 4:g}")
    if tau_sin is None:
        tau_sin = 1e-6 * a.size
    t = np.linspace(0.0, np.pi, M + 1)
    bp = breakpoints_for(a) if breakpoints is None else breakpoints
    tn, fn = piecewise_nodes(t, N, bp)
    n = np.arange(1, D + 1)
    integrals, _ = trig_integrals(tn, fn, n.astype(float))
    den = sine_denominators(a, D)
    ok = np.abs(den) >= tau_sin
    c = np.zeros(D)
    c[ok] = integrals[ok] / den[ok]
    skipped = [int(v) for v in n[~ok]]
    if D > 0 and not np.any(ok):
        raise AssumptionViolation("assumption (iii) violated: every Fourier mode has a "
                                  "vanishing denominator", skipped=skipped)
    return c, skipped


def reconstruct_potential(c, skipped=(), M: int = DEFAULT_M) -> PotentialFn:
    c = np.array(c, dtype=float)
    for n in skipped:
        if 1 <= n <= c.size:
            c[n - 1] = 0.0
    return potential_from_sine_series(c, M)


def invert(known, F_p, mu: EigenSubsequences, config: InverseConfig | None = None) -> ReconstructionResult:
    config = config or InverseConfig()
    known = tuple(known)
    if len(F_p) == 0:
        raise InputError("the unknown edge needs a non-empty frozen set")
    a = _check_frozen_args(F_p)
    available = mu.K
    K = available if config.K is None else config.K
    if K > available:
        raise InputError(f"K={K} requested but only {available} eigenvalue pairs given")
    if K < config.K_min:
        raise InputError(f"K={K} is below the minimum K_min={config.K_min}")
    mu_K = EigenSubsequences(mu.mu0[:K], mu.mu1[:K], mu.provenance)
    D = K // 2 if config.D is None else config.D
    if D < 1:
        raise InputError("D must be >= 1")

    g = g_sequence(known, mu_K, config.d00_threshold)
    system = assemble_inverse_system(g, mu_K, K, config.rescaled, config.w_basis)
    sol = solve_kernel_pair(system, config.M, a)
    c, skipped = fourier_coefficients(sol.pair.N, a, D, config.tau_sin)
    msgs = []
    if skipped:
        msg = f"assumption (iii) fails for modes {skipped}; they are set to zero"
        warnings.warn(msg, SkippedModesWarning, stacklevel=2)
        msgs.append(msg)
    if sol.condition > COND_WARN:
        msgs.append(f"condition estimate {sol.condition:.3g}")
    q = reconstruct_potential(c, skipped, config.M)
    diag = {
        "K": K,
        "D": D,
        "residual_norm": sol.residual_norm,
        "condition_estimate": sol.condition,
        "skipped_modes": skipped,
        "warnings": msgs,
    }
    return ReconstructionResult(q, c, sol.pair, diag)
