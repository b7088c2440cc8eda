"""Finite-difference discretisation of the whole graph operator.

Each edge carries the nodes ``x_i = i h`` (``h = pi/N``).  The 3-point
Laplacian acts on interior nodes; the outer vertex is Dirichlet (node 0
dropped) or Neumann (ghost node ``y_{-1} = y_1``).  The inner vertex value
``v`` is shared by all edges and eliminated through the one-sided Kirchhoff
condition ``sum_j (3 v - 4 y_{j,N-1} + y_{j,N-2}) = 0``.  A frozen edge adds
``q(x_i) * sum_k y(a_k)`` with ``y(a_k)`` interpolated linearly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import InputError, NumericError
from .potential import GraphSpec
from .spectrum import Spectrum


MIN_N = 100
MAX_COUNT = 30


class OracleError(NumericError):
    pass


class ComplexEigenvalueWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class FdMatrix:
    matrix: sp.csr_matrix
    h: float
    N: int
    offsets: tuple = ()  # first unknown of every edge
    potential_bound: float = 0.0

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self.matrix.toarray()


@dataclass(frozen=True)
class ComparisonReport:
    max_rel_deviation: float
    pairs: tuple
    unmatched_analytic: tuple = ()
    unmatched_fd: tuple = ()
    tol: float | None = None

    @property
    def passed(self) -> bool:
        return bool(self.tol is None or self.max_rel_deviation <= self.tol)

    def to_json(self) -> dict:
        return {
            "max_rel_deviation": self.max_rel_deviation,
            "tol": self.tol,
            "passed": self.passed,
            "pairs": [list(p) for p in self.pairs],
            "unmatched_analytic": list(self.unmatched_analytic),
            "unmatched_fd": list(self.unmatched_fd),
        }


def build_fd_matrix(graph: GraphSpec, N: int) -> FdMatrix:
    if N < MIN_N:
        raise InputError(f"N must be >= {MIN_N}, got {N}")
    h = np.pi / N
    p = graph.p
    first = [0 if e.alpha == 1 else 1 for e in graph.edges]
    counts = [N - f for f in first]
    offsets = np.concatenate([[0], np.cumsum(counts)])
    size = int(offsets[-1])

    def col(j, i):
        return int(offsets[j] + i - first[j])

    # the vertex value as a combination of unknowns
    v_cols, v_vals = [], []
    for j in range(p):
        v_cols += [col(j, N - 1), col(j, N - 2)]
        v_vals += [4 / (3 * p), -1 / (3 * p)]

    def node(j, i):
        """Columns/weights representing ``y_j(x_i)`` for ``0 <= i <= N``."""
        if i == N:
            return v_cols, v_vals
        if i < first[j]:
            return [], []
        return [col(j, i)], [1.0]

    rows, cols, vals = [], [], []

    def add(r, cs, ws, scale):
        rows.extend([r] * len(cs))
        cols.extend(cs)
        vals.extend(scale * w for w in ws)

    inv_h2 = 1.0 / h**2
    for j, e in enumerate(graph.edges):
        x = np.arange(N + 1) * h
        qx = e.q(x)
        if e.is_frozen:
            interp = []
            for a in e.frozen_args:
                i0 = min(int(np.floor(a / h)), N - 1)
                t = a / h - i0
                c0, w0 = node(j, i0)
                c1, w1 = node(j, i0 + 1)
                interp.append((c0, [(1 - t) * w for w in w0]))
                interp.append((c1, [t * w for w in w1]))
        for i in range(first[j], N):
            r = col(j, i)
            add(r, [r], [2.0], inv_h2)
            if i == 0:
                add(r, [col(j, 1)], [-2.0], inv_h2)  # ghost node y_{-1} = y_1
            else:
                add(r, *node(j, i - 1), -inv_h2)
                add(r, *node(j, i + 1), -inv_h2)
            if e.is_frozen:
                for cs, ws in interp:
                    add(r, cs, ws, qx[i])
            else:
                add(r, [r], [qx[i]], 1.0)
    A = sp.csr_matrix((vals, (rows, cols)), shape=(size, size))
    A.sum_duplicates()
    bound = sum(float(np.max(np.abs(e.q.grid_values))) * max(1, e.n) for e in graph.edges)
    return FdMatrix(A, h, N, tuple(int(o) for o in offsets[:-1]), bound)


def _shift_below(mat: FdMatrix) -> float:
    """Real shift below the low spectrum: the Laplacian part is non-negative,
    the potential terms move eigenvalues by at most ``potential_bound``."""
    return -1.0 - mat.potential_bound


def fd_eigen(mat: FdMatrix, count: int, method: str = "sparse"):
    """``(values, complex_findings)``: the ``count`` eigenvalues of smallest real
    part, real parts only, plus any with a non-negligible imaginary part."""
    if not 1 <= count <= MAX_COUNT:
        raise InputError(f"count must be in [1, {MAX_COUNT}], got {count}")
    try:
        if method == "dense":
            ev = scipy.linalg.eigvals(mat.entries)
        elif method == "sparse":
            k = min(count + 6, mat.size - 2)
            ev = spla.eigs(mat.matrix.tocsc(), k=k, sigma=_shift_below(mat), which="LM",
                           return_eigenvectors=False)
        else:
            raise InputError(f"method must be 'sparse' or 'dense', got {method!r}")
    except (np.linalg.LinAlgError, spla.ArpackError, RuntimeError) as exc:
        raise OracleError(f"eigensolver failed: {exc}") from exc
    ev = ev[np.argsort(ev.real, kind="stable")][:count]
    scale = max(1.0, float(np.max(np.abs(ev))))
    findings = [complex(z) for z in ev if abs(z.imag) > 1e-8 * scale]
    if findings:
        warnings.warn(f"complex eigenvalues found: {findings}", ComplexEigenvalueWarning,
                      stacklevel=2)
    return ev.real.copy(), findings


def fd_spectrum(mat: FdMatrix, count: int, method: str = "sparse") -> np.ndarray:
    return fd_eigen(mat, count, method)[0]


def _as_lambdas(analytic) -> np.ndarray:
    if isinstance(analytic, Spectrum):
        rho = np.sort(analytic.branches.reshape(-1))
        return rho**2
    return np.sort(np.asarray(analytic, dtype=float))


def compare_spectra(analytic, fd, tol: float | None = None) -> ComparisonReport:
    """Greedy nearest matching of two eigenvalue lists (``lambda`` values)."""
    lam = _as_lambdas(analytic)
    fd = np.sort(np.asarray(fd, dtype=float))
    if lam.size == 0 or fd.size == 0:
        raise InputError("both spectra must be non-empty")
    n = min(lam.size, fd.size)
    free = list(range(fd.size))
    pairs, dev = [], 0.0
    for x in lam[:n]:
        i = min(free, key=lambda m: abs(fd[m] - x))
        free.remove(i)
        pairs.append((float(x), float(fd[i])))
        dev = max(dev, abs(fd[i] - x) / max(abs(x), 1e-300))
    return ComparisonReport(float(dev), tuple(pairs), tuple(float(v) for v in lam[n:]),
                            tuple(float(fd[i]) for i in free), tol)


def richardson_order(errors_coarse, errors_fine, ratio: float = 2.0) -> float:
    """Observed order from error vectors on meshes ``h`` and ``h / ratio``."""
    e1 = np.linalg.norm(np.asarray(errors_coarse, dtype=float))
    e2 = np.linalg.norm(np.asarray(errors_fine, dtype=float))
    return float(np.log(e1 / e2) / np.log(ratio))
