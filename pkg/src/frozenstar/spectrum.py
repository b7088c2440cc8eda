"""Real eigenvalues of the star graph, their branch structure and the two
subsequences the inverse problem consumes.

Roots are searched on the real ``rho`` axis (``lambda = rho**2 > 0``).  Plain
sign changes of the characteristic function give simple roots.  Multiple or
tightly clustered roots appear where several edges have a Dirichlet zero
(``d0_j = 0``) at nearly the same ``rho``: the graph function equals
``prod_j d0_j * sum_k d1_k / d0_k``, so between two consecutive edge zeros of
such a cluster there is one root, and ``r`` coincident edge zeros carry a
root of multiplicity ``r - 1``.  Those edge zeros are simple and are located
by bisection, which keeps multiple roots accurate to ~1e-12.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ClassificationError, InputError
from .edge import edge_values
from .graph import delta_graph, edge_table, graph_values_rho, product_formula
from .potential import GraphSpec, potential_mean

log = logging.getLogger(__name__)

SCAN_START = 0.05
BISECT_WIDTH = 1e-12
COINCIDENT = 1e-10
CLUSTER_TOL = 1e-8


@dataclass(frozen=True)
class RootScan:
    roots: np.ndarray
    cluster: np.ndarray
    anomalies: tuple = ()


@dataclass(frozen=True)
class Spectrum:
    """``branches[j, k-1]`` is ``rho_{k,j}``; branch 0 is the one near ``k - 1/2``."""

    branches: np.ndarray
    cluster_flags: np.ndarray
    A_l: float
    k_max: int
    anomalies: tuple = ()
    lambdas: np.ndarray | None = None  # NaN in ``branches`` where lambda <= SCAN_START**2

    def __post_init__(self):
        if self.lambdas is None:
            object.__setattr__(self, "lambdas", np.asarray(self.branches) ** 2)

    @property
    def p(self) -> int:
        return self.branches.shape[0]

    def rows(self):
        """``(k, j, rho, lambda, cluster_flag)`` ordered by ``k`` then ``j``."""
        for k in range(1, self.k_max + 1):
            for j in range(self.p):
                yield (k, j, float(self.branches[j, k - 1]), float(self.lambdas[j, k - 1]),
                       bool(self.cluster_flags[j, k - 1]))


@dataclass(frozen=True)
class EigenSubsequences:
    """``mu0 ~ k`` (cosine family) and ``mu1 ~ k - 1/2`` (sine family)."""

    mu0: np.ndarray
    mu1: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        mu0 = np.asarray(self.mu0, dtype=float)
        mu1 = np.asarray(self.mu1, dtype=float)
        if np.any(mu0 == 0) or np.any(mu1 == 0):
            raise InputError("eigenvalue subsequences must not contain zero")
        object.__setattr__(self, "mu0", mu0)
        object.__setattr__(self, "mu1", mu1)

    @property
    def K(self) -> int:
        return int(min(self.mu0.size, self.mu1.size))


# ---------------------------------------------------------------------------
# asymptotics
# ---------------------------------------------------------------------------

def ordinary_mean_sum(graph: GraphSpec) -> float:
    """``A_l``: sum of ``omega_j = 1/2 int q_j`` over the ordinary edges."""
    return float(sum(potential_mean(e.q) for e in graph.edges if not e.is_frozen))


def asymptotic_guess(graph: GraphSpec, k: int, j: int) -> float:
    """Leading asymptotics of ``rho_{k,j}``.

    The near-half-integer branch is shifted by ``A_l / (p pi k)``; that is
    the first-order balance in ``p cos x sin^(p-1) x / rho^(p-1) +
    sin^(p-2) x (1 - p cos^2 x) A_l / rho^p = 0`` at ``x = rho pi``.
    """
    if k < 1:
        raise InputError("k must be >= 1")
    if j == 0:
        return k - 0.5 + ordinary_mean_sum(graph) / (graph.p * np.pi * k)
    return float(k)


# ---------------------------------------------------------------------------
# root finding
# ---------------------------------------------------------------------------

def _bisect(fun, lo, hi, flo, fhi, width=BISECT_WIDTH):
    """Vectorised bisection on sign-changing brackets, then one secant step."""
    lo, hi = np.array(lo, dtype=float), np.array(hi, dtype=float)
    flo, fhi = np.array(flo, dtype=float), np.array(fhi, dtype=float)
    while True:
        active = (hi - lo) > width
        if not np.any(active):
            break
        mid = 0.5 * (lo[active] + hi[active])
        fm = np.real(fun(mid))
        left = np.sign(fm) == np.sign(flo[active])
        idx = np.flatnonzero(active)
        lo[idx[left]], flo[idx[left]] = mid[left], fm[left]
        hi[idx[~left]], fhi[idx[~left]] = mid[~left], fm[~left]
        exact = fm == 0
        lo[idx[exact]] = hi[idx[exact]] = mid[exact]
        flo[idx[exact]] = fhi[idx[exact]] = 0.0
    denom = fhi - flo
    with np.errstate(invalid="ignore", divide="ignore"):
        sec = lo - flo * (hi - lo) / denom
    ok = (denom != 0) & (sec >= lo) & (sec <= hi)
    return np.where(ok, sec, 0.5 * (lo + hi))


def _sign_events(x, f):
    """Brackets ``(lo, hi, flo, fhi)`` of sign changes; exact zeros give ``lo == hi``."""
    s = np.sign(f)
    cells = np.flatnonzero(s[:-1] * s[1:] < 0)
    zeros = np.flatnonzero(s == 0)
    lo = np.concatenate([x[cells], x[zeros]])
    hi = np.concatenate([x[cells + 1], x[zeros]])
    flo = np.concatenate([f[cells], f[zeros]])
    fhi = np.concatenate([f[cells + 1], f[zeros]])
    order = np.argsort(lo, kind="stable")
    return lo[order], hi[order], flo[order], fhi[order]


def refine_root(graph: GraphSpec, bracket) -> float:
    """Bisection to width 1e-12 plus one secant step on a sign-changing bracket."""
    a, b = float(bracket[0]), float(bracket[1])
    fa, fb = np.real(graph_values_rho(graph, np.array([a, b])))
    if fa == 0:
        return a
    if fb == 0:
        return b
    if np.sign(fa) == np.sign(fb):
        raise InputError(f"no sign change on bracket ({a}, {b})")
    fun = lambda r: graph_values_rho(graph, r)
    return float(_bisect(fun, [a], [b], [fa], [fb])[0])


def _golden_min(fun, lo, hi, iters=40):
    """Vectorised golden-section minimisation of ``fun`` on ``[lo, hi]``."""
    g = (np.sqrt(5) - 1) / 2
    lo, hi = np.array(lo, float), np.array(hi, float)
    c = hi - g * (hi - lo)
    d = lo + g * (hi - lo)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        left = fc < fd
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
        # the surviving interior point is reused, one new evaluation per pass
        keep_x, keep_f = np.where(left, c, d), np.where(left, fc, fd)
        new_x = np.where(left, hi - g * (hi - lo), lo + g * (hi - lo))
        new_f = fun(new_x)
        c = np.where(left, new_x, keep_x)
        fc = np.where(left, new_f, keep_f)
        d = np.where(left, keep_x, new_x)
        fd = np.where(left, keep_f, new_f)
    x = np.where(fc < fd, c, d)
    return x, np.minimum(fc, fd)


def _edge_zero_clusters(graph, x, d0, step):
    """Refined zeros of every ``d0_j`` grouped into clusters closer than ``step``."""
    poles = []
    for j, edge in enumerate(graph.edges):
        lo, hi, flo, fhi = _sign_events(x, np.real(d0[j]))
        if lo.size == 0:
            continue
        fun = lambda r, e=edge: np.real(edge_values(e, r)[0])
        z = _bisect(fun, lo, hi, flo, fhi)
        poles.extend((float(v), j) for v in z)
    poles.sort()
    clusters, current = [], []
    for z, j in poles:
        if current and z - current[-1][0] > step:
            clusters.append(current)
            current = []
        current.append((z, j))
    if current:
        clusters.append(current)
    return [c for c in clusters if len(c) >= 2]


def scan_real_roots(graph: GraphSpec, rho_max: float, step: float | None = None,
                    start: float = SCAN_START) -> RootScan:
    """All real roots in ``rho`` of the graph function on ``[start, rho_max]``.

    Roots are returned sorted and repeated according to multiplicity;
    ``cluster`` marks roots that the scan grid could not separate.
    """
    if step is None:
        step = min(0.01, 1.0 / (40 * graph.p))
    if step > 0.01:
        raise InputError(f"scan step must be <= 0.01, got {step}")
    if rho_max <= start:
        return RootScan(np.empty(0), np.empty(0, bool))
    n = int(np.ceil((rho_max - start) / step))
    x = start + step * np.arange(n + 1)
    d0, d1 = edge_table(graph, x)
    d0, d1 = np.real(d0), np.real(d1)
    F = product_formula(d0, d1)
    fun = lambda r: np.real(graph_values_rho(graph, r))

    roots, flags = [], []
    excluded = []  # intervals owned by edge-zero clusters
    for cl in _edge_zero_clusters(graph, x, d0, step):
        z = [c[0] for c in cl]
        excluded.append((z[0], z[-1]))
        local, gaps_lo, gaps_hi = [], [], []
        for a, b in zip(z[:-1], z[1:]):
            if b - a <= COINCIDENT * max(1.0, b):
                local.append(0.5 * (a + b))
            else:
                gaps_lo.append(a)
                gaps_hi.append(b)
        if gaps_lo:
            lo = np.array(gaps_lo) + 1e-13
            hi = np.array(gaps_hi) - 1e-13
            flo, fhi = fun(lo), fun(hi)
            ok = np.sign(flo) * np.sign(fhi) < 0
            if np.any(ok):
                local.extend(_bisect(fun, lo[ok], hi[ok], flo[ok], fhi[ok]).tolist())
            for a, b in zip(lo[~ok], hi[~ok]):
                log.warning("no sign change between clustered edge zeros %.12g, %.12g", a, b)
        roots.extend(local)
        flags.extend([len(local) > 1] * len(local))

    def owned(lo, hi, margin=0.0):
        return any(lo <= b + margin and hi >= a - margin for a, b in excluded)

    # grid cells around each cluster; roots there outside the cluster are probed
    eta = 1e-7
    cells = [(x[max(0, np.searchsorted(x, a - eta, "left") - 1)],
              x[min(n, np.searchsorted(x, b + eta, "right"))]) for a, b in excluded]
    lo, hi, flo, fhi = _sign_events(x, F)
    keep = np.array([not any(cl <= u and v <= ch for cl, ch in cells)
                     for u, v in zip(lo, hi)], dtype=bool)
    for (a, b), (cl, ch) in zip(excluded, cells):
        probes = np.array([cl, a - eta, b + eta, ch])
        fp = fun(probes)
        for i in (0, 2):
            pa, pb, fa, fb = probes[i], probes[i + 1], fp[i], fp[i + 1]
            if pb > pa and np.sign(fa) * np.sign(fb) < 0:
                roots.append(float(_bisect(fun, [pa], [pb], [fa], [fb])[0]))
                flags.append(False)
    exact = keep & (lo == hi)
    roots.extend(lo[exact].tolist())
    flags.extend([False] * int(exact.sum()))
    brk = keep & (lo < hi)
    if np.any(brk):
        roots.extend(_bisect(fun, lo[brk], hi[brk], flo[brk], fhi[brk]).tolist())
        flags.extend([False] * int(brk.sum()))

    # |F| dipping towards zero without a sign change and away from edge clusters
    aF = np.abs(F)
    anomalies = []
    idx = np.flatnonzero((aF[1:-1] < aF[:-2]) & (aF[1:-1] <= aF[2:])
                         & (np.sign(F[:-2]) == np.sign(F[1:-1]))
                         & (np.sign(F[2:]) == np.sign(F[1:-1]))) + 1
    win = max(1, int(round(0.5 / step)))
    cand = []
    for i in idx:
        scale = aF[max(0, i - win):i + win + 1].max()
        if aF[i] < 1e-2 * scale and not owned(x[i - 1], x[i + 1], step):
            cand.append((i, scale))
    if cand:
        ii = np.array([c[0] for c in cand])
        scales = np.array([c[1] for c in cand])
        s = np.sign(F[ii])
        xm, fm = _golden_min(lambda r: s * fun(r), x[ii - 1], x[ii + 1])
        for k, i in enumerate(ii):
            if fm[k] < 0:
                pair = _bisect(fun, [x[i - 1], xm[k]], [xm[k], x[i + 1]],
                               [F[i - 1], s[k] * fm[k]], [s[k] * fm[k], F[i + 1]])
                roots.extend(pair.tolist())
                flags.extend([True, True])
            elif fm[k] < CLUSTER_TOL * scales[k]:
                roots.extend([float(xm[k])] * 2)
                flags.extend([True, True])
            else:
                anomalies.append(float(xm[k]))

    order = np.argsort(roots, kind="stable")
    return RootScan(np.asarray(roots, float)[order], np.asarray(flags, bool)[order],
                    tuple(anomalies))


def lower_bound(graph: GraphSpec) -> float:
    """Heuristic floor for real eigenvalues: ``-(1 + sum_j max|q_j| max(1, n_j))``."""
    return -1.0 - sum(float(np.max(np.abs(e.q.grid_values))) * max(1, e.n) for e in graph.edges)


def scan_low_eigenvalues(graph: GraphSpec, lam_min: float | None = None,
                         step: float = 0.01) -> np.ndarray:
    """Real eigenvalues in ``[lam_min, SCAN_START**2]``, scanned directly in ``lambda``.

    These are invisible to the ``rho`` scan but still occupy the lowest slots
    of the branch structure.
    """
    lam_min = lower_bound(graph) if lam_min is None else float(lam_min)
    top = SCAN_START**2
    if lam_min >= top:
        return np.empty(0)
    n = int(np.ceil((top - lam_min) / step))
    x = np.linspace(lam_min, top, n + 1)
    fun = lambda lam: np.real(delta_graph(graph, lam))
    lo, hi, flo, fhi = _sign_events(x, fun(x))
    # the top end belongs to the rho scan
    keep = lo < top
    if not np.any(keep):
        return np.empty(0)
    return np.sort(_bisect(fun, lo[keep], hi[keep], flo[keep], fhi[keep], width=1e-13))


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

def classify_spectrum(roots, graph: GraphSpec, cluster=None, k_max: int | None = None,
                      check_from: int = 10, low_lambdas=()) -> Spectrum:
    """Split sorted roots into ``p`` branches.

    Root ``k`` group = roots ``(k-1)p .. kp-1``; inside a group the root nearest
    the half-integer guess is branch 0 and the others are branches
    ``1..p-1`` in increasing order.  From ``k = check_from`` on every group
    must sit in the window ``(k - 3/4, k + 1/4]``.  ``low_lambdas`` are
    eigenvalues below the ``rho`` scan; they come first and get ``rho = NaN``.
    """
    roots = np.asarray(getattr(roots, "roots", roots), dtype=float)
    if cluster is None:
        cluster = np.zeros(roots.size, dtype=bool)
    cluster = np.asarray(cluster, dtype=bool)
    if np.any(np.diff(roots) < 0):
        raise InputError("roots must be sorted")
    low = np.sort(np.asarray(low_lambdas, dtype=float).reshape(-1))
    lams = np.concatenate([low, roots**2])
    # signed square root keeps the ordering for the nearest-guess rule
    eff = np.concatenate([np.sign(low) * np.sqrt(np.abs(low)), roots])
    roots = np.concatenate([np.full(low.size, np.nan), roots])
    cluster = np.concatenate([np.zeros(low.size, dtype=bool), cluster])
    p = graph.p
    groups = roots.size // p
    if k_max is None:
        k_max = groups
    if k_max > groups:
        raise ClassificationError(f"only {groups} complete root groups, {k_max} requested")
    A = ordinary_mean_sum(graph)
    branches = np.empty((p, k_max))
    lam_out = np.empty((p, k_max))
    flags = np.zeros((p, k_max), dtype=bool)
    for k in range(1, k_max + 1):
        sl = slice((k - 1) * p, k * p)
        grp, fl, ev, lm = roots[sl], cluster[sl], eff[sl], lams[sl]
        j0 = int(np.argmin(np.abs(ev - asymptotic_guess(graph, k, 0))))
        order = [j0] + [i for i in range(p) if i != j0]
        branches[:, k - 1] = grp[order]
        lam_out[:, k - 1] = lm[order]
        flags[:, k - 1] = fl[order]
        if k >= check_from and not (np.all(ev > k - 0.75) and np.all(ev <= k + 0.25)):
            raise ClassificationError(
                f"window k={k} (k-3/4, k+1/4] does not hold exactly {p} roots: {ev.tolist()}")
    return Spectrum(branches, flags, A, k_max, (), lam_out)


def forward_spectrum(graph: GraphSpec, k_max: int, step: float | None = None,
                     rho_max: float | None = None) -> Spectrum:
    """Scan up to ``rho_max`` (default ``k_max + 1``) and classify ``k_max`` groups."""
    if rho_max is None:
        rho_max = k_max + 1.0
    scan = scan_real_roots(graph, rho_max, step)
    if scan.anomalies:
        log.info("%d sign-pattern anomalies (possible complex pairs): %s",
                 len(scan.anomalies), scan.anomalies)
    low = scan_low_eigenvalues(graph)
    if low.size:
        log.info("%d eigenvalue(s) with lambda <= %g: %s", low.size, SCAN_START**2, low.tolist())
    spec = classify_spectrum(scan.roots, graph, scan.cluster, k_max=k_max, low_lambdas=low)
    return Spectrum(spec.branches, spec.cluster_flags, spec.A_l, spec.k_max, scan.anomalies,
                    spec.lambdas)


def extract_subsequences(spec: Spectrum) -> EigenSubsequences:
    """``mu0`` from near-integer branch 1, ``mu1`` from the half-integer branch 0."""
    if spec.k_max < 1:
        raise InputError("spectrum has no complete root groups")
    mu0, mu1 = spec.branches[1].copy(), spec.branches[0].copy()
    for j, m in ((1, mu0), (0, mu1)):
        bad = np.flatnonzero(~np.isfinite(m))
        if bad.size:
            k = int(bad[0]) + 1
            raise InputError(f"eigenvalue lambda_(k={k}, j={j}) = {spec.lambdas[j, k - 1]!r} is "
                             f"not above {SCAN_START**2:g}; the inverse step needs positive mu")
    if np.any(mu0 == 0) or np.any(mu1 == 0):
        raise InputError("zero eigenvalue in subsequences")
    return EigenSubsequences(mu0, mu1, {"mu0": 1, "mu1": 0})


def fit_asymptotic_constant(spec: Spectrum, k_lo: int = 20, k_hi: int = 60) -> float:
    """Least-squares ``A_l`` from ``rho_{k,0} - (k - 1/2) ~ A_l / (p pi k) + c``."""
    if not 1 <= k_lo < k_hi <= spec.k_max:
        raise InputError(f"need 1 <= k_lo < k_hi <= k_max={spec.k_max}, got {k_lo}, {k_hi}")
    k = np.arange(k_lo, k_hi + 1, dtype=float)
    dev = spec.branches[0, k_lo - 1:k_hi] - (k - 0.5)
    (slope, _), *_ = np.linalg.lstsq(np.column_stack([1 / k, np.ones_like(k)]), dev, rcond=None)
    return float(spec.p * np.pi * slope)
