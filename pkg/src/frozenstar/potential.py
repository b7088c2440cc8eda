"""Edge potentials, edge/graph specifications and the oscillatory transforms.

Potentials live on the uniform grid ``x_i = i*pi/M`` and are interpolated
linearly in between.  All integrals of a potential against ``sin``/``cos``
kernels use product quadrature: the piecewise-linear interpolant is
multiplied by the trigonometric weight and integrated exactly, so the
accuracy does not degrade as the spectral parameter grows.

The two transforms that everything else is built from are::

    w(x, rho)  = int_0^x q(t) sin(rho (x - t)) / rho dt
    w'(x, rho) = int_0^x q(t) cos(rho (x - t)) dt
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InputError

MIN_GRID = 64
DEFAULT_M = 2048

# rho values are processed in chunks so the (chunk x M) trig tables stay small
_CHUNK = 512


# ---------------------------------------------------------------------------
# cell moments
# ---------------------------------------------------------------------------

def _moment_coeffs(theta):
    """Hat-function weights for one cell of reduced frequency ``theta``.

    For a cell ``[t0, t0 + d]`` and ``theta = rho * d`` the exact integrals of
    the linear interpolant ``f0 (1-u) + f1 u`` against ``cos(rho t0 + theta u)``
    and ``sin(rho t0 + theta u)`` are combinations of

        Ac = int (1-u) cos(theta u),   Bc = int u cos(theta u),
        As = int (1-u) sin(theta u),   Bs = int u sin(theta u)     (u in [0, 1]).

    ``As`` and ``Bs`` are returned divided by ``theta`` so that ``rho = 0`` is
    a regular point.  Taylor series are used for small ``|theta|``.
    """
    theta = np.asarray(theta)
    small = np.abs(theta) < 0.25
    t2 = np.where(small, theta, 0) ** 2
    # series (all entire functions of theta**2)
    c0_s = 1 - t2 / 6 * (1 - t2 / 20 * (1 - t2 / 42 * (1 - t2 / 72 * (1 - t2 / 110))))
    c1_s = 0.5 - t2 / 8 + t2**2 / 144 - t2**3 / 5760 + t2**4 / 403200 - t2**5 / 43545600
    s0_s = 0.5 - t2 / 24 + t2**2 / 720 - t2**3 / 40320 + t2**4 / 3628800 - t2**5 / 479001600
    s1_s = 1 / 3 - t2 / 30 + t2**2 / 840 - t2**3 / 45360 + t2**4 / 3991680 - t2**5 / 518918400

    tb = np.where(small, 1.0, theta)
    sn, cs = np.sin(tb), np.cos(tb)
    c0_b = sn / tb
    c1_b = (tb * sn + cs - 1) / tb**2
    s0_b = (1 - cs) / tb**2
    s1_b = (sn - tb * cs) / tb**3

    c0 = np.where(small, c0_s, c0_b)
    c1 = np.where(small, c1_s, c1_b)
    s0 = np.where(small, s0_s, s0_b)
    s1 = np.where(small, s1_s, s1_b)
    return c0 - c1, c1, s0 - s1, s1


def _sin_over(rho, t):
    """``sin(rho t) / rho`` with the ``rho -> 0`` limit ``t``."""
    rho = np.asarray(rho)
    safe = np.where(rho == 0, 1.0, rho)
    return np.where(rho == 0, t, np.sin(rho * t) / safe)


def trig_integrals(t, f, rho):
    """Integrate a piecewise-linear function against ``cos`` and ``sin``.

    Parameters
    ----------
    t, f : 1-D arrays
        Nodes (strictly increasing, possibly non-uniform) and values.
    rho : array_like
        Frequencies, real or complex, any shape.

    Returns
    -------
    ic, is_over : arrays shaped like ``rho``
        ``int f(t) cos(rho t) dt`` and ``int f(t) sin(rho t) dt / rho``.
    """
    t = np.asarray(t, dtype=float)
    f = np.asarray(f, dtype=float)
    rho = np.asarray(rho)
    flat = rho.reshape(-1)
    dtype = np.result_type(flat.dtype, float)
    ic = np.empty(flat.shape, dtype=dtype)
    iso = np.empty(flat.shape, dtype=dtype)
    if len(t) < 2:
        ic[:] = 0
        iso[:] = 0
        return ic.reshape(rho.shape), iso.reshape(rho.shape)
    d = np.diff(t)
    t0 = t[:-1]
    f0, f1 = f[:-1], f[1:]
    # cells of the common width share their moment coefficients
    h = np.median(d)
    regular = np.abs(d - h) <= 1e-12 * h
    odd = np.flatnonzero(~regular)
    for start in range(0, flat.size, _CHUNK):
        r = flat[start:start + _CHUNK, None]
        ac, bc, ast, bst = (np.broadcast_to(c, (r.shape[0], d.size)).copy()
                            for c in _moment_coeffs(r * h))
        if odd.size:
            for c, v in zip((ac, bc, ast, bst), _moment_coeffs(r * d[odd])):
                c[:, odd] = v
        cosv = np.cos(r * t0)
        sinv_r = _sin_over(r, t0)
        lin_c = f0 * ac + f1 * bc
        lin_s = d * (f0 * ast + f1 * bst)
        ic[start:start + _CHUNK] = np.sum(d * (cosv * lin_c - sinv_r * r**2 * lin_s), axis=1)
        iso[start:start + _CHUNK] = np.sum(d * (sinv_r * lin_c + cosv * lin_s), axis=1)
    return ic.reshape(rho.shape), iso.reshape(rho.shape)


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PotentialFn:
    """Real potential sampled on the uniform grid ``x_i = i*pi/M``.

    ``sine_coeffs`` (optional) are the ``b_n`` of ``q(t) = sum b_n sin n(pi - t)``;
    when present the grid values are regenerated from them.
    """

    grid_values: np.ndarray
    sine_coeffs: np.ndarray | None = None

    def __post_init__(self):
        values = np.asarray(self.grid_values)
        if np.iscomplexobj(values):
            raise InputError("potential must be real-valued")
        values = np.array(values, dtype=float)
        if values.ndim != 1 or values.size - 1 < MIN_GRID:
            raise InputError(f"potential grid needs M >= {MIN_GRID} intervals, got {values.size - 1}")
        if not np.all(np.isfinite(values)):
            raise InputError("potential grid contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "grid_values", values)
        if self.sine_coeffs is not None:
            coeffs = np.array(self.sine_coeffs, dtype=float)
            coeffs.setflags(write=False)
            object.__setattr__(self, "sine_coeffs", coeffs)

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, M: int = DEFAULT_M) -> "PotentialFn":
        return cls(np.zeros(M + 1))

    @classmethod
    def constant(cls, value: float, M: int = DEFAULT_M) -> "PotentialFn":
        return cls(np.full(M + 1, float(value)))

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], np.ndarray], M: int = DEFAULT_M) -> "PotentialFn":
        x = np.linspace(0.0, np.pi, M + 1)
        return cls(np.broadcast_to(np.asarray(func(x), dtype=float), x.shape).copy())

    @classmethod
    def from_sine_coeffs(cls, b: Sequence[float], M: int = DEFAULT_M) -> "PotentialFn":
        """Potential ``q(t) = sum_n b_n sin n(pi - t)``, ``n = 1..len(b)``."""
        b = np.asarray(b, dtype=float)
        x = np.linspace(0.0, np.pi, M + 1)
        n = np.arange(1, b.size + 1)
        values = np.sin(np.outer(np.pi - x, n)) @ b if b.size else np.zeros_like(x)
        return cls(values, sine_coeffs=b)

    # -- grid ---------------------------------------------------------------

    @property
    def M(self) -> int:
        return self.grid_values.size - 1

    @property
    def h(self) -> float:
        return np.pi / self.M

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, np.pi, self.M + 1)

    def __call__(self, t):
        """Linear interpolant; zero outside ``[0, pi]``."""
        return np.interp(t, self.grid, self.grid_values, left=0.0, right=0.0)

    def is_zero(self) -> bool:
        return not np.any(self.grid_values)

    # -- transforms ---------------------------------------------------------

    def transforms(self, x, rho):
        """Return ``(w, w')`` at the points ``x`` for every ``rho``.

        Output arrays have shape ``rho.shape + (len(x),)``.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(x < 0) or np.any(x > np.pi * (1 + 1e-14)):
            raise InputError("transform points must lie in [0, pi]")
        rho = np.asarray(rho)
        if not np.all(np.isfinite(rho)):
            raise InputError("rho must be finite")
        flat = rho.reshape(-1)
        dtype = np.result_type(flat.dtype, float)
        M, h = self.M, self.h
        q = self.grid_values
        t = self.grid

        # cells fully below x, then one partial cell [t_m, x]
        m = np.minimum(np.floor(x / h + 1e-12).astype(int), M)
        m = np.where(np.abs(x - m * h) <= 1e-12 * np.pi, m, np.minimum(m, M - 1))
        at_node = np.abs(x - m * h) <= 1e-12 * np.pi
        mask = (np.arange(M)[:, None] < m[None, :]).astype(float)
        F0 = q[:-1, None] * mask
        F1 = q[1:, None] * mask
        rhs = np.concatenate([F0, F1], axis=1)
        nx = x.size
        d_part = np.where(at_node, 0.0, x - m * h)
        q_part = self(x)

        w = np.empty((flat.size, nx), dtype=dtype)
        wp = np.empty((flat.size, nx), dtype=dtype)
        t0 = t[:-1]
        for start in range(0, flat.size, _CHUNK):
            r = flat[start:start + _CHUNK, None]
            ac, bc, ast, bst = _moment_coeffs(r * h)
            cos_tab = np.cos(r * t0)
            sin_tab = _sin_over(r, t0)
            pc = cos_tab @ rhs
            ps = sin_tab @ rhs
            pc0, pc1 = pc[:, :nx], pc[:, nx:]
            ps0, ps1 = ps[:, :nx], ps[:, nx:]
            lin_c_cos = ac * pc0 + bc * pc1
            lin_c_sin = ac * ps0 + bc * ps1
            lin_s_cos = h * (ast * pc0 + bst * pc1)
            lin_s_sin = h * (ast * ps0 + bst * ps1)
            ic = h * (lin_c_cos - r**2 * lin_s_sin)
            iso = h * (lin_c_sin + lin_s_cos)

            # partial cell
            tm = m * h
            qa = q[m]
            ac2, bc2, ast2, bst2 = _moment_coeffs(r * d_part)
            cm = np.cos(r * tm)
            sm = _sin_over(r, tm)
            lc = qa * ac2 + q_part * bc2
            ls = d_part * (qa * ast2 + q_part * bst2)
            ic = ic + d_part * (cm * lc - sm * r**2 * ls)
            iso = iso + d_part * (sm * lc + cm * ls)

            sx = _sin_over(r, x)
            cx = np.cos(r * x)
            w[start:start + _CHUNK] = sx * ic - cx * iso
            wp[start:start + _CHUNK] = cx * ic + r**2 * sx * iso
        shape = rho.shape + (nx,)
        return w.reshape(shape), wp.reshape(shape)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "grid": self.grid_values.tolist(),
            "sine_coeffs": None if self.sine_coeffs is None else self.sine_coeffs.tolist(),
            "M": self.M,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "PotentialFn":
        unknown = set(doc) - {"grid", "sine_coeffs", "M", "constant", "poly"}
        if unknown:
            raise InputError(f"unknown potential key(s): {sorted(unknown)}")
        M = doc.get("M", DEFAULT_M)
        if not isinstance(M, int) or M < MIN_GRID:
            raise InputError(f"potential.M must be an integer >= {MIN_GRID}, got {M!r}")
        if doc.get("sine_coeffs") is not None:
            return cls.from_sine_coeffs(doc["sine_coeffs"], M)
        if doc.get("grid") is not None:
            grid = np.asarray(doc["grid"], dtype=float)
            if grid.size != M + 1 and "M" in doc:
                raise InputError(f"potential.grid has {grid.size} values, expected M+1 = {M + 1}")
            return cls(grid)
        if doc.get("poly") is not None:
            # coefficients of 1, t, t^2, ...
            coef = np.asarray(doc["poly"], dtype=float)
            return cls.from_function(lambda t: np.polynomial.polynomial.polyval(t, coef), M)
        if "constant" in doc:
            return cls.constant(float(doc["constant"]), M)
        raise InputError("potential needs one of 'grid', 'sine_coeffs', 'poly' or 'constant'")


def _check_frozen_args(args) -> np.ndarray:
    a = np.array(args, dtype=float).reshape(-1)
    if np.any(~np.isfinite(a)) or np.any(a <= 0) or np.any(a >= np.pi):
        raise InputError("frozen argument must lie in open (0,pi)")
    if np.any(np.diff(a) <= 0):
        raise InputError("frozen arguments must be strictly increasing")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class EdgeSpec:
    """One edge: potential, frozen arguments (empty for an ordinary edge) and
    the derivative order ``alpha`` of the Dirichlet/Neumann condition at the
    outer vertex."""

    q: PotentialFn
    frozen_args: np.ndarray = field(default_factory=lambda: np.empty(0))
    alpha: int = 0

    def __post_init__(self):
        object.__setattr__(self, "frozen_args", _check_frozen_args(self.frozen_args))
        if self.alpha not in (0, 1):
            raise InputError(f"alpha must be 0 or 1, got {self.alpha!r}")

    @property
    def is_frozen(self) -> bool:
        return self.frozen_args.size > 0

    @property
    def n(self) -> int:
        return self.frozen_args.size

    def to_json(self) -> dict:
        return {
            "potential": self.q.to_json(),
            "frozen_args": self.frozen_args.tolist(),
            "alpha": self.alpha,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "EdgeSpec":
        unknown = set(doc) - {"potential", "frozen_args", "alpha"}
        if unknown:
            raise InputError(f"unknown edge key(s): {sorted(unknown)}")
        if "potential" not in doc:
            raise InputError("edge needs a 'potential'")
        return cls(PotentialFn.from_json(doc["potential"]),
                   doc.get("frozen_args", []), doc.get("alpha", 0))


@dataclass(frozen=True, eq=False)
class GraphSpec:
    """Star graph with ``p >= 2`` edges of length pi; the last edge is the
    one whose potential the inverse problem recovers."""

    edges: tuple

    def __post_init__(self):
        edges = tuple(self.edges)
        if len(edges) < 2:
            raise InputError(f"graph needs p >= 2 edges, got {len(edges)}")
        object.__setattr__(self, "edges", edges)

    @property
    def p(self) -> int:
        return len(self.edges)

    @property
    def unknown_edge_index(self) -> int:
        return self.p - 1

    @property
    def known_edges(self) -> tuple:
        return self.edges[:-1]

    def to_json(self) -> dict:
        return {"edges": [e.to_json() for e in self.edges]}

    @classmethod
    def from_json(cls, doc: dict) -> "GraphSpec":
        unknown = set(doc) - {"edges"}
        if unknown:
            raise InputError(f"unknown graph key(s): {sorted(unknown)}")
        return cls(tuple(EdgeSpec.from_json(e) for e in doc.get("edges", [])))


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def wq_transform(q: PotentialFn, x, rho):
    """``int_0^x q(t) sin(rho (x-t)) / rho dt`` (``x`` scalar or 1-D)."""
    w, _ = q.transforms(x, rho)
    return w[..., 0] if np.ndim(x) == 0 else w


def wq_prime_transform(q: PotentialFn, x, rho):
    """``int_0^x q(t) cos(rho (x-t)) dt``."""
    _, wp = q.transforms(x, rho)
    return wp[..., 0] if np.ndim(x) == 0 else wp


def potential_from_sine_series(coeffs, M: int = DEFAULT_M) -> PotentialFn:
    """Potential with Fourier data ``c_n = int q(t) sin n(pi-t) dt``.

    Sums ``q(t) = sum (2 c_n / pi) sin n(pi - t)``.
    """
    c = np.asarray(coeffs, dtype=float)
    if c.size < 1:
        raise InputError("need at least one sine coefficient")
    if M < MIN_GRID:
        raise InputError(f"M must be >= {MIN_GRID}")
    return PotentialFn.from_sine_coeffs(2.0 * c / np.pi, M)


def potential_mean(q: PotentialFn) -> float:
    """``omega = 1/2 int_0^pi q`` by the trapezoid rule."""
    return 0.5 * float(np.trapezoid(q.grid_values, dx=q.h))
