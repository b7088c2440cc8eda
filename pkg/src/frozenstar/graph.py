"""Characteristic function of the star graph.

Three independent evaluations:

``delta_graph``
    product formula ``sum_k d1_k prod_{j != k} d0_j`` (prefix/suffix products,
    no division);
``delta_graph_recursive``
    peel the last edge: ``D_p = d0_p D_{p-1} + d1_p prod_{k<p} d0_k``;
``delta_graph_full_determinant``
    the bordered linear system in the unknowns (``c_j D_j``, ``c_j z_{F_j}(a_{k,j})``)
    for frozen edges and ``c_j`` for ordinary ones: continuity rows at the
    frozen points, matching rows ``y_j(pi) = y_{j+1}(pi)``, Kirchhoff row.

Normalisation: the leading large-``rho`` term is ``+p cos(rho pi) sin(rho pi)^(p-1) / rho^(p-1)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .edge import edge_values, phi_gamma, phi_gamma_prime, rho_of
from .errors import InputError
from .potential import EdgeSpec, GraphSpec

MAX_DET_SIZE = 64
_RHO_REF = 0.3141


@dataclass(frozen=True)
class GraphCharSample:
    lam: complex
    value_product: complex
    value_determinant: complex | None = None


def edge_table(graph: GraphSpec, rho):
    """Stack ``(d0, d1)`` of every edge: two arrays of shape ``(p,) + rho.shape``."""
    vals = [edge_values(e, rho) for e in graph.edges]
    return np.stack([v[0] for v in vals]), np.stack([v[1] for v in vals])


def product_formula(d0, d1):
    """``sum_k d1[k] prod_{j != k} d0[j]`` along axis 0."""
    p = d0.shape[0]
    ones = np.ones_like(d0[:1])
    prefix = np.cumprod(np.concatenate([ones, d0[:-1]]), axis=0)
    suffix = np.cumprod(np.concatenate([ones, d0[:0:-1]]), axis=0)[::-1]
    assert prefix.shape[0] == suffix.shape[0] == p
    return np.sum(d1 * prefix * suffix, axis=0)


def graph_values_rho(graph: GraphSpec, rho):
    d0, d1 = edge_table(graph, np.asarray(rho))
    return product_formula(d0, d1)


def delta_graph(graph: GraphSpec, lam):
    return graph_values_rho(graph, rho_of(lam))[()]


def delta_graph_recursive(graph: GraphSpec, lam):
    d0, d1 = edge_table(graph, rho_of(lam))
    value = d1[0]
    prod0 = d0[0]
    for k in range(1, graph.p):
        value = d0[k] * value + d1[k] * prod0
        prod0 = prod0 * d0[k]
    return value[()]


# ---------------------------------------------------------------------------
# determinant routes
# ---------------------------------------------------------------------------

def _ingredients(edge: EdgeSpec, rho, zero_potential=False):
    """Entries each edge contributes to the bordered matrices at scalar rho."""
    alpha = edge.alpha
    if edge.is_frozen:
        a = edge.frozen_args
        if zero_potential:
            w = np.zeros(a.size + 1)
            wp = np.zeros(a.size + 1)
        else:
            w, wp = edge.q.transforms(np.append(a, np.pi), rho)
        return {
            "phi_a": phi_gamma(alpha, a, rho),
            "w_a": w[:-1],
            "pi": np.concatenate([[phi_gamma(alpha, np.pi, rho)], np.full(a.size, w[-1])]),
            "dpi": np.concatenate([[phi_gamma_prime(alpha, np.pi, rho)], np.full(a.size, wp[-1])]),
        }
    if zero_potential:
        z, zp = phi_gamma(alpha, np.pi, rho), phi_gamma_prime(alpha, np.pi, rho)
    else:
        z, zp = edge_values(edge, np.asarray(rho))
    return {"pi": np.array([z]), "dpi": np.array([zp])}


def _width(edge: EdgeSpec) -> int:
    return edge.n + 1 if edge.is_frozen else 1


def _continuity_rows(ing, n):
    rows = np.zeros((n, n + 1), dtype=np.result_type(ing["w_a"], ing["phi_a"], float))
    rows[:, 0] = ing["phi_a"]
    rows[:, 1:] = ing["w_a"][:, None] - np.eye(n)
    return rows


def bordered_matrix(graph: GraphSpec, rho, zero_potential=False) -> np.ndarray:
    """Full linear system whose determinant vanishes exactly at eigenvalues."""
    widths = [_width(e) for e in graph.edges]
    size = sum(widths)
    if size > MAX_DET_SIZE:
        raise InputError(f"bordered matrix would be {size}x{size}; limit is {MAX_DET_SIZE}")
    ings = [_ingredients(e, rho, zero_potential) for e in graph.edges]
    A = np.zeros((size, size), dtype=complex if np.iscomplexobj(rho) else float)
    col = np.concatenate([[0], np.cumsum(widths)])
    row = 0
    for j, e in enumerate(graph.edges):
        if e.is_frozen:
            A[row:row + e.n, col[j]:col[j + 1]] = _continuity_rows(ings[j], e.n)
            row += e.n
    for j in range(graph.p - 1):
        A[row, col[j]:col[j + 1]] = ings[j]["pi"]
        A[row, col[j + 1]:col[j + 2]] = -ings[j + 1]["pi"]
        row += 1
    for j in range(graph.p):
        A[row, col[j]:col[j + 1]] = ings[j]["dpi"]
    return A


def _closed_form_zero(graph: GraphSpec, rho):
    d0 = np.array([phi_gamma(e.alpha, np.pi, rho) for e in graph.edges])
    d1 = np.array([phi_gamma_prime(e.alpha, np.pi, rho) for e in graph.edges])
    return product_formula(d0, d1)


def determinant_sign(graph: GraphSpec) -> float:
    """Layout sign: compare the zero-potential determinant with its closed form."""
    ref = np.linalg.det(bordered_matrix(graph, _RHO_REF, zero_potential=True))
    return float(np.sign(ref / _closed_form_zero(graph, _RHO_REF)))


def delta_graph_full_determinant(graph: GraphSpec, lam):
    rho = rho_of(lam)
    if rho.ndim:
        return np.array([delta_graph_full_determinant(graph, r**2) for r in rho.reshape(-1)]).reshape(rho.shape)
    return determinant_sign(graph) * np.linalg.det(bordered_matrix(graph, rho[()]))


def edge_block(edge: EdgeSpec, rho) -> np.ndarray:
    """``M_k``: continuity rows plus the ``y(pi)`` row; ``[z(pi)]`` for ordinary edges."""
    ing = _ingredients(edge, rho)
    if not edge.is_frozen:
        return ing["pi"][None, :]
    return np.vstack([_continuity_rows(ing, edge.n), ing["pi"]])


def block_sum_matrix(edges, lam) -> np.ndarray:
    """``M_1 (+) M^_2 (+) ... (+) M^_k``.

    Each hatted block prepends ``-(last row)`` which shares its row with the
    previous block's ``y(pi)`` row.
    """
    rho = rho_of(lam)[()]
    blocks = [edge_block(e, rho) for e in edges]
    size = sum(b.shape[1] for b in blocks)
    A = np.zeros((size, size), dtype=np.result_type(*blocks))
    r = c = 0
    for i, B in enumerate(blocks):
        nrow, ncol = B.shape
        if i > 0:
            A[r - 1, c:c + ncol] = -B[-1]
        A[r:r + nrow, c:c + ncol] = B
        r += nrow
        c += ncol
    return A


def sample(graph: GraphSpec, lam, with_determinant=False) -> GraphCharSample:
    det = delta_graph_full_determinant(graph, lam) if with_determinant else None
    return GraphCharSample(lam, delta_graph(graph, lam), det)
