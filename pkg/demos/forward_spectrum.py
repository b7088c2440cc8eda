"""Eigenvalues of a three-edge star with one frozen edge.

Starts from the free graph (q = 0), where the roots are known in closed form,
then switches on potentials and compares the real spectrum with a second-order
finite-difference discretisation at two resolutions.
"""

import warnings

import numpy as np

from frozenstar import EdgeSpec, GraphSpec, PotentialFn, forward_spectrum, scan_real_roots
from frozenstar.fd_oracle import build_fd_matrix, fd_eigen, richardson_order

np.set_printoptions(precision=6, suppress=True)

# free star: roots at k - 1/2 and k (twice)
free = GraphSpec(tuple(EdgeSpec(PotentialFn.zero()) for _ in range(3)))
print("free star, first roots:", scan_real_roots(free, 3.2).roots)

edges = (
    EdgeSpec(PotentialFn.constant(1.0)),
    EdgeSpec(PotentialFn.from_function(lambda t: 0.5 + 0.2 * t), (1.5,)),
    EdgeSpec(PotentialFn.from_function(lambda t: 0.3 * np.sin(t) - 0.2 * np.sin(2 * t)), (1.0,)),
)
graph = GraphSpec(edges)
spec = forward_spectrum(graph, k_max=6)
print("\nbranches rho_(k,j), rows j = 0..2:")
print(spec.branches)
print("A_l:", spec.A_l)

lam = np.sort(spec.lambdas[:, :3].ravel())[:8]
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    fine, _ = fd_eigen(build_fd_matrix(graph, 2000), 8)
    coarse, _ = fd_eigen(build_fd_matrix(graph, 1000), 8)
print("\nlambda      FD N=2000   rel. dev")
for a, b in zip(lam, fine):
    print(f"{a:10.6f}  {b:10.6f}  {abs(a - b) / abs(a):.1e}")
print("observed FD order:", round(richardson_order(coarse - lam, fine - lam), 3))
