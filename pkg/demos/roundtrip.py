"""Recover the unknown edge potential from two eigenvalue subsequences.

The forward solver produces the spectrum of a three-edge star; the two
subsequences mu0 ~ k and mu1 ~ k - 1/2 are handed to the inverse algorithm
together with the two known edges and the frozen argument of the unknown one.
The reconstruction error falls as more eigenvalues are used.
"""

import warnings

import numpy as np

from frozenstar import (EdgeSpec, EigenSubsequences, GraphSpec, InverseConfig, PotentialFn,
                        extract_subsequences, forward_spectrum, invert)


def truth(t):
    return 0.3 * np.sin(t) - 0.2 * np.sin(2 * t) + 0.1 * np.sin(3 * t) + 0.05 * np.sin(6 * t)


known = (EdgeSpec(PotentialFn.constant(1.0)),
         EdgeSpec(PotentialFn.from_function(lambda t: 0.5 + 0.2 * t), (1.5,)))
graph = GraphSpec(known + (EdgeSpec(PotentialFn.from_function(truth), (1.0,)),))
mu = extract_subsequences(forward_spectrum(graph, 80))

print(" K   rel. L2 error   recovered c_1..c_6")
for K in (10, 20, 40, 80):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = invert(known, (1.0,), EigenSubsequences(mu.mu0[:K], mu.mu1[:K]), InverseConfig(K=K))
    t = res.q_reconstructed.grid
    err = np.sqrt(np.trapezoid((res.q_reconstructed(t) - truth(t)) ** 2, t)
                  / np.trapezoid(truth(t) ** 2, t))
    print(f"{K:2d}   {err:.2e}        {np.round(res.c[:6], 4)}")

# q = sum (2 c_n / pi) sin n(pi - t) and sin n(pi - t) = (-1)^(n+1) sin nt
print("exact c_1..c_6:", np.round(np.pi / 2 * np.array([0.3, 0.2, 0.1, 0.0, 0.0, -0.05]), 4))
