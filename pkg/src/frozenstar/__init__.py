"""Forward and inverse spectral problems for Sturm-Liouville operators with
frozen arguments on a star graph."""

from .edge import delta_edge, delta_frozen_edge, delta_ordinary_edge, frozen_node_values
from .errors import (AssumptionViolation, ClassificationError, FrozenStarError, InputError,
                     NumericError, ResolutionError)
from .graph import delta_graph, delta_graph_full_determinant, delta_graph_recursive
from .inverse import InverseConfig, invert
from .kernels import KernelPair, kernel_pair, kernel_representation_check, n_kernel, w_kernel
from .potential import EdgeSpec, GraphSpec, PotentialFn
from .spectrum import (EigenSubsequences, Spectrum, extract_subsequences, fit_asymptotic_constant,
                       forward_spectrum, scan_real_roots)

__all__ = [
    "AssumptionViolation", "ClassificationError", "EdgeSpec", "EigenSubsequences",
    "FrozenStarError", "GraphSpec", "InputError", "InverseConfig", "KernelPair", "NumericError",
    "PotentialFn", "ResolutionError", "Spectrum", "delta_edge", "delta_frozen_edge",
    "delta_graph", "delta_graph_full_determinant", "delta_graph_recursive", "delta_ordinary_edge",
    "extract_subsequences", "fit_asymptotic_constant", "forward_spectrum", "frozen_node_values",
    "invert", "kernel_pair", "kernel_representation_check", "n_kernel", "scan_real_roots",
    "w_kernel",
]

__version__ = "0.1.0"
