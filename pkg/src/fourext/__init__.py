"""Fourier extensions of functions on [-1, 1].

The package computes continuous, discrete (mapped Chebyshev) and equispaced
Fourier extensions, solves the associated ill-conditioned least-squares
systems by truncated SVD or in extended precision, and provides the
stability diagnostics used to study them.
"""

from .core import (COMPLEX, TRIG, AnalyticityInfo, ExtensionConfig, MappedDomain, NodeSet, adaptive_T,
                   analyticity_rate, basis_eval, basis_matrix, equispaced_nodes, fe_constant,
                   joukowski_index, map_to_z, mapped_chebyshev_nodes, node_density)
from .errors import (BranchCutError, BudgetError, ConvergenceError, DomainError, FEError,
                     IndexRangeError, PrecisionError)
from .functions import REGISTRY, get_function
from .precision import PrecisionContext
from .solver import (ExtensionSolution, FrameFunction, SvdFactorization, count_zeros, evaluate,
                     exact_extension, frame_function, l2_error, lsq_solve, solve, sup_error, svd,
                     truncated_solve)
from .systems import (GramMatrices, LinearSystem, QuadratureRule, attach_rhs, build_system,
                      continuous_rhs, gram_limit_check, norm, weighted_gram)

__version__ = "0.1.0"
