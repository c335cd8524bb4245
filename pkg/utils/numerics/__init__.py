"""
Numerics Module

Dense float64 matrix helpers, seeded initialization and the
finite-difference gradient oracle.
"""

from .linalg import Matrix, as_matrix, ensure_finite, matmul, softmax, softmax_axis, sigmoid, relu
from .rng import Rng, make_rng, init_matrix
from .gradcheck import finite_diff_grad, relative_error

__all__ = [
    'Matrix',
    'as_matrix',
    'ensure_finite',
    'matmul',
    'softmax',
    'softmax_axis',
    'sigmoid',
    'relu',
    'Rng',
    'make_rng',
    'init_matrix',
    'finite_diff_grad',
    'relative_error',
]
