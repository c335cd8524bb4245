"""
Dense matrix helpers.

Matrices are plain float64 numpy arrays in row-major (C) order. The helpers
here add the contract checks the rest of the pipeline relies on: shape
agreement and finiteness of every value that leaves a public operation.
"""

from __future__ import annotations
from typing import Sequence, Union
import numpy as np
from scipy.special import expit

from utils.errors import DimensionMismatch, EmptyInput, NonFiniteEvaluation

Matrix = np.ndarray

ArrayLike = Union[np.ndarray, Sequence[float], Sequence[Sequence[float]]]


def as_matrix(data: ArrayLike, name: str = "matrix") -> Matrix:
    """
    Convert input to a 2-D float64 C-contiguous array.

    Args:
        data: Nested sequence or array
        name: Label used in error messages

    Returns:
        2-D float64 array
    """
    m = np.ascontiguousarray(data, dtype=np.float64)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got {m.ndim} dimensions")
    return ensure_finite(m, name)


def ensure_finite(m: np.ndarray, name: str = "value") -> np.ndarray:
    """Raise NonFiniteEvaluation if any entry is NaN or infinite."""
    if not np.all(np.isfinite(m)):
        raise NonFiniteEvaluation(f"{name} contains non-finite values")
    return m


def matmul(a: Matrix, b: Matrix) -> Matrix:
    """
    Standard matrix product.

    Raises:
        DimensionMismatch: when a.cols != b.rows
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise DimensionMismatch("matmul expects 2-D operands")
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"Cannot multiply {a.shape} by {b.shape}")
    return ensure_finite(a @ b, "matmul result")


def softmax(v: ArrayLike) -> np.ndarray:
    """
    Numerically stable softmax of a 1-D vector.

    Raises:
        EmptyInput: when v has no elements
    """
    x = np.asarray(v, dtype=np.float64).ravel()
    if x.size == 0:
        raise EmptyInput("softmax of an empty vector")
    ensure_finite(x, "softmax input")
    return softmax_axis(x, axis=0)


def softmax_axis(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Softmax along one axis with max-subtraction; no validation."""
    shifted = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True)


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Logistic function, stable for large |x|."""
    return expit(np.asarray(x, dtype=np.float64))


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)
