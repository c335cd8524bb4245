"""
Finite-difference gradient oracle.
"""

from __future__ import annotations
from typing import Callable
import numpy as np

from utils.errors import InvalidConfig, NonFiniteEvaluation

# Floor on the denominator of the relative error so gradients that are
# zero analytically are compared on an absolute scale.
RELATIVE_ERROR_FLOOR = 1e-5


def finite_diff_grad(f: Callable[[np.ndarray], float], x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """
    Central-difference gradient of a scalar function.

    Args:
        f: Scalar function of a parameter vector (or array of any shape)
        x: Point to differentiate at; left unchanged on return
        h: Step size

    Returns:
        Array shaped like x with (f(x+h e_i) - f(x-h e_i)) / 2h per entry
    """
    if h <= 0:
        raise InvalidConfig("Finite-difference step must be positive")
    x = np.array(x, dtype=np.float64, copy=True)
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    g = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        f_plus = float(f(x))
        flat[i] = orig - h
        f_minus = float(f(x))
        flat[i] = orig
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise NonFiniteEvaluation(f"Function is not finite near coordinate {i}")
        g[i] = (f_plus - f_minus) / (2.0 * h)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = RELATIVE_ERROR_FLOOR) -> float:
    """Max over entries of |a - n| / max(|a|, |n|, floor)."""
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    if a.size == 0:
        return 0.0
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
    return float(np.max(np.abs(a - n) / denom))
