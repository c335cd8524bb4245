"""
Seeded random number generation.

The pipeline draws every random number from numpy's PCG64 bit generator
wrapped in `np.random.Generator`. PCG64's output stream for a given seed is
fixed by numpy's stream-compatibility policy, so identical seeds give
identical draws on every platform.
"""

from __future__ import annotations
import numpy as np

from utils.errors import InvalidConfig
from utils.numerics.linalg import Matrix

Rng = np.random.Generator

INIT_SCHEMES = ("xavier-uniform", "zeros")


def make_rng(seed: int) -> Rng:
    """Create the pipeline's deterministic generator (PCG64) for a seed."""
    return np.random.Generator(np.random.PCG64(int(seed)))


def init_matrix(rng: Rng, rows: int, cols: int, scheme: str = "xavier-uniform") -> Matrix:
    """
    Initialize a weight matrix.

    Args:
        rng: Generator to draw from
        rows: Number of rows (fan-in)
        cols: Number of columns (fan-out)
        scheme: "xavier-uniform" (bound sqrt(6/(rows+cols))) or "zeros"

    Returns:
        rows x cols float64 matrix
    """
    if rows < 1 or cols < 1:
        raise InvalidConfig(f"Matrix dimensions must be >= 1, got {rows}x{cols}")
    if scheme == "zeros":
        return np.zeros((rows, cols), dtype=np.float64)
    if scheme == "xavier-uniform":
        bound = np.sqrt(6.0 / (rows + cols))
        return rng.uniform(-bound, bound, size=(rows, cols))
    raise InvalidConfig(f"Unknown init scheme '{scheme}', expected one of {INIT_SCHEMES}")
