"""Orthonormal fast Walsh-Hadamard transform.

Two interchangeable backends: a vectorized numpy butterfly, and an optional
compiled kernel (kronjl._fwht_cy) selected at import when present. Setting
the environment variable KRONJL_PURE=1 before import forces the numpy path.
Both compute the same orthonormal transform whose matrix follows the
recursion H_0 = (1), H_{k+1} = (1/sqrt2) [[H_k, H_k], [H_k, -H_k]]; the
transform is symmetric and involutive (applying it twice is the identity).
"""

import math
import os

import numpy as np

from .errors import ShapeError

try:
    from . import _fwht_cy
except ImportError:
    _fwht_cy = None

_FORCE_PURE = os.environ.get("KRONJL_PURE", "") not in ("", "0")
_USE_EXT = _fwht_cy is not None and not _FORCE_PURE

__all__ = ["fwht", "fwht_axis", "hadamard_matrix", "active_backend"]


def active_backend():
    """Name of the kernel in use: 'cython' or 'numpy'."""
    return "cython" if _USE_EXT else "numpy"


def _check_pow2(n):
    if n < 1 or n & (n - 1):
        raise ShapeError(f"transform length must be a power of two, got {n}")


def _fwht2_numpy(block):
    # block: (rows, n) float64, C-contiguous, modified in place
    n = block.shape[1]
    h = 1
    while h < n:
        v = block.reshape(-1, n // (2 * h), 2, h)
        top = v[:, :, 0, :].copy()
        bot = v[:, :, 1, :]
        v[:, :, 0, :] = top + bot
        v[:, :, 1, :] = top - bot
        h *= 2
    block *= 1.0 / math.sqrt(n)


def _fwht2(block):
    if _USE_EXT:
        _fwht_cy.fwht2(block)
    else:
        _fwht2_numpy(block)


def fwht(x):
    """Orthonormal Walsh-Hadamard transform of a 1-D vector.

    Cost O(n log n); the length must be a power of two.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeError(f"expected a 1-D vector, got shape {x.shape}")
    _check_pow2(x.shape[0])
    out = np.ascontiguousarray(x.reshape(1, -1).copy())
    _fwht2(out)
    return out[0]


def fwht_axis(a, axis):
    """Transform an nd array along one axis, batched over the rest.

    Returns a new array; the input is untouched.
    """
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[axis]
    _check_pow2(n)
    moved = np.moveaxis(a, axis, -1)
    work = np.array(moved, dtype=np.float64, order="C")  # always a fresh copy
    _fwht2(work.reshape(-1, n))
    return np.moveaxis(work, -1, axis)


def hadamard_matrix(n):
    """Materialized orthonormal transform matrix, built by the recursion.

    Independent of the butterfly kernels; used as a cross-check and for
    small dense instances.
    """
    _check_pow2(n)
    h = np.ones((1, 1))
    while h.shape[0] < n:
        h = np.block([[h, h], [h, -h]]) / math.sqrt(2.0)
    return h
