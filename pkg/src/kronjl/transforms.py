"""Kronecker fast Johnson-Lindenstrauss operators.

An operator over axis sizes (n_1, ..., n_d) with target dimension m is

    A = sqrt(N/m) * P * H * D,

where D flips signs by a Kronecker product of independent per-axis
Rademacher vectors, H is the Kronecker product of orthonormal
Walsh-Hadamard factors, and P gathers m rows drawn uniformly with
replacement (duplicates kept; m may exceed N). Vectors live in the
linearized order of kronjl.indexing: the first axis varies fastest, so a
rank-one array with factors (x_1, ..., x_d) vectorizes to the Kronecker
product with x_1 innermost.

Randomness: signs for axis l come from substream(seed, TAG_SIGNS, l); the
row sample from substream(seed, TAG_SAMPLES).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import rand
from .errors import ShapeError
from .fwht import fwht, fwht_axis, hadamard_matrix
from .indexing import KronDims, unvec_f, vec_f

__all__ = [
    "RademacherFactors",
    "SampleSet",
    "KfjltOperator",
    "GaussianOperator",
    "build_operator",
    "apply_dense",
    "apply_dense_mat",
    "apply_factored",
    "hadamard_rows",
    "kron_materialize",
    "materialize",
    "gaussian_baseline",
]


@dataclass(frozen=True)
class RademacherFactors:
    """Per-axis sign vectors; the effective sign of entry i is the product
    over axes of factors[l][i_l - 1]."""

    factors: tuple
    seed: object = None

    def __post_init__(self):
        fac = tuple(np.asarray(f, dtype=np.float64) for f in self.factors)
        for f in fac:
            if f.ndim != 1:
                raise ShapeError("each sign factor must be a 1-D vector")
            if not np.all(np.abs(f) == 1.0):
                raise ShapeError("sign factors must have +-1 entries")
        object.__setattr__(self, "factors", fac)

    def full_vector(self):
        """Signs in linearized order (length N)."""
        return kron_materialize(self.factors)


@dataclass(frozen=True)
class SampleSet:
    """Multiset of m sampled rows, 1-based positions in [N]."""

    rows: np.ndarray
    total: int
    seed: object = None

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        if rows.ndim != 1 or rows.size == 0:
            raise ShapeError("rows must be a non-empty 1-D integer array")
        if rows.min() < 1 or rows.max() > self.total:
            raise ShapeError(f"sampled rows must lie in 1..{self.total}")
        object.__setattr__(self, "rows", rows)

    @property
    def m(self):
        return self.rows.size


@dataclass(frozen=True)
class KfjltOperator:
    dims: KronDims
    signs: RademacherFactors
    samples: SampleSet
    seed: object = None

    def __post_init__(self):
        if len(self.signs.factors) != self.dims.order:
            raise ShapeError("one sign factor per axis required")
        for n, f in zip(self.dims, self.signs.factors):
            if f.size != n:
                raise ShapeError(f"sign factor length {f.size} != axis size {n}")
        if self.samples.total != self.dims.total:
            raise ShapeError("sample set ambient size does not match dims")

    @property
    def m(self):
        return self.samples.m

    @property
    def scale(self):
        return math.sqrt(self.dims.total / self.samples.m)

    def apply(self, x):
        return apply_dense(self, x)


def build_operator(dims, m, seed):
    """Draw a fresh operator: independent per-axis signs, then the row
    sample, from documented substreams of `seed`."""
    dims = dims if isinstance(dims, KronDims) else KronDims(tuple(dims))
    for n in dims:
        if n & (n - 1):
            raise ShapeError(f"axis sizes must be powers of two, got {dims.dims}")
    if m < 1:
        raise ShapeError(f"target dimension must be >= 1, got {m}")
    factors = tuple(
        rand.rademacher(rand.substream(seed, rand.TAG_SIGNS, l), n)
        for l, n in enumerate(dims, start=1)
    )
    rows = rand.substream(seed, rand.TAG_SAMPLES).integers(
        1, dims.total + 1, size=m, dtype=np.int64
    )
    return KfjltOperator(
        dims=dims,
        signs=RademacherFactors(factors, seed=seed),
        samples=SampleSet(rows, dims.total, seed=seed),
        seed=seed,
    )


def kron_materialize(factors):
    """Kronecker product in linearized order: the entry at the position of
    full index i is the product of factors[l][i_l - 1]."""
    factors = [np.asarray(f, dtype=np.float64) for f in factors]
    out = factors[0]
    for f in factors[1:]:
        # later axes vary slower: new index = (i_next - 1) * len(out) + old
        out = (f[:, None] * out[None, :]).reshape(-1)
    return out


def _sign_array(op):
    arr = np.asarray(op.signs.factors[0])
    for f in op.signs.factors[1:]:
        arr = np.multiply.outer(arr, f)
    return arr


def apply_dense(op, x):
    """Apply the operator to a length-N vector via per-axis transforms.

    Cost O(N log N + m).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size != op.dims.total:
        raise ShapeError(f"expected a vector of length {op.dims.total}")
    arr = unvec_f(x, op.dims) * _sign_array(op)
    for axis in range(op.dims.order):
        arr = fwht_axis(arr, axis)
    return op.scale * vec_f(arr)[op.samples.rows - 1]


def hadamard_rows(xs, dims):
    """Row-wise orthonormal Kronecker-Hadamard transform of a (count, N)
    matrix, N linearized with the earliest axis fastest."""
    dims = dims if isinstance(dims, KronDims) else KronDims(tuple(dims))
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[1] != dims.total:
        raise ShapeError(f"expected shape (count, {dims.total})")
    shape = dims.dims
    # row-wise Fortran reshape: C-reshape to reversed dims, then flip axes
    arr = xs.reshape((xs.shape[0],) + shape[::-1])
    arr = arr.transpose((0,) + tuple(range(len(shape), 0, -1)))
    for axis in range(dims.order):
        arr = fwht_axis(arr, axis + 1)
    return arr.transpose((0,) + tuple(range(len(shape), 0, -1))).reshape(
        xs.shape[0], -1
    )


def apply_dense_mat(op, xs):
    """Apply one operator to the rows of a (count, N) matrix in a batch."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[1] != op.dims.total:
        raise ShapeError(f"expected shape (count, {op.dims.total})")
    flat = hadamard_rows(xs * op.signs.full_vector()[None, :], op.dims)
    return op.scale * flat[:, op.samples.rows - 1]


def apply_factored(op, factors):
    """Apply the operator to a rank-one input given by per-axis factors.

    Cost O(sum_l n_l log n_l + m d): each factor is sign-flipped and
    transformed on its own axis, then sampled entries are products of
    per-axis entries.
    """
    if len(factors) != op.dims.order:
        raise ShapeError("one input factor per axis required")
    transformed = []
    for f, s, n in zip(factors, op.signs.factors, op.dims):
        f = np.asarray(f, dtype=np.float64)
        if f.shape != (n,):
            raise ShapeError(f"factor shape {f.shape} != ({n},)")
        transformed.append(fwht(f * s))
    flat0 = op.samples.rows - 1
    coords0 = np.unravel_index(flat0, op.dims.dims, order="F")
    out = np.full(op.m, op.scale)
    for y, c in zip(transformed, coords0):
        out *= y[c]
    return out


def materialize(op):
    """Dense (m, N) matrix of the operator, built from the Hadamard
    recursion rather than the butterfly kernels."""
    hs = [hadamard_matrix(n) for n in op.dims]
    h_full = hs[-1]
    for h in hs[-2::-1]:
        h_full = np.kron(h_full, h)  # earlier axes innermost (fastest)
    signs = op.signs.full_vector()
    return op.scale * h_full[op.samples.rows - 1] * signs[None, :]


@dataclass(frozen=True)
class GaussianOperator:
    """Dense i.i.d. N(0, 1/m) comparison operator with the same interface."""

    matrix: np.ndarray
    seed: object = None

    @property
    def m(self):
        return self.matrix.shape[0]

    def apply(self, x):
        return self.matrix @ np.asarray(x, dtype=np.float64)


def gaussian_baseline(m, n_total, seed):
    if m < 1 or n_total < 1:
        raise ShapeError("m and N must be >= 1")
    g = rand.substream(seed, rand.TAG_GAUSSIAN).standard_normal((m, n_total))
    return GaussianOperator(matrix=g / math.sqrt(m), seed=seed)
