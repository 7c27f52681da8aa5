"""Restricted isometry constants by exhaustive support enumeration.

delta_s is the smallest delta with (1-delta)|x|^2 <= |Phi x|^2 <=
(1+delta)|x|^2 over all s-sparse x, computed exactly as the worst extreme
eigenvalue deviation of the s x s Gram blocks over all C(N, s) supports.
Enumeration cost is guarded by a budget on C(N, s).

check_submatrix_bound verifies the polarization consequence of the
(2s, delta)-property: every s x s off-Gram block (Phi* Phi - I)_{S,T} has
spectral norm at most delta, over ALL ordered support pairs |S| = |T| = s,
including overlapping and equal pairs. If the pair count exceeds the
budget the checker falls back to a seeded random sample of pairs and
reports how many were covered.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import rand
from .errors import BudgetError, ShapeError

__all__ = [
    "RipReport",
    "SubmatrixReport",
    "rip_constant",
    "check_submatrix_bound",
]

DEFAULT_BUDGET = 10_000_000
_CHUNK = 65536


@dataclass(frozen=True)
class RipReport:
    sparsity: int
    delta: float
    witness_support: tuple  # 1-based column positions attaining delta


@dataclass(frozen=True)
class SubmatrixReport:
    ok: bool
    sparsity: int
    delta: float
    worst_norm: float
    worst_pair: tuple  # (S, T) 1-based supports
    pairs_checked: int
    exhaustive: bool


def _support_array(n, s, budget):
    count = math.comb(n, s)
    if count > budget:
        raise BudgetError(
            f"C({n},{s}) = {count} supports exceed the budget {budget}"
        )
    return np.array(list(itertools.combinations(range(n), s)), dtype=np.intp)


def rip_constant(phi, s, budget=DEFAULT_BUDGET):
    """Exact restricted isometry constant of order s.

    Monotone in s; delta_1 is the largest column-norm deviation
    max_j | ||phi_j||^2 - 1 |.
    """
    phi = np.asarray(phi, dtype=np.float64)
    if phi.ndim != 2:
        raise ShapeError("expected a 2-D measurement matrix")
    n = phi.shape[1]
    if not 1 <= s <= n:
        raise ShapeError(f"need 1 <= s <= {n}, got {s}")
    supports = _support_array(n, s, budget)
    gram = phi.T @ phi
    best = -1.0
    witness = 0
    for lo in range(0, supports.shape[0], _CHUNK):
        chunk = supports[lo : lo + _CHUNK]
        blocks = gram[chunk[:, :, None], chunk[:, None, :]]
        evs = np.linalg.eigvalsh(blocks)
        dev = np.maximum(evs[:, -1] - 1.0, 1.0 - evs[:, 0])
        k = int(np.argmax(dev))
        if dev[k] > best:
            best = float(dev[k])
            witness = lo + k
    return RipReport(
        sparsity=s,
        delta=best,
        witness_support=tuple(int(c) + 1 for c in supports[witness]),
    )


def check_submatrix_bound(phi, s, delta, budget=DEFAULT_BUDGET, seed=0):
    """Check ||(Phi* Phi - I)_{S,T}||_2 <= delta over support pairs."""
    phi = np.asarray(phi, dtype=np.float64)
    n = phi.shape[1]
    if not 1 <= s <= n:
        raise ShapeError(f"need 1 <= s <= {n}, got {s}")
    supports = _support_array(n, s, budget)
    k = supports.shape[0]
    hollow = phi.T @ phi - np.eye(n)

    total_pairs = k * k
    exhaustive = total_pairs <= budget
    if exhaustive:
        left = np.repeat(np.arange(k), k)
        right = np.tile(np.arange(k), k)
    else:
        rng = rand.substream(seed, rand.TAG_EXPERIMENT)
        left = rng.integers(0, k, size=budget)
        right = rng.integers(0, k, size=budget)

    worst = -1.0
    worst_pair = (0, 0)
    checked = 0
    for lo in range(0, left.size, _CHUNK):
        li = left[lo : lo + _CHUNK]
        ri = right[lo : lo + _CHUNK]
        blocks = hollow[supports[li][:, :, None], supports[ri][:, None, :]]
        norms = np.linalg.svd(blocks, compute_uv=False)[:, 0]
        j = int(np.argmax(norms))
        if norms[j] > worst:
            worst = float(norms[j])
            worst_pair = (int(li[j]), int(ri[j]))
        checked += li.size

    tol = 1e-12 * max(1.0, abs(delta))
    return SubmatrixReport(
        ok=bool(worst <= delta + tol),
        sparsity=s,
        delta=float(delta),
        worst_norm=worst,
        worst_pair=(
            tuple(int(c) + 1 for c in supports[worst_pair[0]]),
            tuple(int(c) + 1 for c in supports[worst_pair[1]]),
        ),
        pairs_checked=checked,
        exhaustive=exhaustive,
    )
