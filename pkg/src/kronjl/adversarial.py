"""Sign-blind adversarial inputs: exact and empirical failure probabilities.

The construction: pick an r-dimensional subspace V_j of F_2^{n_j} per axis
and set x to the Kronecker product of normalized subspace indicators. The
Walsh-Hadamard transform maps each factor to the indicator of the
orthogonal complement, so the transformed vector is supported on N / s^d
positions (s = 2^r). Sign flips commute with the construction (flipping
signs of x yields another admissible input with the same transform support
up to signs), so an operator that misses the support entirely maps the
input to zero regardless of its sign randomness: a certain embedding
failure for any distortion below 1.

With rows drawn uniformly with replacement, the miss probability is exactly
(1 - s^{-d})^m, and 1 - t >= e^{-2t} for t <= 1/2 gives the closed lower
bound exp(-2 m / s^d) whenever s^d >= 2.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import rand
from .errors import ShapeError
from .fwht import fwht
from .gf2 import indicator, random_subspace
from .transforms import kron_materialize

__all__ = [
    "ExactFailure",
    "EmpiricalFailure",
    "failure_probability_exact",
    "failure_probability_empirical",
    "embedding_dim_threshold",
]

ZERO_TOL = 1e-12


@dataclass(frozen=True)
class ExactFailure:
    prob: float
    lower_bound: float
    s: int
    d: int
    m: int


@dataclass(frozen=True)
class EmpiricalFailure:
    estimate: float
    stderr: float
    trials: int
    failures: int
    bit_dims: tuple
    r: int
    m: int
    seed: object
    sign_witnesses: int  # sign vectors checked to factor through the family
    zero_witnesses: int  # failing trials re-checked to give |~norm^2 - 1| = 1


def failure_probability_exact(s, d, m):
    """Closed-form miss probability and its exponential lower bound."""
    if s < 1 or d < 1 or m < 0:
        raise ShapeError("need s >= 1, d >= 1, m >= 0")
    if s**d < 2:
        raise ShapeError(f"need s^d >= 2 for the bound, got s={s}, d={d}")
    prob = (1.0 - float(s) ** -d) ** m
    bound = math.exp(-2.0 * m / s**d)
    return ExactFailure(prob=prob, lower_bound=bound, s=s, d=d, m=m)


def embedding_dim_threshold(nu, p, d):
    """Smallest m the lower bound permits at failure budget nu for a
    sign-modulated family of p inputs: (1/2) log(1/nu) (log p / (d log 2))^d.
    """
    if not 0 < nu < 1 or p < 2 or d < 1:
        raise ShapeError("need 0 < nu < 1, p >= 2, d >= 1")
    return 0.5 * math.log(1.0 / nu) * (math.log(p) / (d * math.log(2.0))) ** d


def failure_probability_empirical(bit_dims, r, m, trials, seed):
    """Monte Carlo estimate of the miss probability.

    Draws the subspaces once from substream(seed, TAG_SUBSPACE, axis), then
    per-trial row samples from substream(seed, TAG_SAMPLES); a trial fails
    when every sampled entry of the transformed input is zero (|entry| <=
    1e-12). A few sign vectors are drawn to verify constructively that sign
    flips keep the input inside the adversarial family, and failing trials
    are re-checked to exhibit the embedding-failure witness.
    """
    bit_dims = tuple(int(n) for n in bit_dims)
    d = len(bit_dims)
    if d < 1 or any(n < 1 for n in bit_dims):
        raise ShapeError(f"bad bit dims {bit_dims}")
    if any(r > n for n in bit_dims):
        raise ShapeError(f"subspace dimension {r} exceeds an axis in {bit_dims}")
    if trials < 1:
        raise ShapeError("need trials >= 1")

    spaces = [
        random_subspace(n, r, rand.substream(seed, rand.TAG_SUBSPACE, j))
        for j, n in enumerate(bit_dims, start=1)
    ]
    x_factors = [indicator(v) for v in spaces]
    y_factors = [fwht(f) for f in x_factors]
    y = kron_materialize(y_factors)
    n_total = y.size

    rng = rand.substream(seed, rand.TAG_SAMPLES)
    rows0 = rng.integers(0, n_total, size=(trials, m))
    gathered = y[rows0]
    fail = np.all(np.abs(gathered) <= ZERO_TOL, axis=1)
    failures = int(fail.sum())
    est = failures / trials
    stderr = math.sqrt(est * (1.0 - est) / trials)

    # constructive witness: for sampled sign patterns xi, the flipped input
    # D_xi x factors over the axes, so x is recovered by flipping again
    x = kron_materialize(x_factors)
    wit_rng = rand.substream(seed, rand.TAG_EXPERIMENT)
    sign_witnesses = 0
    for _ in range(8):
        sign_fac = [rand.rademacher(wit_rng, 2**n) for n in bit_dims]
        xi = kron_materialize(sign_fac)
        x_hat = xi * x
        assert np.array_equal(
            x_hat, kron_materialize([s * f for s, f in zip(sign_fac, x_factors)])
        )
        assert np.array_equal(xi * x_hat, x)
        sign_witnesses += 1

    # on failing trials the rescaled sampled norm is 0, so the squared-norm
    # distortion of the unit input equals 1, beating any eps < 1
    zero_witnesses = 0
    scale2 = n_total / m
    for t in np.flatnonzero(fail)[:16]:
        norm2 = scale2 * float(np.sum(gathered[t] ** 2))
        assert abs(norm2 - 1.0) >= 1.0 - 1e-9
        zero_witnesses += 1

    return EmpiricalFailure(
        estimate=est,
        stderr=stderr,
        trials=trials,
        failures=failures,
        bit_dims=bit_dims,
        r=r,
        m=m,
        seed=seed,
        sign_witnesses=sign_witnesses,
        zero_witnesses=zero_witnesses,
    )
