"""Experiment layer: seeded Monte Carlo sweeps with CSV/JSON output.

Reproducibility contract: a run is a pure function of its configuration
and master seed. Every random draw comes from a named substream, and each
sweep cell draws its whole trial block up front in a fixed order (sign
factors by ascending axis, then sample rows), so chunking of the later
arithmetic can never change the bytes written. The Gaussian baseline
cannot afford whole-cell draws at large trial counts; it consumes its
stream in fixed-size blocks of GAUSSIAN_CHUNK trials instead, which keeps
the draw order independent of how the arithmetic is batched.
"""

import json
import math
import time
from dataclasses import dataclass

import numpy as np
import yaml

from . import rand
from .adversarial import (
    embedding_dim_threshold,
    failure_probability_empirical,
    failure_probability_exact,
)
from .chaos import (
    ChaosCoefficients,
    check_partition_counting,
    estimate_chaos_moments,
)
from .errors import BudgetError, ConfigError, ShapeError
from .fwht import fwht, hadamard_matrix
from .gf2 import enumerate_subspaces, indicator, orthogonal_complement
from .indexing import EMPTY, KronDims, PartialIndex, delinearize, linearize
from .rip import rip_constant
from .sparsify import check_fiber_sparsity, split
from .transforms import (
    build_operator,
    hadamard_rows,
    kron_materialize,
    materialize,
)

__all__ = [
    "CSV_HEADER",
    "FAMILIES",
    "SweepRecord",
    "PointsetReport",
    "LowerBoundRecord",
    "ScalingReport",
    "load_config",
    "merge_options",
    "jl_failure_sweep",
    "sweep_to_csv",
    "pointset_preservation",
    "pointset_to_csv",
    "lower_bound_sweep",
    "lower_bound_to_csv",
    "required_embedding_rows",
    "adversarial_joint_norm_failure",
    "required_rows_adversarial",
    "scaling_exponent_report",
    "run_report",
    "report_to_json",
    "orthonormal_stage_distortion",
    "selftest",
    "write_text",
]

CSV_HEADER = "family,d,dims,N,m,eps,trials,failures,eta_hat,stderr,seed,wall_ms"
POINTSET_HEADER = (
    "family,points,d,dims,N,m,eps,trials,joint_failures,joint_eta,"
    "joint_stderr,pair_eta,union_bound,skipped_pairs,seed,wall_ms"
)
LOWER_BOUND_HEADER = (
    "s,d,bits,r,m,exact,bound,empirical,stderr,trials,flagged,seed,wall_ms"
)
REPORT_SCHEMA = "kronjl.report.v1"

FAMILIES = ("kron", "dense", "onehot")
BASELINES = ("kfjlt", "gaussian")

# fixed block sizes; GAUSSIAN_CHUNK is part of the reproducibility contract
GAUSSIAN_CHUNK = 64
APPLY_CHUNK = 512
ROW_SCAN_CAP = 4096


# ------------------------------------------------------------- configuration


def load_config(path):
    """Read a YAML mapping of option overrides."""
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping")
    return data


def _parse_int_list(field, value):
    if isinstance(value, int):
        return (value,)
    if isinstance(value, (list, tuple)):
        items = list(value)
    else:
        items = str(value).split(",")
    try:
        out = tuple(int(v) for v in items)
    except (TypeError, ValueError):
        raise ConfigError(f"{field}: expected comma-separated integers")
    if not out or any(v <= 0 for v in out):
        raise ConfigError(f"{field}: values must be positive")
    return out


def _parse_float_list(field, value):
    if isinstance(value, (int, float)):
        return (float(value),)
    if isinstance(value, (list, tuple)):
        items = list(value)
    else:
        items = str(value).split(",")
    try:
        out = tuple(float(v) for v in items)
    except (TypeError, ValueError):
        raise ConfigError(f"{field}: expected comma-separated numbers")
    if not out or any(v <= 0 for v in out):
        raise ConfigError(f"{field}: values must be positive")
    return out


def _parse_dims(field, value):
    if isinstance(value, KronDims):
        return value
    try:
        if isinstance(value, (list, tuple)):
            dims = KronDims(tuple(int(v) for v in value))
        else:
            dims = KronDims.parse(str(value))
    except (ShapeError, ValueError) as exc:
        raise ConfigError(f"{field}: {exc}") from exc
    for n in dims:
        if n & (n - 1):
            raise ConfigError(f"{field}: axis lengths must be powers of two")
    return dims


def _parse_families(field, value):
    if isinstance(value, str):
        items = [v.strip() for v in value.split(",") if v.strip()]
    else:
        items = list(value)
    if not items:
        raise ConfigError(f"{field}: at least one family required")
    for fam in items:
        if fam not in FAMILIES:
            raise ConfigError(
                f"{field}: unknown family {fam!r}, expected one of "
                + "|".join(FAMILIES)
            )
    return tuple(items)


_FIELD_PARSERS = {
    "dims": _parse_dims,
    "m": _parse_int_list,
    "eps": _parse_float_list,
    "trials": lambda f, v: _parse_int_list(f, v)[0],
    "seed": lambda f, v: int(v),
    "out": lambda f, v: str(v),
    "family": _parse_families,
    "baseline": lambda f, v: str(v),
    "timing": lambda f, v: bool(v),
    "points": lambda f, v: int(v),
    "bits": lambda f, v: int(v),
    "r": lambda f, v: int(v),
    "d": _parse_int_list,
    "nu": lambda f, v: float(v),
    "kind": lambda f, v: str(v),
    "s": lambda f, v: int(v),
}


def merge_options(config, flags):
    """Combine a config mapping with flag overrides; flags win. Unknown
    keys and malformed values raise ConfigError naming the field."""
    merged = {}
    for source in (config, flags):
        for key, value in source.items():
            if value is None:
                continue
            if key not in _FIELD_PARSERS:
                raise ConfigError(f"unknown option {key!r}")
            merged[key] = _FIELD_PARSERS[key](key, value)
    if "baseline" in merged and merged["baseline"] not in BASELINES:
        raise ConfigError(
            f"baseline: expected {'|'.join(BASELINES)}, got "
            f"{merged['baseline']!r}"
        )
    return merged


# ------------------------------------------------------------- test vectors


def _family_vectors(family, dims, seed, count=1):
    """Unit test vectors of the named family, drawn from the vector
    substream keyed by the family's canonical position."""
    fam_idx = FAMILIES.index(family)
    rng = rand.substream(seed, rand.TAG_VECTOR, fam_idx)
    n = dims.total
    out = np.empty((count, n))
    for i in range(count):
        if family == "kron":
            factors = []
            for nl in dims:
                f = rng.standard_normal(nl)
                factors.append(f / np.linalg.norm(f))
            out[i] = kron_materialize(factors)
        elif family == "dense":
            v = rng.standard_normal(n)
            out[i] = v / np.linalg.norm(v)
        else:
            out[i] = 0.0
            out[i, int(rng.integers(0, n))] = 1.0
    return out


def orthonormal_stage_distortion(dims, x, trials, seed):
    """Squared-norm distortions of the pre-sampling stage H D_xi alone.

    The stage is orthonormal, so every value is zero up to rounding; this
    is the exact-isometry configuration reachable without subsampling.
    """
    dims = dims if isinstance(dims, KronDims) else KronDims(tuple(dims))
    x = np.asarray(x, dtype=np.float64)
    rng = rand.substream(seed, rand.TAG_EXPERIMENT, 0, 0, 0)
    signs = [rand.rademacher(rng, (trials, n)) for n in dims]
    srows = _sign_rows_from_factors(signs, 0, trials)
    w = hadamard_rows(srows * x[None, :], dims)
    return np.sum(w * w, axis=1) - float(np.dot(x, x))


def _sign_rows_from_factors(signs, lo, hi):
    out = np.ones((hi - lo, 1))
    for f in signs:
        block = f[lo:hi]
        out = (block[:, :, None] * out[:, None, :]).reshape(hi - lo, -1)
    return out


# ---------------------------------------------------------------- jl sweeps


@dataclass(frozen=True)
class SweepRecord:
    family: str
    dims: KronDims
    m: int
    eps: float
    trials: int
    failures: int
    seed: int
    wall_ms: int

    @property
    def eta_hat(self):
        return self.failures / self.trials

    @property
    def stderr(self):
        eta = self.eta_hat
        return math.sqrt(eta * (1.0 - eta) / self.trials)

    def as_row(self):
        return ",".join(
            [
                self.family,
                str(self.dims.order),
                "x".join(str(n) for n in self.dims),
                str(self.dims.total),
                str(self.m),
                str(self.eps),
                str(self.trials),
                str(self.failures),
                str(self.eta_hat),
                str(self.stderr),
                str(self.seed),
                str(self.wall_ms),
            ]
        )


def _kfjlt_cell_failures(dims, x, m, eps, trials, rng):
    """One sweep cell: fresh (signs, rows) per trial, fixed x.

    Whole-cell draws up front: per-factor signs by ascending axis, then
    the sample rows. Chunked FWHT afterwards.
    """
    n = dims.total
    signs = [rand.rademacher(rng, (trials, nl)) for nl in dims]
    rows0 = rng.integers(0, n, size=(trials, m))
    scale2 = n / m
    failures = 0
    for lo in range(0, trials, APPLY_CHUNK):
        hi = min(lo + APPLY_CHUNK, trials)
        srows = _sign_rows_from_factors(signs, lo, hi)
        w = hadamard_rows(srows * x[None, :], dims)
        g = np.take_along_axis(w, rows0[lo:hi], axis=1)
        dist = scale2 * np.sum(g * g, axis=1) - 1.0
        failures += int(np.count_nonzero(np.abs(dist) > eps))
    return failures


def _gaussian_cell_failures(x, m, eps, trials, rng):
    """Gaussian baseline cell; draws in fixed GAUSSIAN_CHUNK blocks."""
    n = x.size
    failures = 0
    done = 0
    while done < trials:
        take = min(GAUSSIAN_CHUNK, trials - done)
        g = rng.standard_normal((take, m, n))
        y = g @ x / math.sqrt(m)
        dist = np.sum(y * y, axis=1) - 1.0
        failures += int(np.count_nonzero(np.abs(dist) > eps))
        done += take
    return failures


def jl_failure_sweep(dims, m_values, eps_values, trials, seed,
                     families=FAMILIES, baseline="kfjlt", timing=False):
    """Estimate P(|‖Ax‖^2 - 1| > eps) per (family, m, eps) cell over
    fresh operator draws; one record per cell, sorted by (family, m, eps)."""
    dims = dims if isinstance(dims, KronDims) else KronDims(tuple(dims))
    if baseline not in BASELINES:
        raise ConfigError(f"baseline: unknown {baseline!r}")
    for fam in families:
        if fam not in FAMILIES:
            raise ConfigError(f"family: unknown {fam!r}")
    if trials <= 0:
        raise ConfigError("trials: must be positive")
    if any(m <= 0 for m in m_values):
        raise ConfigError("m: must be positive")
    if any(e <= 0 for e in eps_values):
        raise ConfigError("eps: must be positive")
    records = []
    for family in families:
        fam_idx = FAMILIES.index(family)
        x = _family_vectors(family, dims, seed)[0]
        for m_idx, m in enumerate(m_values):
            for e_idx, eps in enumerate(eps_values):
                rng = rand.substream(
                    seed, rand.TAG_EXPERIMENT, fam_idx, m_idx, e_idx
                )
                t0 = time.perf_counter()
                if baseline == "kfjlt":
                    failures = _kfjlt_cell_failures(
                        dims, x, m, eps, trials, rng
                    )
                else:
                    failures = _gaussian_cell_failures(x, m, eps, trials, rng)
                wall = int(round((time.perf_counter() - t0) * 1000))
                records.append(
                    SweepRecord(
                        family=family, dims=dims, m=m, eps=eps,
                        trials=trials, failures=failures, seed=seed,
                        wall_ms=wall if timing else 0,
                    )
                )
    records.sort(key=lambda r: (r.family, r.m, r.eps))
    return records


def sweep_to_csv(records):
    lines = [CSV_HEADER]
    lines += [r.as_row() for r in records]
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------- pointset


@dataclass(frozen=True)
class PointsetReport:
    family: str
    n_points: int
    dims: KronDims
    m: int
    eps: float
    trials: int
    joint_failures: int
    pair_failures: int
    valid_pairs: int
    skipped_pairs: int
    seed: int
    wall_ms: int

    @property
    def joint_eta(self):
        return self.joint_failures / self.trials

    @property
    def joint_stderr(self):
        eta = self.joint_eta
        return math.sqrt(eta * (1.0 - eta) / self.trials)

    @property
    def pair_eta(self):
        if self.valid_pairs == 0:
            return 0.0
        return self.pair_failures / (self.trials * self.valid_pairs)

    @property
    def union_bound(self):
        # the documented prediction: p (p - 1) eta_pair
        return self.n_points * (self.n_points - 1) * self.pair_eta

    def as_row(self):
        return ",".join(
            [
                self.family,
                str(self.n_points),
                str(self.dims.order),
                "x".join(str(n) for n in self.dims),
                str(self.dims.total),
                str(self.m),
                str(self.eps),
                str(self.trials),
                str(self.joint_failures),
                str(self.joint_eta),
                str(self.joint_stderr),
                str(self.pair_eta),
                str(self.union_bound),
                str(self.skipped_pairs),
                str(self.seed),
                str(self.wall_ms),
            ]
        )


def pointset_preservation(dims, n_points, m, eps, trials, seed,
                          family="kron", timing=False, _cell=(0, 0)):
    """Pairwise-distance preservation over a fixed point set.

    Per trial a fresh operator embeds all points at once; squared pair
    distances come from the embedded Gram matrix. A pair at distance zero
    cannot be distorted and is skipped (counted in skipped_pairs). The
    joint failure event is any surviving pair leaving (1 +- eps).
    """
    dims = dims if isinstance(dims, KronDims) else KronDims(tuple(dims))
    if n_points < 2:
        raise ConfigError("points: need at least 2")
    if family not in FAMILIES:
        raise ConfigError(f"family: unknown {family!r}")
    fam_idx = FAMILIES.index(family)
    pts = _family_vectors(family, dims, seed, count=n_points)
    n = dims.total

    iu = np.triu_indices(n_points, k=1)
    gram0 = pts @ pts.T
    sq = np.diag(gram0)
    d0 = sq[:, None] + sq[None, :] - 2.0 * gram0
    pair_d0 = d0[iu]
    degenerate = pair_d0 <= 1e-24
    skipped = int(np.count_nonzero(degenerate))
    valid = np.where(~degenerate)[0]
    base = pair_d0[valid]

    rng = rand.substream(
        seed, rand.TAG_EXPERIMENT, fam_idx, int(_cell[0]), int(_cell[1])
    )
    signs = [rand.rademacher(rng, (trials, nl)) for nl in dims]
    rows0 = rng.integers(0, n, size=(trials, m))
    scale2 = n / m

    t0 = time.perf_counter()
    joint = 0
    pair_fail = 0
    chunk = max(1, APPLY_CHUNK // max(1, n_points))
    for lo in range(0, trials, chunk):
        hi = min(lo + chunk, trials)
        srows = _sign_rows_from_factors(signs, lo, hi)
        z = srows[:, None, :] * pts[None, :, :]
        w = hadamard_rows(z.reshape((hi - lo) * n_points, n), dims)
        w = w.reshape(hi - lo, n_points, n)
        g = np.take_along_axis(w, rows0[lo:hi][:, None, :], axis=2)
        yg = np.matmul(g, np.transpose(g, (0, 2, 1))) * scale2
        ysq = np.diagonal(yg, axis1=1, axis2=2)
        dist = ysq[:, :, None] + ysq[:, None, :] - 2.0 * yg
        ratio = dist[:, iu[0], iu[1]][:, valid] / base[None, :]
        bad = np.abs(ratio - 1.0) > eps
        pair_fail += int(np.count_nonzero(bad))
        joint += int(np.count_nonzero(np.any(bad, axis=1)))
    wall = int(round((time.perf_counter() - t0) * 1000))
    return PointsetReport(
        family=family, n_points=n_points, dims=dims, m=m, eps=eps,
        trials=trials, joint_failures=joint, pair_failures=pair_fail,
        valid_pairs=int(valid.size), skipped_pairs=skipped, seed=seed,
        wall_ms=wall if timing else 0,
    )


def pointset_to_csv(reports):
    lines = [POINTSET_HEADER]
    lines += [r.as_row() for r in reports]
    return "\n".join(lines) + "\n"


def _scan_interpolate(eval_eta, target, trials, start_m, cap):
    """Ascending power-of-two scan of m with log-log interpolation at the
    target crossing. eval_eta(m, m_idx) returns the measured failure."""
    if not 0.0 < target < 1.0:
        raise ConfigError("target: must be in (0, 1)")
    floor = 0.5 / trials
    scan = []
    prev = None
    m = start_m
    m_idx = 0
    while m <= cap:
        eta_raw = eval_eta(m, m_idx)
        eta = max(eta_raw, floor)
        scan.append((m, eta_raw))
        if eta_raw <= target:
            if prev is None:
                return float(m), scan
            m_lo, eta_lo = prev
            t = (math.log(eta_lo) - math.log(target)) / (
                math.log(eta_lo) - math.log(eta)
            )
            log_m = math.log(m_lo) + t * (math.log(m) - math.log(m_lo))
            return float(math.exp(log_m)), scan
        prev = (m, eta)
        m *= 2
        m_idx += 1
    raise BudgetError(
        f"no row count <= {cap} reached joint failure {target}"
    )


def required_embedding_rows(dims, n_points, eps, target, trials, seed,
                            family="kron", start_m=2, cap=ROW_SCAN_CAP):
    """Smallest embedding row count whose joint pointset failure is at or
    below `target`, located by an ascending power-of-two scan with log-log
    interpolation at the crossing. Returns (m_star, scan) where scan is
    the list of (m, joint_eta) pairs examined."""

    def eval_eta(m, m_idx):
        rep = pointset_preservation(
            dims, n_points, m, eps, trials, seed, family=family,
            _cell=(m_idx, 0),
        )
        return rep.joint_eta

    return _scan_interpolate(eval_eta, target, trials, start_m, cap)


def _all_sign_kron_rows(dims):
    """All Kronecker sign vectors over the axes: (2^{sum n_l}, N), axis 1
    fastest within each row."""
    out = np.ones((1, 1))
    for n in dims:
        k = np.arange(1 << n)
        rows = ((k[:, None] >> np.arange(n)[None, :]) & 1) * 2.0 - 1.0
        out = (rows[None, :, :, None] * out[:, None, None, :]).reshape(
            out.shape[0] * rows.shape[0], rows.shape[1] * out.shape[1]
        )
    return out


def _unnormalized_wht_rows(rows):
    """In-place-style unnormalized Walsh-Hadamard transform of each row.
    Integer-valued input stays integer-valued, so downstream dyadic
    arithmetic is exact."""
    out = rows.copy()
    h = 1
    while h < out.shape[1]:
        a = out.reshape(out.shape[0], -1, 2, h)
        s = a[:, :, 0, :] + a[:, :, 1, :]
        d = a[:, :, 0, :] - a[:, :, 1, :]
        a[:, :, 0, :] = s
        a[:, :, 1, :] = d
        h *= 2
    return out


def adversarial_joint_norm_failure(r_dims, m, eps, trials, seed,
                                   _cell=0):
    """Joint norm-preservation failure over the sign-modulated flat
    Kronecker family.

    The family has one unit point per combination of per-axis sign
    patterns on axes of length 2^{r_l}: 2^{sum 2^{r_l}} points. Whatever
    signs the operator draws, one member aligns with them, and its
    transform concentrates on a 2^{-sum r_l} fraction of coordinates, so
    the scan of the sampled energy inherits the miss behavior. The
    distribution of the family's norm profile is invariant to the sign
    draw, so only the sample rows are random here.

    Energies are dyadic rationals (integer transform value squared over
    N^2) and are computed exactly, because some members sit exactly on
    the |distortion| = eps boundary and the strict inequality must not
    depend on rounding.
    """
    r_dims = tuple(int(r) for r in r_dims)
    if any(r < 1 for r in r_dims):
        raise ConfigError("r_dims: per-axis exponents must be >= 1")
    dims = KronDims(tuple(1 << r for r in r_dims))
    n = dims.total
    energy = (_unnormalized_wht_rows(_all_sign_kron_rows(dims)) / n) ** 2
    rng = rand.substream(
        seed, rand.TAG_SAMPLES, len(r_dims), sum(r_dims), int(_cell)
    )
    rows0 = rng.integers(0, n, size=(trials, m))
    scale2 = n / m
    failures = 0
    # keep the (points, chunk, m) gather around 2M floats
    chunk = max(1, 2_000_000 // (energy.shape[0] * m))
    for lo in range(0, trials, chunk):
        sums = energy[:, rows0[lo : lo + chunk]].sum(axis=2)
        dist = scale2 * sums - 1.0
        bad = np.abs(dist) > eps
        failures += int(np.count_nonzero(np.any(bad, axis=0)))
    return failures / trials


def required_rows_adversarial(r_dims, eps, target, trials, seed,
                              start_m=2, cap=ROW_SCAN_CAP):
    """Smallest row count taming the adversarial family's joint failure."""

    def eval_eta(m, m_idx):
        return adversarial_joint_norm_failure(
            r_dims, m, eps, trials, seed, _cell=m_idx
        )

    return _scan_interpolate(eval_eta, target, trials, start_m, cap)


@dataclass(frozen=True)
class ScalingReport:
    cells_d1: tuple  # (per-axis exponents, nominal point count, m*) rows
    cells_d2: tuple
    slope_d1: float
    slope_d2: float

    @property
    def slope_ratio(self):
        return self.slope_d2 / self.slope_d1


def _nominal_points(r_dims):
    return 1 << sum(1 << r for r in r_dims)


def scaling_exponent_report(seed, eps=0.75, target=0.1, trials=3000,
                            grid_d1=((1,), (2,), (3,)),
                            grid_d2=((1, 1), (1, 2), (2, 2))):
    """Fit log m* against log log p on the adversarial families and
    report the d=2 vs d=1 slope ratio (qualitative scaling check).

    p is the family's nominal point count 2^{sum 2^{r_l}}; the default
    grids realize p in {4, 16, 256} for one axis and {16, 64, 256} for
    two axes, the point counts the construction can hit exactly. The
    coarse default distortion keeps each cell dominated by the
    sampling-miss event rather than by binomial concentration noise,
    which is what the growth exponent is about.
    """
    slopes = {}
    cells = {}
    for key, grid in (("d1", grid_d1), ("d2", grid_d2)):
        rows = []
        for r_dims in grid:
            m_star, _ = required_rows_adversarial(
                r_dims, eps, target, trials, seed
            )
            rows.append((tuple(r_dims), _nominal_points(r_dims), m_star))
        cells[key] = tuple(rows)
        loglogp = [math.log(math.log(p)) for _, p, _ in rows]
        logm = [math.log(m) for _, _, m in rows]
        slopes[key] = float(np.polyfit(loglogp, logm, 1)[0])
    return ScalingReport(
        cells_d1=cells["d1"], cells_d2=cells["d2"],
        slope_d1=slopes["d1"], slope_d2=slopes["d2"],
    )


# -------------------------------------------------------------- lower bound


@dataclass(frozen=True)
class LowerBoundRecord:
    s: int
    d: int
    bits: int
    r: int
    m: int
    exact: float
    bound: float
    empirical: float
    stderr: float
    trials: int
    flagged: bool
    seed: int
    wall_ms: int

    def as_row(self):
        return ",".join(
            [
                str(self.s), str(self.d), str(self.bits), str(self.r),
                str(self.m), str(self.exact), str(self.bound),
                str(self.empirical), str(self.stderr), str(self.trials),
                str(int(self.flagged)), str(self.seed), str(self.wall_ms),
            ]
        )


def lower_bound_sweep(bits, r, d_values, m_values, trials, seed, nu=0.1,
                      timing=False):
    """Adversarial sweep: closed form, analytic lower bound, and the
    empirical frequency per (d, m); flags cells where the empirical
    failure exceeds nu while m sits below the claimed threshold."""
    if not 0.0 < nu < 1.0:
        raise ConfigError("nu: must be in (0, 1)")
    if r < 1 or r > bits:
        raise ConfigError("r: need 1 <= r <= bits")
    s = 1 << r
    records = []
    for d in d_values:
        threshold = embedding_dim_threshold(nu, 2.0 ** (d * s), d)
        for m in m_values:
            exact = failure_probability_exact(s, d, m)
            t0 = time.perf_counter()
            emp = failure_probability_empirical(
                (bits,) * d, r, m, trials, seed
            )
            wall = int(round((time.perf_counter() - t0) * 1000))
            flagged = emp.estimate > nu and m < threshold
            records.append(
                LowerBoundRecord(
                    s=s, d=d, bits=bits, r=r, m=m, exact=exact.prob,
                    bound=exact.lower_bound, empirical=emp.estimate,
                    stderr=emp.stderr, trials=trials, flagged=flagged,
                    seed=seed, wall_ms=wall if timing else 0,
                )
            )
    return records


def lower_bound_to_csv(records):
    lines = [LOWER_BOUND_HEADER]
    lines += [r.as_row() for r in records]
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ reports


def run_report(kind, seed, dims=None, m=None, s=None, trials=2000,
               d=None, phi=None):
    """Build one JSON-ready report document.

    kinds: rip (isometry constant with witness), chaos (distortion moment
    estimates at a Kronecker unit vector), partition (exhaustive counting
    inequality). `phi` overrides the measurement matrix for the chaos
    kind, used to pin degenerate cases.
    """
    if kind == "rip":
        dims = _parse_dims("dims", dims)
        if m is None or s is None:
            raise ConfigError("rip report needs dims, m, s")
        op = build_operator(dims, m=m, seed=seed)
        rep = rip_constant(materialize(op), s)
        return {
            "schema": REPORT_SCHEMA,
            "kind": "rip",
            "dims": list(dims),
            "n": dims.total,
            "m": m,
            "s": s,
            "seed": seed,
            "delta": rep.delta,
            "witness_support": list(rep.witness_support),
        }
    if kind == "chaos":
        dims = _parse_dims("dims", dims)
        if m is None:
            raise ConfigError("chaos report needs dims, m")
        if phi is None:
            phi = materialize(build_operator(dims, m=m, seed=seed))
        x = _family_vectors("kron", dims, seed)[0]
        co = ChaosCoefficients.distortion(dims, phi, x)
        profile = estimate_chaos_moments(
            co, "coupled", (2.0, 4.0), trials=trials, seed=seed
        )
        return {
            "schema": REPORT_SCHEMA,
            "kind": "chaos",
            "dims": list(dims),
            "m": m,
            "seed": seed,
            "trials": trials,
            "p_values": list(profile.p_values),
            "estimates": list(profile.estimates),
            "stderrs": list(profile.stderrs),
            "mean": profile.mean,
        }
    if kind == "partition":
        if d is None:
            raise ConfigError("partition report needs d")
        rep = check_partition_counting(d)
        return {
            "schema": REPORT_SCHEMA,
            "kind": "partition",
            "d": d,
            "checked": rep.checked,
            "violations": len(rep.violations),
            "ok": rep.ok,
        }
    raise ConfigError(f"kind: unknown report kind {kind!r}")


def report_to_json(doc):
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_text(path, text):
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc


# ----------------------------------------------------------------- selftest


def _selftest_indexing():
    dims = KronDims((4, 8, 2))
    for flat in range(1, dims.total + 1):
        idx = delinearize(dims, (1, 2, 3), flat)
        if linearize(dims, idx) != flat:
            return False, f"bijection broke at {flat}"
    if linearize(dims, EMPTY) != 1:
        return False, "empty index"
    part = PartialIndex.of({2: 5})
    if delinearize(dims, (2,), linearize(dims, part)) != part:
        return False, "partial round trip"
    return True, "dims 4x8x2 exhaustive"


def _selftest_fwht():
    for n in (2, 8, 64, 256):
        h = hadamard_matrix(n)
        if np.max(np.abs(h.T @ h - np.eye(n))) > 1e-12:
            return False, f"orthonormality at {n}"
        rng = rand.substream(0, rand.TAG_EXPERIMENT, n)
        x = rng.standard_normal(n)
        if np.max(np.abs(fwht(fwht(x)) - x)) > 1e-12 * max(
            1.0, float(np.max(np.abs(x)))
        ):
            return False, f"involution at {n}"
        if np.max(np.abs(fwht(x) - h @ x)) > 1e-12 * n:
            return False, f"matrix agreement at {n}"
    return True, "orthonormal + involution through 256"


def _selftest_duality():
    for n in (2, 3, 4):
        for v in enumerate_subspaces(n):
            got = fwht(indicator(v))
            want = indicator(orthogonal_complement(v))
            if np.max(np.abs(got - want)) > 1e-12:
                return False, f"duality n={n}"
    return True, "exhaustive n <= 4"


def _selftest_roundtrip():
    dims = KronDims((4, 2, 2))
    op = build_operator(dims, m=6, seed=9)
    phi = materialize(op)
    rng = rand.substream(9, rand.TAG_EXPERIMENT)
    from .transforms import apply_dense

    for _ in range(25):
        x = rng.standard_normal(dims.total)
        if np.max(np.abs(apply_dense(op, x) - phi @ x)) > 1e-10:
            return False, "factored/dense mismatch"
    return True, "25 dense/materialized agreements"


def _selftest_sparsify():
    rng = rand.substream(4, rand.TAG_EXPERIMENT)
    for _ in range(20):
        x = rng.standard_normal((2, 4, 2))
        sp = split(x, s=2)
        if not np.array_equal(sp.reconstruct(), x):
            return False, "reconstruction"
        if not check_fiber_sparsity(sp).ok:
            return False, "fiber bound"
    return True, "20 split/reconstruct checks"


def selftest():
    """Run the oracle suite; returns a list of (name, ok, detail)."""
    checks = [
        ("index-bijection", _selftest_indexing),
        ("fwht-identities", _selftest_fwht),
        ("subspace-duality", _selftest_duality),
        ("operator-roundtrip", _selftest_roundtrip),
        ("fiber-split", _selftest_sparsify),
    ]
    results = []
    for name, fn in checks:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((name, bool(ok), detail))
    return results
