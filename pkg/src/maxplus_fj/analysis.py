"""Cycle-time estimation and the analytic bounds on it.

The cycle time γ is estimated as ‖x(K)‖/K averaged over independent
replications.  The bounds bracket the limit matrix A^T entrywise,

    E[𝒯_1]  <=  A^T  <=  E[⊕_{0<=r+s<=p} G^r ⊗ 𝒯_1 ⊗ G^s],

and γ between the norms of the two outer matrices.  The upper expectation
is exact for deterministic services and for entries that depend on one
node only; other entries are Monte Carlo estimates.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Sequence

import numpy as np

from .algebra import EPS, mp_power, norm, oplus_all, psi
from .dynamics import TrajectoryResult, run_trajectory
from .network import CompiledNetwork
from .service import BOUNDS, ServiceSampler, all_deterministic, mean_T, mean_vector

DEFAULT_REPLICATIONS = 32
DEFAULT_SAMPLES = 100_000
DEFAULT_CONFIDENCE = 0.95
_MC_CHUNK = 16_384


def network_key(net: CompiledNetwork) -> str:
    """Stable fingerprint of topology and service descriptors."""
    blob = json.dumps(net.spec.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def simulate_replications(net: CompiledNetwork, horizon: int, replications: int, seed: int,
                          x0=None, track_product: bool = False, workers: int = 1
                          ) -> list[TrajectoryResult]:
    """Independent trajectories, replication r drawing from stream r of *seed*.

    Results come back in replication order whatever the worker count.
    """
    if replications < 1:
        raise ValueError("replications must be >= 1")

    def one(r):
        sampler = ServiceSampler(net.services, seed, stream=r)
        return run_trajectory(net, sampler, horizon, x0=x0, track_product=track_product)

    return _map(one, range(replications), workers)


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return float(values.mean()), float("nan")
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(values.size))


@dataclass
class GammaEstimate:
    point: float
    stderr: float
    ci_low: float
    ci_high: float
    confidence: float
    horizon: int
    replications: int
    seed: int
    # offset-corrected estimate, (‖x(K)‖ - ‖x(K/2)‖) / (K - K/2)
    offset_point: float
    offset_stderr: float
    network_key: str = ""

    def to_dict(self) -> dict:
        return {k: _jsonable(v) for k, v in self.__dict__.items()}


def estimate_gamma(net: CompiledNetwork, horizon: int, replications: int = DEFAULT_REPLICATIONS,
                   seed: int = 0, confidence: float = DEFAULT_CONFIDENCE, x0=None, workers: int = 1,
                   runs: Sequence[TrajectoryResult] | None = None) -> GammaEstimate:
    """Mean of ‖x(K)‖/K over replications with a normal-approximation interval.

    The bias of ‖x(K)‖/K is O(1/K); ``offset_point`` removes a constant
    offset.  Pass *runs* to reuse trajectories already simulated with the
    same horizon and seed.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if not 0 < confidence < 1:
        raise ValueError("confidence must lie in (0, 1)")
    if runs is None:
        runs = simulate_replications(net, horizon, replications, seed, x0=x0, workers=workers)
    point, se = _mean_se([r.gamma_hat for r in runs])
    opoint, ose = _mean_se([r.gamma_offset for r in runs])
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    half = z * se if np.isfinite(se) else float("nan")
    return GammaEstimate(point, se, point - half, point + half, confidence, horizon, len(runs), seed,
                         opoint, ose, network_key(net))


@dataclass
class LimitMatrixEstimate:
    """Replication mean of A_K^T / K with per-entry standard errors.

    ``offset_mean`` is the offset-corrected estimate
    (A_K^T - A_{K/2}^T) / (K - K/2), which removes the constant term that
    biases A_K^T / K by O(1/K).  ``drift`` is the largest finite-entry
    change between the K and K/2 estimates, a convergence diagnostic.
    """

    mean: np.ndarray
    stderr: np.ndarray
    offset_mean: np.ndarray
    offset_stderr: np.ndarray
    half_mean: np.ndarray | None
    drift: float
    horizon: int
    replications: int


def _entrywise_mean_se(mats: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # ε entries are structural and identical across samples
    fin = np.isfinite(mats).all(axis=0)
    mean = np.full(mats.shape[1:], EPS)
    se = np.zeros(mats.shape[1:])
    mean[fin] = mats[:, fin].mean(axis=0)
    if mats.shape[0] > 1:
        se[fin] = mats[:, fin].std(axis=0, ddof=1) / np.sqrt(mats.shape[0])
    return mean, se


def _increment(P: np.ndarray, Q: np.ndarray, width: int) -> np.ndarray:
    out = np.full(P.shape, EPS)
    fin = np.isfinite(P) & np.isfinite(Q)
    out[fin] = (P[fin] - Q[fin]) / width
    return out


def estimate_limit_matrix(net: CompiledNetwork, horizon: int, replications: int = DEFAULT_REPLICATIONS,
                          seed: int = 0, workers: int = 1,
                          runs: Sequence[TrajectoryResult] | None = None) -> LimitMatrixEstimate:
    if runs is None:
        runs = simulate_replications(net, horizon, replications, seed, track_product=True, workers=workers)
    if any(r.product is None for r in runs):
        raise ValueError("runs were simulated without track_product")
    mean, se = _entrywise_mean_se(np.stack([r.product / horizon for r in runs]))
    half = horizon // 2
    if half < 1:
        return LimitMatrixEstimate(mean, se, mean, se, None, float("nan"), horizon, len(runs))
    half_mean, _ = _entrywise_mean_se(np.stack([r.half_product / half for r in runs]))
    off_mean, off_se = _entrywise_mean_se(
        np.stack([_increment(r.product, r.half_product, horizon - half) for r in runs]))
    fin = np.isfinite(mean)
    drift = float(np.max(np.abs(mean[fin] - half_mean[fin]))) if fin.any() else 0.0
    return LimitMatrixEstimate(mean, se, off_mean, off_se, half_mean, drift, horizon, len(runs))


def lower_bound_gamma(services) -> float:
    """‖E[𝒯_1]‖ = max_i E[τ_i]."""
    return float(mean_vector(services).max())


def bound_expression(T, G, p: int) -> np.ndarray:
    """⊕_{0<=r+s<=p} G^r ⊗ T ⊗ G^s, evaluated with the matrix algebra."""
    return oplus_all(psi(G, T, r, s) for r in range(p + 1) for s in range(p + 1 - r))


def bound_support(G: np.ndarray, p: int) -> np.ndarray:
    """Boolean ``mask[a, b, c]``: node c lies on some a -> b path of length <= p."""
    n = G.shape[0]
    reach = [mp_power(G, r) > EPS for r in range(p + 1)]
    mask = np.zeros((n, n, n), dtype=bool)
    for r in range(p + 1):
        for s in range(p + 1 - r):
            # reach[r][a, c] and reach[s][c, b]
            mask |= reach[r][:, None, :] & reach[s].T[None, :, :]
    return mask


def bound_samples(taus: np.ndarray, mask: np.ndarray, chunk_elems: int = 4_000_000) -> np.ndarray:
    """The bound expression for each row of *taus*, shape ``(S, n, n)``.

    Entry (a, b) is the largest service time among nodes on a -> b paths,
    which is what the (max,+) expression reduces to for a {0, ε} support.
    """
    S, n = taus.shape
    out = np.empty((S, n, n))
    step = max(1, chunk_elems // max(1, n ** 3))
    for s in range(0, S, step):
        t = taus[s:s + step]
        out[s:s + step] = np.where(mask[None], t[:, None, None, :], EPS).max(axis=-1)
    return out


@dataclass
class UpperBoundMatrix:
    mean: np.ndarray
    stderr: np.ndarray
    exact: np.ndarray  # per-entry flag
    samples: int

    @property
    def method(self) -> str:
        return "exact" if self.exact.all() else "monte-carlo"


def upper_bound_matrix(net: CompiledNetwork, samples: int = DEFAULT_SAMPLES, seed: int = 0,
                       workers: int = 1) -> UpperBoundMatrix:
    """Entrywise expectation of the upper bound expression on A^T."""
    G, p, n = net.support, net.p, net.n
    mask = bound_support(G, p)
    means = mean_vector(net.services)
    single = mask.sum(axis=-1) <= 1
    if all_deterministic(net.services):
        M = bound_expression(mean_T(net.services), G, p)
        return UpperBoundMatrix(M, np.zeros((n, n)), np.ones((n, n), dtype=bool), 0)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    # fixed chunking by stream index keeps the result independent of workers
    nchunks = -(-samples // _MC_CHUNK)
    sizes = [min(_MC_CHUNK, samples - i * _MC_CHUNK) for i in range(nchunks)]

    def chunk(i):
        sampler = ServiceSampler(net.services, seed, stream=i, purpose=BOUNDS)
        return bound_samples(sampler.draw(sizes[i]), mask)

    draws = np.concatenate(_map(chunk, range(nchunks), workers))
    mean, se = _entrywise_mean_se(draws)
    # entries fed by a single node have a closed-form mean
    exact = single.copy()
    for a, b in np.argwhere(single):
        c = np.flatnonzero(mask[a, b])
        mean[a, b] = means[c[0]] if c.size else EPS
        se[a, b] = 0.0
    return UpperBoundMatrix(mean, se, exact, samples)


def upper_bound_gamma(net: CompiledNetwork, samples: int = DEFAULT_SAMPLES, seed: int = 0,
                      workers: int = 1) -> float:
    """‖E[⊕_{0<=r+s<=p} G^r ⊗ 𝒯_1 ⊗ G^s]‖."""
    return norm(upper_bound_matrix(net, samples, seed, workers).mean)


@dataclass
class BoundsReport:
    lower: float
    upper: float
    upper_stderr: float
    lower_method: str
    upper_method: str
    samples: int
    lower_matrix: np.ndarray = field(repr=False)
    upper_matrix: np.ndarray = field(repr=False)
    upper_matrix_stderr: np.ndarray = field(repr=False)
    gamma: GammaEstimate | None = None
    # flags are None when the corresponding estimate was not supplied
    gamma_point_in_bounds: bool | None = None
    gamma_ci_meets_bounds: bool | None = None
    limit_matrix_above_lower: bool | None = None
    limit_matrix_below_upper: bool | None = None
    matrix_violations: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "upper_stderr": self.upper_stderr,
            "lower_method": self.lower_method,
            "upper_method": self.upper_method,
            "samples": self.samples,
            "lower_matrix": matrix_to_json(self.lower_matrix),
            "upper_matrix": matrix_to_json(self.upper_matrix),
            "upper_matrix_stderr": matrix_to_json(self.upper_matrix_stderr),
            "gamma_point_in_bounds": self.gamma_point_in_bounds,
            "gamma_ci_meets_bounds": self.gamma_ci_meets_bounds,
            "limit_matrix_above_lower": self.limit_matrix_above_lower,
            "limit_matrix_below_upper": self.limit_matrix_below_upper,
            "matrix_violations": self.matrix_violations,
        }


def matrix_sandwich(lower: np.ndarray, est: np.ndarray, est_se: np.ndarray, upper: np.ndarray,
                    upper_se: np.ndarray, n_se: float = 3.0) -> tuple[bool, bool, list]:
    """Check lower <= est <= upper entrywise, each side within n_se standard errors."""
    slack_lo = n_se * est_se
    slack_hi = n_se * np.sqrt(est_se ** 2 + upper_se ** 2)
    bad_lo = ~(lower <= est + slack_lo)
    bad_hi = ~(est <= upper + slack_hi)
    viol = [{"side": "lower", "entry": [int(a) + 1, int(b) + 1]} for a, b in np.argwhere(bad_lo)]
    viol += [{"side": "upper", "entry": [int(a) + 1, int(b) + 1]} for a, b in np.argwhere(bad_hi)]
    return not bad_lo.any(), not bad_hi.any(), viol


def bounds_report(net: CompiledNetwork, gamma: GammaEstimate | None = None,
                  limit: LimitMatrixEstimate | None = None, samples: int = DEFAULT_SAMPLES,
                  seed: int = 0, n_se: float = 3.0, workers: int = 1) -> BoundsReport:
    """Assemble both bounds and compare them with the supplied estimates."""
    if gamma is not None and gamma.network_key != network_key(net):
        raise ValueError("gamma estimate was computed for a different network")
    if limit is not None and limit.mean.shape != (net.n, net.n):
        raise ValueError("limit matrix does not match the network order")
    lower = lower_bound_gamma(net.services)
    ub = upper_bound_matrix(net, samples, seed, workers)
    upper = norm(ub.mean)
    upper_se = float(ub.stderr.flat[np.argmax(ub.mean)])
    if not lower <= upper + n_se * upper_se:
        raise ValueError(f"inconsistent bounds: lower {lower} > upper {upper}")
    report = BoundsReport(lower, upper, upper_se, "exact", ub.method, ub.samples,
                          mean_T(net.services), ub.mean, ub.stderr, gamma)
    if gamma is not None:
        # judged on the offset-corrected estimate; the raw ‖x(K)‖/K carries O(1/K) bias
        se = gamma.offset_stderr if np.isfinite(gamma.offset_stderr) else 0.0
        tol = n_se * upper_se
        report.gamma_point_in_bounds = bool(
            lower - n_se * se <= gamma.offset_point <= upper + tol + n_se * se)
        if np.isfinite(gamma.stderr):
            report.gamma_ci_meets_bounds = bool(gamma.ci_high >= lower and gamma.ci_low <= upper + tol)
    if limit is not None:
        lo_ok, hi_ok, viol = matrix_sandwich(report.lower_matrix, limit.offset_mean, limit.offset_stderr,
                                             ub.mean, ub.stderr, n_se)
        report.limit_matrix_above_lower = lo_ok
        report.limit_matrix_below_upper = hi_ok
        report.matrix_violations = viol
    return report


def convergence_profile(net: CompiledNetwork, horizons: Sequence[int], replications: int, seed: int,
                        workers: int = 1) -> dict[int, float]:
    """Median over replications of |‖x(2K)‖/2K - ‖x(K)‖/K| for each K.

    One trajectory of length 2·max(K) per replication serves every K.
    """
    horizons = sorted(int(k) for k in horizons)
    runs = simulate_replications(net, 2 * horizons[-1], replications, seed, workers=workers)
    out = {}
    for K in horizons:
        gaps = [abs(r.norms[2 * K - 1] / (2 * K) - r.norms[K - 1] / K) for r in runs]
        out[K] = float(np.median(gaps))
    return out


def matrix_to_json(M: np.ndarray) -> list:
    """Nested lists with ε (and NaN) written as ``null``."""
    return [[_jsonable(v) for v in row] for row in np.asarray(M, dtype=float)]


def _jsonable(v):
    if isinstance(v, (float, np.floating)):
        return float(v) if np.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v
