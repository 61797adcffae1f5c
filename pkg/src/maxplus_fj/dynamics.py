"""Departure-epoch dynamics x(k) = A(k) ⊗ x(k-1) and the transposed product family."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import EPS, DimensionError, _otimes, asmatrix, is_diagonal
from .network import CompiledNetwork
from .service import ServiceSampler


def build_A(T, net: CompiledNetwork) -> np.ndarray:
    """Transition matrix ⊕_{j=0}^{p} (T ⊗ G^T)^j ⊗ T for one epoch."""
    T = asmatrix(T)
    if T.shape != (net.n, net.n):
        raise DimensionError(f"build_A: T has shape {T.shape}, network has {net.n} nodes")
    if not is_diagonal(T):
        raise ValueError("build_A: T must be diagonal")
    return _build_A(np.diag(T), net.support, net.p)


def _build_A(taus: np.ndarray, G: np.ndarray, p: int) -> np.ndarray:
    # T ⊗ X adds tau_i to row i; X ⊗ T adds tau_j to column j
    T = np.full(G.shape, EPS)
    np.fill_diagonal(T, taus)
    TGt = G.T + taus[:, None]
    A = term = T
    for _ in range(p):
        term = _otimes(TGt, term)
        A = np.maximum(A, term)
    return A


def epoch_matrices(net: CompiledNetwork, taus: np.ndarray) -> list[np.ndarray]:
    """A(1), ..., A(k) for the rows of a ``(k, n)`` array of service times."""
    return [_build_A(t, net.support, net.p) for t in np.atleast_2d(taus)]


def step(x, A) -> np.ndarray:
    """x' = A ⊗ x."""
    x = np.asarray(x, dtype=float)
    A = np.asarray(A, dtype=float)
    if x.ndim != 1 or x.size != A.shape[1]:
        raise DimensionError(f"step: vector of length {x.size} for matrix {A.shape}")
    return (A + x[None, :]).max(axis=1)


@dataclass
class TrajectoryResult:
    """One simulated path of the departure vector.

    ``norms[k-1]`` is ‖x(k)‖.  ``gamma_hat`` is ‖x(K)‖/K; ``gamma_offset``
    removes a constant offset by differencing over the second half of the
    path, (‖x(K)‖ - ‖x(K/2)‖) / (K - K/2).
    """

    horizon: int
    norms: np.ndarray = field(repr=False)
    final_x: np.ndarray
    gamma_hat: float
    gamma_offset: float
    product: np.ndarray | None = field(default=None, repr=False)
    half_product: np.ndarray | None = field(default=None, repr=False)

    def running_gamma(self) -> np.ndarray:
        return self.norms / np.arange(1, self.horizon + 1)


def run_trajectory(net: CompiledNetwork, sampler: ServiceSampler, horizon: int, x0=None,
                   track_product: bool = False) -> TrajectoryResult:
    """Iterate the recurrence for *horizon* epochs with fresh service times each epoch.

    With ``track_product`` the transposed product A_K^T (and A_{K/2}^T) is
    accumulated as well.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    n = net.n
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    if x.shape != (n,):
        raise DimensionError(f"x0 must have length {n}")
    if not np.all(np.isfinite(x)):
        raise ValueError("x0 must be finite")
    G = net.support
    taus = sampler.draw(horizon)
    norms = np.empty(horizon)
    half = horizon // 2
    P = half_P = None
    for k in range(horizon):
        A = _build_A(taus[k], G, net.p)
        x = (A + x[None, :]).max(axis=1)
        norms[k] = x.max()
        if track_product:
            P = A.T.copy() if P is None else _otimes(P, A.T)
            if k + 1 == half:
                half_P = P.copy()
    if horizon >= 2:
        gamma_offset = (norms[-1] - norms[half - 1]) / (horizon - half)
    else:
        gamma_offset = norms[-1]
    return TrajectoryResult(horizon, norms, x, norms[-1] / horizon, float(gamma_offset), P, half_P)


def transposed_product(As, l: int, k: int) -> np.ndarray:
    """A^T(l+1) ⊗ ... ⊗ A^T(k) from the list As = [A(1), ..., A(m)]."""
    if not 0 <= l < k <= len(As):
        raise ValueError(f"need 0 <= l < k <= {len(As)}, got l={l}, k={k}")
    P = As[l].T
    for A in As[l + 1:k]:
        P = _otimes(P, A.T)
    return P


def all_transposed_products(As) -> dict[tuple[int, int], np.ndarray]:
    """Every A_{lk}^T with 0 <= l < k <= len(As), keyed by (l, k)."""
    out = {}
    for l in range(len(As)):
        P = As[l].T
        out[l, l + 1] = P
        for k in range(l + 1, len(As)):
            P = _otimes(P, As[k].T)
            out[l, k + 1] = P
    return out


def product_family(net: CompiledNetwork, sampler: ServiceSampler, l: int, k: int) -> np.ndarray:
    """A_{lk}^T for the epochs of *sampler*'s stream, replayed from epoch 1."""
    if not 0 <= l < k:
        raise ValueError(f"product_family needs 0 <= l < k, got l={l}, k={k}")
    taus = sampler.replay().draw(k)
    return transposed_product(epoch_matrices(net, taus), l, k)
