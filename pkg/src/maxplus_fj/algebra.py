"""Dense (max,+) matrix algebra with ordinary addition as an external operation.

Matrices are plain float64 ``numpy`` arrays; the null element ``EPS`` is
``-inf``.  Operations never mutate their arguments.

    oplus(A, B)   entrywise max
    otimes(A, B)  (max,+) product, max_k (a_ik + b_kj)
    madd(A, B)    ordinary entrywise sum, EPS absorbing

IEEE arithmetic already makes ``-inf`` absorbing for ordinary addition, so
``madd`` needs no special casing as long as ``+inf`` and NaN never enter.
"""

from __future__ import annotations

from functools import reduce
from typing import Iterable, Sequence

import numpy as np

EPS = -np.inf

# rows per block in otimes; bounds the n^3 temporary
_BLOCK = 64


class DimensionError(ValueError):
    """Operand shapes are incompatible."""


def asmatrix(a) -> np.ndarray:
    """Convert *a* to a 2-D float matrix over R ∪ {ε}, rejecting NaN and +inf."""
    m = np.array(a, dtype=float)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if np.isnan(m).any():
        raise ValueError("NaN is not an element of the (max,+) carrier")
    if np.isposinf(m).any():
        raise ValueError("+inf is not an element of the (max,+) carrier")
    return m


def identity(n: int) -> np.ndarray:
    """E = diag(0, ..., 0) with ε off the diagonal."""
    m = np.full((n, n), EPS)
    np.fill_diagonal(m, 0.0)
    return m


def null(n: int, m: int | None = None) -> np.ndarray:
    """The all-ε matrix."""
    return np.full((n, n if m is None else m), EPS)


def zeros(n: int, m: int | None = None) -> np.ndarray:
    """All-zero matrix: the neutral element of the external addition."""
    return np.zeros((n, n if m is None else m))


def diag(values: Iterable[float]) -> np.ndarray:
    """Diagonal matrix with ε off the diagonal."""
    v = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
    m = np.full((v.size, v.size), EPS)
    np.fill_diagonal(m, v)
    return asmatrix(m)


def diagonal_of(D: np.ndarray) -> np.ndarray:
    return np.diag(D).copy()


def is_diagonal(D: np.ndarray) -> bool:
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        return False
    off = ~np.eye(D.shape[0], dtype=bool)
    return bool(np.all(D[off] == EPS))


def is_support(G: np.ndarray) -> bool:
    """True if every entry is exactly 0 or ε."""
    G = np.asarray(G, dtype=float)
    return bool(np.all((G == 0.0) | (G == EPS)))


def _same_shape(A: np.ndarray, B: np.ndarray, op: str) -> None:
    if A.shape != B.shape:
        raise DimensionError(f"{op}: shape mismatch {A.shape} vs {B.shape}")


def oplus(A, B) -> np.ndarray:
    A, B = asmatrix(A), asmatrix(B)
    _same_shape(A, B, "oplus")
    return np.maximum(A, B)


def _otimes(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    # unchecked kernel; callers guarantee shapes and carrier
    n, inner = A.shape
    if inner == 0:
        return np.full((n, B.shape[1]), EPS)
    if n <= _BLOCK:
        return (A[:, :, None] + B[None, :, :]).max(axis=1)
    out = np.empty((n, B.shape[1]))
    for s in range(0, n, _BLOCK):
        out[s:s + _BLOCK] = (A[s:s + _BLOCK, :, None] + B[None, :, :]).max(axis=1)
    return out


def otimes(A, B) -> np.ndarray:
    A, B = asmatrix(A), asmatrix(B)
    if A.shape[1] != B.shape[0]:
        raise DimensionError(f"otimes: inner dimensions differ, {A.shape} x {B.shape}")
    return _otimes(A, B)


def otimes_vec(A, x) -> np.ndarray:
    """Matrix-vector product A ⊗ x for a 1-D vector x."""
    A = asmatrix(A)
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != A.shape[1]:
        raise DimensionError(f"otimes_vec: vector of length {x.size} for matrix {A.shape}")
    if x.size == 0:
        return np.full(A.shape[0], EPS)
    return (A + x[None, :]).max(axis=1)


def madd(A, B) -> np.ndarray:
    """Ordinary entrywise sum; ε + x = ε."""
    A, B = asmatrix(A), asmatrix(B)
    _same_shape(A, B, "madd")
    return A + B


def oplus_all(mats: Iterable[np.ndarray]) -> np.ndarray:
    return reduce(np.maximum, (asmatrix(m) for m in mats))


def otimes_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    """Left-to-right product M1 ⊗ M2 ⊗ ... ⊗ Mk."""
    return reduce(otimes, mats)


def madd_all(mats: Iterable[np.ndarray]) -> np.ndarray:
    return reduce(madd, mats)


def mp_power(A, m: int) -> np.ndarray:
    A = asmatrix(A)
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"mp_power: matrix must be square, got {A.shape}")
    if m < 0:
        raise ValueError("mp_power: exponent must be nonnegative")
    out = identity(A.shape[0])
    for _ in range(m):
        out = _otimes(A, out)
    return out


def _check_square_pair(D: np.ndarray, G: np.ndarray, op: str) -> None:
    if D.shape[0] != D.shape[1] or G.shape != D.shape:
        raise DimensionError(f"{op}: orders differ, D {D.shape} vs G {G.shape}")


def phi(D, G, j: int) -> np.ndarray:
    """Φ_j(D) = D ⊗ (G ⊗ D)^j."""
    D, G = asmatrix(D), asmatrix(G)
    _check_square_pair(D, G, "phi")
    if j < 0:
        raise ValueError("phi: j must be nonnegative")
    out = D
    GD = _otimes(G, D)
    for _ in range(j):
        out = _otimes(out, GD)
    return out


def psi(G, D, i: int, j: int) -> np.ndarray:
    """Ψ_i^j(D) = G^i ⊗ D ⊗ G^j."""
    D, G = asmatrix(D), asmatrix(G)
    _check_square_pair(D, G, "psi")
    if i < 0 or j < 0:
        raise ValueError("psi: powers must be nonnegative")
    return _otimes(_otimes(mp_power(G, i), D), mp_power(G, j))


def transpose(A) -> np.ndarray:
    return asmatrix(A).T.copy()


def leq(A, B, atol: float = 0.0) -> bool:
    """Entrywise order A ≤ B, with optional slack on the right-hand side."""
    A, B = asmatrix(A), asmatrix(B)
    _same_shape(A, B, "leq")
    return bool(np.all(A <= B + atol))


def mp_equal(A, B, atol: float = 0.0) -> bool:
    """Entrywise equality; ε positions must coincide exactly."""
    A, B = asmatrix(A), asmatrix(B)
    _same_shape(A, B, "mp_equal")
    ea, eb = A == EPS, B == EPS
    if not np.array_equal(ea, eb):
        return False
    fin = ~ea
    return bool(np.all(np.abs(A[fin] - B[fin]) <= atol))


def violations(A, B, atol: float = 0.0) -> list[tuple[int, int]]:
    """Coordinates where A ≤ B fails."""
    A, B = asmatrix(A), asmatrix(B)
    _same_shape(A, B, "violations")
    return [tuple(int(v) for v in ij) for ij in np.argwhere(~(A <= B + atol))]


def norm(A) -> float:
    """Largest entry; ε for an all-ε (or empty) matrix."""
    A = np.asarray(A, dtype=float)
    return float(A.max()) if A.size else EPS


def scalar_otimes(c: float, A) -> np.ndarray:
    """c ⊗ A: add c to every entry (ε entries stay ε)."""
    A = asmatrix(A)
    c = float(c)
    if np.isnan(c) or c == np.inf:
        raise ValueError("scalar must be finite or ε")
    return A + c
