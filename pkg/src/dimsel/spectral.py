"""Truncated SVD of symmetric signal matrices and oracle-matrix construction.

Small problems (n <= 2000) go through an exact dense eigendecomposition; the
singular values of a symmetric matrix are the absolute eigenvalues. Larger
problems use randomized range finding: a seeded Gaussian test matrix of width
r + oversample, q power iterations with QR re-orthonormalization, then an
exact SVD of the projected problem. Column signs are fixed so each left
singular vector's largest-magnitude entry is positive.

Cache file format ("SVD00001"): little-endian u64 n, u64 r, then D as f64[r],
then U row-major f64[n*r].
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse

from .cooccurrence import SignalMatrix

__all__ = [
    "SpectralDecomposition",
    "truncated_svd",
    "oracle_matrix",
    "save_decomposition",
    "load_decomposition",
    "EXACT_MAX_N",
    "DEFAULT_OVERSAMPLE",
    "DEFAULT_POWER_ITERS",
]

EXACT_MAX_N = 2000
DEFAULT_OVERSAMPLE = 10
DEFAULT_POWER_ITERS = 6

_MAGIC = b"SVD00001"
_HEADER = struct.Struct("<8sQQ")


@dataclass
class SpectralDecomposition:
    """Top-r singular pairs of a symmetric matrix: U column-orthonormal n x r,
    D the singular values in descending order."""

    n: int
    r: int
    U: np.ndarray
    D: np.ndarray


def _as_operator(signal) -> tuple:
    """Accept a SignalMatrix, scipy sparse matrix, or dense ndarray."""
    mat = signal.values if isinstance(signal, SignalMatrix) else signal
    if sparse.issparse(mat):
        if mat.shape[0] != mat.shape[1]:
            raise ValueError(f"matrix must be square, got {mat.shape}")
        if not np.isfinite(mat.data).all():
            raise ValueError("signal matrix contains non-finite values")
        return mat, mat.shape[0]
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"matrix must be square, got {mat.shape}")
    if not np.isfinite(mat).all():
        raise ValueError("signal matrix contains non-finite values")
    return mat, mat.shape[0]


def _fix_column_signs(U: np.ndarray) -> np.ndarray:
    peaks = np.argmax(np.abs(U), axis=0)
    flip = U[peaks, np.arange(U.shape[1])] < 0
    U[:, flip] *= -1.0
    return U


def _exact_symmetric_svd(mat, r: int) -> tuple[np.ndarray, np.ndarray]:
    dense = mat.toarray() if sparse.issparse(mat) else mat
    evals, evecs = np.linalg.eigh(dense)
    order = np.argsort(-np.abs(evals), kind="stable")[:r]
    return evecs[:, order].copy(), np.abs(evals[order])


def _randomized_symmetric_svd(
    mat, r: int, seed: int, oversample: int, power_iters: int
) -> tuple[np.ndarray, np.ndarray]:
    n = mat.shape[0]
    width = min(n, r + oversample)
    rng = np.random.default_rng(seed)
    test = rng.standard_normal((n, width))
    Q, _ = np.linalg.qr(mat @ test)
    for _ in range(power_iters):
        Q, _ = np.linalg.qr(mat @ Q)
    # B = Q^T M; for symmetric M this is (M Q)^T, one more product.
    B = (mat @ Q).T
    Ub, s, _ = np.linalg.svd(B, full_matrices=False)
    return np.asarray(Q @ Ub[:, :r]), s[:r].copy()


def truncated_svd(
    signal,
    r: int,
    seed: int = 0,
    method: str = "auto",
    oversample: int = DEFAULT_OVERSAMPLE,
    power_iters: int = DEFAULT_POWER_ITERS,
) -> SpectralDecomposition:
    """Top-r singular pairs of a symmetric signal matrix.

    ``method`` is "auto" (exact for n <= 2000, randomized otherwise), "exact",
    or "randomized". Deterministic for fixed (signal, r, seed).
    """
    mat, n = _as_operator(signal)
    if not 1 <= r <= n:
        raise ValueError(f"requested rank r={r} outside [1, {n}]")
    if method not in ("auto", "exact", "randomized"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        method = "exact" if n <= EXACT_MAX_N else "randomized"
    if method == "exact":
        U, D = _exact_symmetric_svd(mat, r)
    else:
        U, D = _randomized_symmetric_svd(mat, r, seed, oversample, power_iters)
    U = _fix_column_signs(np.ascontiguousarray(U))
    return SpectralDecomposition(n, r, U, D)


def oracle_matrix(
    decomp: SpectralDecomposition, k: int, alpha_exponent: float = 0.5
) -> np.ndarray:
    """X = U[:, :k] diag(D[:k])^alpha, the training-free embedding stand-in."""
    if not 1 <= k <= decomp.r:
        raise ValueError(f"k={k} outside retained rank [1, {decomp.r}]")
    if not 0.0 <= alpha_exponent <= 1.0:
        raise ValueError(f"alpha_exponent must be in [0, 1], got {alpha_exponent}")
    return decomp.U[:, :k] * decomp.D[:k] ** alpha_exponent


def save_decomposition(decomp: SpectralDecomposition, path: str | Path) -> None:
    with open(path, "wb") as sink:
        sink.write(_HEADER.pack(_MAGIC, decomp.n, decomp.r))
        sink.write(np.ascontiguousarray(decomp.D, dtype="<f8").tobytes())
        sink.write(np.ascontiguousarray(decomp.U, dtype="<f8").tobytes())


def load_decomposition(path: str | Path) -> SpectralDecomposition:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: truncated spectrum file")
    magic, n, r = _HEADER.unpack_from(data)
    if magic != _MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}; not a spectrum file")
    expected = _HEADER.size + 8 * (r + n * r)
    if len(data) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, got {len(data)}")
    D = np.frombuffer(data, dtype="<f8", count=r, offset=_HEADER.size).copy()
    U = (
        np.frombuffer(data, dtype="<f8", count=n * r, offset=_HEADER.size + 8 * r)
        .reshape(n, r)
        .copy()
    )
    return SpectralDecomposition(int(n), int(r), U, D)
