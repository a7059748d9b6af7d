"""Windowed co-occurrence counting and signal-matrix transforms.

The counts are symmetric: for every center token at position t and context
token at position t+-d (1 <= d <= window, same sentence), weight 1 (flat) or
1/d (harmonic) is added to the (center, context) cell. Out-of-vocabulary
tokens keep their positions, so d is always a textual distance, but they
contribute no counts. Windows never cross sentence boundaries.

Binary file format ("COOC0001"): little-endian u64 vocab size, u64 nnz, then
nnz records of (u32 row, u32 col, f64 weight) for the full symmetric matrix,
sorted by (row, col).
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse

from .corpus import TokenizedCorpus, Vocabulary

__all__ = [
    "CoocConfig",
    "SparseCooccurrence",
    "SignalMatrix",
    "count_cooccurrences",
    "build_shifted_ppmi",
    "build_logcount",
    "read_cooccurrence",
    "write_cooccurrence",
]

_MAGIC = b"COOC0001"
_HEADER = struct.Struct("<8sQQ")
_RECORD_DTYPE = np.dtype([("row", "<u4"), ("col", "<u4"), ("weight", "<f8")])


@dataclass(frozen=True)
class CoocConfig:
    window: int = 5
    weighting: str = "flat"  # "flat" or "harmonic"

    def __post_init__(self) -> None:
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.weighting not in ("flat", "harmonic"):
            raise ValueError(f"unknown weighting {self.weighting!r}")


@dataclass
class SparseCooccurrence:
    """Symmetric weighted co-occurrence counts over a vocabulary of size n."""

    n: int
    matrix: sparse.csr_matrix  # canonical: sorted indices, duplicates summed

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    @property
    def total_weight(self) -> float:
        return float(self.matrix.sum())

    def triplets(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(rows, cols, weights) sorted by (row, col)."""
        coo = self.matrix.tocoo()
        return coo.row, coo.col, coo.data


@dataclass
class SignalMatrix:
    """The symmetric non-negative matrix a static embedding implicitly factorizes."""

    n: int
    kind: str  # "shifted_ppmi" or "log_count"
    shift_ns: int
    values: sparse.csr_matrix


def _sentence_stream(corpus: TokenizedCorpus, vocab: Vocabulary, window: int) -> np.ndarray:
    """Concatenate sentences into one index array, -1 for out-of-vocab tokens
    and for window-sized sentence separators (so no pair spans a boundary)."""
    index = vocab.index
    pad = np.full(window, -1, dtype=np.int32)
    parts = []
    for sentence in corpus.sentences:
        if sentence:
            parts.append(
                np.fromiter((index.get(t, -1) for t in sentence), np.int32, len(sentence))
            )
        parts.append(pad)
    if not parts:
        return np.empty(0, dtype=np.int32)
    return np.concatenate(parts)


def count_cooccurrences(
    corpus: TokenizedCorpus, vocab: Vocabulary, config: CoocConfig = CoocConfig()
) -> SparseCooccurrence:
    if vocab.size == 0:
        raise ValueError("vocabulary is empty")
    n = vocab.size
    seq = _sentence_stream(corpus, vocab, config.window)
    # Directed counts (left token -> right token); symmetrized below.
    directed = sparse.csr_matrix((n, n), dtype=np.float64)
    for d in range(1, config.window + 1):
        if d >= seq.size:
            break
        left = seq[:-d]
        right = seq[d:]
        valid = (left >= 0) & (right >= 0)
        rows = left[valid]
        cols = right[valid]
        w = 1.0 if config.weighting == "flat" else 1.0 / d
        data = np.full(rows.size, w, dtype=np.float64)
        directed = directed + sparse.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    matrix = (directed + directed.T).tocsr()
    matrix.sum_duplicates()
    matrix.sort_indices()
    return SparseCooccurrence(n, matrix)


def build_shifted_ppmi(cooc: SparseCooccurrence, shift_ns: int = 1) -> SignalMatrix:
    """values(i,j) = max(0, log(w_ij * W / (r_i * c_j)) - log(shift_ns)).

    W is the total weight and r/c the marginal sums. Entries clamped to zero
    are not materialized.
    """
    if shift_ns < 1:
        raise ValueError("shift_ns must be a positive integer")
    total = cooc.total_weight
    if total <= 0:
        raise ValueError("co-occurrence matrix has zero total weight")
    coo = cooc.matrix.tocoo()
    marginals = np.asarray(cooc.matrix.sum(axis=1)).ravel()
    vals = np.log((coo.data * total) / (marginals[coo.row] * marginals[coo.col]))
    vals = vals - math.log(shift_ns)
    keep = vals > 0
    values = sparse.csr_matrix(
        (vals[keep], (coo.row[keep], coo.col[keep])), shape=(cooc.n, cooc.n)
    )
    values.sort_indices()
    return SignalMatrix(cooc.n, "shifted_ppmi", shift_ns, values)


def build_logcount(cooc: SparseCooccurrence) -> SignalMatrix:
    """values(i,j) = log(1 + w_ij) on stored entries."""
    if cooc.total_weight <= 0:
        raise ValueError("co-occurrence matrix has zero total weight")
    values = cooc.matrix.copy()
    values.data = np.log1p(values.data)
    return SignalMatrix(cooc.n, "log_count", 1, values)


def build_signal(cooc: SparseCooccurrence, kind: str, shift_ns: int = 1) -> SignalMatrix:
    if kind in ("ppmi", "shifted_ppmi"):
        return build_shifted_ppmi(cooc, shift_ns)
    if kind in ("logcount", "log_count"):
        return build_logcount(cooc)
    raise ValueError(f"unknown signal kind {kind!r}; expected 'ppmi' or 'logcount'")


def write_cooccurrence(cooc: SparseCooccurrence, path: str | Path) -> None:
    rows, cols, weights = cooc.triplets()
    records = np.empty(rows.size, dtype=_RECORD_DTYPE)
    records["row"] = rows
    records["col"] = cols
    records["weight"] = weights
    with open(path, "wb") as sink:
        sink.write(_HEADER.pack(_MAGIC, cooc.n, rows.size))
        sink.write(records.tobytes())


def read_cooccurrence(path: str | Path) -> SparseCooccurrence:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: truncated co-occurrence file")
    magic, n, nnz = _HEADER.unpack_from(data)
    if magic != _MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}; not a co-occurrence file")
    expected = _HEADER.size + nnz * _RECORD_DTYPE.itemsize
    if len(data) != expected:
        raise ValueError(f"{path}: expected {expected} bytes for {nnz} records, got {len(data)}")
    records = np.frombuffer(data, dtype=_RECORD_DTYPE, offset=_HEADER.size)
    matrix = sparse.csr_matrix(
        (records["weight"], (records["row"], records["col"])), shape=(n, n)
    )
    matrix.sum_duplicates()
    matrix.sort_indices()
    return SparseCooccurrence(int(n), matrix)
