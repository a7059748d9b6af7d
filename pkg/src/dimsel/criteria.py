"""Distance criteria over oracle-matrix pairs and the dimension-selection sweep.

All criteria compare the Gram matrices X X^T and X^ X^^T of two oracle
matrices built from independent corpus halves:

  d_r  = ||XX^T - X^X^^T||_F^2 / (||XX^T||_F ||X^X^^T||_F)
  d_p  = d_r applied after a post-processing function F transforms both sides
  MPD  = sqrt(d_r * d_p)
  PIP  = ||XX^T - X^X^^T||_F

Nothing here materializes an n x n matrix: with G_A = A^T A, G_B = B^T B and
G_AB = A^T B,

  ||AA^T - BB^T||_F^2 = ||G_A||_F^2 + ||G_B||_F^2 - 2 ||G_AB||_F^2.

The sweep goes one step further: oracle matrices are U[:, :k] diag(D[:k]^a)
with column-orthonormal U, so their own Gram is diag(D^2a) and the cross Gram
is a windowed slice of U_a^T U_b, computed once for the whole grid. Post
processing is folded into these k x k Grams as well (conceptor negation is a
diagonal rescaling there; ABTT a k x k projection), so a full sweep costs one
n x k_max x k_max product plus O(k^3) per grid point. Every sweep records all
four criterion curves; timing_ms reports, per criterion, the wall time a sweep
computing only that criterion would have spent (shared work counted in each).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .postprocess import PostprocConfig, apply_postprocessing, resolve_abtt_components
from .spectral import SpectralDecomposition

__all__ = [
    "Grid",
    "TraceRow",
    "CriterionTrace",
    "SelectionReport",
    "CRITERIA",
    "cross_gram_frobenius",
    "primitive_relative_distance",
    "post_relative_distance",
    "mixed_product_distance",
    "pip_loss",
    "sweep_and_select",
]

CRITERIA = ("mpd", "pip", "prim_d", "post_d")
_CRITERION_ATTR = {"mpd": "mpd", "pip": "pip", "prim_d": "d_r", "post_d": "d_p"}


@dataclass(frozen=True)
class Grid:
    k_min: int
    k_max: int
    step: int = 1

    def __post_init__(self) -> None:
        if self.k_min < 1 or self.step < 1:
            raise ValueError(f"grid needs k_min >= 1 and step >= 1, got {self}")
        if self.k_max < self.k_min:
            raise ValueError(f"empty grid: k_min={self.k_min} > k_max={self.k_max}")

    def ks(self) -> list[int]:
        return list(range(self.k_min, self.k_max + 1, self.step))


@dataclass(frozen=True)
class TraceRow:
    k: int
    d_r: float
    d_p: float
    mpd: float
    pip: float


@dataclass
class CriterionTrace:
    grid: list[int]
    rows: list[TraceRow]
    timing_ms: dict[str, float]


@dataclass
class SelectionReport:
    selected_k: int
    criterion: str
    postproc: PostprocConfig
    alpha_exponent: float
    grid: Grid
    seed: int
    trace: CriterionTrace
    metadata: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        out = dict(self.metadata)
        out.update(
            {
                "alpha_exponent": self.alpha_exponent,
                "criterion": self.criterion,
                "postproc": {
                    "method": self.postproc.method,
                    "abtt_components": self.postproc.abtt_components,
                    "cn_aperture": self.postproc.cn_aperture,
                },
                "grid": {"min": self.grid.k_min, "max": self.grid.k_max, "step": self.grid.step},
                "seed": self.seed,
                "selected_k": self.selected_k,
                "timing_ms": {key: self.trace.timing_ms[key] for key in ("d_r", "d_p", "mpd", "pip")},
                "trace": [
                    {"k": r.k, "d_r": r.d_r, "d_p": r.d_p, "mpd": r.mpd, "pip": r.pip}
                    for r in self.trace.rows
                ],
            }
        )
        return out


def cross_gram_frobenius(A: np.ndarray, B: np.ndarray) -> tuple[float, float, float]:
    """(||AA^T - BB^T||_F^2, ||AA^T||_F, ||BB^T||_F) via k-sized Gram identities."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim != 2 or B.ndim != 2 or A.shape[0] != B.shape[0]:
        raise ValueError(f"row counts must match, got {A.shape} and {B.shape}")
    gram_a = A.T @ A
    gram_b = B.T @ B
    cross = A.T @ B
    sq_a = float(np.vdot(gram_a, gram_a))
    sq_b = float(np.vdot(gram_b, gram_b))
    sq_cross = float(np.vdot(cross, cross))
    numerator = max(sq_a + sq_b - 2.0 * sq_cross, 0.0)
    return numerator, math.sqrt(sq_a), math.sqrt(sq_b)


def primitive_relative_distance(X: np.ndarray, X_hat: np.ndarray) -> float:
    numerator, norm_a, norm_b = cross_gram_frobenius(X, X_hat)
    if norm_a == 0.0 or norm_b == 0.0:
        raise ValueError("oracle matrix is all-zero; spectrum is degenerate")
    return numerator / (norm_a * norm_b)


def post_relative_distance(
    X: np.ndarray, X_hat: np.ndarray, config: PostprocConfig = PostprocConfig()
) -> float:
    Y = apply_postprocessing(X, config)
    Y_hat = apply_postprocessing(X_hat, config)
    numerator, norm_a, norm_b = cross_gram_frobenius(Y, Y_hat)
    if norm_a == 0.0 or norm_b == 0.0:
        raise ValueError(f"post-processing {config.method!r} produced an all-zero matrix")
    return numerator / (norm_a * norm_b)


def mixed_product_distance(d_r: float, d_p: float) -> float:
    if d_r < 0 or d_p < 0:
        raise ValueError(f"distances must be non-negative, got ({d_r}, {d_p})")
    return math.sqrt(d_r * d_p)


def pip_loss(X: np.ndarray, X_hat: np.ndarray) -> float:
    if X.shape[0] != X_hat.shape[0]:
        raise ValueError(f"row counts must match, got {X.shape} and {X_hat.shape}")
    numerator, _, _ = cross_gram_frobenius(X, X_hat)
    return math.sqrt(numerator)


def _ratio_from_squares(sq_a: float, sq_b: float, sq_cross: float, what: str) -> float:
    norm_a = math.sqrt(sq_a)
    norm_b = math.sqrt(sq_b)
    if norm_a == 0.0 or norm_b == 0.0:
        raise ValueError(f"{what} is all-zero; spectrum is degenerate")
    return max(sq_a + sq_b - 2.0 * sq_cross, 0.0) / (norm_a * norm_b)


def _cn_gram_distance(
    a2: np.ndarray, b2: np.ndarray, cross: np.ndarray, n_rows: int, aperture: float
) -> float:
    # Conceptor negation maps X -> X W with W = b (X^T X / n + b I)^{-1}.
    # For oracle matrices X^T X = diag(a2), so W is diagonal and the
    # post-processed Grams are rescalings of the primitive ones.
    b = aperture**-2
    wa = b / (a2 / n_rows + b)
    wb = b / (b2 / n_rows + b)
    ga = a2 * wa * wa
    gb = b2 * wb * wb
    cc = (wa[:, None] * cross) * wb[None, :]
    return _ratio_from_squares(
        float(np.dot(ga, ga)),
        float(np.dot(gb, gb)),
        float(np.vdot(cc, cc)),
        "conceptor-negated oracle matrix",
    )


def _abtt_projector(gram_c: np.ndarray, n_rows: int, components: int) -> np.ndarray:
    # gram_c = (X - 1 mu^T)^T (X - 1 mu^T); its eigenvectors are the principal
    # directions of the centered matrix.
    _, evecs = np.linalg.eigh(gram_c / n_rows)
    top = evecs[:, -components:]
    return np.eye(gram_c.shape[0]) - top @ top.T


def _abtt_gram_distance(
    a2: np.ndarray,
    b2: np.ndarray,
    cross: np.ndarray,
    mu_a: np.ndarray,
    mu_b: np.ndarray,
    n_rows: int,
    components: int,
) -> float:
    ga_c = np.diag(a2) - n_rows * np.outer(mu_a, mu_a)
    gb_c = np.diag(b2) - n_rows * np.outer(mu_b, mu_b)
    proj_a = _abtt_projector(ga_c, n_rows, components)
    proj_b = _abtt_projector(gb_c, n_rows, components)
    ga = proj_a @ ga_c @ proj_a
    gb = proj_b @ gb_c @ proj_b
    cc = proj_a @ (cross - n_rows * np.outer(mu_a, mu_b)) @ proj_b
    return _ratio_from_squares(
        float(np.vdot(ga, ga)),
        float(np.vdot(gb, gb)),
        float(np.vdot(cc, cc)),
        "abtt-processed oracle matrix",
    )


def sweep_and_select(
    decomp_a: SpectralDecomposition,
    decomp_b: SpectralDecomposition,
    grid: Grid,
    alpha_exponent: float = 0.5,
    criterion: str = "mpd",
    config: PostprocConfig = PostprocConfig(),
    seed: int = 0,
) -> SelectionReport:
    """Evaluate d_r, d_p, MPD and PIP on every grid k and select the argmin of
    the chosen criterion (ties resolved to the smallest k).

    timing_ms attributes shared work (the cross-factor product and per-k Gram
    assembly) to every criterion, so each entry estimates a single-criterion
    sweep; the mpd entry includes the d_r and d_p work it depends on.
    """
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}; expected one of {CRITERIA}")
    if not 0.0 <= alpha_exponent <= 1.0:
        raise ValueError(f"alpha_exponent must be in [0, 1], got {alpha_exponent}")
    if decomp_a.n != decomp_b.n:
        raise ValueError(f"decompositions disagree on n: {decomp_a.n} vs {decomp_b.n}")
    ks = grid.ks()
    k_max = ks[-1]
    rank = min(decomp_a.r, decomp_b.r)
    if k_max > rank:
        raise ValueError(
            f"k_max={k_max} exceeds retained rank {rank}; recompute the decompositions "
            f"with r >= {k_max}"
        )
    n_rows = decomp_a.n
    clock = time.perf_counter

    t0 = clock()
    ua = np.ascontiguousarray(decomp_a.U[:, :k_max])
    ub = np.ascontiguousarray(decomp_b.U[:, :k_max])
    omega = ua.T @ ub  # cross Grams for every k are windows of this
    colsum_a = ua.sum(axis=0)
    colsum_b = ub.sum(axis=0)
    shared = clock() - t0
    own = {"d_r": 0.0, "d_p": 0.0, "mpd": 0.0, "pip": 0.0}

    rows: list[TraceRow] = []
    for k in ks:
        t0 = clock()
        la = decomp_a.D[:k] ** alpha_exponent
        lb = decomp_b.D[:k] ** alpha_exponent
        a2 = la * la
        b2 = lb * lb
        cross = (la[:, None] * omega[:k, :k]) * lb[None, :]
        sq_a = float(np.dot(a2, a2))
        sq_b = float(np.dot(b2, b2))
        sq_cross = float(np.vdot(cross, cross))
        numerator = max(sq_a + sq_b - 2.0 * sq_cross, 0.0)
        shared += clock() - t0

        t0 = clock()
        norm_a = math.sqrt(sq_a)
        norm_b = math.sqrt(sq_b)
        if norm_a == 0.0 or norm_b == 0.0:
            raise ValueError(f"oracle matrix at k={k} is all-zero; spectrum is degenerate")
        d_r = numerator / (norm_a * norm_b)
        own["d_r"] += clock() - t0

        t0 = clock()
        pip = math.sqrt(numerator)
        own["pip"] += clock() - t0

        t0 = clock()
        if config.method == "identity":
            d_p = d_r
        elif config.method == "cn":
            d_p = _cn_gram_distance(a2, b2, cross, n_rows, config.cn_aperture)
        else:
            components = resolve_abtt_components(config.abtt_components, k)
            mu_a = la * colsum_a[:k] / n_rows
            mu_b = lb * colsum_b[:k] / n_rows
            d_p = _abtt_gram_distance(a2, b2, cross, mu_a, mu_b, n_rows, components)
        own["d_p"] += clock() - t0

        t0 = clock()
        mpd = math.sqrt(d_r * d_p)
        own["mpd"] += clock() - t0
        rows.append(TraceRow(k, d_r, d_p, mpd, pip))

    timing_ms = {
        "d_r": 1e3 * (shared + own["d_r"]),
        "pip": 1e3 * (shared + own["pip"]),
        "d_p": 1e3 * (shared + own["d_p"]),
        "mpd": 1e3 * (shared + own["d_r"] + own["d_p"] + own["mpd"]),
    }
    attr = _CRITERION_ATTR[criterion]
    best = min(rows, key=lambda row: (getattr(row, attr), row.k))
    trace = CriterionTrace(ks, rows, timing_ms)
    return SelectionReport(
        selected_k=best.k,
        criterion=criterion,
        postproc=config,
        alpha_exponent=alpha_exponent,
        grid=grid,
        seed=seed,
        trace=trace,
    )
