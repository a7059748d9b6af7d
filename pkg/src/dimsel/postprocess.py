"""Post-processing transforms applied to oracle matrices.

Both methods suppress the high-variance directions that frequency effects
concentrate in: ABTT removes the top principal components outright, conceptor
negation damps every direction in proportion to its variance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PostprocConfig",
    "abtt",
    "conceptor_negation",
    "apply_postprocessing",
    "resolve_abtt_components",
]


@dataclass(frozen=True)
class PostprocConfig:
    method: str = "cn"  # "abtt", "cn", or "identity"
    abtt_components: int | str = "auto"  # auto = max(1, round(k/100))
    cn_aperture: float = 2.0

    def __post_init__(self) -> None:
        if self.method not in ("abtt", "cn", "identity"):
            raise ValueError(f"unknown post-processing method {self.method!r}")
        if self.cn_aperture <= 0:
            raise ValueError("cn_aperture must be positive")
        if self.abtt_components != "auto":
            if not isinstance(self.abtt_components, int) or self.abtt_components < 1:
                raise ValueError("abtt_components must be a positive integer or 'auto'")


def resolve_abtt_components(components: int | str, k: int) -> int:
    if components == "auto":
        components = max(1, int(k / 100 + 0.5))
    if components >= k:
        raise ValueError(f"abtt needs components < k, got components={components}, k={k}")
    return components


def abtt(X: np.ndarray, components: int) -> np.ndarray:
    """All-but-the-top: mean-center the rows, then remove the projections onto
    the top ``components`` principal directions of the centered matrix."""
    X = np.asarray(X, dtype=np.float64)
    n, k = X.shape
    if n < 2:
        raise ValueError("abtt needs at least 2 rows")
    if components >= k:
        raise ValueError(f"abtt needs components < k, got components={components}, k={k}")
    centered = X - X.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    top = vt[:components]  # principal directions, rows of shape (components, k)
    return centered - (centered @ top.T) @ top


def conceptor_negation(X: np.ndarray, aperture: float = 2.0) -> np.ndarray:
    """Y = X (I - C) with C = R (R + aperture^-2 I)^-1 and R = X^T X / n.

    Equivalently Y = b X (R + b I)^-1 with b = aperture^-2, which is how it is
    computed; R + bI is symmetric positive definite for any X.
    """
    X = np.asarray(X, dtype=np.float64)
    if aperture <= 0:
        raise ValueError("aperture must be positive")
    if not np.isfinite(X).all():
        raise ValueError("conceptor negation input contains non-finite values")
    n, k = X.shape
    b = aperture**-2
    R = (X.T @ X) / n
    return b * np.linalg.solve(R + b * np.eye(k), X.T).T


def apply_postprocessing(X: np.ndarray, config: PostprocConfig) -> np.ndarray:
    if config.method == "identity":
        return X
    if config.method == "abtt":
        return abtt(X, resolve_abtt_components(config.abtt_components, X.shape[1]))
    return conceptor_negation(X, config.cn_aperture)
