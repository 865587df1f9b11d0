"""Least-squares baseline sharing the linear prediction form ``A @ alpha``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import TrainingExample

RIDGE = 1e-8


@dataclass(frozen=True)
class LsFit:
    alpha: np.ndarray
    residual_norm: float


def stack(data: Sequence[TrainingExample]) -> tuple[np.ndarray, np.ndarray]:
    if not data:
        raise ValueError("no training data")
    A = np.vstack([ex.features for ex in data]).astype(float)
    y = np.concatenate([ex.truth for ex in data]).astype(float)
    return A, y


def fit_least_squares(data: Sequence[TrainingExample]) -> LsFit:
    """Solve the normal equations over all stacked rows.

    Falls back to a ridge term of ``1e-8`` when the stacked features are
    rank deficient.
    """
    A, y = stack(data)
    gram = A.T @ A
    rhs = A.T @ y
    if np.linalg.matrix_rank(A) < A.shape[1]:
        gram = gram + RIDGE * np.eye(A.shape[1])
    alpha = np.linalg.solve(gram, rhs)
    return LsFit(alpha, float(np.linalg.norm(A @ alpha - y)))
