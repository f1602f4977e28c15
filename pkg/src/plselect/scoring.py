"""Composite task score: prediction RMSE, trend-consistency error, and a
feature-compactness penalty, combined into a single higher-is-better total.

The trend-consistency error is the RMSE of first-order differences of the
predicted vs. true path loss sequences along each scenario's route; it is
invariant to constant offsets and penalizes missed local dips.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


class ScoringError(ValueError):
    pass


@dataclass(frozen=True)
class ScoreWeights:
    lambda_c: float = 0.3
    lambda_n: float = 0.3
    n_features: int = 10

    def __post_init__(self):
        if not np.isfinite(self.lambda_c) or self.lambda_c < 0:
            raise ScoringError("lambda_c must be finite and non-negative")
        if not np.isfinite(self.lambda_n) or self.lambda_n < 0:
            raise ScoringError("lambda_n must be finite and non-negative")


@dataclass(frozen=True)
class ScoreBreakdown:
    rmse: float
    trend_error: float
    cardinality: int
    total: float  # higher is better


def rmse(pred: Sequence[float], truth: Sequence[float]) -> float:
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise ScoringError("pred and truth must have equal length")
    if pred.size == 0:
        raise ScoringError("empty input")
    return float(np.sqrt(np.mean((pred - truth) ** 2)))


def trend_consistency_error(
    pred: Sequence[float],
    truth: Sequence[float],
    scenario_ids: Sequence[str],
    route_indices: Sequence[int],
) -> float:
    """RMSE of first-order differences along each scenario's route order.

    Consecutive pairs never cross scenario boundaries; scenarios with fewer
    than two samples are excluded.
    """
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if not (len(pred) == len(truth) == len(scenario_ids) == len(route_indices)):
        raise ScoringError("all inputs must have equal length")
    sq_errors = []
    for sid in dict.fromkeys(scenario_ids):
        idx = [i for i, s in enumerate(scenario_ids) if s == sid]
        idx.sort(key=lambda i: route_indices[i])
        if len(idx) < 2:
            continue
        dp = np.diff(pred[idx])
        dt = np.diff(truth[idx])
        sq_errors.extend(((dp - dt) ** 2).tolist())
    if not sq_errors:
        raise ScoringError("no scenario has two or more ordered samples")
    return float(np.sqrt(np.mean(sq_errors)))


def total_score(
    rmse_db: float,
    trend_error_db: float,
    mask: Sequence[int],
    weights: ScoreWeights,
) -> ScoreBreakdown:
    """Negated weighted sum of error, trend error, and normalized cardinality."""
    if rmse_db < 0 or trend_error_db < 0:
        raise ScoringError("rmse and trend error must be non-negative")
    cardinality = int(np.count_nonzero(np.asarray(mask)))
    if cardinality == 0:
        raise ScoringError("mask must select at least one feature")
    total = -(
        rmse_db
        + weights.lambda_c * trend_error_db
        + weights.lambda_n * cardinality / weights.n_features
    )
    return ScoreBreakdown(
        rmse=float(rmse_db),
        trend_error=float(trend_error_db),
        cardinality=cardinality,
        total=float(total),
    )
