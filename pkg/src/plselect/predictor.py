"""Pluggable path loss regressor used as the fitness oracle's learner.

The default learner is closed-form ridge regression on a linear or
quadratic monomial basis over the selected features. It is deterministic
and fast enough to sit inside the population search loop; alternative
learners can be dropped in through the same fit/predict surface.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dataset import Dataset, DatasetError
from .scoring import (
    ScoreBreakdown,
    ScoreWeights,
    rmse,
    total_score,
    trend_consistency_error,
)


class PredictorError(ValueError):
    pass


class SingularSystemError(PredictorError):
    """Normal equations are singular; use ridge_lambda > 0."""


@dataclass(frozen=True)
class PredictorConfig:
    basis: str = "quadratic"  # linear | quadratic
    ridge_lambda: float = 1.0

    def __post_init__(self):
        if self.basis not in ("linear", "quadratic"):
            raise PredictorError(f"unknown basis {self.basis!r}")
        if self.ridge_lambda < 0:
            raise PredictorError("ridge_lambda must be non-negative")


@dataclass(frozen=True)
class PredictorModel:
    mask: tuple  # binary inclusion vector the model was trained under
    weights: np.ndarray  # coefficients over the expanded basis
    intercept: float
    basis: str
    ridge_lambda: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "mask": list(self.mask),
                "weights": self.weights.tolist(),
                "intercept": self.intercept,
                "basis": self.basis,
                "ridge_lambda": self.ridge_lambda,
            }
        )


def expand_basis(X: np.ndarray, basis: str) -> np.ndarray:
    """Monomials of the selected features: degree 1, plus degree 2 terms
    (x_i * x_j, i <= j) for the quadratic basis. No constant column; the
    intercept is handled separately."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if basis == "linear":
        return X
    cols = [X]
    k = X.shape[1]
    for i in range(k):
        for j in range(i, k):
            cols.append((X[:, i] * X[:, j])[:, None])
    return np.hstack(cols)


def fit(
    X: np.ndarray,
    y: np.ndarray,
    config: PredictorConfig = PredictorConfig(),
    mask: Optional[Sequence[int]] = None,
) -> PredictorModel:
    """Closed-form ridge solution of the normal equations.

    X holds only the selected (masked) feature columns, already
    standardized. The intercept is not penalized.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if X.shape[0] < 2:
        raise PredictorError("need at least 2 training samples")
    if X.shape[1] == 0:
        raise PredictorError("mask selects no features")
    phi = expand_basis(X, config.basis)
    design = np.hstack([np.ones((phi.shape[0], 1)), phi])
    gram = design.T @ design
    reg = np.eye(gram.shape[0]) * config.ridge_lambda
    reg[0, 0] = 0.0  # leave the intercept unpenalized
    a = gram + reg
    if config.ridge_lambda == 0 and np.linalg.cond(a) > 1e12:
        raise SingularSystemError(
            "normal equations are singular; use ridge_lambda > 0"
        )
    try:
        beta = np.linalg.solve(a, design.T @ y)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(
            "normal equations are singular; use ridge_lambda > 0"
        ) from exc
    if not np.all(np.isfinite(beta)):
        raise SingularSystemError(
            "normal equations are singular; use ridge_lambda > 0"
        )
    mask_tuple = tuple(int(b) for b in mask) if mask is not None else tuple(
        [1] * X.shape[1]
    )
    return PredictorModel(
        mask=mask_tuple,
        weights=beta[1:],
        intercept=float(beta[0]),
        basis=config.basis,
        ridge_lambda=config.ridge_lambda,
    )


def predict(model: PredictorModel, X: np.ndarray) -> np.ndarray:
    """Predicted path loss for masked standardized feature rows."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    phi = expand_basis(X, model.basis)
    if phi.shape[1] != model.weights.shape[0]:
        raise PredictorError(
            f"feature dimension {X.shape[1]} does not match the model"
        )
    return phi @ model.weights + model.intercept


@dataclass(frozen=True)
class Candidate:
    mask: tuple  # binary inclusion vector
    breakdown: ScoreBreakdown

    @property
    def score(self) -> float:
        return self.breakdown.total

    @property
    def cardinality(self) -> int:
        return self.breakdown.cardinality

    def feature_indices(self) -> tuple:
        """1-based indices of the selected features."""
        return tuple(i + 1 for i, b in enumerate(self.mask) if b)


def evaluate_mask(
    mask: Sequence[int],
    ds: Dataset,
    weights: ScoreWeights = ScoreWeights(),
    config: PredictorConfig = PredictorConfig(),
) -> Candidate:
    """Train on the mask's features and score on the validation split.

    Deterministic per (mask, dataset, config): fits the learner on the
    train split restricted to the selected features, then combines the
    validation RMSE, trend-consistency error, and cardinality penalty.
    """
    mask = np.asarray(mask, dtype=int)
    if mask.sum() == 0:
        raise PredictorError("mask must select at least one feature")
    if ds.split is None or ds.standardization is None:
        raise DatasetError("dataset must be split and standardized")
    sel = mask.astype(bool)
    model = fit(
        ds.feature_matrix("train")[:, sel],
        ds.targets("train"),
        config=config,
        mask=mask,
    )
    val = ds.split_samples("val")
    X_val = np.array([s.features for s in val])[:, sel]
    y_val = np.array([s.path_loss for s in val])
    y_hat = predict(model, X_val)
    err = rmse(y_hat, y_val)
    trend = trend_consistency_error(
        y_hat,
        y_val,
        [s.scenario_id for s in val],
        [s.route_index for s in val],
    )
    breakdown = total_score(err, trend, mask, weights)
    return Candidate(mask=tuple(int(b) for b in mask), breakdown=breakdown)
