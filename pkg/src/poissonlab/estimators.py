"""scikit-learn style wrapper for estimating a constant event rate."""
from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .dist_core import PoissonParams, poisson_logpmf
from .process_sim import rate_estimate


class PoissonRateEstimator(RegressorMixin, BaseEstimator):
    """Pooled rate ``sum(counts) / sum(extents)`` with Poisson predictions.

    ``X`` holds one column of observation extents t_i, ``y`` the event counts
    x_i seen in each window. ``predict`` returns expected counts rate * t.

    Parameters
    ----------
    min_rate : float
        Floor applied to the fitted rate so that log-likelihoods stay finite
        when every window is empty.
    """

    def __init__(self, min_rate: float = 1e-12):
        self.min_rate = min_rate

    def _extents(self, X):
        X = check_array(X, ensure_2d=False, dtype=float)
        X = X.reshape(-1, 1) if X.ndim == 1 else X
        if X.shape[1] != 1:
            raise ValueError(f"X must have exactly one column of extents, got {X.shape[1]}")
        if np.any(X <= 0):
            raise ValueError("extents must be positive")
        return X[:, 0]

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_2d=False, dtype=float, y_numeric=True)
        t = self._extents(X)
        if np.any(y < 0) or np.any(y != np.round(y)):
            raise ValueError("counts must be non-negative integers")
        est = rate_estimate(list(zip(y.astype(int).tolist(), t.tolist())))
        self.ratios_ = np.asarray(est.ratios)
        self.rate_ = max(est.pooled, self.min_rate)
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "rate_")
        return self.rate_ * self._extents(X)

    def log_likelihood(self, X, y) -> float:
        check_is_fitted(self, "rate_")
        mu = self.predict(X)
        y = np.asarray(y)
        return math.fsum(poisson_logpmf(int(c), PoissonParams(m)) for c, m in zip(y, mu))

    def score(self, X, y, sample_weight=None):
        """Mean Poisson log-likelihood per window (higher is better)."""
        return self.log_likelihood(X, y) / len(y)
