"""scikit-learn style wrappers around the point-wise operations.

``fit`` only derives and validates the region constants for ``(a, b)``;
nothing is learned from data. Inputs go through :mod:`._validation`.
"""
from __future__ import annotations

from functools import partial

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._parallel import parallel_map
from ._validation import check_direction_name, check_params, check_points
from .classify import classify_orbit
from .green import green_minus, green_plus
from .maps import BACKWARD, FORWARD
from .regions import choose_constants, region_verdict


class _QuadmapEstimator(BaseEstimator):
    def fit(self, X=None, y=None):
        self.params_ = check_params(self.a, self.b)
        self.constants_ = choose_constants(self.params_, self.overrides).validate(self.params_)
        if X is not None:
            self.n_features_in_ = np.asarray(X).shape[-1]
        return self

    def _map(self, fn, X):
        check_is_fitted(self, "constants_")
        pts = check_points(X)
        return parallel_map(partial(fn, self.params_, self.constants_), pts, self.n_jobs)


def _verdict(horizon, direction, p, c, w):
    v = region_verdict(p, c, w, horizon, direction)
    return v.kind.value, (float(v.step) if v.escaped else np.nan)


class EscapeRegionClassifier(_QuadmapEstimator):
    """Labels each point InUPlus / KPlusUpToHorizon (or the backward pair).

    ``transform`` gives the escape step, NaN when no escape within ``horizon``.
    """

    def __init__(self, a=1.0, b=1.0, horizon=200, direction=FORWARD, overrides=None,
                 n_jobs=None):
        self.a = a
        self.b = b
        self.horizon = horizon
        self.direction = direction
        self.overrides = overrides
        self.n_jobs = n_jobs

    def _run(self, X):
        check_direction_name(self.direction, (FORWARD, BACKWARD))
        return self._map(partial(_verdict, self.horizon, self.direction), X)

    def predict(self, X):
        return np.array([k for k, _ in self._run(X)], dtype=object)

    def transform(self, X):
        return np.array([[s] for _, s in self._run(X)], dtype=float)


def _green(kind, tol, horizon, p, c, w):
    g = (green_plus if kind == "plus" else green_minus)(p, c, w, tol, horizon)
    return g.value if g.converged else np.nan


class GreenFunctionEstimator(_QuadmapEstimator):
    """G+ (``direction="plus"``) or G- per point; NaN where unresolved."""

    def __init__(self, a=1.0, b=1.0, direction="plus", tol=1e-8, horizon=1000,
                 overrides=None, n_jobs=None):
        self.a = a
        self.b = b
        self.direction = direction
        self.tol = tol
        self.horizon = horizon
        self.overrides = overrides
        self.n_jobs = n_jobs

    def predict(self, X):
        check_direction_name(self.direction, ("plus", "minus"))
        return np.array(self._map(partial(_green, self.direction, self.tol, self.horizon),
                                  X), dtype=float)

    def transform(self, X):
        return self.predict(X).reshape(-1, 1)


def _growth(horizon, direction, p, c, w):
    r = classify_orbit(p, c, w, horizon, direction)
    return r.label, r.value, r.quality


class OrbitGrowthClassifier(_QuadmapEstimator):
    """Growth class of each orbit; ``transform`` gives ``(value, fit quality)``."""

    def __init__(self, a=1.0, b=1.0, horizon=60, direction=FORWARD, overrides=None,
                 n_jobs=None):
        self.a = a
        self.b = b
        self.horizon = horizon
        self.direction = direction
        self.overrides = overrides
        self.n_jobs = n_jobs

    def _run(self, X):
        check_direction_name(self.direction, (FORWARD, BACKWARD))
        return self._map(partial(_growth, self.horizon, self.direction), X)

    def predict(self, X):
        return np.array([r[0] for r in self._run(X)], dtype=object)

    def transform(self, X):
        return np.array([[r[1], r[2]] for r in self._run(X)], dtype=float)
