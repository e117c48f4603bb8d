import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from quadmap import EscapeRegionClassifier, GreenFunctionEstimator, OrbitGrowthClassifier
from quadmap._validation import check_points
from quadmap.errors import InvalidConstants

X = np.array([[1e4, 1e4, 1], [0, 0, 0], [2, 2, 1]], dtype=complex)


def test_check_points_accepts_both_layouts():
    pts = check_points(X)
    real = np.column_stack([X.real[:, 0], X.imag[:, 0], X.real[:, 1], X.imag[:, 1],
                            X.real[:, 2], X.imag[:, 2]])
    assert check_points(real) == pts
    assert len(check_points([1, 2, 3])) == 1
    for bad in (np.zeros((2, 4)), np.zeros((2, 3, 1)), [[np.nan, 0, 0]],
                np.zeros((1, 6), dtype=complex)):
        with pytest.raises(ValueError):
            check_points(bad)


def test_params_and_clone():
    est = GreenFunctionEstimator(a=1j, b=2, tol=1e-9)
    assert est.get_params()["tol"] == 1e-9
    twin = clone(est).set_params(direction="minus")
    assert twin.direction == "minus" and est.direction == "plus"


def test_not_fitted():
    with pytest.raises(NotFittedError):
        EscapeRegionClassifier().predict(X)


def test_escape_classifier():
    est = EscapeRegionClassifier(horizon=10).fit()
    assert list(est.predict(X)) == ["InUPlus", "KPlusUpToHorizon", "InUPlus"]
    steps = est.transform(X)
    assert steps.shape == (3, 1) and steps[0, 0] == 0 and np.isnan(steps[1, 0])
    assert steps[2, 0] == 3


def test_green_estimator():
    est = GreenFunctionEstimator().fit(X)
    vals = est.predict(X)
    assert vals[0] == pytest.approx(9.2103570, abs=1e-6) and np.isnan(vals[1])
    assert est.transform(X).shape == (3, 1)
    assert est.n_features_in_ == 3
    with pytest.raises(ValueError):
        GreenFunctionEstimator(direction="up").fit().predict(X)


def test_growth_classifier():
    est = OrbitGrowthClassifier(b=2, n_jobs=2).fit()
    labels = est.predict(np.array([[0, 2, 0], [0, 0, 0]]))
    assert list(labels) == ["LinearExponential", "Bounded"]
    feats = est.transform(np.array([[0, 2, 0]]))
    assert feats[0, 0] == pytest.approx(np.log(2))


def test_invalid_constants_surface_on_fit():
    with pytest.raises(InvalidConstants):
        EscapeRegionClassifier(overrides={"epsilon": 0.9}).fit()
