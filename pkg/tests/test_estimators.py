import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from birkhoff_spectra import BirkhoffSpectrumEstimator


def test_params_roundtrip_and_clone():
    est = BirkhoffSpectrumEstimator(family="f_lambda", lam=0.3, k=12)
    params = est.get_params()
    assert params["lam"] == 0.3 and params["k"] == 12
    c = clone(est)
    assert c.get_params() == params
    assert "k=12" in repr(est)


def test_predict_before_fit():
    with pytest.raises(NotFittedError):
        BirkhoffSpectrumEstimator().predict([[0.5, 0.5]])


def test_base2_predictions_match_closed_form():
    est = BirkhoffSpectrumEstimator(family="base_n", n=2).fit()
    g = np.linspace(0.1, 0.9, 5)
    X = np.column_stack([g, 1 - g])
    H = -(g * np.log(g) + (1 - g) * np.log(1 - g)) / math.log(2)
    assert np.allclose(est.predict(X), H, atol=1e-10)
    assert len(est.results_) == 5
    assert est.family_class_ == "finite" and est.s_inf_ is None


def test_not_in_z_predicts_nan():
    est = BirkhoffSpectrumEstimator(family="base_n", n=2).fit()
    out = est.predict([[0.7, 0.7], [0.5, 0.5]])
    assert math.isnan(out[0]) and out[1] == pytest.approx(1.0)
    assert est.results_[0] is None


def test_f_lambda_general_potential_routes_to_alpha4():
    est = BirkhoffSpectrumEstimator(family="f_lambda", lam=0.25, potentials=[{"indicator": 1}], k=10,
                                    delta_inf=math.log(4)).fit()
    v = est.predict([[0.5]])[0]
    a3 = BirkhoffSpectrumEstimator(family="f_lambda", lam=0.25, potentials=[{"indicator": 1}], k=10,
                                   method="alpha3").fit().predict([[0.5]])[0]
    assert v >= a3 - 1e-9
    assert est.results_[0].report["delta_inf"] == math.log(4)


def test_bad_method_rejected():
    with pytest.raises(ValueError):
        BirkhoffSpectrumEstimator(method="alpha9").fit()


def test_input_validation():
    est = BirkhoffSpectrumEstimator().fit()
    with pytest.raises(ValueError):
        est.predict([[np.nan, 0.5]])


def test_docstring_examples():
    import doctest

    from birkhoff_spectra import estimators

    assert doctest.testmod(estimators).failed == 0
