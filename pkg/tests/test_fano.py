import numpy as np
import pytest
from sklearn.base import clone

from nucav.fano import FanoFit, FanoFitError, canonical, fano_profile

X = np.linspace(-60, 60, 801)


@pytest.mark.parametrize(
    "params",
    [
        (0.8, 1 + 0.5j, 3.0, 10.0),
        (0.3, -2.0 + 0.2j, -7.5, 4.0),
        (0.55, 0.4 + 1.5j, 0.0, 22.0),
    ],
)
def test_round_trip(params):
    y = fano_profile(X, *params)
    fit = FanoFit().fit(X, y)
    want = canonical(*params)
    assert fit.sigma0_ == pytest.approx(want[0], rel=1e-6)
    assert fit.q_ == pytest.approx(want[1], rel=1e-6, abs=1e-6)
    assert fit.delta1_ == pytest.approx(want[2], abs=1e-6)
    assert fit.gamma1_ == pytest.approx(want[3], rel=1e-6)
    assert fit.residual_ < 1e-10
    np.testing.assert_allclose(fit.predict(X[:, None]), y, atol=1e-9)


def test_lorentzian_dip_has_vanishing_q():
    y = fano_profile(X, 0.6, 0.0, 2.0, 8.0)
    fit = FanoFit().fit(X, y)
    assert abs(fit.q_) < 1e-3
    assert fit.gamma1_ == pytest.approx(8.0, rel=1e-6)


def test_canonical_representative():
    s, q, d, g = canonical(1.0, 2 - 1j, 0.5, -3.0)
    assert g == 3.0 and q.imag >= 0
    np.testing.assert_allclose(fano_profile(X, s, q, d, g), fano_profile(X, 1.0, 2 - 1j, 0.5, -3.0), rtol=1e-12)


def test_estimator_protocol():
    est = FanoFit(max_nfev=50, tol=1e-8)
    assert est.get_params() == {"max_nfev": 50, "tol": 1e-8}
    twin = clone(est)
    assert twin.get_params() == est.get_params() and not hasattr(twin, "q_")
    y = fano_profile(X, 0.8, 1 + 0.5j, 3.0, 10.0)
    assert est.fit(X, y).score(X, y) > 0.999999


def test_input_validation():
    with pytest.raises(ValueError):
        FanoFit().fit(X[:3], X[:3])
    with pytest.raises(ValueError):
        FanoFit().fit(np.ones((10, 2)), np.ones(10))
    assert issubclass(FanoFitError, RuntimeError)
