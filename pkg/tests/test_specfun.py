"""Tests for the three-parameter Mittag-Leffler evaluator and incomplete gamma."""

import numpy as np
import pytest
from scipy.special import erfc, erfcx, gamma as gamma_fn

from merlang import MLParams, mittag_leffler3, upper_incomplete_gamma, ParameterError
from merlang.specfun import ml3_neg_grid

# deep reference values, frozen from an adaptive-precision series evaluation
# (working precision up to ~1500 digits, term scans past the cancellation peak)
DEEP_REFS = [
    (0.5, 0.6, 26.0, -56.0, 5.59394674026986911569209e-38),
    (0.5, 5.5, 26.0, -56.0, 3.53852718585209494316931e-43),
    (0.5, 1.05, 60.0, -9.0, 1.75013092343979457351006e-32),
    (0.7, 1.2, 15.0, -40.0, -4.17576880382470996689659e-19),
    (0.5, 0.95, 1.0, -33.0, 0.0154335197269362970878786),
    (0.5, 1.5, 3.0, -56.0, 8.59156711686884865746922e-8),
    (0.35, 0.8, 9.0, -11.0, -2.4107398974632473423836e-11),
    (0.9, 1.4, 6.0, -21.0, 2.28351914292678833860056e-7),
    (0.5, 1.0, 2.0, 1.7, 243.930045626913765021495),
    (0.5, 2.2, 7.0, 3.1, 581858388.85157908205925),
    (0.25, 1.0, 1.0, -2.0, 0.298101793693657603667644),
    (0.6, 0.6, 1.0, -7.5, 0.00516358941447715132334864),
]


def test_exponential_identity():
    # E^1_{1,1}(x) = e^x
    p = MLParams(1.0, 1.0, 1.0)
    for x in np.linspace(-10.0, 5.0, 121):
        assert mittag_leffler3(p, x) == pytest.approx(np.exp(x), rel=1e-10)


def test_cosh_identity():
    # E^1_{2,1}(x) = cosh(sqrt(x)) for x >= 0
    p = MLParams(2.0, 1.0, 1.0)
    for x in np.linspace(0.0, 40.0, 81):
        assert mittag_leffler3(p, x) == pytest.approx(np.cosh(np.sqrt(x)), rel=1e-10)


def test_erfc_point():
    # E^1_{1/2,1}(-1) = e * erfc(1)
    val = mittag_leffler3(MLParams(0.5, 1.0, 1.0), -1.0)
    assert val == pytest.approx(np.e * erfc(1.0), rel=1e-12)
    assert val == pytest.approx(0.427583576155807, rel=1e-12)


def test_erfcx_sweep():
    # E^1_{1/2,1}(-y) = erfcx(y) across both evaluation routes
    p = MLParams(0.5, 1.0, 1.0)
    for y in np.geomspace(0.01, 300.0, 120):
        assert mittag_leffler3(p, -y) == pytest.approx(erfcx(y), rel=5e-12)


def test_deep_reference_values():
    for a, b, g, x, ref in DEEP_REFS:
        val = mittag_leffler3(MLParams(a, b, g), x)
        assert val == pytest.approx(ref, rel=1e-12), (a, b, g, x)


def test_zero_argument():
    # E^gamma_{alpha,beta}(0) = 1/Gamma(beta)
    for a, b, g in [(0.5, 1.0, 1.0), (0.3, 2.7, 4.0), (1.5, 0.4, 2.0)]:
        assert mittag_leffler3(MLParams(a, b, g), 0.0) == pytest.approx(
            1.0 / gamma_fn(b), rel=1e-14)


def test_monotone_decreasing_on_negative_axis():
    # completely monotone in y for gamma <= 1-ish shapes; here just check
    # strict decrease of E(-y) along increasing y for a spread of params
    for a, b, g in [(0.5, 1.0, 1.0), (0.7, 0.7, 1.0), (0.4, 1.0, 2.0)]:
        ys = np.geomspace(0.05, 80.0, 60)
        vals = ml3_neg_grid(a, b, g, ys)
        assert np.all(np.diff(vals) < 0.0), (a, b, g)
        assert np.all(vals > 0.0), (a, b, g)


def test_grid_matches_scalar():
    ys = np.geomspace(0.02, 50.0, 40)
    for a, b, g in [(0.5, 0.6, 26.0), (0.8, 1.4, 3.0), (0.35, 0.8, 2.0)]:
        grid = ml3_neg_grid(a, b, g, ys)
        p = MLParams(a, b, g)
        scal = np.array([mittag_leffler3(p, -y) for y in ys])
        assert np.allclose(grid, scal, rtol=1e-11), (a, b, g)


def test_grid_handles_zero():
    vals = ml3_neg_grid(0.5, 1.0, 1.0, np.array([0.0, 0.5]))
    assert vals[0] == pytest.approx(1.0, rel=1e-14)


def test_series_info_diagnostics():
    val, info = mittag_leffler3(MLParams(0.5, 1.0, 1.0), -0.5, full_output=True)
    assert info["method"] == "series"
    assert info["terms"] > 3
    val, info = mittag_leffler3(MLParams(0.5, 1.0, 1.0), -40.0, full_output=True)
    assert info["method"] == "cut"


def test_parameter_validation():
    with pytest.raises(ParameterError):
        MLParams(0.0, 1.0, 1.0)
    with pytest.raises(ParameterError):
        MLParams(0.5, -1.0, 1.0)
    with pytest.raises(ParameterError):
        MLParams(0.5, 1.0, 0.0)
    with pytest.raises(ParameterError):
        mittag_leffler3(MLParams(0.5, 1.0, 1.0), np.inf)


def test_positive_overflow_returns_inf():
    # hugely positive argument overflows the exponential-type growth
    assert mittag_leffler3(MLParams(0.5, 1.0, 1.0), 800.0) == np.inf


def test_uig_trivial_values():
    assert upper_incomplete_gamma(1.0, 2.0) == pytest.approx(np.exp(-2.0), rel=1e-14)
    assert upper_incomplete_gamma(3.7, 0.0) == pytest.approx(gamma_fn(3.7), rel=1e-14)
    assert upper_incomplete_gamma(2.0, 1.0) == pytest.approx(2.0 * np.exp(-1.0), rel=1e-14)


def test_uig_monotone_and_bounded():
    s = 2.4
    xs = np.linspace(0.0, 20.0, 50)
    vals = np.array([upper_incomplete_gamma(s, x) for x in xs])
    assert np.all(np.diff(vals) < 0.0)
    assert np.all(vals <= gamma_fn(s) + 1e-15)
    assert np.all(vals > 0.0)


def test_uig_validation():
    with pytest.raises(ParameterError):
        upper_incomplete_gamma(0.0, 1.0)
    with pytest.raises(ParameterError):
        upper_incomplete_gamma(1.0, -0.5)
