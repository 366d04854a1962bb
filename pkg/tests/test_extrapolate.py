import numpy as np
import pytest

from telesim.extrapolate import coupling_ladder, richardson


def test_exact_for_polynomials():
    h = np.array([0.4, 0.2, 0.1, 0.05])
    values = 2.0 + 3.0 * h - 1.5 * h**2 + 0.25 * h**3
    result = richardson(h, values)
    assert result.value == pytest.approx(2.0, abs=1e-12)
    # The error estimate is the last correction, a conservative bound here.
    assert abs(result.value - 2.0) <= result.error


def test_error_estimate_tracks_truncation():
    h = np.array([0.4, 0.2, 0.1])
    values = 1.0 + h + h**3  # cubic term survives a quadratic fit
    result = richardson(h, values)
    assert abs(result.value - 1.0) <= result.error + 1e-9


def test_orders_improve_for_smooth_series():
    h = np.array([0.32, 0.16, 0.08, 0.04])
    values = 0.5 + 0.8 * h + 0.3 * h**2 + 0.1 * h**3
    result = richardson(h, values)
    gaps = [abs(o - 0.5) for o in result.orders]
    assert gaps[-1] < gaps[0]
    assert result.residuals_monotone


def test_input_validation():
    with pytest.raises(ValueError):
        richardson(np.array([0.1, 0.2, 0.3]), np.array([1.0, 2.0, 3.0]))  # increasing
    with pytest.raises(ValueError):
        richardson(np.array([0.2, 0.1]), np.array([1.0, 2.0]))  # too short
    with pytest.raises(ValueError):
        richardson(np.array([0.2, 0.0, -0.1]), np.array([1.0, 2.0, 3.0]))


def test_coupling_ladder_is_geometric():
    ladder = coupling_ladder(0.02, points=4)
    assert ladder[0] == 0.02
    ratios = [b / a for a, b in zip(ladder, ladder[1:])]
    assert all(r == pytest.approx(2**-0.5) for r in ratios)
    with pytest.raises(ValueError):
        coupling_ladder(0.02, points=2)
