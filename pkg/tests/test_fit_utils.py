import json
import math

import numpy as np
import pytest

import fit_utils
import scan_utils
from models import ScanCurve


def _lorentzian_curve(scale=1.0):
    x = np.linspace(14.0, 21.0, 71)
    y = fit_utils.lorentzian(x, 17.5, 0.8, 0.5, 1.0) * scale
    return ScanCurve('dip', x, y)


def _sin4_curve(period=2 * math.sqrt(2) / 2.15, amplitude=2 / 3, offset=0.0, stop=0.8, num=81):
    x = np.linspace(0.0, stop, num)
    return ScanCurve('duration', x, fit_utils.sin4(x, period, amplitude, offset))


def _decay_curve(lifetime=25.1, amplitude=0.3, num=31):
    x = np.linspace(0.0, 60.0, num)
    return ScanCurve('evolve', x, amplitude * np.exp(-x / lifetime))


def test_lorentzian_exact_recovery():
    result = fit_utils.fit_lorentzian_dip(_lorentzian_curve())
    assert result.converged
    assert result.params['center'] == pytest.approx(17.5, abs=1e-6)
    assert result.params['width'] == pytest.approx(0.8, abs=1e-6)
    assert result.params['depth'] == pytest.approx(0.5, abs=1e-6)
    assert result.params['baseline'] == pytest.approx(1.0, abs=1e-6)


def test_lorentzian_flat_curve_has_unbounded_errors():
    x = np.linspace(14.0, 21.0, 31)
    result = fit_utils.fit_lorentzian_dip(ScanCurve('dip', x, np.ones_like(x)))
    assert result.params['baseline'] == pytest.approx(1.0, abs=1e-9)
    assert math.isinf(result.std_errors['center'])


def test_lorentzian_center_of_simulated_dip(pair_system):
    curve = scan_utils.dip_scan(pair_system, 0.3, np.linspace(15.0, 20.0, 101))
    result = fit_utils.fit_lorentzian_dip(curve)
    assert abs(result.params['center'] - 17.5) < 0.2


def test_lorentzian_noisy_center_within_three_errors():
    clean = _lorentzian_curve()
    hits = 0
    for seed in range(100):
        result = fit_utils.fit_lorentzian_dip(scan_utils.add_noise(clean, 0.02, seed=seed))
        hits += abs(result.params['center'] - 17.5) < 3 * result.std_errors['center']
    assert hits >= 97


def test_sin4_exact_recovery():
    result = fit_utils.fit_sin4(_sin4_curve())
    assert result.converged
    assert result.params['delta_nu'] == pytest.approx(2.15, rel=1e-6)
    assert result.params['t_max'] == pytest.approx(1 / (math.sqrt(2) * 2.15), rel=1e-6)


def test_sin4_maximum_for_short_lived_pair():
    result = fit_utils.fit_sin4(_sin4_curve(period=2 * math.sqrt(2) / 2.13))
    assert result.params['delta_nu'] == pytest.approx(2.13, rel=1e-6)
    assert result.params['t_max'] == pytest.approx(0.332, abs=1e-3)


def test_sin4_with_offset():
    result = fit_utils.fit_sin4(_sin4_curve(amplitude=0.4, offset=0.1), with_offset=True)
    assert result.model == 'sin4_offset'
    assert result.params['offset'] == pytest.approx(0.1, abs=1e-6)
    assert result.params['amplitude'] == pytest.approx(0.4, abs=1e-6)


def test_sin4_short_span_rejected():
    with pytest.raises(ValueError, match='period unidentifiable'):
        fit_utils.fit_sin4(_sin4_curve(stop=0.2, num=21))


def test_sin4_recovers_shift_difference_from_simulation(pair_system):
    curve = scan_utils.duration_scan(pair_system, 17.5, np.linspace(0.0, 0.8, 81))
    result = fit_utils.fit_sin4(curve)
    assert result.params['delta_nu'] == pytest.approx(2.15, rel=0.01)
    assert 0.28 <= result.params['t_max'] <= 0.36


def test_exponential_exact_recovery():
    result = fit_utils.fit_exponential(_decay_curve())
    assert result.converged
    assert result.params['lifetime'] == pytest.approx(25.1, rel=1e-6)
    assert result.params['amplitude'] == pytest.approx(0.3, rel=1e-6)


def test_exponential_noisy_lifetime_within_five_percent():
    clean = _decay_curve()
    hits = 0
    for seed in range(100):
        noisy = scan_utils.add_noise(clean, 0.01 * 0.3, seed=seed)
        if np.all(np.array(noisy.y) > 0):
            lifetime = fit_utils.fit_exponential(noisy).params['lifetime']
            hits += abs(lifetime - 25.1) / 25.1 < 0.05
    assert hits >= 95


def test_exponential_rejects_non_positive():
    x = np.linspace(0, 10, 5)
    with pytest.raises(ValueError, match='positive'):
        fit_utils.fit_exponential(ScanCurve('evolve', x, [1.0, 0.5, 0.0, 0.2, 0.1]))


def test_exponential_constant_curve_not_identifiable():
    x = np.linspace(0, 10, 6)
    result = fit_utils.fit_exponential(ScanCurve('evolve', x, np.full(6, 0.3)))
    assert math.isinf(result.params['lifetime'])
    assert not result.converged


@pytest.mark.parametrize('build, fit, key', [
    (_lorentzian_curve, fit_utils.fit_lorentzian_dip, 'center'),
    (_sin4_curve, fit_utils.fit_sin4, 'period'),
    (_decay_curve, fit_utils.fit_exponential, 'lifetime'),
])
def test_fit_location_invariant_to_y_scale(build, fit, key):
    curve = build()
    scaled = curve.with_y(np.array(curve.y) * 1000.0)
    assert fit(scaled).params[key] == pytest.approx(fit(curve).params[key], rel=1e-8)


def test_fit_requires_enough_points():
    with pytest.raises(ValueError):
        fit_utils.fit_lorentzian_dip(ScanCurve('dip', [1, 2, 3], [1, 0, 1]))


def test_fit_curve_dispatch_and_json():
    result = fit_utils.fit_curve(_decay_curve(), 'exponential')
    payload = json.loads(json.dumps(result.to_dict()))
    assert payload['model'] == 'exponential'
    assert set(payload['params']) == {'amplitude', 'lifetime'}
    with pytest.raises(ValueError):
        fit_utils.fit_curve(_decay_curve(), 'gaussian')
