import math

import numpy as np
import pytest

import rate_utils
from models import NumericalError, TransferStage
from sequence_utils import ideal_m2s_duration

GRID = [0.1, 0.2, 0.5, 1, 2, 5, 10]


def test_harmonic_lifetime():
    assert rate_utils.harmonic_lifetime(2.0, 2.0) == pytest.approx(2.0)
    assert rate_utils.harmonic_lifetime(1.0, 3.0) == pytest.approx(1.5)


def test_undamped_stage_transfers_everything():
    """A half Rabi period with negligible damping moves the source completely"""
    stage = TransferStage(rabi_freq=1.0, T_source=1e9, T_dest=1e9, T_coherence=1e9, duration=0.5)
    p_source, p_dest = rate_utils.run_stage(0.5, stage)
    assert p_dest == pytest.approx(0.5, abs=1e-6)
    assert p_source == pytest.approx(0.0, abs=1e-6)


def test_rk4_converges_with_step_refinement():
    stage = TransferStage(rabi_freq=1.3, T_source=0.8, T_dest=5.0, T_coherence=0.4, duration=0.7)
    coarse = rate_utils.integrate_stage(stage, (0.5, 0.0, 0.0), steps_per_timescale=50)
    fine = rate_utils.integrate_stage(stage, (0.5, 0.0, 0.0), steps_per_timescale=400)
    assert np.allclose(coarse, fine, atol=1e-8)


def test_step_underflow_raises():
    stage = TransferStage(rabi_freq=1.0, T_source=1e-6, T_dest=1e-6, T_coherence=1e-6, duration=1e3)
    with pytest.raises(NumericalError, match='underflow'):
        rate_utils.integrate_stage(stage, (0.5, 0.0, 0.0))


def test_run_stage_rejects_bad_source():
    stage = TransferStage(1.0, 1.0, 1.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        rate_utils.run_stage(1.5, stage)


def test_transfer_stage_validation():
    with pytest.raises(ValueError, match='T_dest'):
        TransferStage(1.0, 1.0, 0.0, 1.0, 0.5)


@pytest.mark.parametrize('func', [rate_utils.slic_efficiency, rate_utils.m2s_efficiency])
def test_no_relaxation_limit(func):
    assert func(1e4, 1e10, 1.0) == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize('ts_ratio', [3, 1000])
def test_slic_beats_m2s_and_both_increase(ts_ratio):
    slic = rate_utils.efficiency_curve('slic', GRID, ts_ratio)
    m2s = rate_utils.efficiency_curve('m2s', GRID, ts_ratio)

    for x, e_slic, e_m2s in zip(slic.x, slic.y, m2s.y):
        assert e_slic >= e_m2s, f"SLIC {e_slic:.4f} < M2S {e_m2s:.4f} at T1*dnu={x}"
    assert all(np.diff(slic.y) >= 0)
    assert all(np.diff(m2s.y) >= 0)
    assert all(0 <= y <= 1 for y in slic.y + m2s.y)


def test_shorter_singlet_lifetime_never_helps():
    short = rate_utils.efficiency_curve('slic', GRID, 3)
    long = rate_utils.efficiency_curve('slic', GRID, 1000)
    assert all(a <= b + 1e-12 for a, b in zip(short.y, long.y))


def test_efficiency_scales_with_t1_dnu_only():
    assert rate_utils.slic_efficiency(2.0, 6.0, 1.0) == pytest.approx(
        rate_utils.slic_efficiency(1.0, 3.0, 2.0), rel=1e-9)


def test_optimized_duration_not_worse():
    fixed = rate_utils.m2s_efficiency(0.5, 1.5, 1.0)
    optimized = rate_utils.m2s_efficiency(0.5, 1.5, 1.0, optimize_duration=True)
    assert optimized >= fixed


def test_m2s_stage_durations():
    d1, d2 = rate_utils.m2s_stage_durations(2.0)
    assert d1 == pytest.approx(2 * d2)
    assert d1 + d2 == pytest.approx(ideal_m2s_duration(2.0))


def test_m2s_stage_durations_from_echo_trains():
    d1, d2 = rate_utils.m2s_stage_durations(2.8, j_hz=17.4)
    assert d1 == pytest.approx(2 * 10 * 14.185e-3, rel=1e-3)
    assert d2 == pytest.approx(2 * 5 * 14.185e-3, rel=1e-3)


def test_duration_ratio():
    assert rate_utils.duration_ratio() == pytest.approx((1 / math.sqrt(2)) / (3 * math.pi / 8))
    assert rate_utils.duration_ratio() == pytest.approx(0.60, abs=0.01)


def test_efficiency_curve_threads_keep_order():
    serial = rate_utils.efficiency_curve('m2s', GRID, 3, threads=1)
    parallel = rate_utils.efficiency_curve('m2s', list(reversed(GRID)), 3, threads=4)
    assert parallel.x == serial.x
    assert parallel.y == serial.y


def test_efficiency_curve_validation():
    with pytest.raises(ValueError):
        rate_utils.efficiency_curve('inept', GRID, 3)
    with pytest.raises(ValueError):
        rate_utils.efficiency_curve('slic', [0.0, 1.0], 3)
    with pytest.raises(ValueError):
        rate_utils.slic_efficiency(-1.0, 1.0, 1.0)


def test_full_rabi_period_returns_source():
    stage = TransferStage(rabi_freq=1.0, T_source=1e9, T_dest=1e9, T_coherence=1e9, duration=1.0)
    p_source, p_dest = rate_utils.run_stage(0.5, stage)
    assert p_source == pytest.approx(0.5, abs=1e-6)
    assert p_dest == pytest.approx(0.0, abs=1e-6)


def test_uniform_damping_scales_transfer():
    stage = TransferStage(rabi_freq=1.0, T_source=2.0, T_dest=2.0, T_coherence=2.0, duration=0.5)
    p_source, p_dest = rate_utils.run_stage(0.5, stage)
    assert p_dest == pytest.approx(0.5 * math.exp(-0.5 / 2.0), rel=1e-6)
    assert p_source == pytest.approx(0.0, abs=1e-6)


def test_slic_efficiency_grows_with_shift_difference():
    values = [rate_utils.slic_efficiency(0.912, 25.1, dnu) for dnu in (0.5, 1.0, 2.15, 5.0, 10.0)]
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert values[-1] > values[0]
