"""
Damped-Rabi rate model of triplet/singlet polarization transfer

Provides helper functions for:
- Integrating a single damped two-level transfer stage (fixed-step RK4)
- SLIC (one stage) and M2S (two stages) transfer efficiencies
- Efficiency curves against the product T1 * dnu

Efficiency is twice the final singlet polarization reached from a source
polarization of 0.5, so the 50% transfer ceiling maps to efficiency 1.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy import optimize

from config import Config
from models import NumericalError, ScanCurve, TransferStage
from sequence_utils import ideal_m2s_duration, m2s_params, optimal_slic_duration

logger = logging.getLogger(__name__)

SOURCE_POLARIZATION = 0.5


def harmonic_lifetime(t_a, t_b):
    """Coherence lifetime of a transfer stage: 2 / (1/t_a + 1/t_b)"""
    return 2.0 / (1.0 / t_a + 1.0 / t_b)


def _rate_matrix(stage):
    omega = 2 * math.pi * stage.rabi_freq
    return np.array([
        [-1.0 / stage.T_source, 0.0, -omega],
        [0.0, -1.0 / stage.T_dest, omega],
        [omega / 2, -omega / 2, -1.0 / stage.T_coherence],
    ])


def _rk4_step_matrix(a, h):
    """One classical RK4 step of the linear system dy/dt = A y as a matrix"""
    ha = h * a
    identity = np.eye(len(a))
    ha2 = ha @ ha
    return identity + ha + ha2 / 2 + ha2 @ ha / 6 + ha2 @ ha2 / 24


def _stored_polarization(y):
    # Quadratic invariant of the undamped system; damping can only reduce it
    return y[0] ** 2 + y[1] ** 2 + 2 * y[2] ** 2


def integrate_stage(stage, y0, steps_per_timescale=None):
    """
    Integrate (P_source, P_dest, coherence) over one stage

    Args:
        stage: TransferStage
        y0: Initial (P_source, P_dest, c)
        steps_per_timescale: Steps per shortest timescale (default Config.RK4_STEPS_PER_TIMESCALE)

    Returns:
        ndarray: Final (P_source, P_dest, c)

    Raises:
        NumericalError: If the step count underflows the step size or the
            stored polarization grows during integration
    """
    steps_per_timescale = steps_per_timescale or Config.RK4_STEPS_PER_TIMESCALE
    h_max = min(1.0 / stage.rabi_freq, stage.T_source, stage.T_dest, stage.T_coherence) / steps_per_timescale
    n_steps = max(1, int(math.ceil(stage.duration / h_max)))
    if n_steps > Config.RK4_MAX_STEPS:
        raise NumericalError(
            f"step-size underflow: {n_steps} steps needed for duration {stage.duration:.3g} s")

    step = _rk4_step_matrix(_rate_matrix(stage), stage.duration / n_steps)
    y = np.array(y0, dtype=float)
    stored = _stored_polarization(y)
    for _ in range(n_steps):
        y = step @ y
        current = _stored_polarization(y)
        if current > stored * (1 + 1e-12) + 1e-300:
            raise NumericalError("stored polarization increased during integration")
        stored = current
    return y


def run_stage(p_source, stage, steps_per_timescale=None):
    """
    Transfer polarization from source to destination through one damped-Rabi stage

    Returns:
        tuple: (P_source', P_dest')
    """
    if not 0 <= p_source <= 1:
        raise ValueError(f"p_source must lie in [0, 1], got {p_source}")
    y = integrate_stage(stage, (p_source, 0.0, 0.0), steps_per_timescale)
    return float(y[0]), float(y[1])


def _slic_stage(t1, ts, delta_nu, duration):
    return TransferStage(
        rabi_freq=delta_nu / math.sqrt(2),
        T_source=t1,
        T_dest=ts,
        T_coherence=harmonic_lifetime(t1, ts),
        duration=duration,
    )


def _check_rates(t1, ts, delta_nu):
    for name, value in (('T1', t1), ('TS', ts), ('delta_nu', delta_nu)):
        if not (value > 0 and math.isfinite(value)):
            raise ValueError(f"{name} must be positive and finite, got {value}")


def _maximize(efficiency_of_scale):
    result = optimize.minimize_scalar(lambda s: -efficiency_of_scale(s), bounds=(1e-3, 2.0),
                                      method='bounded', options={'xatol': 1e-6})
    return max(-result.fun, efficiency_of_scale(1.0))


def slic_efficiency(t1, ts, delta_nu, optimize_duration=False, steps_per_timescale=None):
    """
    SLIC transfer efficiency from one stage with source lifetime T1 and destination TS

    Args:
        t1: Transverse triplet lifetime T1 = T2 (s)
        ts: Singlet lifetime (s)
        delta_nu: Chemical-shift difference (Hz)
        optimize_duration: Search the spin-lock time instead of the ideal 1/(sqrt(2) dnu)

    Returns:
        float: Efficiency in [0, 1]
    """
    _check_rates(t1, ts, delta_nu)
    ideal = optimal_slic_duration(delta_nu)

    def efficiency(scale):
        stage = _slic_stage(t1, ts, delta_nu, ideal * scale)
        return 2 * run_stage(SOURCE_POLARIZATION, stage, steps_per_timescale)[1]

    value = _maximize(efficiency) if optimize_duration else efficiency(1.0)
    return float(min(max(value, 0.0), 1.0))


def m2s_stage_durations(delta_nu, j_hz=None):
    """
    Durations of the two M2S transfer stages

    Without J the ideal split of 3 pi / (8 dnu) is used (2/3 then 1/3);
    with J the echo-train lengths 2 tau n1 and 2 tau n2 are used.
    """
    if j_hz is None:
        total = ideal_m2s_duration(delta_nu)
        return 2 * total / 3, total / 3
    params = m2s_params(j_hz, delta_nu)
    return 2 * params.tau * params.n1, 2 * params.tau * params.n2


def m2s_efficiency(t1, ts, delta_nu, j_hz=None, optimize_duration=False, steps_per_timescale=None):
    """
    M2S transfer efficiency modeled in two stages

    Stage 1 moves the transverse polarization (lifetime T1) into a
    singlet-triplet coherence (lifetime T1/3); after a lossless conversion,
    stage 2 moves it into singlet population (lifetime TS).

    Returns:
        float: Efficiency in [0, 1]
    """
    _check_rates(t1, ts, delta_nu)
    d1, d2 = m2s_stage_durations(delta_nu, j_hz)
    t_coh = t1 / 3

    def efficiency(scale):
        stage1 = TransferStage(1 / (2 * d1), t1, t_coh, harmonic_lifetime(t1, t_coh), d1 * scale)
        _, p_coherence = run_stage(SOURCE_POLARIZATION, stage1, steps_per_timescale)
        stage2 = TransferStage(1 / (2 * d2), t_coh, ts, harmonic_lifetime(t_coh, ts), d2 * scale)
        _, p_singlet = run_stage(max(p_coherence, 0.0), stage2, steps_per_timescale)
        return 2 * p_singlet

    value = _maximize(efficiency) if optimize_duration else efficiency(1.0)
    return float(min(max(value, 0.0), 1.0))


def duration_ratio():
    """Ideal SLIC / M2S preparation time ratio, (1/sqrt 2) / (3 pi / 8)"""
    return optimal_slic_duration(1.0) / ideal_m2s_duration(1.0)


def efficiency_curve(sequence, t1_dnu_grid, ts_ratio, optimize_duration=False, threads=1):
    """
    Efficiency against T1 * dnu at a fixed TS / T1 ratio

    Args:
        sequence: 'slic' or 'm2s'
        t1_dnu_grid: Positive values of T1 * dnu
        ts_ratio: TS / T1
        optimize_duration: Passed to the efficiency functions
        threads: Worker threads; results keep grid order

    Returns:
        ScanCurve of scan_type 'efficiency'
    """
    if sequence not in ('slic', 'm2s'):
        raise ValueError(f"sequence must be 'slic' or 'm2s', got {sequence}")
    grid = sorted(float(v) for v in t1_dnu_grid)
    if not grid or grid[0] <= 0:
        raise ValueError("t1_dnu grid must be non-empty and positive")
    if not ts_ratio > 0:
        raise ValueError(f"ts_ratio must be positive, got {ts_ratio}")

    # Results depend on T1 * dnu only; evaluate at dnu = 1 Hz
    func = slic_efficiency if sequence == 'slic' else m2s_efficiency

    def point(t1_dnu):
        return func(t1_dnu, ts_ratio * t1_dnu, 1.0, optimize_duration=optimize_duration)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(point, grid))
    else:
        values = [point(v) for v in grid]

    logger.info("%s efficiency curve: %d points at TS/T1=%g", sequence, len(grid), ts_ratio)
    return ScanCurve('efficiency', tuple(grid), tuple(values), {
        'sequence': sequence,
        'ts_t1_ratio': ts_ratio,
        'optimize_duration': optimize_duration,
        'x_label': 'T1_dnu',
        'y_label': 'efficiency',
    })
