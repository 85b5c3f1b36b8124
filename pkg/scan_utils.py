"""
Simulated measurement scans

Provides helper functions for:
- Nutation-frequency dip scans after a single spin-lock
- Spin-lock duration scans of the complete SLIC experiment
- Evolution-time decay scans and extrapolation of the transfer efficiency
- Seeded Gaussian noise for exercising the fits

Signals are x-axis magnetization normalized to a single 90 degree
pulse-acquire on the same system.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from models import ScanCurve
from sequence_utils import ROUND_TRIP_AMPLITUDE, build_slic, execute

logger = logging.getLogger(__name__)

TRANSFER_CEILING = 0.5


def _map_ordered(func, grid, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(func, grid))
    return [func(x) for x in grid]


def _sorted_grid(grid, name):
    values = sorted(float(v) for v in grid)
    if not values:
        raise ValueError(f"{name} grid must not be empty")
    return values


def reference_signal(system, relax=None, phase=0.0):
    """Mx after a single 90 degree pulse, in reporter units"""
    seq = build_slic(0.0, 0.0, phase=phase, readout=False, record_points=())
    return execute(seq, system, relax).final['Mx']


def _metadata(system, relax, **extra):
    metadata = {'system': system.to_dict(), 'relaxation': relax.to_dict() if relax else None}
    metadata.update(extra)
    return metadata


def add_noise(curve, sigma, seed=None):
    """Return a copy of the curve with additive Gaussian noise of width sigma"""
    if sigma <= 0:
        return curve
    rng = np.random.default_rng(seed)
    noisy = np.asarray(curve.y) + rng.normal(0.0, sigma, len(curve))
    metadata = dict(curve.metadata, noise_sigma=sigma, seed=seed)
    return ScanCurve(curve.scan_type, curve.x, tuple(noisy), metadata)


def dip_scan(system, tau_sl, nu_grid, relax=None, phase=0.0, noise=0.0, seed=None, threads=1):
    """
    Truncated SLIC (no readout lock, no evolution) across nutation frequencies

    Args:
        system: SpinSystem
        tau_sl: Spin-lock duration (s)
        nu_grid: Nutation frequencies (Hz), should span J
        relax: Optional RelaxationParams (only T_lock acts here)
        phase: Spin-lock phase (rad)
        noise: Gaussian noise sigma added to the normalized signal
        seed: Noise seed
        threads: Worker threads

    Returns:
        ScanCurve of scan_type 'dip'
    """
    grid = _sorted_grid(nu_grid, 'nu')
    reference = reference_signal(system, relax, phase)

    def point(nu_n):
        seq = build_slic(nu_n, tau_sl, phase=phase, readout=False, record_points=())
        return execute(seq, system, relax).final['Mx'] / reference

    curve = ScanCurve('dip', tuple(grid), tuple(_map_ordered(point, grid, threads)),
                      _metadata(system, relax, tau_sl=tau_sl, phase=phase, x_label='nu_n_hz',
                                y_label='normalized_mx'))
    logger.info("dip scan: %d points, tau_SL=%g s", len(grid), tau_sl)
    return add_noise(curve, noise, seed)


def duration_scan(system, nu_n, tau_grid, tau_evolve=0.0, relax=None, phase=0.0,
                  filter_singlet=True, noise=0.0, seed=None, threads=1):
    """
    Complete SLIC experiment across spin-lock durations

    With filter_singlet the evolution stage keeps only the singlet population,
    so the signal follows slic_mx_model(dnu, tau_SL) times the singlet decay.

    Returns:
        ScanCurve of scan_type 'duration'
    """
    grid = _sorted_grid(tau_grid, 'tau_SL')
    if grid[0] < 0:
        raise ValueError("spin-lock durations must be non-negative")
    reference = reference_signal(system, relax, phase)

    def point(tau_sl):
        seq = build_slic(nu_n, tau_sl, phase=phase, tau_evolve=tau_evolve, readout=True,
                         filter_singlet=filter_singlet, record_points=())
        return execute(seq, system, relax).final['Mx'] / reference

    curve = ScanCurve('duration', tuple(grid), tuple(_map_ordered(point, grid, threads)),
                      _metadata(system, relax, nu_n=nu_n, tau_evolve=tau_evolve, phase=phase,
                                filter_singlet=filter_singlet, x_label='tau_sl_s', y_label='normalized_mx'))
    logger.info("duration scan: %d points, nu_n=%g Hz", len(grid), nu_n)
    return add_noise(curve, noise, seed)


def evolve_scan(system, nu_n, tau_sl, tau_evolve_grid, relax, phase=0.0,
                noise=0.0, seed=None, threads=1):
    """
    Complete SLIC experiment across evolution times

    The evolution stage relaxes with relax and then keeps only the singlet
    population, so the signal is S0 exp(-tau_evolve / TS).

    Returns:
        ScanCurve of scan_type 'evolve'
    """
    if relax is None:
        raise ValueError("evolve_scan requires relaxation parameters (TS)")
    grid = _sorted_grid(tau_evolve_grid, 'tau_evolve')
    if grid[0] < 0:
        raise ValueError("evolution times must be non-negative")
    reference = reference_signal(system, relax, phase)

    def point(tau_evolve):
        seq = build_slic(nu_n, tau_sl, phase=phase, tau_evolve=tau_evolve, readout=True,
                         filter_singlet=True, record_points=())
        return execute(seq, system, relax).final['Mx'] / reference

    curve = ScanCurve('evolve', tuple(grid), tuple(_map_ordered(point, grid, threads)),
                      _metadata(system, relax, nu_n=nu_n, tau_sl=tau_sl, phase=phase,
                                round_trip_ceiling=ROUND_TRIP_AMPLITUDE,
                                x_label='tau_evolve_s', y_label='normalized_mx'))
    logger.info("evolve scan: %d points, TS=%g s", len(grid), relax.TS)
    return add_noise(curve, noise, seed)


def efficiency_from_fraction(fraction, ceiling=TRANSFER_CEILING):
    """
    Per-application efficiency sqrt(f / ceiling) from a round-trip fraction f

    The measured round trip tops out at 0.5; simulated singlet-filtered
    round trips top out at ROUND_TRIP_AMPLITUDE.

    Raises:
        ValueError: If f is negative or above the ceiling
    """
    if not ceiling > 0:
        raise ValueError(f"ceiling must be positive, got {ceiling}")
    if fraction < 0:
        raise ValueError(f"round-trip fraction must be non-negative, got {fraction}")
    if fraction > ceiling * (1 + 1e-9):
        raise ValueError(f"round-trip fraction {fraction:.4g} exceeds the {ceiling:.4g} ceiling")
    return math.sqrt(min(fraction, ceiling) / ceiling)


def round_trip_fraction(curve, ts):
    """Mean of signal * exp(tau_evolve / TS): the round-trip fraction at tau_evolve = 0"""
    if not ts > 0:
        raise ValueError(f"TS must be positive, got {ts}")
    if not len(curve):
        raise ValueError("curve is empty")
    x = np.asarray(curve.x)
    y = np.asarray(curve.y)
    return float(np.mean(y * np.exp(x / ts)))


def extrapolated_efficiency(curve, ts, ceiling=None):
    """
    Per-application transfer efficiency extrapolated to tau_evolve = 0

    Args:
        curve: ScanCurve of an evolve scan (x = tau_evolve in s)
        ts: Singlet lifetime (s)
        ceiling: Round-trip ceiling; defaults to the curve's round_trip_ceiling
            metadata (set by evolve_scan), else TRANSFER_CEILING

    Returns:
        float: Efficiency in [0, 1]
    """
    if ceiling is None:
        ceiling = curve.metadata.get('round_trip_ceiling', TRANSFER_CEILING)
    return efficiency_from_fraction(round_trip_fraction(curve, ts), ceiling)
