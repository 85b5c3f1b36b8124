"""
Nonlinear least-squares fits for scan curves

Provides helper functions for:
- Lorentzian dip fits (center = J)
- sin^4 duration fits (period T, dnu = 2 sqrt(2) / T)
- Exponential decay fits (singlet lifetime)

Fits never raise on non-convergence; the FitResult carries the flag.
Uncertainties come from the Jacobian covariance at the optimum.
"""

import logging
import math

import numpy as np
from scipy import optimize

from config import Config
from models import FitResult

logger = logging.getLogger(__name__)

MODELS = ('lorentzian', 'sin4', 'sin4_offset', 'exponential')


def _least_squares(model, names, residuals, jacobian, p0, n_points):
    result = optimize.least_squares(
        residuals, np.asarray(p0, dtype=float), jac=jacobian, method='trf', x_scale='jac',
        xtol=Config.FIT_XTOL, ftol=1e-14, gtol=1e-14, max_nfev=Config.FIT_MAX_ITERATIONS,
    )

    jac = np.atleast_2d(result.jac)
    n_params = len(names)
    dof = max(n_points - n_params, 1)
    variance = 2 * result.cost / dof
    if np.linalg.matrix_rank(jac) < n_params:
        errors = np.full(n_params, math.inf)
    else:
        covariance = np.linalg.pinv(jac.T @ jac) * variance
        errors = np.sqrt(np.clip(np.diag(covariance), 0, None))

    converged = bool(result.status > 0)
    if not converged:
        logger.warning("%s fit did not converge: %s", model, result.message)
    return result, dict(zip(names, result.x.tolist())), dict(zip(names, errors.tolist())), converged


def _arrays(curve, min_points):
    x = np.asarray(curve.x, dtype=float)
    y = np.asarray(curve.y, dtype=float)
    if len(x) < min_points:
        raise ValueError(f"at least {min_points} points required, got {len(x)}")
    return x, y


def lorentzian(x, center, width, depth, baseline):
    return baseline - depth * width ** 2 / ((x - center) ** 2 + width ** 2)


def fit_lorentzian_dip(curve):
    """
    Fit y = baseline - depth w^2 / ((x - center)^2 + w^2)

    Args:
        curve: ScanCurve with at least 5 points

    Returns:
        FitResult with center, width, depth, baseline
    """
    x, y = _arrays(curve, 5)

    edge = max(1, len(y) // 10)
    baseline0 = float(np.mean(np.concatenate([y[:edge], y[-edge:]])))
    center0 = float(x[np.argmin(y)])
    depth0 = baseline0 - float(np.min(y))
    below = x[y < baseline0 - depth0 / 2]
    width0 = (below.max() - below.min()) / 2 if len(below) > 1 else (x[-1] - x[0]) / 10
    width0 = width0 or (x[-1] - x[0]) / 10 or 1.0

    def residuals(p):
        return lorentzian(x, *p) - y

    def jacobian(p):
        c, w, d, _ = p
        dx = x - c
        denom = dx ** 2 + w ** 2
        return np.column_stack([
            -d * w ** 2 * 2 * dx / denom ** 2,
            -d * 2 * w * dx ** 2 / denom ** 2,
            -w ** 2 / denom,
            np.ones_like(x),
        ])

    names = ('center', 'width', 'depth', 'baseline')
    result, params, errors, converged = _least_squares(
        'lorentzian', names, residuals, jacobian, (center0, width0, depth0, baseline0), len(x))
    params['width'] = abs(params['width'])
    return FitResult('lorentzian', params, errors, float(np.linalg.norm(result.fun)),
                     converged, int(result.nfev), result.message)


def sin4(x, period, amplitude, offset=0.0):
    return amplitude * np.sin(2 * math.pi * x / period) ** 4 + offset


def _first_maximum(x, y):
    """Location of the first maximum, refined by a parabola through three samples"""
    threshold = np.min(y) + 0.8 * (np.max(y) - np.min(y))
    i = int(np.argmax(y >= threshold))
    while i + 1 < len(y) and y[i + 1] >= y[i]:
        i += 1
    if i == 0 or i == len(y) - 1:
        return float(x[i]), i
    x0, x1, x2 = x[i - 1:i + 2]
    y0, y1, y2 = y[i - 1:i + 2]
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2 ** 2 * (y0 - y1) + x1 ** 2 * (y2 - y0) + x0 ** 2 * (y1 - y2)) / denom
    if a >= 0:
        return float(x1), i
    return float(-b / (2 * a)), i


def fit_sin4(curve, with_offset=False):
    """
    Fit y = A sin^4(2 pi tau / T) (+ c)

    Args:
        curve: ScanCurve with at least 8 points spanning half a period
        with_offset: Fit the constant c

    Returns:
        FitResult with period, amplitude, [offset], delta_nu = 2 sqrt(2) / T, t_max = T / 4

    Raises:
        ValueError: If the period cannot be identified from the data span
    """
    x, y = _arrays(curve, 8)
    t_peak, idx = _first_maximum(x, y)
    if idx == len(y) - 1 or t_peak <= 0:
        raise ValueError("period unidentifiable: curve does not pass its first maximum")
    period0 = 4 * t_peak
    if x[-1] - x[0] < period0 / 2:
        raise ValueError(f"period unidentifiable: span {x[-1] - x[0]:.4g} s is under half a period")

    offset0 = float(np.min(y)) if with_offset else 0.0
    amplitude0 = float(np.max(y)) - offset0

    def unpack(p):
        return (p[0], p[1], p[2]) if with_offset else (p[0], p[1], 0.0)

    def residuals(p):
        return sin4(x, *unpack(p)) - y

    def jacobian(p):
        period, amplitude, _ = unpack(p)
        u = 2 * math.pi * x / period
        s = np.sin(u)
        columns = [
            amplitude * 4 * s ** 3 * np.cos(u) * (-2 * math.pi * x / period ** 2),
            s ** 4,
        ]
        if with_offset:
            columns.append(np.ones_like(x))
        return np.column_stack(columns)

    names = ('period', 'amplitude', 'offset') if with_offset else ('period', 'amplitude')
    p0 = (period0, amplitude0, offset0) if with_offset else (period0, amplitude0)
    result, params, errors, converged = _least_squares('sin4', names, residuals, jacobian, p0, len(x))

    period = abs(params['period'])
    params['period'] = period
    params['delta_nu'] = 2 * math.sqrt(2) / period
    params['t_max'] = period / 4
    errors['delta_nu'] = 2 * math.sqrt(2) * errors['period'] / period ** 2
    errors['t_max'] = errors['period'] / 4
    model = 'sin4_offset' if with_offset else 'sin4'
    return FitResult(model, params, errors, float(np.linalg.norm(result.fun)),
                     converged, int(result.nfev), result.message)


def fit_exponential(curve):
    """
    Fit y = A exp(-x / lifetime)

    Args:
        curve: ScanCurve with at least 3 strictly positive points

    Returns:
        FitResult with amplitude, lifetime; a non-decaying curve reports an
        infinite lifetime and converged=False

    Raises:
        ValueError: On non-positive data
    """
    x, y = _arrays(curve, 3)
    if np.any(y <= 0):
        raise ValueError("exponential fit requires strictly positive y values")

    slope, intercept = np.polyfit(x, np.log(y), 1)
    rate0 = max(-slope, 0.0)
    amplitude0 = math.exp(intercept)

    def residuals(p):
        return p[0] * np.exp(-p[1] * x) - y

    def jacobian(p):
        e = np.exp(-p[1] * x)
        return np.column_stack([e, -p[0] * x * e])

    result, params, errors, converged = _least_squares(
        'exponential', ('amplitude', 'rate'), residuals, jacobian, (amplitude0, rate0), len(x))

    rate = params.pop('rate')
    rate_error = errors.pop('rate')
    span = float(x[-1] - x[0]) or 1.0
    message = result.message
    if rate * span <= 1e-12:
        params['lifetime'] = math.inf
        errors['lifetime'] = math.inf
        converged = False
        message = 'lifetime not identifiable: curve does not decay'
    else:
        params['lifetime'] = 1.0 / rate
        errors['lifetime'] = rate_error / rate ** 2
    return FitResult('exponential', params, errors, float(np.linalg.norm(result.fun)),
                     converged, int(result.nfev), message)


def fit_curve(curve, model):
    """Dispatch to the fitter named by model (one of MODELS)"""
    if model == 'lorentzian':
        return fit_lorentzian_dip(curve)
    if model == 'sin4':
        return fit_sin4(curve, with_offset=False)
    if model == 'sin4_offset':
        return fit_sin4(curve, with_offset=True)
    if model == 'exponential':
        return fit_exponential(curve)
    raise ValueError(f"unknown fit model {model!r}; expected one of {MODELS}")
