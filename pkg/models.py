"""
Domain types for singlet-state preparation simulations.

All types are immutable after construction and validate their invariants
in ``__post_init__``; invalid input raises ``ValueError`` naming the field.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Union

import numpy as np

from config import Config


class NumericalError(RuntimeError):
    """Raised when a computation cannot produce a physical result"""


OBSERVABLE_LABELS = ('Mx', 'My', 'Mz', 'P_S0', 'P_T0', 'P_T+', 'P_T-', 'ST_coherence_magnitude')
SCAN_TYPES = ('dip', 'duration', 'evolve', 'efficiency')


def _check_positive(name, value, allow_zero=False):
    if value is None or not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    if value < 0 or (value == 0 and not allow_zero):
        raise ValueError(f"{name} must be {'non-negative' if allow_zero else 'positive'}, got {value}")


@dataclass(frozen=True, eq=False)
class SpinSystem:
    """n coupled spin-1/2 nuclei: offsets in Hz relative to carrier, J matrix in Hz"""
    offsets: Tuple[float, ...]
    j_matrix: np.ndarray
    pair: Tuple[int, int] = (0, 1)

    def __post_init__(self):
        offsets = tuple(float(o) for o in self.offsets)
        j_matrix = np.array(self.j_matrix, dtype=float)
        object.__setattr__(self, 'offsets', offsets)
        object.__setattr__(self, 'j_matrix', j_matrix)
        object.__setattr__(self, 'pair', tuple(int(p) for p in self.pair))
        j_matrix.setflags(write=False)

        n = len(offsets)
        if n not in (2, 3):
            raise ValueError(f"n_spins must be 2 or 3, got {n}")
        if j_matrix.shape != (n, n):
            raise ValueError(f"j_matrix must be {n}x{n}, got shape {j_matrix.shape}")
        if not all(math.isfinite(o) for o in offsets) or not np.all(np.isfinite(j_matrix)):
            raise ValueError("offsets and j_matrix must be finite")
        if not np.allclose(j_matrix, j_matrix.T, rtol=0, atol=1e-12):
            raise ValueError("j_matrix must be symmetric")
        if np.any(np.diag(j_matrix) != 0):
            raise ValueError("j_matrix must have a zero diagonal")
        i, j = self.pair
        if i == j or not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"pair {self.pair} invalid for {n} spins")

    @property
    def n_spins(self):
        return len(self.offsets)

    @property
    def dim(self):
        return 2 ** self.n_spins

    @property
    def j_pair(self):
        i, j = self.pair
        return float(self.j_matrix[i, j])

    @property
    def delta_nu(self):
        i, j = self.pair
        return float(self.offsets[i] - self.offsets[j])

    @classmethod
    def from_pair(cls, j_hz, delta_nu_hz, third_spin=None):
        """
        Build a pair system in the mean-shift rotating frame (offsets +dnu/2, -dnu/2)

        Args:
            j_hz: Pair J-coupling (Hz)
            delta_nu_hz: Pair chemical-shift difference (Hz)
            third_spin: Optional dict with offset_hz, j13_hz, j23_hz

        Returns:
            SpinSystem
        """
        if third_spin is None:
            return cls(offsets=(delta_nu_hz / 2, -delta_nu_hz / 2),
                       j_matrix=[[0.0, j_hz], [j_hz, 0.0]])

        j13 = third_spin.get('j13_hz', 0.0)
        j23 = third_spin.get('j23_hz', 0.0)
        return cls(
            offsets=(delta_nu_hz / 2, -delta_nu_hz / 2, third_spin.get('offset_hz', 0.0)),
            j_matrix=[[0.0, j_hz, j13], [j_hz, 0.0, j23], [j13, j23, 0.0]],
        )

    def to_dict(self):
        return {
            'n_spins': self.n_spins,
            'offsets_hz': list(self.offsets),
            'j_hz': self.j_matrix.tolist(),
            'pair': list(self.pair),
        }


@dataclass(frozen=True, eq=False)
class DensityState:
    """Hermitian, unit-trace, positive semidefinite density matrix of dimension 2^n"""
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        dim = m.shape[0]
        if dim not in (4, 8):
            raise ValueError(f"density matrix dimension must be 4 or 8, got {dim}")

        scale = max(np.abs(m).max(), 1.0)
        if np.abs(m - m.conj().T).max() > Config.HERMITIAN_RTOL * scale:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > Config.TRACE_TOL:
            raise ValueError(f"density matrix trace must be 1, got {np.trace(m).real:.15g}")
        m = (m + m.conj().T) / 2
        if np.linalg.eigvalsh(m).min() < -Config.PSD_TOL:
            raise ValueError("density matrix is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, 'matrix', m)

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def n_spins(self):
        return int(round(math.log2(self.dim)))

    def purity(self):
        return float(np.real(np.trace(self.matrix @ self.matrix)))


@dataclass(frozen=True, eq=False)
class Observable:
    """
    Hermitian measurement operator.

    ``components`` holds the transition operators |S><T| whose expectation
    magnitudes are combined for ``ST_coherence_magnitude``; ``matrix`` is
    then their Hermitian sum.
    """
    label: str
    matrix: np.ndarray
    components: Tuple[np.ndarray, ...] = ()

    def __post_init__(self):
        if self.label not in OBSERVABLE_LABELS:
            raise ValueError(f"unknown observable label: {self.label}")
        m = np.array(self.matrix, dtype=complex)
        if np.abs(m - m.conj().T).max() > 1e-12:
            raise ValueError(f"observable {self.label} is not Hermitian")
        m.setflags(write=False)
        object.__setattr__(self, 'matrix', m)
        object.__setattr__(self, 'components', tuple(self.components))

    @property
    def dim(self):
        return self.matrix.shape[0]


@dataclass(frozen=True)
class RelaxationParams:
    """Phenomenological lifetimes in seconds. T2 defaults to T1, coherence to T1/3."""
    T1: float
    TS: float
    T2: Optional[float] = None
    T_ST_coherence: Optional[float] = None
    T_lock: Optional[float] = None

    def __post_init__(self):
        _check_positive('T1', self.T1)
        _check_positive('TS', self.TS)
        if self.T2 is None:
            object.__setattr__(self, 'T2', self.T1)
        if self.T_ST_coherence is None:
            object.__setattr__(self, 'T_ST_coherence', self.T1 / 3)
        _check_positive('T2', self.T2)
        _check_positive('T_ST_coherence', self.T_ST_coherence)
        if self.T_lock is not None:
            _check_positive('T_lock', self.T_lock)

    def to_dict(self):
        return {
            'T1': self.T1,
            'TS': self.TS,
            'T2': self.T2,
            'T_ST_coherence': self.T_ST_coherence,
            'T_lock': self.T_lock,
        }


# Sequence elements

@dataclass(frozen=True)
class HardPulse:
    flip: float
    phase: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.flip) and math.isfinite(self.phase)):
            raise ValueError("hard pulse flip and phase must be finite")

    @property
    def duration(self):
        return 0.0


@dataclass(frozen=True)
class Delay:
    t: float

    def __post_init__(self):
        _check_positive('delay t', self.t, allow_zero=True)

    @property
    def duration(self):
        return self.t


@dataclass(frozen=True)
class SpinLock:
    nu_n: float
    phase: float
    tau_sl: float

    def __post_init__(self):
        _check_positive('spin lock nu_n', self.nu_n, allow_zero=True)
        _check_positive('spin lock tau_sl', self.tau_sl, allow_zero=True)

    @property
    def duration(self):
        return self.tau_sl


@dataclass(frozen=True)
class EchoTrain:
    n: int
    tau: float
    pulse_phase: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"echo train n must be an integer >= 1, got {self.n}")
        _check_positive('echo train tau', self.tau, allow_zero=True)

    @property
    def duration(self):
        return 2 * self.n * self.tau

    def expand(self):
        """n repetitions of delay - pi pulse - delay"""
        unit = [Delay(self.tau), HardPulse(math.pi, self.pulse_phase), Delay(self.tau)]
        return unit * int(self.n)


@dataclass(frozen=True)
class Evolve:
    tau_evolve: float
    filter_singlet: bool = False

    def __post_init__(self):
        _check_positive('evolve tau_evolve', self.tau_evolve, allow_zero=True)

    @property
    def duration(self):
        return self.tau_evolve


SequenceElement = Union[HardPulse, Delay, SpinLock, EchoTrain, Evolve]


@dataclass(frozen=True)
class PulseSequence:
    elements: Tuple[SequenceElement, ...] = ()
    record_points: Optional[Tuple[float, ...]] = None
    name: str = 'custom'

    def __post_init__(self):
        object.__setattr__(self, 'elements', tuple(self.elements))
        if self.record_points is None:
            total = self.total_duration
            n = Config.DEFAULT_RECORD_POINTS
            points = tuple(np.linspace(0.0, total, n).tolist()) if total > 0 else ()
        else:
            points = tuple(float(t) for t in self.record_points)
        if any(b < a for a, b in zip(points, points[1:])):
            raise ValueError("record_points must be sorted")
        if points and (points[0] < 0 or points[-1] > self.total_duration * (1 + 1e-12) + 1e-15):
            raise ValueError("record_points must lie within the sequence duration")
        object.__setattr__(self, 'record_points', points)

    @property
    def total_duration(self):
        return float(sum(e.duration for e in self.elements))


@dataclass(frozen=True)
class M2SParams:
    n1: int
    n2: int
    tau: float
    nu_e: float

    def __post_init__(self):
        if int(self.n1) != self.n1 or self.n1 < 0:
            raise ValueError(f"n1 must be a non-negative integer, got {self.n1}")
        if int(self.n2) != self.n2 or self.n2 < 0:
            raise ValueError(f"n2 must be a non-negative integer, got {self.n2}")
        _check_positive('tau', self.tau)
        _check_positive('nu_e', self.nu_e)

    @property
    def total_duration(self):
        return 2 * self.tau * (self.n1 + self.n2)


@dataclass(frozen=True)
class TransferStage:
    """One damped-Rabi polarization transfer; frequencies in Hz, times in s"""
    rabi_freq: float
    T_source: float
    T_dest: float
    T_coherence: float
    duration: float

    def __post_init__(self):
        for name in ('rabi_freq', 'T_source', 'T_dest', 'T_coherence', 'duration'):
            _check_positive(name, getattr(self, name))


@dataclass(frozen=True)
class ScanCurve:
    scan_type: str
    x: Tuple[float, ...]
    y: Tuple[float, ...]
    metadata: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.scan_type not in SCAN_TYPES:
            raise ValueError(f"scan_type must be one of {SCAN_TYPES}, got {self.scan_type}")
        x = tuple(float(v) for v in self.x)
        y = tuple(float(v) for v in self.y)
        if len(x) != len(y):
            raise ValueError(f"x and y lengths differ: {len(x)} != {len(y)}")
        # Repeated grid values are allowed (e.g. repeated tau_evolve = 0 acquisitions)
        if any(b < a for a, b in zip(x, x[1:])):
            raise ValueError("x must be increasing")
        object.__setattr__(self, 'x', x)
        object.__setattr__(self, 'y', y)
        object.__setattr__(self, 'metadata', dict(self.metadata))

    def __len__(self):
        return len(self.x)

    def with_y(self, y):
        return ScanCurve(self.scan_type, self.x, tuple(y), self.metadata)


@dataclass(frozen=True)
class FitResult:
    model: str
    params: Dict[str, float]
    std_errors: Dict[str, float]
    residual_norm: float
    converged: bool
    iterations: int
    message: str = ''

    def to_dict(self):
        return {
            'model': self.model,
            'params': dict(self.params),
            'std_errors': dict(self.std_errors),
            'residual_norm': self.residual_norm,
            'converged': self.converged,
            'iterations': self.iterations,
            'message': self.message,
        }


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Observables sampled at record times plus the final state"""
    times: Tuple[float, ...]
    columns: Dict[str, Tuple[float, ...]]
    final_state: DensityState
    final: Dict[str, float]

    def column(self, label):
        return np.asarray(self.columns[label])
