"""
Spin-1/2 operator algebra and density-matrix dynamics

Provides helper functions for:
- Kronecker-embedded single-spin operators and the singlet/triplet basis of a pair
- Rotating-frame Hamiltonians with an optional spin-lock field
- Unitary propagation, hard pulses and observables
- Phenomenological relaxation applied during evolution stages

Spin indices are zero-based; spin 0 is the most significant factor of the
product basis and |up> is index 0 of each factor.
"""

import logging
import math

import numpy as np
from scipy import linalg

from config import Config
from models import DensityState, NumericalError, Observable

logger = logging.getLogger(__name__)

_SIGMA = {
    'x': np.array([[0, 1], [1, 0]], dtype=complex) / 2,
    'y': np.array([[0, -1j], [1j, 0]], dtype=complex) / 2,
    'z': np.array([[1, 0], [0, -1]], dtype=complex) / 2,
}

# Pair states over (m_i, m_j) with 0 = up, 1 = down
_SQRT_HALF = 1 / math.sqrt(2)
_PAIR_STATES = (
    ('T+', {(0, 0): 1.0}),
    ('T0', {(0, 1): _SQRT_HALF, (1, 0): _SQRT_HALF}),
    ('T-', {(1, 1): 1.0}),
    ('S0', {(0, 1): _SQRT_HALF, (1, 0): -_SQRT_HALF}),
)
PAIR_STATE_LABELS = tuple(label for label, _ in _PAIR_STATES)


def _check_spin_count(n_spins):
    if n_spins not in (2, 3):
        raise ValueError(f"n_spins must be 2 or 3, got {n_spins}")


def _check_pair(n_spins, pair):
    i, j = pair
    if i == j or not (0 <= i < n_spins and 0 <= j < n_spins):
        raise ValueError(f"invalid pair {pair} for {n_spins} spins")


def single_spin_operators(n_spins, k, axis):
    """
    Angular-momentum operator I_k,axis embedded in the 2^n product space

    Args:
        n_spins: Number of spins (2 or 3)
        k: Zero-based spin index
        axis: 'x', 'y' or 'z'

    Returns:
        ndarray: dim x dim Hermitian matrix
    """
    _check_spin_count(n_spins)
    if not 0 <= k < n_spins:
        raise ValueError(f"spin index {k} out of range for {n_spins} spins")
    if axis not in _SIGMA:
        raise ValueError(f"axis must be x, y or z, got {axis}")

    op = np.array([[1.0]], dtype=complex)
    for m in range(n_spins):
        op = np.kron(op, _SIGMA[axis] if m == k else np.eye(2, dtype=complex))
    return op


def total_operator(n_spins, axis, spins=None):
    spins = range(n_spins) if spins is None else spins
    return sum(single_spin_operators(n_spins, k, axis) for k in spins)


def singlet_triplet_basis(n_spins, pair=(0, 1)):
    """
    Unitary whose columns are |T+>, |T0>, |T->, |S0> of the pair

    For three spins every pair state is tensored with the product states of
    the remaining spin; column index = state * 2^(n-2) + remainder.

    Returns:
        ndarray: dim x dim unitary
    """
    _check_spin_count(n_spins)
    _check_pair(n_spins, pair)
    i, j = pair
    rest = [m for m in range(n_spins) if m not in pair]
    dim = 2 ** n_spins
    n_rest = 2 ** len(rest)

    basis = np.zeros((dim, dim), dtype=complex)
    for b in range(dim):
        bits = [(b >> (n_spins - 1 - m)) & 1 for m in range(n_spins)]
        r = 0
        for m in rest:
            r = (r << 1) | bits[m]
        for s, (_, amplitudes) in enumerate(_PAIR_STATES):
            basis[b, s * n_rest + r] = amplitudes.get((bits[i], bits[j]), 0.0)
    return basis


def singlet_columns(n_spins):
    """Column indices of singlet states in singlet_triplet_basis"""
    n_rest = 2 ** (n_spins - 2)
    return list(range(3 * n_rest, 4 * n_rest))


def rotation_operator(n_spins, flip, phase, spins=None):
    """exp(-i flip (F_x cos phase + F_y sin phase)) over the given spins"""
    spins = range(n_spins) if spins is None else spins
    single = (math.cos(flip / 2) * np.eye(2)
              - 2j * math.sin(flip / 2) * (math.cos(phase) * _SIGMA['x'] + math.sin(phase) * _SIGMA['y']))
    op = np.array([[1.0]], dtype=complex)
    for m in range(n_spins):
        op = np.kron(op, single if m in spins else np.eye(2, dtype=complex))
    return op


def dressed_basis(n_spins, pair=(0, 1), phase=0.0):
    """
    Singlet/triplet basis quantized along the spin-lock axis

    Columns are |T+phi>, |T0phi>, |T-phi>, |S0> where T+-phi are eigenstates of
    the pair's in-plane spin component along phase with eigenvalue +-1.
    """
    basis = singlet_triplet_basis(n_spins, pair)
    # z -> x about y, then x -> phase about z
    to_x = rotation_operator(n_spins, math.pi / 2, math.pi / 2, spins=pair)
    about_z = linalg.expm(-1j * phase * total_operator(n_spins, 'z', spins=pair))
    return about_z @ to_x @ basis


def hamiltonian(system, nu_n=0.0, phase=0.0):
    """
    Rotating-frame Hamiltonian in rad/s

    H = 2 pi [ sum_{i<j} J_ij I_i.I_j + sum_i offset_i I_iz + nu_n sum_i (I_ix cos phase + I_iy sin phase) ]

    Args:
        system: SpinSystem
        nu_n: Spin-lock nutation frequency (Hz), 0 for free evolution
        phase: Spin-lock phase (rad)

    Returns:
        ndarray: Hermitian dim x dim matrix
    """
    if nu_n < 0 or not math.isfinite(nu_n):
        raise ValueError(f"nutation frequency must be non-negative, got {nu_n}")
    n = system.n_spins
    ops = {axis: [single_spin_operators(n, k, axis) for k in range(n)] for axis in 'xyz'}

    h = np.zeros((system.dim, system.dim), dtype=complex)
    for i in range(n):
        for j in range(i + 1, n):
            coupling = system.j_matrix[i, j]
            if coupling:
                h += coupling * sum(ops[a][i] @ ops[a][j] for a in 'xyz')
        h += system.offsets[i] * ops['z'][i]
        if nu_n:
            h += nu_n * (math.cos(phase) * ops['x'][i] + math.sin(phase) * ops['y'][i])
    return 2 * math.pi * h


def dressed_hamiltonian(system, nu_n, phase=0.0):
    """Hamiltonian in Hz expressed in the dressed singlet/triplet basis of the pair"""
    basis = dressed_basis(system.n_spins, system.pair, phase)
    return basis.conj().T @ hamiltonian(system, nu_n, phase) @ basis / (2 * math.pi)


def crossing_coupling(system, phase=0.0):
    """Matrix element <S0|H|T-phi> in Hz connecting the singlet to the lower dressed triplet"""
    if system.n_spins != 2:
        raise ValueError("crossing_coupling is defined for a two-spin system")
    h = dressed_hamiltonian(system, 0.0, phase)
    return complex(h[3, 2])


def crossing_gap(system, nu_n, phase=0.0):
    """
    Eigenvalue splitting (Hz) of the {T-phi, S0} block of the dressed Hamiltonian

    The block is the two-level system that crosses at nu_n = J; its gap is
    sqrt((E_T- - E_S)^2 + 4 |V|^2) with V the crossing coupling.
    """
    if system.n_spins != 2:
        raise ValueError("crossing_gap is defined for a two-spin system")
    h = dressed_hamiltonian(system, nu_n, phase)
    block = h[np.ix_([2, 3], [2, 3])]
    values = linalg.eigvalsh(block)
    return float(values[1] - values[0])


def dressed_gap(system, nu_n, phase=0.0):
    """Splitting (Hz) of the two lowest eigenvalues of the full Hamiltonian"""
    values = linalg.eigvalsh(hamiltonian(system, nu_n, phase)) / (2 * math.pi)
    return float(values[1] - values[0])


def thermal_state(n_spins, polarization=None):
    """High-temperature equilibrium rho = 1/2^n + eps * sum_k I_kz"""
    eps = Config.REFERENCE_POLARIZATION if polarization is None else polarization
    dim = 2 ** n_spins
    return DensityState(np.eye(dim) / dim + eps * total_operator(n_spins, 'z'))


def _check_hermitian(h):
    h = np.asarray(h, dtype=complex)
    scale = max(np.abs(h).max(), 1.0)
    if np.abs(h - h.conj().T).max() > Config.HERMITIAN_RTOL * scale:
        raise ValueError("Hamiltonian is not Hermitian")
    return (h + h.conj().T) / 2


class Propagator:
    """
    Cached eigendecomposition of a Hermitian Hamiltonian.

    U(t) = V exp(-i E t) V^dagger is exact for any t, so one decomposition
    serves every sample point inside a constant-Hamiltonian segment.
    """

    def __init__(self, h):
        self.energies, self.vectors = linalg.eigh(_check_hermitian(h))

    def unitary(self, t):
        if t < 0:
            raise ValueError(f"propagation time must be non-negative, got {t}")
        phases = np.exp(-1j * self.energies * t)
        return (self.vectors * phases) @ self.vectors.conj().T

    def apply(self, rho, t):
        u = self.unitary(t)
        return u @ rho @ u.conj().T


def propagate(state, h, t):
    """
    Coherent evolution rho' = U rho U^dagger with U = exp(-i H t)

    Args:
        state: DensityState
        h: Hermitian Hamiltonian (rad/s)
        t: Duration (s)

    Returns:
        DensityState
    """
    propagator = Propagator(h)
    if t == 0:
        return state
    return DensityState(propagator.apply(state.matrix, t))


def apply_hard_pulse(state, flip, phase=0.0):
    """Instantaneous rotation of all spins by flip about the in-plane axis at phase"""
    r = rotation_operator(state.n_spins, flip, phase)
    return DensityState(r @ state.matrix @ r.conj().T)


def observables(n_spins, pair=(0, 1)):
    """
    Standard observables of the simulator

    Returns:
        dict: label -> Observable for Mx, My, Mz, P_S0, P_T0, P_T+, P_T-,
              ST_coherence_magnitude
    """
    basis = singlet_triplet_basis(n_spins, pair)
    n_rest = 2 ** (n_spins - 2)
    result = {
        'Mx': Observable('Mx', total_operator(n_spins, 'x')),
        'My': Observable('My', total_operator(n_spins, 'y')),
        'Mz': Observable('Mz', total_operator(n_spins, 'z')),
    }

    for s, label in enumerate(PAIR_STATE_LABELS):
        cols = basis[:, s * n_rest:(s + 1) * n_rest]
        result[f'P_{label}'] = Observable(f'P_{label}', cols @ cols.conj().T)

    singlet = basis[:, 3 * n_rest:4 * n_rest]
    components = []
    for s in range(3):
        triplet = basis[:, s * n_rest:(s + 1) * n_rest]
        for r in range(n_rest):
            components.append(np.outer(singlet[:, r], triplet[:, r].conj()))
    hermitian_sum = sum(c + c.conj().T for c in components)
    result['ST_coherence_magnitude'] = Observable('ST_coherence_magnitude', hermitian_sum, tuple(components))
    return result


def expectation(state, obs):
    """
    Tr(rho O); for ST_coherence_magnitude sqrt(sum_k |Tr(rho C_k)|^2)

    Raises:
        ValueError: On dimension mismatch
        NumericalError: If the expectation of a Hermitian operator is not real
    """
    if state.dim != obs.dim:
        raise ValueError(f"dimension mismatch: state {state.dim}, observable {obs.dim}")
    if obs.components:
        return float(math.sqrt(sum(abs(np.trace(state.matrix @ c)) ** 2 for c in obs.components)))

    value = np.trace(state.matrix @ obs.matrix)
    if abs(value.imag) > Config.IMAG_TOL:
        raise NumericalError(f"expectation of {obs.label} has imaginary part {value.imag:.3g}")
    return float(value.real)


def _singlet_pattern(n_spins):
    """Diagonal (singlet/triplet basis) of P_S - (k/dim) 1 and its overlap Tr(u P_S)"""
    dim = 2 ** n_spins
    cols = singlet_columns(n_spins)
    k = len(cols)
    pattern = np.full(dim, -k / dim)
    pattern[cols] += 1.0
    return pattern, k - k * k / dim


def apply_evolve_relaxation(state, params, pair=(0, 1), t=0.0):
    """
    Relax a state over an evolution stage of duration t

    In the pair's singlet/triplet basis the singlet population deviation decays
    with TS (compensated uniformly so the trace is kept), the remaining
    population deviations decay with T1. Coherences between the singlet and
    a triplet decay with params.T_ST_coherence, all other coherences with
    params.T2.

    Args:
        state: DensityState
        params: RelaxationParams
        pair: Singlet pair
        t: Duration (s)

    Returns:
        DensityState
    """
    if t < 0:
        raise ValueError(f"evolution time must be non-negative, got {t}")
    if t == 0:
        return state

    n = state.n_spins
    dim = state.dim
    basis = singlet_triplet_basis(n, pair)
    rho = basis.conj().T @ state.matrix @ basis

    deviation = np.real(np.diag(rho)) - 1.0 / dim
    pattern, overlap = _singlet_pattern(n)
    singlet_dev = deviation[singlet_columns(n)].sum()
    amplitude = singlet_dev / overlap
    remainder = deviation - amplitude * pattern

    in_singlet = np.zeros(dim, dtype=bool)
    in_singlet[singlet_columns(n)] = True
    crosses = in_singlet[:, None] != in_singlet[None, :]
    relaxed = rho * np.where(crosses, math.exp(-t / params.T_ST_coherence), math.exp(-t / params.T2))
    new_diag = 1.0 / dim + amplitude * pattern * math.exp(-t / params.TS) + remainder * math.exp(-t / params.T1)
    relaxed[np.diag_indices(dim)] = new_diag

    return DensityState(basis @ relaxed @ basis.conj().T)


def singlet_filter(state, pair=(0, 1)):
    """
    Keep only the singlet population deviation of the pair

    Limit of an evolution stage much longer than T1 and much shorter than TS.
    """
    n = state.n_spins
    dim = state.dim
    basis = singlet_triplet_basis(n, pair)
    projector = basis[:, singlet_columns(n)] @ basis[:, singlet_columns(n)].conj().T
    k = len(singlet_columns(n))
    singlet_dev = float(np.real(np.trace(state.matrix @ projector))) - k / dim
    amplitude = singlet_dev / (k - k * k / dim)
    return DensityState(np.eye(dim) / dim + amplitude * (projector - k / dim * np.eye(dim)))


def damp_deviation(state, t, lifetime):
    """Uniform exponential decay of the deviation from the maximally mixed state"""
    if lifetime is None or t == 0:
        return state
    dim = state.dim
    identity = np.eye(dim) / dim
    return DensityState(identity + (state.matrix - identity) * math.exp(-t / lifetime))
