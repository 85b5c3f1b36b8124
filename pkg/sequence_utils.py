"""
Pulse sequence builders and executor

Provides helper functions for:
- Building SLIC and M2S experiments (preparation, evolution, readout)
- Choosing M2S echo-train parameters and the ideal SLIC spin-lock duration
- Executing a sequence on a spin system and sampling observables
- Converting sequences to and from the JSON element schema
"""

import logging
import math
from dataclasses import asdict

import numpy as np

from config import Config
from models import (Delay, DensityState, EchoTrain, Evolve, HardPulse, M2SParams,
                    OBSERVABLE_LABELS, PulseSequence, SpinLock, Trajectory)
import spin_utils

logger = logging.getLogger(__name__)

ELEMENT_TYPES = {
    'hard_pulse': HardPulse,
    'delay': Delay,
    'spin_lock': SpinLock,
    'echo_train': EchoTrain,
    'evolve': Evolve,
}
_TYPE_NAMES = {cls: name for name, cls in ELEMENT_TYPES.items()}


def optimal_slic_duration(delta_nu):
    """Spin-lock time of maximum singlet transfer, 1 / (sqrt(2) dnu)"""
    if not delta_nu > 0:
        raise ValueError(f"delta_nu must be positive, got {delta_nu}")
    return 1.0 / (math.sqrt(2) * delta_nu)


def ideal_m2s_duration(delta_nu):
    """3 pi / (8 dnu), the ideal M2S preparation time"""
    if not delta_nu > 0:
        raise ValueError(f"delta_nu must be positive, got {delta_nu}")
    return 3 * math.pi / (8 * delta_nu)


ROUND_TRIP_AMPLITUDE = 2.0 / 3.0


def slic_mx_model(delta_nu, tau_sl):
    """
    Ideal round-trip SLIC signal when only the singlet population survives evolution

    Each spin-lock moves a fraction sin^2(pi dnu tau_SL / sqrt 2) of the lower
    dressed triplet into the singlet; the trace-preserving filter leaves the
    singlet order at 4/3 of the singlet deviation, hence the 2/3 amplitude.
    """
    return ROUND_TRIP_AMPLITUDE * np.sin(math.pi * delta_nu * np.asarray(tau_sl) / math.sqrt(2)) ** 4


def _round_half_up(value):
    return int(math.floor(value + 0.5))


def m2s_params(j_hz, delta_nu, n1=None, n2=None, tau_mode='nu_e'):
    """
    Echo-train parameters of the M2S sequence

    Args:
        j_hz: J-coupling (Hz)
        delta_nu: Chemical-shift difference (Hz)
        n1: Optional override of the first train length
        n2: Optional override of the second train length (default round(n1/2))
        tau_mode: 'nu_e' for tau = 1/(4 sqrt(J^2 + dnu^2)), 'J' for tau = 1/(4J)

    Returns:
        M2SParams

    Raises:
        ValueError: Unless J > dnu > 0
    """
    if not (j_hz > delta_nu > 0):
        raise ValueError(f"M2S requires J > delta_nu > 0, got J={j_hz}, delta_nu={delta_nu}")
    if tau_mode not in ('nu_e', 'J'):
        raise ValueError(f"tau_mode must be 'nu_e' or 'J', got {tau_mode}")

    nu_e = math.hypot(j_hz, delta_nu)
    tau = 1.0 / (4 * (nu_e if tau_mode == 'nu_e' else j_hz))
    if n1 is None:
        n1 = _round_half_up(math.pi / (2 * math.atan(delta_nu / j_hz)))
    if n2 is None:
        n2 = _round_half_up(n1 / 2)
    return M2SParams(n1=int(n1), n2=int(n2), tau=tau, nu_e=nu_e)


def build_slic(nu_n, tau_sl, phase=0.0, tau_evolve=0.0, readout=True,
               filter_singlet=False, record_points=None):
    """
    SLIC experiment: 90 pulse, spin-lock, evolution, optional readout spin-lock

    The excitation pulse is applied at phase + pi/2 so the transverse
    magnetization lies along the spin-lock axis. Zero-length spin-locks are
    omitted, so tau_sl = 0 gives a plain pulse-acquire.
    """
    if tau_sl < 0:
        raise ValueError(f"tau_sl must be non-negative, got {tau_sl}")

    elements = [HardPulse(math.pi / 2, phase + math.pi / 2)]
    lock = SpinLock(nu_n, phase, tau_sl)
    if tau_sl > 0:
        elements.append(lock)
    if tau_evolve > 0 or filter_singlet:
        elements.append(Evolve(tau_evolve, filter_singlet))
    if readout and tau_sl > 0:
        elements.append(lock)
    return PulseSequence(tuple(elements), record_points, name='slic')


def build_m2s(params, tau_evolve=0.0, readout=True, phase=0.0,
              filter_singlet=False, record_points=None):
    """
    M2S experiment and its mirrored readout

    Forward part: 90 pulse, n1 echoes, 90 pulse shifted by pi/2, a tau delay,
    n2 echoes. The tau delay puts the second train in phase with the
    singlet-triplet coherence left by the middle pulse. The readout replays
    the transfer elements in reverse order after the evolution stage and is
    acquired without a final 90 pulse.

    Args:
        params: M2SParams
        tau_evolve: Evolution time between preparation and readout (s)
        readout: Append the reverse sequence
        phase: Phase reference (rad); excitation at phase + pi/2
        filter_singlet: Apply the ideal singlet filter at the end of the evolution stage
        record_points: Optional sample times

    Returns:
        PulseSequence
    """
    excitation = phase + math.pi / 2
    transfer = []
    if params.n1 > 0:
        transfer.append(EchoTrain(params.n1, params.tau, excitation))
    transfer.append(HardPulse(math.pi / 2, excitation + math.pi / 2))
    transfer.append(Delay(params.tau))
    if params.n2 > 0:
        transfer.append(EchoTrain(params.n2, params.tau, excitation))

    elements = [HardPulse(math.pi / 2, excitation)] + transfer
    if readout:
        if tau_evolve > 0 or filter_singlet:
            elements.append(Evolve(tau_evolve, filter_singlet))
        elements.extend(reversed(transfer))
    return PulseSequence(tuple(elements), record_points, name='m2s')


def expand_elements(elements):
    """Replace echo trains by their delay / pi pulse / delay repetitions"""
    expanded = []
    for element in elements:
        if isinstance(element, EchoTrain):
            expanded.extend(element.expand())
        else:
            expanded.append(element)
    return expanded


class _Reporter:
    """Normalized observable readout; deviations are divided by the reference transverse signal"""

    def __init__(self, system):
        self.system = system
        self.observables = spin_utils.observables(system.n_spins, system.pair)
        n = system.n_spins
        self.norm = Config.REFERENCE_POLARIZATION * n * system.dim / 4
        self.offsets = {
            label: float(np.real(np.trace(obs.matrix))) / system.dim if label.startswith('P_') else 0.0
            for label, obs in self.observables.items()
        }

    def read(self, rho):
        values = {}
        for label in OBSERVABLE_LABELS:
            obs = self.observables[label]
            if obs.components:
                raw = math.sqrt(sum(abs(np.trace(rho @ c)) ** 2 for c in obs.components))
            else:
                raw = float(np.real(np.trace(rho @ obs.matrix)))
            value = (raw - self.offsets[label]) / self.norm
            # Singlet depletion counts as positive singlet order; a lock along
            # the magnetization crosses the singlet with the depleted triplet.
            values[label] = -value if label == 'P_S0' else value
        return values


def _segments(seq, system, relax):
    n = system.n_spins
    lock_lifetime = relax.T_lock if relax is not None else None
    free = None
    for element in expand_elements(seq.elements):
        if isinstance(element, HardPulse):
            r = spin_utils.rotation_operator(n, element.flip, element.phase)
            yield 'pulse', r, 0.0
        elif isinstance(element, Delay):
            if free is None:
                free = spin_utils.Propagator(spin_utils.hamiltonian(system))
            yield 'coherent', (free, None), element.t
        elif isinstance(element, SpinLock):
            h = spin_utils.hamiltonian(system, element.nu_n, element.phase)
            yield 'coherent', (spin_utils.Propagator(h), lock_lifetime), element.tau_sl
        elif isinstance(element, Evolve):
            yield 'evolve', element.filter_singlet, element.tau_evolve
        else:
            raise ValueError(f"unknown sequence element: {element!r}")


def _advance(kind, payload, rho, dt, system, relax):
    if kind == 'pulse':
        return payload @ rho @ payload.conj().T
    if kind == 'coherent':
        propagator, lifetime = payload
        rho = propagator.apply(rho, dt) if dt > 0 else rho
        if lifetime is not None and dt > 0:
            rho = np.array(spin_utils.damp_deviation(DensityState(rho), dt, lifetime).matrix)
        return rho
    # evolve
    if relax is None or dt == 0:
        return rho
    state = spin_utils.apply_evolve_relaxation(DensityState(rho), relax, system.pair, dt)
    return np.array(state.matrix)


def execute(seq, system, relax=None, polarization=1.0, initial_state=None):
    """
    Run a pulse sequence and sample all observables at the record points

    Hard pulses are instantaneous and act before any sample taken at the same
    time. Delays and spin-locks evolve under the free or spin-lock Hamiltonian;
    evolve stages apply relaxation when relax is given, then the singlet
    filter when the element asks for it.

    Args:
        seq: PulseSequence
        system: SpinSystem
        relax: RelaxationParams or None
        polarization: Scale of the initial thermal deviation (1 = reference)
        initial_state: Optional DensityState replacing the thermal start

    Returns:
        Trajectory with observables normalized to the reference transverse signal
    """
    if initial_state is None:
        initial_state = spin_utils.thermal_state(system.n_spins, Config.REFERENCE_POLARIZATION * polarization)
    if initial_state.dim != system.dim:
        raise ValueError(f"initial state dimension {initial_state.dim} does not match system {system.dim}")

    reporter = _Reporter(system)
    rho = np.array(initial_state.matrix)
    points = list(seq.record_points)
    samples = []
    idx = 0
    t0 = 0.0

    for kind, payload, duration in _segments(seq, system, relax):
        if kind == 'pulse':
            rho = _advance(kind, payload, rho, 0.0, system, relax)
            continue
        t1 = t0 + duration
        while idx < len(points) and points[idx] < t1:
            samples.append(reporter.read(_advance(kind, payload, rho, points[idx] - t0, system, relax)))
            idx += 1
        rho = _advance(kind, payload, rho, duration, system, relax)
        if kind == 'evolve' and payload:
            rho = np.array(spin_utils.singlet_filter(DensityState(rho), system.pair).matrix)
        t0 = t1

    final_values = reporter.read(rho)
    while idx < len(points):
        samples.append(final_values)
        idx += 1

    columns = {label: tuple(s[label] for s in samples) for label in OBSERVABLE_LABELS}
    logger.debug("executed %s sequence: %d elements, %d samples", seq.name, len(seq.elements), len(samples))
    return Trajectory(
        times=tuple(points),
        columns=columns,
        final_state=DensityState(rho),
        final=final_values,
    )


def sequence_to_dict(seq):
    """Serialize to the JSON element schema (SI units, radians)"""
    elements = []
    for element in seq.elements:
        entry = {'type': _TYPE_NAMES[type(element)]}
        entry.update(asdict(element))
        elements.append(entry)
    return {'name': seq.name, 'elements': elements, 'record_points': list(seq.record_points)}


def sequence_from_dict(data, default_record_points=True):
    """
    Parse the JSON element schema

    Raises:
        ValueError: Naming the offending element index and field
    """
    elements = []
    for idx, entry in enumerate(data.get('elements', [])):
        kind = entry.get('type')
        cls = ELEMENT_TYPES.get(kind)
        if cls is None:
            raise ValueError(f"elements[{idx}].type: unknown element type {kind!r}")
        fields = {k: v for k, v in entry.items() if k != 'type'}
        try:
            elements.append(cls(**fields))
        except TypeError as e:
            raise ValueError(f"elements[{idx}]: {e}")
        except ValueError as e:
            raise ValueError(f"elements[{idx}]: {e}")

    record_points = data.get('record_points')
    if record_points is None and not default_record_points:
        record_points = ()
    return PulseSequence(tuple(elements), None if record_points is None else tuple(record_points),
                         name=data.get('name', 'custom'))
