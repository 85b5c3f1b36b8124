"""
Run configuration files

Provides helper functions for:
- Loading and validating versioned JSON run configurations
- Building the spin system, relaxation and pulse sequence they describe
- Expanding grid specifications

Validation happens before any computation. Failures raise ConfigError with
the dotted field path and, when it can be located, the line in the file.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from config import Config
from models import RelaxationParams, SpinSystem
from sequence_utils import (build_m2s, build_slic, m2s_params, optimal_slic_duration,
                            sequence_from_dict)

logger = logging.getLogger(__name__)

SEQUENCE_TYPES = ('slic', 'm2s', 'elements')
SCAN_KINDS = ('dip', 'duration', 'evolve')
OUTPUT_FORMATS = ('csv', 'json', 'xlsx')


class ConfigError(ValueError):
    """Invalid run configuration; field is the dotted path of the offending entry"""

    def __init__(self, field, message, line=None):
        self.field = field
        self.line = line
        self.message = message
        super().__init__(str(self))

    def __str__(self):
        where = f"[line {self.line}] " if self.line else ''
        return f"{where}{self.field}: {self.message}"


@dataclass
class RunConfig:
    system: SpinSystem
    relaxation: Optional[RelaxationParams] = None
    sequence: dict = field(default_factory=dict)
    scan: Optional[dict] = None
    efficiency: Optional[dict] = None
    output_path: Optional[str] = None
    output_format: Optional[str] = None
    seed: Optional[int] = None
    noise: float = 0.0
    threads: int = 1
    source: Optional[str] = None


class _Validator:
    """Walks the parsed document and reports errors with their line numbers"""

    def __init__(self, text):
        self.lines = text.splitlines()

    def line_of(self, path):
        key = path.split('.')[-1].split('[')[0]
        needle = f'"{key}"'
        for lineno, line in enumerate(self.lines, 1):
            if needle in line:
                return lineno
        return None

    def fail(self, path, message):
        raise ConfigError(path, message, self.line_of(path))

    def section(self, data, key, path, required=True):
        value = data.get(key)
        if value is None:
            if required:
                self.fail(f"{path}.{key}" if path else key, "missing field")
            return None
        if not isinstance(value, dict):
            self.fail(f"{path}.{key}" if path else key, "expected an object")
        return value

    def number(self, data, key, path, default=None, required=False, positive=False,
               non_negative=False):
        where = f"{path}.{key}" if path else key
        value = data.get(key, default)
        if value is None:
            if required:
                self.fail(where, "missing field")
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            self.fail(where, f"expected a finite number, got {value!r}")
        if positive and value <= 0:
            self.fail(where, f"must be positive, got {value}")
        if non_negative and value < 0:
            self.fail(where, f"must be non-negative, got {value}")
        return float(value)

    def integer(self, data, key, path, default=None, minimum=None):
        where = f"{path}.{key}" if path else key
        value = data.get(key, default)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(where, f"expected an integer, got {value!r}")
        if minimum is not None and value < minimum:
            self.fail(where, f"must be >= {minimum}, got {value}")
        return value

    def flag(self, data, key, path, default=False):
        value = data.get(key, default)
        if not isinstance(value, bool):
            self.fail(f"{path}.{key}", f"expected true or false, got {value!r}")
        return value

    def grid(self, spec, path, positive=False):
        """Expand {start, stop, num}, {values: [...]} or a plain list"""
        if isinstance(spec, list):
            spec = {'values': spec}
        if not isinstance(spec, dict):
            self.fail(path, "expected a grid object or a list of numbers")
        if 'values' in spec:
            values = spec['values']
            if not isinstance(values, list) or not values:
                self.fail(f"{path}.values", "expected a non-empty list")
            for i, v in enumerate(values):
                if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                    self.fail(f"{path}.values[{i}]", f"expected a finite number, got {v!r}")
            grid = [float(v) for v in values]
        else:
            start = self.number(spec, 'start', path, required=True)
            stop = self.number(spec, 'stop', path, required=True)
            num = self.integer(spec, 'num', path, minimum=1)
            if num is None:
                self.fail(f"{path}.num", "missing field")
            if stop < start:
                self.fail(f"{path}.stop", f"must be >= start ({start}), got {stop}")
            grid = np.linspace(start, stop, num).tolist()
        if positive and min(grid) <= 0:
            self.fail(path, "values must be positive")
        if min(grid) < 0:
            self.fail(path, "values must be non-negative")
        return sorted(grid)


def _system(v, data):
    spec = v.section(data, 'system', '')
    try:
        if 'offsets_hz' in spec:
            pair = spec.get('pair', [0, 1])
            return SpinSystem(offsets=spec['offsets_hz'], j_matrix=spec.get('j_hz'), pair=tuple(pair))
        j_hz = v.number(spec, 'j_hz', 'system', required=True)
        delta_nu = v.number(spec, 'delta_nu_hz', 'system', required=True)
        third = spec.get('third_spin')
        if third is not None and not isinstance(third, dict):
            v.fail('system.third_spin', "expected an object")
        return SpinSystem.from_pair(j_hz, delta_nu, third)
    except (TypeError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        v.fail('system', str(e))


def _relaxation(v, data):
    spec = v.section(data, 'relaxation', '', required=False)
    if spec is None:
        return None
    values = {key: v.number(spec, key, 'relaxation', positive=True)
              for key in ('T1', 'TS', 'T2', 'T_ST_coherence', 'T_lock')}
    for key in ('T1', 'TS'):
        if values[key] is None:
            v.fail(f"relaxation.{key}", "missing field")
    return RelaxationParams(**values)


def _record_points(v, spec, path):
    raw = spec.get('record_points')
    if raw is None:
        return None
    return tuple(v.grid(raw, f"{path}.record_points"))


def _sequence(v, data, system):
    spec = v.section(data, 'sequence', '', required=False)
    if spec is None:
        return {}
    kind = spec.get('type')
    if kind not in SEQUENCE_TYPES:
        v.fail('sequence.type', f"expected one of {SEQUENCE_TYPES}, got {kind!r}")

    result = {'type': kind, 'record_points': _record_points(v, spec, 'sequence')}
    if kind == 'elements':
        if not isinstance(spec.get('elements'), list):
            v.fail('sequence.elements', "expected a list")
        try:
            sequence_from_dict({'elements': spec['elements'], 'record_points': result['record_points']})
        except ValueError as e:
            where, _, message = str(e).partition(': ')
            v.fail(f"sequence.{where}", message)
        result['elements'] = spec['elements']
        return result

    result['phase'] = v.number(spec, 'phase_rad', 'sequence', default=0.0)
    result['tau_evolve'] = v.number(spec, 'tau_evolve_s', 'sequence', default=0.0, non_negative=True)
    result['readout'] = v.flag(spec, 'readout', 'sequence', default=False)
    result['filter_singlet'] = v.flag(spec, 'filter_singlet', 'sequence', default=False)

    if kind == 'slic':
        result['nu_n'] = v.number(spec, 'nu_n_hz', 'sequence', default=system.j_pair, non_negative=True)
        if spec.get('tau_sl_s', 'auto') == 'auto':
            if not system.delta_nu > 0:
                v.fail('sequence.tau_sl_s', "'auto' needs a positive pair delta_nu")
            result['tau_sl'] = optimal_slic_duration(abs(system.delta_nu))
        else:
            result['tau_sl'] = v.number(spec, 'tau_sl_s', 'sequence', non_negative=True)
        return result

    result['n1'] = v.integer(spec, 'n1', 'sequence', minimum=0)
    result['n2'] = v.integer(spec, 'n2', 'sequence', minimum=0)
    result['tau_mode'] = spec.get('tau_mode', 'nu_e')
    if result['tau_mode'] not in ('nu_e', 'J'):
        v.fail('sequence.tau_mode', f"expected 'nu_e' or 'J', got {result['tau_mode']!r}")
    try:
        m2s_params(system.j_pair, abs(system.delta_nu))
    except ValueError as e:
        v.fail('system', str(e))
    return result


def _scan(v, data, system, relaxation):
    spec = v.section(data, 'scan', '', required=False)
    if spec is None:
        return None
    kind = spec.get('type')
    if kind not in SCAN_KINDS:
        v.fail('scan.type', f"expected one of {SCAN_KINDS}, got {kind!r}")
    if 'grid' not in spec:
        v.fail('scan.grid', "missing field")

    result = {
        'type': kind,
        'grid': v.grid(spec['grid'], 'scan.grid', positive=(kind == 'dip')),
        'phase': v.number(spec, 'phase_rad', 'scan', default=0.0),
    }
    auto_tau = optimal_slic_duration(abs(system.delta_nu)) if system.delta_nu else None
    if kind == 'dip':
        result['tau_sl'] = v.number(spec, 'tau_sl_s', 'scan', required=True, positive=True)
    else:
        result['nu_n'] = v.number(spec, 'nu_n_hz', 'scan', default=system.j_pair, non_negative=True)
    if kind == 'duration':
        result['tau_evolve'] = v.number(spec, 'tau_evolve_s', 'scan', default=0.0, non_negative=True)
        result['filter_singlet'] = v.flag(spec, 'filter_singlet', 'scan', default=True)
    if kind == 'evolve':
        if relaxation is None:
            v.fail('relaxation', "evolve scans need relaxation parameters")
        if spec.get('tau_sl_s', 'auto') == 'auto':
            if auto_tau is None:
                v.fail('scan.tau_sl_s', "'auto' needs a positive pair delta_nu")
            result['tau_sl'] = auto_tau
        else:
            result['tau_sl'] = v.number(spec, 'tau_sl_s', 'scan', positive=True)
    return result


def _efficiency(v, data):
    spec = v.section(data, 'efficiency', '', required=False)
    if spec is None:
        return None
    if 't1_dnu' not in spec:
        v.fail('efficiency.t1_dnu', "missing field")
    ratios = spec.get('ts_t1_ratios', [3, 1000])
    if not isinstance(ratios, list) or not ratios:
        v.fail('efficiency.ts_t1_ratios', "expected a non-empty list")
    for i, r in enumerate(ratios):
        if isinstance(r, bool) or not isinstance(r, (int, float)) or not r > 0:
            v.fail(f"efficiency.ts_t1_ratios[{i}]", f"must be a positive number, got {r!r}")
    return {
        't1_dnu': v.grid(spec['t1_dnu'], 'efficiency.t1_dnu', positive=True),
        'ts_t1_ratios': [float(r) for r in ratios],
        'optimize_duration': v.flag(spec, 'optimize_duration', 'efficiency', default=False),
    }


def parse_run_config(text, source=None):
    """
    Validate a JSON document and return a RunConfig

    Raises:
        ConfigError: On the first invalid field
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError('document', f"invalid JSON: {e.msg}", e.lineno)
    v = _Validator(text)
    if not isinstance(data, dict):
        raise ConfigError('document', "expected a JSON object", 1)

    version = data.get('version')
    if version != Config.CONFIG_SCHEMA_VERSION:
        v.fail('version', f"expected {Config.CONFIG_SCHEMA_VERSION}, got {version!r}")

    system = _system(v, data)
    relaxation = _relaxation(v, data)

    output = v.section(data, 'output', '', required=False) or {}
    fmt = output.get('format')
    if fmt is not None and fmt not in OUTPUT_FORMATS:
        v.fail('output.format', f"expected one of {OUTPUT_FORMATS}, got {fmt!r}")
    path = output.get('path')
    if path is not None and not isinstance(path, str):
        v.fail('output.path', "expected a string")

    run = RunConfig(
        system=system,
        relaxation=relaxation,
        sequence=_sequence(v, data, system),
        scan=_scan(v, data, system, relaxation),
        efficiency=_efficiency(v, data),
        output_path=path,
        output_format=fmt,
        seed=v.integer(data, 'seed', ''),
        noise=v.number(data, 'noise', '', default=0.0, non_negative=True),
        threads=v.integer(data, 'threads', '', default=Config.DEFAULT_THREADS, minimum=1),
        source=source,
    )
    logger.debug("loaded run config %s", source or '<string>')
    return run


def load_run_config(path):
    """Read and validate a run configuration file"""
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigError('config', f"cannot read {path}: {e.strerror}")
    return parse_run_config(text, source=str(path))


def build_sequence(run):
    """PulseSequence described by run.sequence"""
    spec = run.sequence
    if not spec:
        raise ConfigError('sequence', "missing field")
    kind = spec['type']
    if kind == 'elements':
        return sequence_from_dict({'elements': spec['elements'], 'record_points': spec['record_points']})
    if kind == 'slic':
        return build_slic(spec['nu_n'], spec['tau_sl'], phase=spec['phase'],
                          tau_evolve=spec['tau_evolve'], readout=spec['readout'],
                          filter_singlet=spec['filter_singlet'], record_points=spec['record_points'])
    params = m2s_params(run.system.j_pair, abs(run.system.delta_nu), n1=spec['n1'], n2=spec['n2'],
                        tau_mode=spec['tau_mode'])
    return build_m2s(params, tau_evolve=spec['tau_evolve'], readout=spec['readout'], phase=spec['phase'],
                     filter_singlet=spec['filter_singlet'], record_points=spec['record_points'])
