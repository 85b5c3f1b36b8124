"""
Table export and import for simulation results

Provides helper functions for:
- Writing scan curves, trajectories and efficiency tables as CSV, JSON or XLSX
- Reading curve files back for fitting

Every file carries a header (schema, version, units, metadata). CSV headers
are '#' comment lines holding JSON values, then a comma-separated column row.
Floats are written with repr() so values round-trip exactly and repeated
runs produce identical CSV and JSON bytes.
"""

import csv
import json
import logging
import math
from pathlib import Path

import openpyxl

from models import OBSERVABLE_LABELS, ScanCurve

logger = logging.getLogger(__name__)

FORMATS = ('csv', 'json', 'xlsx')
FILE_VERSION = 1

COLUMN_UNITS = {
    't': 's',
    'nu_n_hz': 'Hz',
    'tau_sl_s': 's',
    'tau_evolve_s': 's',
    'T1_dnu': '1',
    'ts_t1_ratio': '1',
    'eff_m2s': '1',
    'eff_slic': '1',
    'efficiency': '1',
    'normalized_mx': '1',
}
COLUMN_UNITS.update({label: '1' for label in OBSERVABLE_LABELS})

TRAJECTORY_COLUMNS = ('t',) + OBSERVABLE_LABELS
EFFICIENCY_COLUMNS = ('ts_t1_ratio', 'T1_dnu', 'eff_m2s', 'eff_slic')


def format_float(value):
    value = float(value)
    if math.isnan(value):
        return 'nan'
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    return repr(value)


def infer_format(path, fmt=None):
    """Explicit format wins; otherwise use the file suffix, defaulting to csv"""
    if fmt:
        if fmt not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
        return fmt
    suffix = Path(path).suffix.lstrip('.').lower()
    return suffix if suffix in FORMATS else 'csv'


def _header(schema, columns, metadata, scan_type=None):
    header = {
        'schema': schema,
        'version': FILE_VERSION,
        'units': {c: COLUMN_UNITS.get(c, '1') for c in columns},
        'metadata': metadata or {},
    }
    if scan_type is not None:
        header['scan_type'] = scan_type
    return header


def _dumps(value):
    return json.dumps(value, sort_keys=True)


def _write_csv(path, header, columns, rows):
    with open(path, 'w', newline='', encoding='utf-8') as f:
        for key in sorted(header):
            f.write(f"# {key}: {_dumps(header[key])}\n")
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_float(v) for v in row])


def _write_json(path, header, columns, rows):
    document = dict(header, columns=list(columns), rows=[[float(v) for v in row] for row in rows])
    with open(path, 'w', encoding='utf-8') as f:
        f.write(json.dumps(document, sort_keys=True, indent=2))
        f.write('\n')


def _write_xlsx(path, header, columns, rows):
    wb = openpyxl.Workbook()
    ws = wb.active
    ws.title = 'data'
    ws.append(list(columns))
    for row in rows:
        ws.append([float(v) for v in row])

    meta = wb.create_sheet('header')
    meta.append(['key', 'value'])
    for key in sorted(header):
        meta.append([key, _dumps(header[key])])
    wb.save(path)


_WRITERS = {'csv': _write_csv, 'json': _write_json, 'xlsx': _write_xlsx}


def write_table(path, columns, rows, schema, metadata=None, fmt=None, scan_type=None):
    """
    Write a numeric table with its header

    Args:
        path: Output file path
        columns: Column names
        rows: Iterable of equal-length numeric rows
        schema: 'scan_curve', 'trajectory' or 'efficiency'
        metadata: JSON-serializable dict
        fmt: 'csv', 'json' or 'xlsx' (default: from suffix)
        scan_type: Stored for scan curves

    Returns:
        Path: The written file
    """
    fmt = infer_format(path, fmt)
    rows = [tuple(row) for row in rows]
    for idx, row in enumerate(rows):
        if len(row) != len(columns):
            raise ValueError(f"rows[{idx}] has {len(row)} values for {len(columns)} columns")
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    _WRITERS[fmt](path, _header(schema, columns, metadata, scan_type), columns, rows)
    logger.info("wrote %s table (%d rows) to %s", schema, len(rows), path)
    return path


def write_curve(curve, path, fmt=None):
    metadata = dict(curve.metadata)
    columns = (metadata.get('x_label', 'x'), metadata.get('y_label', 'y'))
    return write_table(path, columns, zip(curve.x, curve.y), 'scan_curve', metadata, fmt,
                       scan_type=curve.scan_type)


def write_trajectory(trajectory, path, fmt=None, metadata=None):
    rows = [
        (t,) + tuple(trajectory.columns[label][i] for label in OBSERVABLE_LABELS)
        for i, t in enumerate(trajectory.times)
    ]
    return write_table(path, TRAJECTORY_COLUMNS, rows, 'trajectory', metadata, fmt)


def write_efficiency(rows, path, fmt=None, metadata=None):
    """rows: dicts keyed by EFFICIENCY_COLUMNS"""
    table = [tuple(row[c] for c in EFFICIENCY_COLUMNS) for row in rows]
    return write_table(path, EFFICIENCY_COLUMNS, table, 'efficiency', metadata, fmt)


def _parse_float(value, where):
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ValueError(f"{where}: not a number: {value!r}")


def _read_csv(path):
    header = {}
    with open(path, newline='', encoding='utf-8') as f:
        lines = f.read().splitlines()
    body = []
    for lineno, line in enumerate(lines, 1):
        if line.startswith('#'):
            key, sep, value = line[1:].partition(':')
            if not sep:
                raise ValueError(f"line {lineno}: header line lacks 'key: value'")
            try:
                header[key.strip()] = json.loads(value)
            except json.JSONDecodeError as e:
                raise ValueError(f"line {lineno}: header {key.strip()}: {e.msg}")
        elif line.strip():
            body.append((lineno, line))
    if not body:
        raise ValueError("columns: missing column row")
    reader = csv.reader([line for _, line in body])
    columns = next(reader)
    rows = []
    for (lineno, _), row in zip(body[1:], reader):
        rows.append(tuple(_parse_float(v, f"line {lineno}") for v in row))
    return header, columns, rows


def _read_json(path):
    with open(path, encoding='utf-8') as f:
        try:
            document = json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError(f"line {e.lineno}: {e.msg}")
    if not isinstance(document, dict):
        raise ValueError("document: expected a JSON object")
    for key in ('columns', 'rows'):
        if key not in document:
            raise ValueError(f"{key}: missing field")
    header = {k: v for k, v in document.items() if k not in ('columns', 'rows')}
    rows = [tuple(_parse_float(v, f"rows[{i}]") for v in row) for i, row in enumerate(document['rows'])]
    return header, list(document['columns']), rows


def _read_xlsx(path):
    wb = openpyxl.load_workbook(path, data_only=True)
    if 'data' not in wb.sheetnames:
        raise ValueError("data: missing worksheet")
    header = {}
    if 'header' in wb.sheetnames:
        for key, value in wb['header'].iter_rows(min_row=2, values_only=True):
            header[key] = json.loads(value)
    values = list(wb['data'].iter_rows(values_only=True))
    if not values:
        raise ValueError("columns: missing column row")
    columns = [str(c) for c in values[0]]
    rows = [tuple(_parse_float(v, f"row {i}") for v in row) for i, row in enumerate(values[1:], 2)]
    return header, columns, rows


_READERS = {'csv': _read_csv, 'json': _read_json, 'xlsx': _read_xlsx}


def read_table(path, fmt=None):
    """
    Read a table written by write_table

    Returns:
        tuple: (header dict, column names, rows)

    Raises:
        ValueError: Naming the offending line or field
    """
    fmt = infer_format(path, fmt)
    header, columns, rows = _READERS[fmt](path)
    for idx, row in enumerate(rows):
        if len(row) != len(columns):
            raise ValueError(f"rows[{idx}]: {len(row)} values for {len(columns)} columns")
    return header, columns, rows


def read_curve(path, fmt=None):
    """
    Load a ScanCurve file

    Raises:
        ValueError: If the file is not a two-column scan_curve table
    """
    header, columns, rows = read_table(path, fmt)
    if header.get('schema') != 'scan_curve':
        raise ValueError(f"schema: expected 'scan_curve', got {header.get('schema')!r}")
    if 'scan_type' not in header:
        raise ValueError("scan_type: missing field")
    if len(columns) != 2:
        raise ValueError(f"columns: expected 2 columns (x, y), got {len(columns)}")
    x = tuple(row[0] for row in rows)
    y = tuple(row[1] for row in rows)
    metadata = dict(header.get('metadata') or {})
    return ScanCurve(header['scan_type'], x, y, metadata)
