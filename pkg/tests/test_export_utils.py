import math

import pytest

from export_utils import (EFFICIENCY_COLUMNS, TRAJECTORY_COLUMNS, infer_format, read_curve, read_table,
                          write_curve, write_efficiency, write_table, write_trajectory)
from models import ScanCurve
from sequence_utils import build_slic, execute


def _curve():
    x = [0.0, 0.1, 0.2, 1 / 3]
    y = [0.0, 0.123456789012345678, 2 / 3, 1e-17]
    return ScanCurve('duration', x, y, {'x_label': 'tau_sl_s', 'y_label': 'normalized_mx', 'seed': 7})


@pytest.mark.parametrize('fmt', ['csv', 'json', 'xlsx'])
def test_curve_round_trip_is_lossless(tmp_path, fmt):
    curve = _curve()
    path = write_curve(curve, tmp_path / f"curve.{fmt}")
    restored = read_curve(path)

    assert restored.scan_type == 'duration'
    assert restored.x == curve.x
    assert restored.y == curve.y
    assert restored.metadata['seed'] == 7


def test_csv_header_carries_units_and_schema(tmp_path):
    path = write_curve(_curve(), tmp_path / 'curve.csv')
    header, columns, rows = read_table(path)

    assert header['schema'] == 'scan_curve'
    assert header['version'] == 1
    assert header['units'] == {'tau_sl_s': 's', 'normalized_mx': '1'}
    assert columns == ['tau_sl_s', 'normalized_mx']
    assert len(rows) == 4
    assert path.read_text().startswith('#')


@pytest.mark.parametrize('fmt', ['csv', 'json'])
def test_repeated_writes_are_byte_identical(tmp_path, fmt):
    a = write_curve(_curve(), tmp_path / f"a.{fmt}")
    b = write_curve(_curve(), tmp_path / f"b.{fmt}")
    assert a.read_bytes() == b.read_bytes()


def test_read_curve_rejects_other_schemas(tmp_path):
    path = write_efficiency([{c: 1.0 for c in EFFICIENCY_COLUMNS}], tmp_path / 'eff.csv')
    with pytest.raises(ValueError, match='schema'):
        read_curve(path)


def test_read_table_reports_bad_number(tmp_path):
    path = tmp_path / 'broken.csv'
    path.write_text('# schema: "scan_curve"\n# scan_type: "dip"\nx,y\n1.0,abc\n')
    with pytest.raises(ValueError, match='line 4'):
        read_table(path)


def test_trajectory_columns(tmp_path, pair_system, t_slic):
    trajectory = execute(build_slic(17.5, t_slic, readout=False, record_points=(0.0, t_slic)), pair_system)
    path = write_trajectory(trajectory, tmp_path / 'traj.csv', metadata={'sequence': 'slic'})
    header, columns, rows = read_table(path)

    assert tuple(columns) == TRAJECTORY_COLUMNS
    assert header['schema'] == 'trajectory'
    assert header['units']['t'] == 's'
    assert rows[1][columns.index('P_S0')] == trajectory.column('P_S0')[1]


def test_empty_trajectory_writes_header_only(tmp_path, pair_system):
    from models import PulseSequence

    trajectory = execute(PulseSequence(()), pair_system)
    path = write_trajectory(trajectory, tmp_path / 'empty.csv')
    header, columns, rows = read_table(path)
    assert tuple(columns) == TRAJECTORY_COLUMNS
    assert rows == []


def test_efficiency_table(tmp_path):
    rows = [
        {'ts_t1_ratio': 3.0, 'T1_dnu': 0.5, 'eff_m2s': 0.41, 'eff_slic': 0.55},
        {'ts_t1_ratio': 3.0, 'T1_dnu': 5.0, 'eff_m2s': 0.92, 'eff_slic': 0.95},
    ]
    path = write_efficiency(rows, tmp_path / 'eff.json')
    header, columns, table = read_table(path)
    assert tuple(columns) == EFFICIENCY_COLUMNS
    assert table[1] == (3.0, 5.0, 0.92, 0.95)


def test_non_finite_values_survive_csv(tmp_path):
    path = write_table(tmp_path / 't.csv', ('a', 'b'), [(math.inf, -math.inf)], 'efficiency')
    _, _, rows = read_table(path)
    assert rows == [(math.inf, -math.inf)]


def test_row_length_checked(tmp_path):
    with pytest.raises(ValueError, match='rows'):
        write_table(tmp_path / 't.csv', ('a', 'b'), [(1.0,)], 'efficiency')


def test_output_directory_created(tmp_path):
    path = write_curve(_curve(), tmp_path / 'nested' / 'dir' / 'curve.csv')
    assert path.exists()


def test_infer_format():
    assert infer_format('out.xlsx') == 'xlsx'
    assert infer_format('out.dat') == 'csv'
    assert infer_format('out.csv', 'json') == 'json'
    with pytest.raises(ValueError):
        infer_format('out.csv', 'hdf5')
