import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from app import create_app
from config import Config
from export_utils import read_curve, read_table

CONFIG_DIR = Path(Config.CONFIG_DIR)


@pytest.fixture
def app():
    return create_app()


@pytest.fixture
def runner(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return CliRunner()


def _slic_config(**overrides):
    data = {
        'version': 1,
        'system': {'j_hz': 17.5, 'delta_nu_hz': 2.15},
        'sequence': {'type': 'slic', 'nu_n_hz': 17.5, 'tau_sl_s': 'auto'},
    }
    data.update(overrides)
    return data


class TestM2SParams:
    def test_strongly_coupled_echo_counts(self, app, runner):
        result = runner.invoke(app, ['m2s-params', '--j', '17.4', '--dnu', '2.8'])
        assert result.exit_code == 0
        assert 'n1 = 10' in result.output
        assert 'n2 = 5' in result.output

    def test_slic_time_shorter_than_m2s(self, app, runner):
        result = runner.invoke(app, ['m2s-params', '--j', '17.5', '--dnu', '2.15'])
        assert result.exit_code == 0
        times = {}
        for line in result.output.splitlines():
            if line.startswith('t_'):
                name, _, value = line.partition(' = ')
                times[name] = float(value.split()[0])
        assert times['t_SLIC'] < times['t_M2S']

    def test_weak_coupling_is_input_error(self, app, runner):
        result = runner.invoke(app, ['m2s-params', '--j', '2', '--dnu', '3'])
        assert result.exit_code == 2
        assert '✗' in result.output


class TestSimulate:
    def test_bundled_slic_reaches_half_singlet(self, app, runner):
        result = runner.invoke(app, ['simulate', '--config', str(CONFIG_DIR / 'fig1d_slic.json')])
        assert result.exit_code == 0, result.output

        _, columns, rows = read_table('out/fig1d_slic.csv')
        p_s0 = [row[columns.index('P_S0')] for row in rows]
        assert len(rows) == Config.DEFAULT_RECORD_POINTS
        assert max(p_s0) >= 0.49

    def test_verbose_run_logs_singlet_peak(self, app, runner):
        result = runner.invoke(app, ['-v', 'simulate', '--config', str(CONFIG_DIR / 'fig1b_m2s.json')])
        assert result.exit_code == 0, result.output
        assert 'INFO commands.simulate: m2s: peak P_S0' in result.output

    def test_empty_sequence_writes_header_only(self, app, runner, write_config):
        path = write_config(_slic_config(sequence={'type': 'elements', 'elements': []}))
        result = runner.invoke(app, ['simulate', '--config', str(path), '--output', 'empty.csv'])
        assert result.exit_code == 0, result.output
        _, _, rows = read_table('empty.csv')
        assert rows == []

    def test_output_defaults_to_config_stem(self, app, runner, write_config):
        path = write_config(_slic_config(), name='my_run.json')
        result = runner.invoke(app, ['simulate', '--config', str(path)])
        assert result.exit_code == 0, result.output
        assert Path('my_run.csv').exists()

    def test_wrong_version_exits_2(self, app, runner, write_config):
        path = write_config(_slic_config(version=2))
        result = runner.invoke(app, ['simulate', '--config', str(path)])
        assert result.exit_code == 2
        assert 'version' in result.output
        assert 'line 2' in result.output

    def test_missing_config_file_exits_2(self, app, runner):
        result = runner.invoke(app, ['simulate', '--config', 'nowhere.json'])
        assert result.exit_code == 2


class TestScanAndFit:
    def test_dip_scan_then_lorentzian_fit(self, app, runner):
        result = runner.invoke(app, ['scan', '--config', str(CONFIG_DIR / 'fig3a_dip.json')])
        assert result.exit_code == 0, result.output
        curve = read_curve('out/fig3a_dip.csv')
        assert curve.scan_type == 'dip' and len(curve) == 101

        result = runner.invoke(app, ['fit', 'out/fig3a_dip.csv', '--model', 'lorentzian', '--output', 'fit.json'])
        assert result.exit_code == 0, result.output
        fit = json.loads(Path('fit.json').read_text())
        assert abs(fit['params']['center'] - 17.5) < 0.2

    def test_scans_are_deterministic(self, app, runner, write_config):
        path = write_config(_slic_config(
            scan={'type': 'dip', 'tau_sl_s': 0.3, 'grid': {'start': 16, 'stop': 19, 'num': 7}},
            noise=0.01, seed=5))
        first = runner.invoke(app, ['scan', '--config', str(path), '--output', 'a.csv', '--threads', '1'])
        second = runner.invoke(app, ['scan', '--config', str(path), '--output', 'b.csv', '--threads', '3'])
        assert first.exit_code == 0 and second.exit_code == 0
        assert Path('a.csv').read_bytes() == Path('b.csv').read_bytes()

    def test_verbose_scan_logs_extremum(self, app, runner, write_config):
        path = write_config(_slic_config(
            scan={'type': 'dip', 'tau_sl_s': 0.3, 'grid': {'start': 16, 'stop': 19, 'num': 7}}))
        result = runner.invoke(app, ['-v', 'scan', '--config', str(path), '--output', 'dip.csv'])
        assert result.exit_code == 0, result.output
        assert 'INFO commands.scan: dip scan minimum' in result.output

    def test_fit_rejects_trajectory_file(self, app, runner):
        runner.invoke(app, ['simulate', '--config', str(CONFIG_DIR / 'fig1d_slic.json')])
        result = runner.invoke(app, ['fit', 'out/fig1d_slic.csv', '--model', 'lorentzian'])
        assert result.exit_code == 2
        assert 'schema' in result.output

    def test_report_writes_pdf(self, app, runner, write_config):
        path = write_config(_slic_config(
            scan={'type': 'duration', 'grid': {'start': 0, 'stop': 0.8, 'num': 41}}))
        assert runner.invoke(app, ['scan', '--config', str(path), '--output', 'dur.csv']).exit_code == 0

        result = runner.invoke(app, ['report', 'dur.csv', '--model', 'sin4', '--output', 'report.pdf'])
        assert result.exit_code == 0, result.output
        assert Path('report.pdf').read_bytes().startswith(b'%PDF')


class TestEfficiency:
    def test_slic_never_below_m2s(self, app, runner, write_config):
        path = write_config(_slic_config(efficiency={'t1_dnu': [0.2, 1, 5], 'ts_t1_ratios': [3]}))
        result = runner.invoke(app, ['efficiency', '--config', str(path), '--output', 'eff.csv'])
        assert result.exit_code == 0, result.output

        _, columns, rows = read_table('eff.csv')
        assert len(rows) == 3
        for row in rows:
            assert row[columns.index('eff_slic')] >= row[columns.index('eff_m2s')]

    def test_step_underflow_exits_3(self, app, runner, write_config):
        path = write_config(_slic_config(efficiency={'t1_dnu': [1e-6], 'ts_t1_ratios': [3]}))
        result = runner.invoke(app, ['efficiency', '--config', str(path), '--output', 'eff.csv'])
        assert result.exit_code == 3
        assert 'numerical' in result.output
