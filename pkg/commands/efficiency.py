from pathlib import Path

import click

from commands.common import handle_errors, load, resolve_output, run_options
from config_utils import ConfigError
from export_utils import write_efficiency
from rate_utils import efficiency_curve


def efficiency_rows(spec, threads=1):
    """One row per (TS/T1, T1 dnu) with both sequence efficiencies"""
    rows = []
    for ratio in spec['ts_t1_ratios']:
        m2s = efficiency_curve('m2s', spec['t1_dnu'], ratio, spec['optimize_duration'], threads)
        slic = efficiency_curve('slic', spec['t1_dnu'], ratio, spec['optimize_duration'], threads)
        for x, eff_m2s, eff_slic in zip(m2s.x, m2s.y, slic.y):
            rows.append({'ts_t1_ratio': ratio, 'T1_dnu': x, 'eff_m2s': eff_m2s, 'eff_slic': eff_slic})
    return rows


@click.command('efficiency')
@run_options
@handle_errors
def efficiency_cmd(config_path, output_path, fmt, seed, threads):
    """Compare M2S and SLIC transfer efficiency against T1 * dnu"""
    run = load(config_path, seed, threads)
    if run.efficiency is None:
        raise ConfigError('efficiency', "missing field")
    path, fmt = resolve_output(run, output_path, fmt, Path(config_path).stem)

    rows = efficiency_rows(run.efficiency, run.threads)
    write_efficiency(rows, path, fmt, {'optimize_duration': run.efficiency['optimize_duration']})

    wins = sum(1 for row in rows if row['eff_slic'] >= row['eff_m2s'])
    click.echo(f"✓ {len(rows)} rows, SLIC >= M2S in {wins}")
    click.echo(f"✓ wrote {path}")
