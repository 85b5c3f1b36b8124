import logging
from pathlib import Path

import click

from commands.common import handle_errors, load, resolve_output, run_options
from config_utils import ConfigError
from export_utils import write_curve
from scan_utils import dip_scan, duration_scan, evolve_scan

logger = logging.getLogger(__name__)


def run_scan(run):
    """ScanCurve for the scan section of a RunConfig"""
    spec = run.scan
    if spec is None:
        raise ConfigError('scan', "missing field")
    common = {'noise': run.noise, 'seed': run.seed, 'threads': run.threads, 'phase': spec['phase']}

    if spec['type'] == 'dip':
        return dip_scan(run.system, spec['tau_sl'], spec['grid'], relax=run.relaxation, **common)
    if spec['type'] == 'duration':
        return duration_scan(run.system, spec['nu_n'], spec['grid'], tau_evolve=spec['tau_evolve'],
                             relax=run.relaxation, filter_singlet=spec['filter_singlet'], **common)
    return evolve_scan(run.system, spec['nu_n'], spec['tau_sl'], spec['grid'], run.relaxation, **common)


@click.command('scan')
@run_options
@handle_errors
def scan_cmd(config_path, output_path, fmt, seed, threads):
    """Run the configured dip, duration or evolve scan and write the curve"""
    run = load(config_path, seed, threads)
    path, fmt = resolve_output(run, output_path, fmt, Path(config_path).stem)

    curve = run_scan(run)
    write_curve(curve, path, fmt)

    best = min(range(len(curve)), key=curve.y.__getitem__) if curve.scan_type == 'dip' \
        else max(range(len(curve)), key=curve.y.__getitem__)
    label = 'minimum' if curve.scan_type == 'dip' else 'maximum'
    logger.info("%s scan %s at x = %.6g: %.6g", curve.scan_type, label, curve.x[best], curve.y[best])
    click.echo(f"✓ {curve.scan_type} scan: {len(curve)} points, {label} {curve.y[best]:.4f} "
               f"at x = {curve.x[best]:.6g}")
    click.echo(f"✓ wrote {path}")
