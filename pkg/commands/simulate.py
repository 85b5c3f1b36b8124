import logging
from pathlib import Path

import click
import numpy as np

from commands.common import handle_errors, load, resolve_output, run_options
from config_utils import build_sequence
from export_utils import write_trajectory
from sequence_utils import execute, sequence_to_dict

logger = logging.getLogger(__name__)


@click.command('simulate')
@run_options
@handle_errors
def simulate_cmd(config_path, output_path, fmt, seed, threads):
    """Run the configured sequence and write the observable trajectory"""
    run = load(config_path, seed, threads)
    seq = build_sequence(run)
    path, fmt = resolve_output(run, output_path, fmt, Path(config_path).stem)

    trajectory = execute(seq, run.system, run.relaxation)
    metadata = {
        'system': run.system.to_dict(),
        'relaxation': run.relaxation.to_dict() if run.relaxation else None,
        'sequence': sequence_to_dict(seq)['elements'],
        'sequence_name': seq.name,
        'total_duration_s': seq.total_duration,
    }
    write_trajectory(trajectory, path, fmt, metadata)

    if trajectory.times:
        p_s0 = trajectory.column('P_S0')
        peak = int(np.argmax(np.abs(p_s0)))
        logger.info("%s: peak P_S0 %.6g at t = %.6g s of %.6g s", seq.name, p_s0[peak],
                    trajectory.times[peak], seq.total_duration)
        click.echo(f"✓ {seq.name}: {len(trajectory.times)} samples, "
                   f"peak P_S0 = {p_s0[peak]:.4f} at t = {trajectory.times[peak]:.4f} s")
    else:
        click.echo(f"✓ {seq.name}: no record points")
    click.echo(f"✓ wrote {path}")
