"""
Shared command helpers

Provides helper functions for:
- Mapping domain exceptions to exit codes (2 input, 3 numerical)
- The --config / --output / --format / --seed / --threads options
- Resolving the output path and format of a run
"""

import functools
import logging
from pathlib import Path

import click

from config_utils import ConfigError, load_run_config
from export_utils import FORMATS, infer_format
from models import NumericalError

logger = logging.getLogger(__name__)

EXIT_INPUT = 2
EXIT_NUMERICAL = 3


def handle_errors(func):
    """Turn ConfigError / ValueError into exit 2 and NumericalError into exit 3"""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return func(*args, **kwargs)
        except ConfigError as e:
            click.echo(f"✗ config error {e}", err=True)
            ctx.exit(EXIT_INPUT)
        except NumericalError as e:
            logger.debug("numerical failure", exc_info=True)
            click.echo(f"✗ numerical error: {e}", err=True)
            ctx.exit(EXIT_NUMERICAL)
        except ValueError as e:
            click.echo(f"✗ input error: {e}", err=True)
            ctx.exit(EXIT_INPUT)
    return wrapper


def run_options(func):
    """Options shared by the config-driven commands"""
    options = [
        click.option('--config', 'config_path', required=True, type=click.Path(dir_okay=False),
                     help='Run configuration (JSON)'),
        click.option('--output', 'output_path', type=click.Path(dir_okay=False),
                     help='Output file (overrides output.path)'),
        click.option('--format', 'fmt', type=click.Choice(FORMATS), help='Output format (overrides output.format)'),
        click.option('--seed', type=int, help='Noise seed (overrides seed)'),
        click.option('--threads', type=click.IntRange(min=1), help='Worker threads for scan points'),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def load(config_path, seed=None, threads=None):
    run = load_run_config(config_path)
    if seed is not None:
        run.seed = seed
    if threads is not None:
        run.threads = threads
    return run


def resolve_output(run, output_path, fmt, default_stem):
    """Output path and format: flags, then the config, then <stem>.csv"""
    path = output_path or run.output_path
    fmt = fmt or run.output_format
    if path is None:
        path = f"{default_stem}.{fmt or 'csv'}"
    return Path(path), infer_format(path, fmt)
