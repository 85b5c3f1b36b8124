import json
from pathlib import Path

import click

from commands.common import handle_errors
from export_utils import read_curve
from fit_utils import MODELS, fit_curve
from pdf_generator import FitReportPDF


@click.command('fit')
@click.argument('curve_path', type=click.Path(exists=True, dir_okay=False))
@click.option('--model', required=True, type=click.Choice(MODELS), help='Fit model')
@click.option('--output', 'output_path', type=click.Path(dir_okay=False), help='Also write the result JSON here')
@handle_errors
def fit_cmd(curve_path, model, output_path):
    """Fit a curve file and print the FitResult as JSON"""
    curve = read_curve(curve_path)
    result = fit_curve(curve, model)
    text = json.dumps(result.to_dict(), sort_keys=True, indent=2)
    click.echo(text)
    if output_path:
        Path(output_path).write_text(text + '\n', encoding='utf-8')
    if not result.converged:
        click.echo(f"✗ fit did not converge: {result.message}", err=True)


@click.command('report')
@click.argument('curve_path', type=click.Path(exists=True, dir_okay=False))
@click.option('--model', required=True, type=click.Choice(MODELS), help='Fit model')
@click.option('--output', 'output_path', default='fit_report.pdf', show_default=True,
              type=click.Path(dir_okay=False), help='PDF file')
@handle_errors
def report_cmd(curve_path, model, output_path):
    """Fit a curve file and write a PDF report"""
    curve = read_curve(curve_path)
    result = fit_curve(curve, model)
    buffer = FitReportPDF().generate(result, curve, source=Path(curve_path).name)
    Path(output_path).write_bytes(buffer.getvalue())
    click.echo(f"✓ wrote {output_path}")
