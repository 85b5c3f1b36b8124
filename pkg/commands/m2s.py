import click

from commands.common import handle_errors
from sequence_utils import ideal_m2s_duration, m2s_params, optimal_slic_duration


@click.command('m2s-params')
@click.option('--j', 'j_hz', required=True, type=float, help='J-coupling (Hz)')
@click.option('--dnu', 'delta_nu', required=True, type=float, help='Chemical-shift difference (Hz)')
@click.option('--n1', type=click.IntRange(min=0), help='Override the first echo-train length')
@click.option('--n2', type=click.IntRange(min=0), help='Override the second echo-train length')
@click.option('--tau-mode', type=click.Choice(['nu_e', 'J']), default='nu_e', show_default=True,
              help='Echo spacing from the effective frequency or from J alone')
@handle_errors
def m2s_params_cmd(j_hz, delta_nu, n1, n2, tau_mode):
    """Print M2S echo-train parameters and the ideal SLIC / M2S times"""
    params = m2s_params(j_hz, delta_nu, n1=n1, n2=n2, tau_mode=tau_mode)
    click.echo(f"n1 = {params.n1}")
    click.echo(f"n2 = {params.n2}")
    click.echo(f"tau = {params.tau * 1e3:.4f} ms")
    click.echo(f"nu_e = {params.nu_e:.4f} Hz")
    click.echo(f"total duration = {params.total_duration:.4f} s")
    click.echo(f"t_SLIC = {optimal_slic_duration(delta_nu):.4f} s")
    click.echo(f"t_M2S = {ideal_m2s_duration(delta_nu):.4f} s")
