import logging

import click

from config import Config


def create_app(config_class=Config):
    @click.group(context_settings={'help_option_names': ['-h', '--help']})
    @click.option('-v', '--verbose', count=True, help='Increase log verbosity (-v info, -vv debug)')
    @click.pass_context
    def app(ctx, verbose):
        """Singlet-state preparation simulator (SLIC and M2S)"""
        if verbose >= 2:
            level = logging.DEBUG
        elif verbose == 1:
            level = logging.INFO
        else:
            level = getattr(logging, str(config_class.LOG_LEVEL).upper(), logging.WARNING)
        logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s', force=True)
        ctx.obj = {'config': config_class}

    # Register commands
    from commands.simulate import simulate_cmd
    from commands.scan import scan_cmd
    from commands.efficiency import efficiency_cmd
    from commands.fit import fit_cmd, report_cmd
    from commands.m2s import m2s_params_cmd

    app.add_command(simulate_cmd)
    app.add_command(scan_cmd)
    app.add_command(efficiency_cmd)
    app.add_command(fit_cmd)
    app.add_command(report_cmd)
    app.add_command(m2s_params_cmd)

    return app


app = create_app()

if __name__ == '__main__':
    app()
