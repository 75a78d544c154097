import logging

import click

from config import get_config
from higru import __version__
from higru.commands.options import profile_defaults, read_config_file


def _resolve_defaults(ctx, profile, config_file):
    """Layer profile attributes and the --config file into the subcommand's default_map"""
    command = ctx.command.get_command(ctx, ctx.invoked_subcommand) if ctx.invoked_subcommand else None
    if command is None:
        return
    params = {p.name: p for p in command.params}
    defaults = {}
    defaults.update(profile_defaults(profile, params, ctx.invoked_subcommand))
    if config_file:
        values = read_config_file(config_file, params, ctx.invoked_subcommand)
        for name, value in values.items():
            if params[name].multiple and isinstance(value, str):
                value = [value]
            defaults[name] = value
    ctx.default_map = {ctx.invoked_subcommand: defaults}


def create_cli():
    """Command-line factory"""

    @click.group(context_settings={'help_option_names': ['-h', '--help']})
    @click.option('--profile', help='Configuration profile (default: $HIGRU_PROFILE or "default")')
    @click.option('--config', 'config_file', type=click.Path(exists=True, dir_okay=False),
                  help='JSON file of option values')
    @click.option('--log-level', help='Logging level (default from the profile)')
    @click.version_option(version=__version__, prog_name='higru')
    @click.pass_context
    def cli(ctx, profile, config_file, log_level):
        """HiGRU dialogue emotion recognition"""
        try:
            selected = get_config(profile)
        except KeyError as e:
            raise click.UsageError(str(e.args[0]))
        logging.basicConfig(level=(log_level or selected.LOG_LEVEL).upper(),
                            format='%(asctime)s %(levelname)s %(name)s: %(message)s')
        ctx.obj = {'profile': selected}
        _resolve_defaults(ctx, selected, config_file)

    # Register commands
    from higru.commands.train import train_cmd
    from higru.commands.evaluate import eval_cmd
    from higru.commands.predict import predict_cmd
    from higru.commands.sweep import sweep_cmd
    from higru.commands.stats import stats_cmd
    from higru.commands.trials import trials_cmd

    cli.add_command(train_cmd)
    cli.add_command(eval_cmd)
    cli.add_command(predict_cmd)
    cli.add_command(sweep_cmd)
    cli.add_command(stats_cmd)
    cli.add_command(trials_cmd)

    return cli
