import os

import click

from higru.commands.common import prepare_data, run_training
from higru.commands.options import RunConfig, handle_errors, model_options, training_options


def cmd_train(run):
    """Train one model; write best checkpoint, history.csv and the validation report"""
    out_dir = run.paths['out']
    data = prepare_data(run)
    summary = run_training(run, data, out_dir, checkpoint_path=run.paths.get('checkpoint'))
    metric = run.train['select_metric'].upper()
    click.echo(f"[OK] best val {metric} {summary['best_metric']:.4f} at epoch {summary['best_epoch']} "
               f"({summary['epochs']} epochs)")
    click.echo(f"[OK] checkpoint: {summary['checkpoint']}")
    click.echo(f"[OK] history:    {os.path.join(out_dir, 'history.csv')}")
    return 0


@click.command('train')
@training_options
@model_options
@handle_errors
def train_cmd(**params):
    """Train a HiGRU model with early stopping on the validation set"""
    return cmd_train(RunConfig.from_params('train', params))
