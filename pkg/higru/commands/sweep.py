import logging
import os
from concurrent.futures import ProcessPoolExecutor

import click

from higru.commands.common import prepare_data, run_training
from higru.commands.options import RunConfig, handle_errors, model_options, training_options
from higru.utils.files import atomic_write
from higru.utils.reports import write_sweep_summary

logger = logging.getLogger(__name__)

ALPHA_GRID = [0.25 * i for i in range(7)]  # 0, 0.25, ..., 1.5


def _train_alpha(job):
    run, data, alpha = job
    return run_training(run, data, os.path.join(run.paths['out'], f'alpha_{alpha:.2f}'), alpha=alpha)


def cmd_sweep_alpha(run):
    """Train one model per alpha on the grid; keep the best checkpoint and a summary table"""
    out_dir = run.paths['out']
    data = prepare_data(run)
    jobs = [(run, data, alpha) for alpha in ALPHA_GRID]

    workers = run.options.get('workers') or 1
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_train_alpha, jobs))
    else:
        rows = [_train_alpha(job) for job in jobs]

    write_sweep_summary(os.path.join(out_dir, 'sweep_summary.csv'), rows)
    best = max(range(len(rows)), key=lambda i: (rows[i]['best_metric'], -i))
    best_path = run.paths.get('checkpoint') or os.path.join(out_dir, 'best.ckpt')
    with open(rows[best]['checkpoint'], 'rb') as source, atomic_write(best_path, 'wb') as target:
        target.write(source.read())

    metric = run.train['select_metric'].upper()
    click.echo(f"{'alpha':>6}  {'best ' + metric:>10}  {'epoch':>5}")
    for i, row in enumerate(rows):
        marker = '  *' if i == best else ''
        click.echo(f"{row['alpha']:>6.2f}  {row['best_metric']:>10.4f}  {row['best_epoch']:>5}{marker}")
    click.echo(f"[OK] best alpha {rows[best]['alpha']:.2f}, checkpoint: {best_path}")
    return 0


@click.command('sweep-alpha')
@training_options
@model_options
@click.option('--workers', type=click.IntRange(min=1), default=1, show_default=True,
              help='Train the seven models in this many worker processes')
@handle_errors
def sweep_cmd(**params):
    """Train across alpha = 0, 0.25, ..., 1.5 and keep the best model"""
    return cmd_sweep_alpha(RunConfig.from_params('sweep-alpha', params))
