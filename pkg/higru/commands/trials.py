"""Repeated training runs over derived seeds, reported as mean and std"""
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import click
import numpy as np

from higru.commands.common import open_checkpoint, prepare_data, run_training
from higru.commands.options import RunConfig, handle_errors, model_options, training_options
from higru.models.corpus import drop_unevaluated, load_corpus
from higru.models.vocabulary import encode_corpus
from higru.training.evaluation import evaluate
from higru.utils.reports import trial_scores, write_trials, write_trials_summary
from higru.utils.seeding import stream

logger = logging.getLogger(__name__)


def trial_seeds(seed, n_trials):
    """Root seeds of the individual trials, derived from the run seed"""
    return [int(s) for s in stream(seed, 'trials').integers(0, 2 ** 31 - 1, size=n_trials)]


def summarize_trials(rows, columns):
    """
    {score: (mean, std, n)} over the trials where the score is defined

    std is the population standard deviation (ddof=0); a score no trial
    defines gets (None, None, 0).
    """
    summary = {}
    for name in ['WA', 'UWA'] + columns:
        values = np.array([r['scores'][name] for r in rows if r['scores'][name] is not None], dtype=np.float64)
        if values.size:
            summary[name] = (float(values.mean()), float(values.std()), int(values.size))
        else:
            summary[name] = (None, None, 0)
    return summary


def _run_trial(job):
    run, index, seed = job
    trial_run = replace(run, seed=seed, train={**run.train, 'seed': seed})
    data = prepare_data(trial_run)
    summary = run_training(trial_run, data, os.path.join(run.paths['out'], f'trial_{index:02d}'))

    cm = summary['val_cm']
    if run.paths.get('test'):
        params, vocab, scheme, _ = open_checkpoint(summary['checkpoint'])
        corpus = load_corpus(run.paths['test'], scheme, 'test')
        if run.options.get('drop_unevaluated'):
            corpus = drop_unevaluated(corpus, scheme)
        cm = evaluate(params, encode_corpus(corpus, vocab), scheme, run.options.get('threads') or 1)
    logger.info('Trial %d (seed %d): best epoch %d', index, seed, summary['best_epoch'])
    return {'trial': index, 'seed': seed, 'best_epoch': summary['best_epoch'], 'scores': trial_scores(cm),
            'classes': [name for name, flag in zip(cm.classes, cm.evaluated) if flag]}


def cmd_trials(run):
    """Train N models on derived seeds; write per-trial scores and their mean/std"""
    out_dir = run.paths['out']
    os.makedirs(out_dir, exist_ok=True)
    n_trials = run.options.get('trials') or 10
    jobs = [(run, i, seed) for i, seed in enumerate(trial_seeds(run.seed, n_trials))]

    workers = run.options.get('workers') or 1
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_trial, jobs))
    else:
        rows = [_run_trial(job) for job in jobs]

    columns = rows[0]['classes']
    summary = summarize_trials(rows, columns)
    write_trials(os.path.join(out_dir, 'trials.csv'), rows, columns)
    write_trials_summary(os.path.join(out_dir, 'trials_summary.csv'), summary)

    split = 'test' if run.paths.get('test') else 'val'
    click.echo(f'{n_trials} trials, {split} scores: mean (std)')
    for name, (mean, std, n) in summary.items():
        shown = '-' if mean is None else f'{100 * mean:.1f} ({100 * std:.1f})'
        click.echo(f'{name:<14}{shown:>14}')
    click.echo(f"[OK] trials: {os.path.join(out_dir, 'trials.csv')}")
    return 0


@click.command('trials')
@training_options
@model_options
@click.option('--trials', type=click.IntRange(min=1), default=10, show_default=True, help='Number of trials')
@click.option('--test', type=click.Path(exists=True, dir_okay=False),
              help='Score each trial on this labelled corpus instead of the validation set')
@click.option('--workers', type=click.IntRange(min=1), default=1, show_default=True,
              help='Train the trials in this many worker processes')
@handle_errors
def trials_cmd(**params):
    """Repeat training over derived seeds and report mean (std) of WA, UWA and per-class accuracy"""
    return cmd_trials(RunConfig.from_params('trials', params))
