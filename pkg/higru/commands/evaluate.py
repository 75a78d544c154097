import os

import click

from higru.commands.common import open_checkpoint
from higru.commands.options import RunConfig, handle_errors
from higru.models.corpus import drop_unevaluated, load_corpus
from higru.models.vocabulary import encode_corpus
from higru.training.evaluation import evaluate
from higru.utils.reports import format_report, write_confusion_csv, write_report_csv, write_text


def cmd_eval(run):
    """Score a checkpoint on a labelled corpus: per-class accuracy, WA, UWA"""
    params, vocab, scheme, metadata = open_checkpoint(run.paths['checkpoint'])
    corpus = load_corpus(run.paths['test'], scheme, 'test')
    # same filtering as the validation set the checkpoint was selected on
    drop = run.options.get('drop_unevaluated')
    if drop is None:
        drop = metadata.get('drop_unevaluated', False)
    if drop:
        corpus = drop_unevaluated(corpus, scheme)
    cm = evaluate(params, encode_corpus(corpus, vocab), scheme, run.options.get('threads') or 1)

    report = format_report(cm, f"Evaluation of {run.paths['checkpoint']} on {run.paths['test']}")
    click.echo(report, nl=False)
    out_dir = run.paths.get('out')
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        write_report_csv(os.path.join(out_dir, 'eval_report.csv'), cm)
        write_confusion_csv(os.path.join(out_dir, 'confusion.csv'), cm)
        write_text(os.path.join(out_dir, 'eval_report.txt'), report)
    return 0


@click.command('eval')
@click.option('--checkpoint', required=True, type=click.Path(exists=True, dir_okay=False), help='Model checkpoint')
@click.option('--test', required=True, type=click.Path(exists=True, dir_okay=False), help='Labelled corpus')
@click.option('--out', type=click.Path(file_okay=False), help='Directory for CSV/text reports')
@click.option('--threads', type=click.IntRange(min=1), help='Evaluation threads')
@click.option('--drop-unevaluated/--keep-unevaluated', default=None,
              help='Remove utterances of non-evaluated classes first (default: as during training)')
@handle_errors
def eval_cmd(**params):
    """Evaluate a checkpoint (WA / UWA report)"""
    return cmd_eval(RunConfig.from_params('eval', params))
