import json

import click

from higru.commands.common import open_checkpoint
from higru.commands.options import RunConfig, handle_errors
from higru.models.corpus import load_corpus
from higru.models.vocabulary import encode_corpus
from higru.training.evaluation import predict_dialogues
from higru.utils.reports import prediction_record, write_jsonl


def cmd_predict(run):
    """Emit one JSON line per dialogue with predicted classes and distributions"""
    params, vocab, scheme, _ = open_checkpoint(run.paths['checkpoint'])
    corpus = load_corpus(run.paths['test'], scheme, 'test')
    outputs = predict_dialogues(params, encode_corpus(corpus, vocab), scheme)
    records = [prediction_record(dialogue, predictions, probabilities, scheme)
               for dialogue, (predictions, probabilities) in zip(corpus.dialogues, outputs)]

    out = run.paths.get('out')
    if out and out != '-':
        write_jsonl(out, records)
        click.echo(f'[OK] {len(records)} dialogues written to {out}', err=True)
    else:
        for record in records:
            click.echo(json.dumps(record, ensure_ascii=False))
    return 0


@click.command('predict')
@click.option('--checkpoint', required=True, type=click.Path(exists=True, dir_okay=False), help='Model checkpoint')
@click.option('--test', required=True, type=click.Path(exists=True, dir_okay=False),
              help='Corpus to label (labels may be null)')
@click.option('--out', type=click.Path(dir_okay=False), help="JSON Lines output file ('-' for stdout)")
@handle_errors
def predict_cmd(**params):
    """Predict utterance emotions for a corpus"""
    return cmd_predict(RunConfig.from_params('predict', params))
