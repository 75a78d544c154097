import click

from higru.commands.options import RunConfig, handle_errors
from higru.models.corpus import corpus_statistics, load_corpus
from higru.models.labels import load_scheme
from higru.utils.reports import format_statistics


def cmd_stats(run):
    """Print dialogue, utterance and per-class counts of a corpus"""
    scheme = load_scheme(run.paths['scheme'])
    corpus = load_corpus(run.options['corpus'], scheme, 'test')
    click.echo(format_statistics(corpus_statistics(corpus, scheme)), nl=False)
    return 0


@click.command('stats')
@click.option('--corpus', required=True, type=click.Path(exists=True, dir_okay=False), help='Corpus to describe')
@click.option('--scheme', required=True, type=click.Path(exists=True, dir_okay=False), help='Label scheme JSON')
@handle_errors
def stats_cmd(**params):
    """Dialogue, utterance and per-class counts of a corpus"""
    return cmd_stats(RunConfig.from_params('stats', params))
