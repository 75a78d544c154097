"""Data preparation and the training run shared by `train` and `sweep-alpha`"""
import logging
import os
from dataclasses import dataclass

from higru import create_model
from higru.errors import CheckpointError
from higru.models.corpus import count_labels, drop_unevaluated, load_corpus, merge_corpora, split_train_val
from higru.models.labels import LabelScheme, load_scheme
from higru.models.vocabulary import Vocabulary, build_vocab, encode_corpus
from higru.training.evaluation import evaluate
from higru.training.trainer import train_loop
from higru.utils.checkpoint import load_checkpoint, save_checkpoint
from higru.utils.embeddings import load_embeddings, random_embeddings
from higru.utils.reports import format_report, write_history, write_report_csv, write_text
from higru.utils.seeding import stream

logger = logging.getLogger(__name__)


@dataclass
class PreparedData:
    scheme: LabelScheme
    vocab: Vocabulary
    train: list
    val: list
    counts: list
    embeddings: object


def prepare_data(run):
    """Load scheme and corpora, split/filter them, build the vocabulary and embedding matrix"""
    scheme = load_scheme(run.paths['scheme'])
    train = merge_corpora(load_corpus(path, scheme, 'train') for path in run.paths['train'])
    if run.paths.get('val'):
        val = load_corpus(run.paths['val'], scheme, 'val')
    else:
        share = run.options.get('val_split') or 0.2
        train, val = split_train_val(train, 1.0 - share, stream(run.seed, 'split'))
        logger.info('Split %d training / %d validation dialogues', len(train), len(val))
    if run.options.get('drop_unevaluated'):
        train, val = drop_unevaluated(train, scheme), drop_unevaluated(val, scheme)

    vocab = build_vocab(train)
    d0 = run.model['d0']
    rng = stream(run.seed, 'embeddings')
    if run.paths.get('embeddings'):
        embeddings = load_embeddings(run.paths['embeddings'], vocab, d0, rng)
    else:
        logger.warning('No --embeddings given; all %d word vectors start random', len(vocab))
        embeddings = random_embeddings(len(vocab), d0, rng)

    return PreparedData(scheme=scheme, vocab=vocab, train=encode_corpus(train, vocab),
                        val=encode_corpus(val, vocab), counts=count_labels(train, scheme.n_classes).tolist(),
                        embeddings=embeddings)


def run_training(run, data, out_dir, alpha=None, checkpoint_path=None):
    """
    Train one model and write its checkpoint, history and validation report

    Returns:
        dict with alpha, best_metric, best_epoch, epochs and checkpoint path
    """
    alpha = run.train['alpha'] if alpha is None else alpha
    os.makedirs(out_dir, exist_ok=True)
    checkpoint_path = checkpoint_path or os.path.join(out_dir, 'best.ckpt')

    scheme = data.scheme.with_weights(data.counts, alpha)
    train_config = run.train_config(alpha=alpha)
    model_config = run.model_config(n_classes=scheme.n_classes, vocab_size=len(data.vocab))
    params = create_model(model_config, seed=run.seed, embeddings=data.embeddings)
    logger.info('Training %s (%d parameters), alpha=%s', model_config.variant.cli_name,
                model_config.parameter_count(), alpha)

    threads = run.options.get('threads') or 1
    result = train_loop(params, data.train, data.val, scheme, train_config, threads=threads)

    save_checkpoint(result.params, checkpoint_path, metadata={
        'vocab': data.vocab.tokens,
        'scheme': scheme.to_dict(),
        'counts': list(scheme.counts),
        'alpha': alpha,
        'weights': list(scheme.weights),
        'select_metric': train_config.select_metric,
        'best_epoch': result.best_epoch,
        'best_score': result.best_score,
        'drop_unevaluated': bool(run.options.get('drop_unevaluated')),
    })
    write_history(os.path.join(out_dir, 'history.csv'), result.history)

    cm = evaluate(result.params, data.val, scheme, threads)
    write_report_csv(os.path.join(out_dir, 'val_report.csv'), cm)
    write_text(os.path.join(out_dir, 'val_report.txt'), format_report(cm, 'Validation'))

    return {
        'alpha': alpha,
        'best_metric': result.best_score,
        'best_epoch': result.best_epoch,
        'epochs': len(result.history),
        'checkpoint': checkpoint_path,
        'val_cm': cm,
    }


def open_checkpoint(path):
    """Load params plus the vocabulary and label scheme stored beside them"""
    params, _, metadata = load_checkpoint(path)
    try:
        vocab = Vocabulary(metadata['vocab'])
        scheme = LabelScheme.from_dict(metadata['scheme'])
    except KeyError as e:
        raise CheckpointError(f'{path}: checkpoint metadata lacks {e}')
    return params, vocab, scheme, metadata
