"""
Shared command-line options and the RunConfig they resolve to

Option defaults come from the selected profile in config.py, overridden by
a --config JSON file, overridden by flags (click's default_map does the
layering).
"""
import functools
import json
import logging
from dataclasses import dataclass, field

import click

from higru.errors import HiGRUError
from higru.models.encoder import Variant
from higru.models.network import ModelConfig
from higru.training.trainer import TrainConfig

logger = logging.getLogger(__name__)

VARIANTS = ['higru', 'higru-f', 'higru-sf']
TRAINING_COMMANDS = ('train', 'sweep-alpha', 'trials')

# option name -> profile attribute
PROFILE_KEYS = {
    'variant': 'VARIANT',
    'd0': 'D0',
    'd1': 'D1',
    'd2': 'D2',
    'fc': 'FC',
    'dropout': 'DROPOUT',
    'freeze_embeddings': 'FREEZE_EMBEDDINGS',
    'lr': 'LR',
    'anneal_every': 'ANNEAL_EVERY',
    'patience': 'PATIENCE',
    'clip_norm': 'CLIP_NORM',
    'alpha': 'ALPHA',
    'select_metric': 'SELECT_METRIC',
    'max_epochs': 'MAX_EPOCHS',
    'seed': 'SEED',
    'val_split': 'VAL_SPLIT',
    'drop_unevaluated': 'DROP_UNEVALUATED',
    'threads': 'THREADS',
    'out': 'OUT',
}


def profile_defaults(profile, param_names, command):
    defaults = {name: getattr(profile, attr) for name, attr in PROFILE_KEYS.items() if name in param_names}
    if command not in TRAINING_COMMANDS:
        defaults.pop('out', None)
        defaults.pop('drop_unevaluated', None)
    return defaults


def read_config_file(path, param_names, command):
    """Option values from a JSON object; keys may use dashes or underscores"""
    try:
        with open(path, encoding='utf-8') as handle:
            data = json.load(handle)
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as e:
        raise click.UsageError(f'cannot read config file {path}: {e}')
    if not isinstance(data, dict):
        raise click.UsageError(f'config file {path} must hold a JSON object')
    values = {key.replace('-', '_'): value for key, value in data.items()}
    unknown = sorted(set(values) - set(param_names))
    if unknown:
        raise click.UsageError(f"unknown key(s) for '{command}' in {path}: {', '.join(unknown)}")
    if isinstance(values.get('fc'), list):
        values['fc'] = ','.join(str(width) for width in values['fc'])
    return values


def parse_fc(text):
    if isinstance(text, (list, tuple)):
        return tuple(int(part) for part in text)
    text = str(text).strip()
    if not text:
        return ()
    try:
        return tuple(int(part) for part in text.split(','))
    except ValueError:
        raise click.BadParameter(f"expected comma-separated widths like '100,100', got '{text}'")


# ============== RUN CONFIG ==============

@dataclass
class RunConfig:
    command: str
    paths: dict = field(default_factory=dict)
    model: dict = field(default_factory=dict)
    train: dict = field(default_factory=dict)
    seed: int = 0
    options: dict = field(default_factory=dict)

    @classmethod
    def from_params(cls, command, params):
        paths = {k: params.get(k) for k in ('train', 'val', 'test', 'scheme', 'embeddings', 'checkpoint', 'out')
                 if k in params}
        model = {}
        if 'variant' in params:
            model = {
                'variant': Variant.parse(params['variant']),
                'd0': params['d0'],
                'd1': params['d1'],
                'd2': params['d2'],
                'fc_hidden': parse_fc(params['fc']),
                'dropout': params['dropout'],
                'train_embeddings': not params['freeze_embeddings'],
            }
        train = {}
        if 'lr' in params:
            train = {
                'lr': params['lr'],
                'anneal_every': params['anneal_every'],
                'patience': params['patience'],
                'clip_norm': params['clip_norm'],
                'alpha': params['alpha'],
                'max_epochs': params['max_epochs'],
                'select_metric': params['select_metric'],
                'seed': params.get('seed', 0),
            }
        options = {k: v for k, v in params.items() if k not in paths and k not in model and k not in train}
        return cls(command=command, paths=paths, model=model, train=train,
                   seed=params.get('seed', 0), options=options)

    def model_config(self, n_classes, vocab_size):
        return ModelConfig(n_classes=n_classes, vocab_size=vocab_size, **self.model)

    def train_config(self, **overrides):
        return TrainConfig(**{**self.train, **overrides})


# ============== DECORATORS ==============

def model_options(fn):
    options = [
        click.option('--variant', type=click.Choice(VARIANTS), help='Model variant'),
        click.option('--d0', type=click.IntRange(min=1), help='Word embedding size'),
        click.option('--d1', type=click.IntRange(min=1), help='Lower-level GRU hidden size'),
        click.option('--d2', type=click.IntRange(min=1), help='Upper-level GRU hidden size'),
        click.option('--fc', help="Classifier hidden widths, e.g. '100,100'"),
        click.option('--dropout', type=float, help='Dropout rate'),
        click.option('--freeze-embeddings/--train-embeddings', default=None,
                     help='Keep word embeddings fixed during training'),
    ]
    return functools.reduce(lambda f, opt: opt(f), reversed(options), fn)


def training_options(fn):
    options = [
        click.option('--train', 'train', multiple=True, required=True, type=click.Path(exists=True, dir_okay=False),
                     help='Training corpus (repeat to mix corpora)'),
        click.option('--val', type=click.Path(exists=True, dir_okay=False),
                     help='Validation corpus (split from training data when absent)'),
        click.option('--val-split', type=click.FloatRange(0, 1, min_open=True, max_open=True),
                     help='Validation share split off the training data when --val is absent'),
        click.option('--scheme', required=True, type=click.Path(exists=True, dir_okay=False),
                     help='Label scheme JSON'),
        click.option('--embeddings', type=click.Path(exists=True, dir_okay=False),
                     help='Word vectors in word2vec text format'),
        click.option('--out', type=click.Path(file_okay=False), help='Output directory'),
        click.option('--checkpoint', type=click.Path(dir_okay=False),
                     help='Where to write the best checkpoint (default OUT/best.ckpt)'),
        click.option('--lr', type=float, help='Initial learning rate'),
        click.option('--anneal-every', type=click.IntRange(min=1), help='Halve the learning rate every N epochs'),
        click.option('--alpha', type=click.FloatRange(min=0), help='Loss-weight exponent'),
        click.option('--patience', type=click.IntRange(min=1), help='Early-stopping patience in epochs'),
        click.option('--clip-norm', type=float, help='Global gradient norm limit'),
        click.option('--select-metric', type=click.Choice(['wa', 'uwa']), help='Validation metric to select on'),
        click.option('--max-epochs', type=click.IntRange(min=1), help='Upper bound on epochs'),
        click.option('--seed', type=int, help='Root random seed'),
        click.option('--drop-unevaluated/--keep-unevaluated', default=None,
                     help='Remove utterances of non-evaluated classes before training'),
        click.option('--threads', type=click.IntRange(min=1), help='Validation threads'),
    ]
    return functools.reduce(lambda f, opt: opt(f), reversed(options), fn)


def handle_errors(fn):
    """Turn package and I/O errors into a one-line diagnostic and exit status 1"""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            code = fn(*args, **kwargs)
        except (HiGRUError, OSError, UnicodeDecodeError) as e:
            logger.debug('command failed', exc_info=True)
            click.echo(f'error: {e}', err=True)
            code = 1
        click.get_current_context().exit(code or 0)
    return wrapper
