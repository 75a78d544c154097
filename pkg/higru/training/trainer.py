"""
Training loop

One optimizer step per dialogue (forward, weighted loss, backward, clip,
Adam), dialogue order reshuffled every epoch, validation after every epoch,
best parameters kept, early stopping after `patience` epochs without a
strictly better validation score.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from higru.errors import ConfigError, MetricError, TrainingError
from higru.models.network import forward
from higru.training.evaluation import evaluate
from higru.training.objective import weighted_ce
from higru.training.optim import Adam, clip_gradients, lr_at_epoch
from higru.utils.seeding import stream
from higru.utils.tensor import reset_grads

logger = logging.getLogger(__name__)

METRICS = ('wa', 'uwa')


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-4
    anneal_every: int = 20
    anneal_factor: float = 0.5
    patience: int = 10
    clip_norm: float = 5.0
    alpha: float = 0.0
    max_epochs: int = 100
    seed: int = 0
    select_metric: str = 'wa'

    def __post_init__(self):
        object.__setattr__(self, 'select_metric', self.select_metric.lower())
        if self.select_metric not in METRICS:
            raise ConfigError(f"select_metric must be 'wa' or 'uwa', got '{self.select_metric}'")
        for name in ('lr', 'anneal_every', 'anneal_factor', 'patience', 'clip_norm', 'max_epochs'):
            if getattr(self, name) <= 0:
                raise ConfigError(f'{name} must be positive, got {getattr(self, name)}')
        if self.alpha < 0:
            raise ConfigError(f'alpha must be >= 0, got {self.alpha}')


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_wa: float
    val_uwa: float
    lr: float
    clipped_fraction: float

    def score(self, metric):
        return self.val_wa if metric == 'wa' else self.val_uwa


@dataclass
class TrainState:
    optimizer: Adam
    lr: float
    epoch: int = 0
    best_score: float = -math.inf
    best_epoch: int = -1
    best_arrays: dict = None
    stale_epochs: int = 0


@dataclass
class TrainResult:
    params: object
    best_epoch: int
    best_score: float
    history: list = field(default_factory=list)


def _metric(cm, name, required):
    try:
        return cm.wa() if name == 'wa' else cm.uwa()
    except MetricError:
        if required:
            raise
        logger.warning('Validation %s undefined this epoch; recorded as NaN', name.upper())
        return math.nan


def _train_epoch(params, state, dialogues, class_weights, config, shuffle_rng, dropout_rng):
    trainable = state.optimizer.params
    order = shuffle_rng.permutation(len(dialogues))
    losses = []
    clipped = 0
    for index in order:
        dialogue = dialogues[index]
        reset_grads(trainable)
        _, probabilities = forward(params, dialogue.utterances, train=True, rng=dropout_rng)
        loss = weighted_ce(probabilities, np.maximum(dialogue.labels, 0), dialogue.loss_weights(class_weights))
        value = loss.item()
        if not np.isfinite(value):
            raise TrainingError(f"non-finite loss at epoch {state.epoch}, dialogue '{dialogue.id}'")
        loss.backward()
        try:
            factor = clip_gradients(trainable, config.clip_norm)
        except TrainingError as e:
            raise TrainingError(f"{e} at epoch {state.epoch}, dialogue '{dialogue.id}'") from None
        clipped += factor < 1.0
        state.optimizer.step(state.lr)
        losses.append(value)
    return float(np.mean(losses)), clipped / len(dialogues)


def train_loop(params, train_data, val_data, scheme, config, threads=1, on_epoch=None):
    """
    Train params in place and leave them at the best validation epoch

    Args:
        params: ModelParams
        train_data: list of EncodedDialogue
        val_data: list of EncodedDialogue
        scheme: LabelScheme carrying loss weights (see LabelScheme.with_weights)
        config: TrainConfig
        threads: validation parallelism
        on_epoch: optional callback(EpochRecord, improved)

    Returns:
        TrainResult with the per-epoch history
    """
    if not train_data or not val_data:
        raise ConfigError('training needs non-empty train and validation sets')
    if scheme.weights is None:
        raise ConfigError('label scheme has no loss weights; call with_weights() first')

    shuffle_rng = stream(config.seed, 'shuffle')
    dropout_rng = stream(config.seed, 'dropout')
    state = TrainState(optimizer=Adam(params.parameters()), lr=config.lr)
    history = []

    for epoch in range(config.max_epochs):
        state.epoch = epoch
        state.lr = lr_at_epoch(config.lr, epoch, config.anneal_every, config.anneal_factor)
        loss, clipped_fraction = _train_epoch(params, state, train_data, scheme.weights, config,
                                              shuffle_rng, dropout_rng)

        cm = evaluate(params, val_data, scheme, threads)
        record = EpochRecord(epoch=epoch, train_loss=loss,
                             val_wa=_metric(cm, 'wa', config.select_metric == 'wa'),
                             val_uwa=_metric(cm, 'uwa', config.select_metric == 'uwa'),
                             lr=state.lr, clipped_fraction=clipped_fraction)
        history.append(record)

        score = record.score(config.select_metric)
        improved = score > state.best_score
        if improved:
            state.best_score = score
            state.best_epoch = epoch
            state.best_arrays = {name: data.copy() for name, data in params.arrays().items()}
            state.stale_epochs = 0
        else:
            state.stale_epochs += 1

        logger.info('epoch %d  loss %.4f  val WA %.4f  UWA %.4f  lr %.2e  clipped %.2f%s',
                    epoch, loss, record.val_wa, record.val_uwa, state.lr, clipped_fraction,
                    '  *' if improved else '')
        if on_epoch is not None:
            on_epoch(record, improved)
        if state.stale_epochs >= config.patience:
            logger.info('Early stopping after %d epochs without improvement', state.stale_epochs)
            break

    params.load_arrays(state.best_arrays)
    return TrainResult(params=params, best_epoch=state.best_epoch, best_score=state.best_score, history=history)
