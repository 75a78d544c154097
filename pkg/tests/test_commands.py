import json
import os

import pytest
from click.testing import CliRunner

from make_toy_corpus import toy_dialogues, write_jsonl, write_scheme
from higru.commands import create_cli
from higru.commands.common import open_checkpoint
from higru.commands.sweep import ALPHA_GRID
from higru.utils.reports import read_csv


def invoke(*args):
    runner = CliRunner(mix_stderr=False)
    return runner.invoke(create_cli(), [str(a) for a in args], catch_exceptions=False)


def train_args(files, out, *extra):
    return ['--profile', 'testing', 'train', '--train', files['train'], '--val', files['val'],
            '--scheme', files['scheme'], '--out', out, '--max-epochs', 2, *extra]


@pytest.fixture(scope='module')
def trained(tmp_path_factory):
    """One short training run shared by the eval/predict tests"""
    root = tmp_path_factory.mktemp('cli')
    files = {'train': str(root / 'train.jsonl'), 'val': str(root / 'val.jsonl'), 'scheme': str(root / 'scheme.json')}
    write_jsonl(files['train'], toy_dialogues(seed=0))
    write_jsonl(files['val'], toy_dialogues(n_dialogues=3, seed=1, prefix='val'))
    write_scheme(files['scheme'])
    out = str(root / 'run')
    result = invoke(*train_args(files, out, '--seed', 7))
    assert result.exit_code == 0, result.stderr
    return {**files, 'out': out, 'checkpoint': os.path.join(out, 'best.ckpt')}


# ============== TRAIN ==============

def test_train_writes_artifacts(trained):
    for name in ('best.ckpt', 'history.csv', 'val_report.csv', 'val_report.txt'):
        assert os.path.exists(os.path.join(trained['out'], name))
    history = read_csv(os.path.join(trained['out'], 'history.csv'))
    assert list(history[0]) == ['epoch', 'train_loss', 'val_WA', 'val_UWA', 'lr', 'clipped_fraction']
    assert len(history) == 2


def test_train_is_deterministic(trained, tmp_path):
    out = str(tmp_path / 'again')
    assert invoke(*train_args(trained, out, '--seed', 7)).exit_code == 0
    with open(os.path.join(out, 'history.csv')) as a, open(os.path.join(trained['out'], 'history.csv')) as b:
        assert a.read() == b.read()
    with open(os.path.join(out, 'best.ckpt'), 'rb') as a, open(trained['checkpoint'], 'rb') as b:
        assert a.read() == b.read()


def test_missing_train_is_a_usage_error(trained):
    result = invoke('train', '--scheme', trained['scheme'])
    assert result.exit_code == 2


def test_unknown_label_fails_with_one_line(trained, tmp_path):
    bad = tmp_path / 'bad.jsonl'
    bad.write_text(json.dumps({'id': 'x', 'utterances': [{'speaker': 'A', 'text': 'hi', 'label': 'fru'}]}) + '\n')
    result = invoke('--profile', 'testing', 'train', '--train', bad, '--scheme', trained['scheme'],
                    '--out', tmp_path / 'out')
    assert result.exit_code == 1
    assert 'error: ' in result.stderr
    assert 'fru' in result.stderr and ':1:' in result.stderr


def test_non_utf8_corpus_fails_with_one_line(trained, tmp_path):
    bad = tmp_path / 'bad.jsonl'
    bad.write_bytes(b'{"id": "x", "utterances": [{"speaker": "A", "text": "caf\xe9", "label": "neu"}]}\n')
    result = invoke('--profile', 'testing', 'train', '--train', bad, '--scheme', trained['scheme'],
                    '--out', tmp_path / 'out')
    assert result.exit_code == 1
    errors = [line for line in result.stderr.splitlines() if line.startswith('error: ')]
    assert len(errors) == 1
    assert ':1:' in errors[0] and 'UTF-8' in errors[0]


def test_config_file_layers_under_flags(trained, tmp_path):
    config = tmp_path / 'run.json'
    config.write_text(json.dumps({'max-epochs': 1, 'variant': 'higru-f', 'fc': [4, 4]}))
    out = tmp_path / 'layered'
    args = ['--profile', 'testing', '--config', config, 'train', '--train', trained['train'], '--val', trained['val'],
            '--scheme', trained['scheme'], '--out', out]
    assert invoke(*args).exit_code == 0
    assert len(read_csv(out / 'history.csv')) == 1
    params, _, _, metadata = open_checkpoint(str(out / 'best.ckpt'))
    assert params.config.variant.cli_name == 'higru-f'
    assert params.config.fc_hidden == (4, 4)
    assert metadata['best_epoch'] == 0

    out = tmp_path / 'flagged'
    assert invoke(*args[:-1], out, '--max-epochs', 2).exit_code == 0
    assert len(read_csv(out / 'history.csv')) == 2


def test_unknown_config_key_is_a_usage_error(trained, tmp_path):
    config = tmp_path / 'bad.json'
    config.write_text(json.dumps({'learning_rate': 0.1}))
    result = invoke('--config', config, 'train', '--train', trained['train'], '--scheme', trained['scheme'])
    assert result.exit_code == 2
    assert 'learning_rate' in result.stderr


def test_split_validation_from_training_data(trained, tmp_path):
    out = tmp_path / 'split'
    args = ['--profile', 'testing', 'train', '--train', trained['train'], '--scheme', trained['scheme'],
            '--out', out, '--max-epochs', 1, '--val-split', 0.25, '--variant', 'higru-sf', '--d1', 3, '--d2', 3]
    assert invoke(*args).exit_code == 0
    assert os.path.exists(out / 'best.ckpt')


# ============== EVAL / PREDICT ==============

def test_eval_reproduces_history_score(trained, tmp_path):
    out = tmp_path / 'eval'
    result = invoke('eval', '--checkpoint', trained['checkpoint'], '--test', trained['val'], '--out', out)
    assert result.exit_code == 0
    assert 'WA' in result.stdout and 'UWA' in result.stdout

    rows = read_csv(out / 'eval_report.csv')
    assert list(rows[0]) == ['class', 'n', 'accuracy']
    assert [r['class'] for r in rows] == ['ang', 'hap', 'sad', 'neu', 'WA', 'UWA']

    _, _, _, metadata = open_checkpoint(trained['checkpoint'])
    history = read_csv(os.path.join(trained['out'], 'history.csv'))
    recorded = float(history[metadata['best_epoch']]['val_WA'])
    assert abs(float(rows[-2]['accuracy']) - recorded) <= 1e-9
    assert os.path.exists(out / 'confusion.csv')


def test_eval_repeats_the_training_filter(tmp_path):
    dialogues = {}
    for name, count, seed in (('train', 8, 0), ('val', 3, 1)):
        dialogues[name] = toy_dialogues(n_dialogues=count, seed=seed, prefix=name)
        for dialogue in dialogues[name]:
            for utterance in dialogue['utterances'][1::3]:
                utterance['label'] = 'fru'
        write_jsonl(tmp_path / f'{name}.jsonl', dialogues[name])
    write_scheme(tmp_path / 'scheme.json', classes=['ang', 'hap', 'sad', 'neu', 'fru'],
                 evaluated=['ang', 'hap', 'sad', 'neu'])
    out = tmp_path / 'run'
    result = invoke('--profile', 'testing', 'train', '--train', tmp_path / 'train.jsonl',
                    '--val', tmp_path / 'val.jsonl', '--scheme', tmp_path / 'scheme.json', '--out', out,
                    '--max-epochs', 2, '--drop-unevaluated')
    assert result.exit_code == 0, result.stderr
    _, _, _, metadata = open_checkpoint(str(out / 'best.ckpt'))
    assert metadata['drop_unevaluated'] is True

    report = tmp_path / 'eval'
    result = invoke('eval', '--checkpoint', out / 'best.ckpt', '--test', tmp_path / 'val.jsonl', '--out', report)
    assert result.exit_code == 0, result.stderr
    history = read_csv(out / 'history.csv')
    recorded = float(history[metadata['best_epoch']]['val_WA'])
    assert abs(float(read_csv(report / 'eval_report.csv')[-2]['accuracy']) - recorded) <= 1e-9

    result = invoke('eval', '--checkpoint', out / 'best.ckpt', '--test', tmp_path / 'val.jsonl',
                    '--keep-unevaluated')
    assert result.exit_code == 0


def test_eval_unknown_label_exits_1(trained, tmp_path):
    bad = tmp_path / 'bad.jsonl'
    bad.write_text(json.dumps({'id': 'x', 'utterances': [{'speaker': 'A', 'text': 'hi', 'label': 'fru'}]}) + '\n')
    result = invoke('eval', '--checkpoint', trained['checkpoint'], '--test', bad)
    assert result.exit_code == 1


def test_predict_unlabelled_corpus(trained, tmp_path):
    dialogues = toy_dialogues(n_dialogues=2, seed=9, prefix='new')
    for dialogue in dialogues:
        for utterance in dialogue['utterances']:
            utterance['label'] = None
    corpus = tmp_path / 'new.jsonl'
    write_jsonl(corpus, dialogues)

    out = tmp_path / 'pred.jsonl'
    result = invoke('predict', '--checkpoint', trained['checkpoint'], '--test', corpus, '--out', out)
    assert result.exit_code == 0
    records = [json.loads(line) for line in out.read_text().splitlines()]
    assert [r['id'] for r in records] == ['new-0', 'new-1']
    for record, dialogue in zip(records, dialogues):
        assert len(record['utterances']) == len(dialogue['utterances'])
        for utterance in record['utterances']:
            assert utterance['prediction'] in ('ang', 'hap', 'sad', 'neu')
            assert sum(utterance['distribution'].values()) == pytest.approx(1.0, abs=1e-9)


def test_predict_to_stdout(trained):
    result = invoke('predict', '--checkpoint', trained['checkpoint'], '--test', trained['val'])
    assert result.exit_code == 0
    assert len(result.stdout.splitlines()) == 3


# ============== SWEEP / STATS ==============

def test_sweep_alpha(trained, tmp_path):
    out = tmp_path / 'sweep'
    args = ['--profile', 'testing', 'sweep-alpha', '--train', trained['train'], '--val', trained['val'],
            '--scheme', trained['scheme'], '--out', out, '--max-epochs', 1]
    result = invoke(*args)
    assert result.exit_code == 0, result.stderr

    rows = read_csv(out / 'sweep_summary.csv')
    assert [float(r['alpha']) for r in rows] == ALPHA_GRID == [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5]
    scores = [float(r['best_metric']) for r in rows]
    best = scores.index(max(scores))
    _, _, _, metadata = open_checkpoint(str(out / 'best.ckpt'))
    assert metadata['alpha'] == ALPHA_GRID[best]
    assert all(os.path.exists(out / f'alpha_{a:.2f}' / 'history.csv') for a in ALPHA_GRID)


def test_trials(trained, tmp_path):
    out = tmp_path / 'trials'
    args = ['--profile', 'testing', 'trials', '--train', trained['train'], '--val', trained['val'],
            '--scheme', trained['scheme'], '--out', out, '--max-epochs', 1, '--trials', 3, '--test', trained['val']]
    result = invoke(*args)
    assert result.exit_code == 0, result.stderr

    rows = read_csv(out / 'trials.csv')
    assert list(rows[0]) == ['trial', 'seed', 'best_epoch', 'WA', 'UWA', 'ang', 'hap', 'sad', 'neu']
    assert [r['trial'] for r in rows] == ['0', '1', '2']
    assert len({r['seed'] for r in rows}) == 3

    summary = {r['score']: r for r in read_csv(out / 'trials_summary.csv')}
    assert list(summary) == ['WA', 'UWA', 'ang', 'hap', 'sad', 'neu']
    wa = [float(r['WA']) for r in rows]
    assert float(summary['WA']['mean']) == pytest.approx(sum(wa) / 3, abs=1e-12)
    assert summary['WA']['trials'] == '3'
    assert all(os.path.exists(out / f'trial_{i:02d}' / 'best.ckpt') for i in range(3))


def test_stats(trained):
    result = invoke('stats', '--corpus', trained['train'], '--scheme', trained['scheme'])
    assert result.exit_code == 0
    assert 'dialogues   8' in result.stdout
    assert 'utterances  48' in result.stdout


def test_version():
    result = invoke('--version')
    assert result.exit_code == 0
    assert '1.0.0' in result.stdout
