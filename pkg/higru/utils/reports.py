"""
Tables written by the command line: training history, evaluation reports,
the alpha sweep summary and corpus statistics. CSV floats use repr() so
they read back bit-exactly.
"""
import csv
import io
import json

from higru.errors import MetricError
from higru.utils.files import atomic_write

HISTORY_COLUMNS = ['epoch', 'train_loss', 'val_WA', 'val_UWA', 'lr', 'clipped_fraction']
REPORT_COLUMNS = ['class', 'n', 'accuracy']
SWEEP_COLUMNS = ['alpha', 'best_metric', 'best_epoch', 'epochs']
TRIAL_COLUMNS = ['trial', 'seed', 'best_epoch', 'WA', 'UWA']


def _safe(metric):
    try:
        return metric()
    except MetricError:
        return None


def _num(value):
    return '' if value is None else repr(float(value))


def write_csv(path, header, rows):
    with atomic_write(path) as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        writer.writerows(rows)


def read_csv(path):
    with open(path, encoding='utf-8', newline='') as handle:
        return list(csv.DictReader(handle))


def write_history(path, history):
    rows = [[r.epoch, _num(r.train_loss), _num(r.val_wa), _num(r.val_uwa), _num(r.lr), _num(r.clipped_fraction)]
            for r in history]
    write_csv(path, HISTORY_COLUMNS, rows)


# ============== EVALUATION REPORT ==============

def report_rows(cm):
    """class, n, accuracy per evaluated class, then WA and UWA rows"""
    rows = [[name, n, _num(acc)] for name, (n, acc) in cm.per_class_accuracy().items()]
    rows.append(['WA', cm.total, _num(_safe(cm.wa))])
    rows.append(['UWA', cm.total, _num(_safe(cm.uwa))])
    return rows


def write_report_csv(path, cm):
    write_csv(path, REPORT_COLUMNS, report_rows(cm))


def write_confusion_csv(path, cm):
    ids = [i for i, flag in enumerate(cm.evaluated) if flag]
    rows = [[cm.classes[t]] + [int(cm.counts[t, p]) for p in range(cm.n_classes)] for t in ids]
    write_csv(path, ['truth\\pred'] + list(cm.classes), rows)


def format_report(cm, title='Evaluation'):
    """Plain-text report: per-class accuracy, WA, UWA and the confusion matrix"""
    out = io.StringIO()
    out.write(f'{title}\n')
    out.write(f"{'class':<14}{'n':>8}{'accuracy':>12}\n")
    for name, (n, acc) in cm.per_class_accuracy().items():
        shown = '-' if acc is None else f'{100 * acc:.1f}'
        out.write(f'{name:<14}{n:>8}{shown:>12}\n')
    for label, value in (('WA', _safe(cm.wa)), ('UWA', _safe(cm.uwa))):
        shown = '-' if value is None else f'{100 * value:.1f}'
        out.write(f'{label:<14}{cm.total:>8}{shown:>12}\n')

    ids = [i for i, flag in enumerate(cm.evaluated) if flag]
    width = max(8, max(len(c) for c in cm.classes) + 2)
    out.write('\nconfusion (rows = truth, columns = prediction)\n')
    out.write(' ' * width + ''.join(f'{cm.classes[p]:>{width}}' for p in ids) + '\n')
    for t in ids:
        out.write(f'{cm.classes[t]:<{width}}' + ''.join(f'{int(cm.counts[t, p]):>{width}}' for p in ids) + '\n')
    return out.getvalue()


def write_text(path, text):
    with atomic_write(path) as handle:
        handle.write(text)


# ============== SWEEP / PREDICTIONS / STATS ==============

def write_sweep_summary(path, rows):
    write_csv(path, SWEEP_COLUMNS, [[_num(r['alpha']), _num(r['best_metric']), r['best_epoch'], r['epochs']]
                                    for r in rows])


def trial_scores(cm):
    """WA, UWA and per-class accuracy of one trial; undefined values become None"""
    scores = {'WA': _safe(cm.wa), 'UWA': _safe(cm.uwa)}
    scores.update({name: acc for name, (_, acc) in cm.per_class_accuracy().items()})
    return scores


def write_trials(path, rows, columns):
    write_csv(path, TRIAL_COLUMNS + columns,
              [[r['trial'], r['seed'], r['best_epoch']] + [_num(r['scores'][c]) for c in ['WA', 'UWA'] + columns]
               for r in rows])


def write_trials_summary(path, summary):
    """One row per score: mean and std over the trials that defined it"""
    write_csv(path, ['score', 'mean', 'std', 'trials'],
              [[name, _num(mean), _num(std), n] for name, (mean, std, n) in summary.items()])


def prediction_record(dialogue, predictions, probabilities, scheme):
    return {
        'id': dialogue.id,
        'utterances': [
            {
                'speaker': u.speaker,
                'prediction': scheme.name(pred),
                'distribution': {name: float(p) for name, p in zip(scheme.classes, row)},
            }
            for u, pred, row in zip(dialogue.utterances, predictions, probabilities)
        ],
    }


def write_jsonl(path, records):
    with atomic_write(path) as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False) + '\n')


def format_statistics(stats):
    lines = [f"dialogues   {stats['dialogues']}", f"utterances  {stats['utterances']}"]
    lines += [f'  {name:<12}{n}' for name, n in stats['classes'].items()]
    if stats['unlabelled']:
        lines.append(f"  {'(unlabelled)':<12}{stats['unlabelled']}")
    return '\n'.join(lines) + '\n'
