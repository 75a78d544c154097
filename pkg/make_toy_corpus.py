"""
Synthetic toy corpus - 8 dialogues x 6 utterances, 4 emotion classes

Each class has one dedicated cue word; every utterance carries its class's cue
among 2-4 distractor words drawn from a shared pool, so a working model can fit
the training set perfectly. Writes toy_train.jsonl, toy_val.jsonl and
toy_scheme.json.

Run with:
    python make_toy_corpus.py [output_dir] [seed]
"""
import json
import os
import sys

import numpy as np

CLASSES = ['ang', 'hap', 'sad', 'neu']
CUES = {'ang': 'furious', 'hap': 'delighted', 'sad': 'gloomy', 'neu': 'okay'}
DISTRACTORS = [f'word{i:02d}' for i in range(36)]
SPEAKERS = ['A', 'B']


def toy_dialogues(n_dialogues=8, n_utterances=6, seed=0, prefix='toy'):
    """List of corpus dialogues (dicts in the JSON Lines layout)"""
    rng = np.random.default_rng(seed)
    dialogues = []
    for d in range(n_dialogues):
        utterances = []
        for j in range(n_utterances):
            label = CLASSES[int(rng.integers(len(CLASSES)))]
            words = list(rng.choice(DISTRACTORS, size=int(rng.integers(2, 5)), replace=False))
            words.insert(int(rng.integers(len(words) + 1)), CUES[label])
            utterances.append({'speaker': SPEAKERS[j % 2], 'text': ' '.join(words), 'label': label})
        dialogues.append({'id': f'{prefix}-{d}', 'utterances': utterances})
    return dialogues


def write_jsonl(path, dialogues):
    with open(path, 'w', encoding='utf-8') as handle:
        for dialogue in dialogues:
            handle.write(json.dumps(dialogue) + '\n')


def write_scheme(path, classes=CLASSES, evaluated=None):
    with open(path, 'w', encoding='utf-8') as handle:
        json.dump({'classes': list(classes), 'evaluated': list(evaluated or classes)}, handle)


if __name__ == '__main__':
    out_dir = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), 'instance', 'toy')
    seed = int(sys.argv[2]) if len(sys.argv) > 2 else 0
    os.makedirs(out_dir, exist_ok=True)

    write_jsonl(os.path.join(out_dir, 'toy_train.jsonl'), toy_dialogues(seed=seed))
    print(f"  [OK] {os.path.join(out_dir, 'toy_train.jsonl')}")
    write_jsonl(os.path.join(out_dir, 'toy_val.jsonl'), toy_dialogues(n_dialogues=4, seed=seed + 1, prefix='val'))
    print(f"  [OK] {os.path.join(out_dir, 'toy_val.jsonl')}")
    write_scheme(os.path.join(out_dir, 'toy_scheme.json'))
    print(f"  [OK] {os.path.join(out_dir, 'toy_scheme.json')}")

    print("\nToy corpus ready. Try:")
    print(f"  python run.py --profile testing train --train {out_dir}/toy_train.jsonl "
          f"--val {out_dir}/toy_val.jsonl --scheme {out_dir}/toy_scheme.json --out {out_dir}/run")
