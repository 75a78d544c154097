"""
Named random streams derived from one root seed

Each stream is a numpy Generator seeded by SeedSequence(root, spawn_key=(n,))
with a fixed counter n per stream name, so adding a stream never shifts the
others.
"""
import numpy as np

STREAMS = {
    'init': 0,
    'dropout': 1,
    'shuffle': 2,
    'embeddings': 3,
    'split': 4,
    'trials': 5,
}


def stream(seed, name):
    """Return the Generator for a named stream of a root seed"""
    if name not in STREAMS:
        raise KeyError(f"Unknown random stream '{name}'")
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(STREAMS[name],)))
