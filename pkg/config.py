import os

from dotenv import load_dotenv

basedir = os.path.abspath(os.path.dirname(__file__))
load_dotenv(os.path.join(basedir, '.env'))


class Config:
    """Base configuration (published HiGRU hyperparameters)"""
    HIGRU_VERSION = '1.0.0'

    # Model
    VARIANT = 'higru-sf'
    D0 = 300  # word embedding size
    D1 = 300  # lower-level GRU hidden size
    D2 = 300  # upper-level GRU hidden size
    FC = '100,100'
    DROPOUT = 0.5
    FREEZE_EMBEDDINGS = False

    # Training
    LR = 1e-4
    ANNEAL_EVERY = 20
    PATIENCE = 10
    CLIP_NORM = 5.0
    ALPHA = 0.0
    SELECT_METRIC = 'wa'
    MAX_EPOCHS = 100
    SEED = 0

    # Data
    VAL_SPLIT = 0.2
    DROP_UNEVALUATED = False

    # Runtime
    THREADS = int(os.environ.get('HIGRU_THREADS') or 1)
    LOG_LEVEL = os.environ.get('HIGRU_LOG_LEVEL') or 'INFO'
    OUT = os.environ.get('HIGRU_OUT') or os.path.join(basedir, 'instance', 'runs')


class IemocapConfig(Config):
    """IEMOCAP: tuned for WA on the validation set"""
    LR = 1e-4
    SELECT_METRIC = 'wa'
    DROP_UNEVALUATED = True


class FriendsConfig(Config):
    """Friends / EmotionPush: tuned for UWA, excluded classes weighted zero"""
    LR = 2.5e-4
    SELECT_METRIC = 'uwa'


class TestingConfig(Config):
    """Toy dimensions for fast runs"""
    D0 = 4
    D1 = 3
    D2 = 3
    FC = '5'
    MAX_EPOCHS = 5
    LOG_LEVEL = 'WARNING'


config = {
    'iemocap': IemocapConfig,
    'friends': FriendsConfig,
    'emotionpush': FriendsConfig,
    'testing': TestingConfig,
    'default': Config
}


def get_config(name=None):
    """Look up a profile by name, falling back to HIGRU_PROFILE then 'default'"""
    name = name or os.environ.get('HIGRU_PROFILE') or 'default'
    if name not in config:
        raise KeyError(f"Unknown profile '{name}' (choose from {', '.join(sorted(config))})")
    return config[name]
