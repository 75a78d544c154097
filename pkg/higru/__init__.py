from higru.models.network import ModelConfig, ModelParams
from higru.utils.seeding import stream

__version__ = '1.0.0'


def create_model(model_config, seed=0, embeddings=None):
    """
    Model factory

    Args:
        model_config: ModelConfig
        seed: root seed; weights come from its 'init' stream
        embeddings: optional (vocab_size, d0) pretrained matrix

    Returns:
        ModelParams
    """
    if not isinstance(model_config, ModelConfig):
        model_config = ModelConfig(**model_config)
    return ModelParams.initialize(model_config, stream(seed, 'init'), embeddings)
