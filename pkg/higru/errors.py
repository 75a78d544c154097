"""
Exception hierarchy

Every error raised on purpose by the package derives from HiGRUError so the
command line can turn it into a one-line diagnostic.
"""


class HiGRUError(Exception):
    """Base class for all package errors"""


class DimensionError(HiGRUError, ValueError):
    """Operand shapes do not agree"""


class InvalidMaskError(HiGRUError, ValueError):
    """Attention mask has no valid position or exceeds the sequence"""


class EmptySequenceError(HiGRUError, ValueError):
    """A sequence operation received zero time steps"""


class ConfigError(HiGRUError, ValueError):
    """Invalid configuration value"""


class ContractError(HiGRUError, ValueError):
    """A caller broke an operation's precondition"""


class MetricError(HiGRUError, ValueError):
    """A metric is undefined for the accumulated counts"""


class CheckpointError(HiGRUError):
    """Checkpoint cannot be read or does not match the expected model"""


class TrainingError(HiGRUError, RuntimeError):
    """Training produced a non-finite value"""


class IngestError(HiGRUError, ValueError):
    """Input file could not be parsed"""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        location = ''
        if path is not None:
            location = f'{path}:{line}: ' if line is not None else f'{path}: '
        elif line is not None:
            location = f'line {line}: '
        super().__init__(f'{location}{message}')
