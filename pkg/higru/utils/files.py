import os
import tempfile
from contextlib import contextmanager


@contextmanager
def atomic_write(path, mode='w', encoding='utf-8'):
    """
    Write to a temporary file next to path, then rename over it

    An interrupted write leaves the previous file (or nothing) in place,
    never a truncated one.
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(prefix='.tmp-', dir=directory)
    try:
        kwargs = {} if 'b' in mode else {'encoding': encoding, 'newline': ''}
        with os.fdopen(fd, mode, **kwargs) as handle:
            yield handle
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
