"""
Atomic Writes
Every output goes to a temp file in the target directory, then os.replace
"""
import logging
import os
import tempfile
from contextlib import contextmanager
from typing import Any, Iterator, Union

import orjson

logger = logging.getLogger(__name__)


@contextmanager
def atomic_path(path: str) -> Iterator[str]:
    """Yield a temporary path next to `path`; rename over it on success"""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix='.tmp-', suffix=os.path.splitext(path)[1], dir=directory)
    os.close(fd)
    try:
        yield tmp
        os.replace(tmp, path)
        logger.debug(f"Wrote {path}")
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def atomic_write(path: str, data: Union[bytes, str]) -> None:
    payload = data.encode('utf-8') if isinstance(data, str) else data
    with atomic_path(path) as tmp:
        with open(tmp, 'wb') as f:
            f.write(payload)


def dumps_json(obj: Any) -> bytes:
    """orjson with indent 2, sorted keys and numpy support; unknown objects fall back to str"""
    return orjson.dumps(obj, default=str, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY
                        | orjson.OPT_NON_STR_KEYS)


def write_json(path: str, obj: Any) -> None:
    atomic_write(path, dumps_json(obj))


def read_json(path: str) -> Any:
    with open(path, 'rb') as f:
        return orjson.loads(f.read())
