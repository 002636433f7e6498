import hashlib
import os
import tempfile
from enum import Enum
from typing import Any

from monokit.backend.monodromy import MonodromyElement
from monokit.backend.topology import point_key


def atomic_write(path: str, text: str):
    """Write text next to ``path`` first, then move it into place in one step."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".monokit-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# Helper to turn report payloads into plain JSON values
def jsonable(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.name.lower() if not isinstance(value, str) else value.value
    if isinstance(value, MonodromyElement):
        return str(value)
    if isinstance(value, dict) or hasattr(value, "items"):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (set, frozenset)):
        return sorted((jsonable(v) for v in value), key=point_key)
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    return str(value)
