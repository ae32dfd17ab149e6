import hashlib
import json
from typing import Any, Iterable, Tuple, Union

import numpy as np

from .exceptions import DuplicateIndex, IndexOutOfRange, ValidationError


def normalize_index_set(
    indices: Iterable[int], N: int, name: str = "index"
) -> Tuple[int, ...]:
    """
    Validate a 1-based index set against ``[1:N]`` and return it sorted.

    :param indices: Any iterable of integers, numpy integers included
    :param N: Upper bound of the index range
    :param name: What the indices are, used in error messages
    """
    values = []
    for i in indices:
        if isinstance(i, (bool, np.bool_)) or not isinstance(i, (int, np.integer)):
            raise ValidationError("{} must be integers, got {!r}".format(name, i))
        values.append(int(i))
    bad = [i for i in values if i < 1 or i > N]
    if bad:
        raise IndexOutOfRange(bad, N, name, base=1)
    if len(set(values)) != len(values):
        seen = set()
        dupes = {i for i in values if i in seen or seen.add(i)}
        raise DuplicateIndex(dupes, name)
    return tuple(sorted(values))


def to_zero_based(indices: Iterable[int]) -> np.ndarray:
    return np.asarray(list(indices), dtype=np.intp).reshape(-1) - 1


def parse_index_list(text: str) -> Tuple[int, ...]:
    """Parse a comma-separated list of 1-based indices, e.g. ``"1,2,3"``; ``""`` is empty."""
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise ValidationError("bad index list {!r}".format(text))


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def sha256_hex(data: Union[str, bytes]) -> str:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()


class classproperty(object):
    def __init__(self, getter):
        self.getter = getter

    def __get__(self, instance, owner):
        return self.getter(owner)
