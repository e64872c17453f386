import dataclasses
import hashlib
import json
import logging

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

# this hashing approach was inspired by  https://death.andgravity.com/stable-hashing


def get_hash(thing) -> str:
    return hashlib.md5(json_dumps(thing).encode("utf-8")).digest().hex()


def json_dumps(thing, indent=None) -> str:
    return json.dumps(
        thing,
        default=json_default,
        ensure_ascii=False,
        sort_keys=True,
        indent=indent,
        separators=(",", ":") if indent is None else None,
    )


def json_default(thing):
    if isinstance(thing, np.ndarray):
        return thing.tolist()
    if isinstance(thing, np.generic):
        return thing.item()
    if isinstance(thing, pd.DataFrame):
        return (tuple(thing.columns), thing.values.tolist())
    if isinstance(thing, pd.Series):
        return thing.values.tolist()
    if dataclasses.is_dataclass(thing) and not isinstance(thing, type):
        return dataclasses.asdict(thing)
    if isinstance(thing, type):
        return thing.__name__
    raise TypeError(f"object of type {type(thing).__name__} not serializable")


class Memoizer(dict):
    """Cache of expensive, deterministic builds keyed by a stable hash of their inputs.

    Holds at most max_entries results; the least recently used one is dropped first.
    """

    def __init__(self, max_entries: int = 32):
        super().__init__()
        assert max_entries >= 1, max_entries
        self.max_entries = max_entries

    def __call__(self, fun, key_source, **kwargs):
        key = get_hash(key_source)
        if key in self:
            logger.debug(f"Reusing cached {fun.__name__} result")
            self[key] = self.pop(key)
        else:
            logger.debug(f"Running new {fun.__name__}")
            self[key] = fun(**kwargs)
            while len(self) > self.max_entries:
                del self[next(iter(self))]

        return self[key]


# why bother with a borg when a closure will do? :)
memoizer = Memoizer()
