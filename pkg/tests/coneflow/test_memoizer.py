from dataclasses import dataclass

import numpy as np
import pandas as pd
import pytest

from coneflow.memoizer import Memoizer, get_hash, json_dumps


@dataclass
class Point:
    x: float
    y: float


class TestHashing:
    def test_key_order_does_not_matter(self):
        assert get_hash({"a": 1, "b": [1, 2]}) == get_hash({"b": [1, 2], "a": 1})

    def test_numpy_and_pandas_values(self):
        assert json_dumps(np.arange(3)) == "[0,1,2]"
        assert json_dumps(np.float64(0.5)) == "0.5"
        assert get_hash(pd.Series([1.0, 2.0])) == get_hash([1.0, 2.0])
        assert get_hash(Point(1.0, 2.0)) == get_hash({"x": 1.0, "y": 2.0})

    def test_unserializable(self):
        with pytest.raises(TypeError):
            json_dumps(object())


class TestMemoizer:
    def test_builds_once_per_key(self):
        calls = []

        def build(n):
            calls.append(n)
            return np.zeros(n)

        memo = Memoizer()
        first = memo(build, {"n": 3}, n=3)
        assert memo(build, {"n": 3}, n=3) is first
        memo(build, {"n": 4}, n=4)
        assert calls == [3, 4]

    def test_least_recently_used_entry_is_dropped(self):
        calls = []

        def build(n):
            calls.append(n)
            return n

        memo = Memoizer(max_entries=2)
        memo(build, {"n": 1}, n=1)
        memo(build, {"n": 2}, n=2)
        memo(build, {"n": 1}, n=1)
        memo(build, {"n": 3}, n=3)
        assert len(memo) == 2
        assert calls == [1, 2, 3]
        memo(build, {"n": 1}, n=1)
        memo(build, {"n": 2}, n=2)
        assert calls == [1, 2, 3, 2]


if __name__ == "__main__":
    pytest.main([__file__])
