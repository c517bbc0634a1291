"""Boolean functions on bit tuples."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class BooleanFunction:
    name: str
    arity: int
    fn: Callable[[tuple[int, ...]], int]

    def __call__(self, x) -> int:
        x = tuple(int(b) for b in x)
        if len(x) != self.arity:
            raise ValueError(f"{self.name} expects {self.arity} bits, got {len(x)}")
        return int(self.fn(x))

    def truth_table(self) -> np.ndarray:
        """Values on all inputs, indexed with x_0 as the most significant bit."""
        n = self.arity
        return np.array([self(tuple((k >> (n - 1 - j)) & 1 for j in range(n))) for k in range(1 << n)], dtype=np.int8)


def parity(n: int) -> BooleanFunction:
    return BooleanFunction(f"parity{n}", n, lambda x: sum(x) & 1)


def majority(n: int) -> BooleanFunction:
    return BooleanFunction(f"maj{n}", n, lambda x: int(2 * sum(x) > n))


def constant(n: int, value: int) -> BooleanFunction:
    return BooleanFunction(f"const{value}_{n}", n, lambda x: value)


def dictator(n: int, i: int) -> BooleanFunction:
    return BooleanFunction(f"x{i}_{n}", n, lambda x: x[i])


def from_table(name: str, table) -> BooleanFunction:
    t = [int(v) for v in table]
    n = int(round(np.log2(len(t))))
    if 1 << n != len(t):
        raise ValueError("truth table length must be a power of two")

    def f(x):
        k = 0
        for b in x:
            k = (k << 1) | b
        return t[k]

    return BooleanFunction(name, n, f)


def by_name(name: str, n: int) -> BooleanFunction:
    table = {"parity": parity, "par": parity, "maj": majority, "majority": majority}
    if name not in table:
        raise ValueError(f"unknown function {name!r}; choose from parity, maj")
    return table[name](n)
