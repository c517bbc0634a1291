"""Fourier analysis of Boolean functions in the +-1 representation.

A Boolean function f is encoded as F(x) = (-1)^f(x).  Subsets S of the
variables are bit masks in the same order as truth-table indices
(variable 0 is the most significant bit), and
F_hat(S) = 2^-n sum_x F(x) (-1)^{popcount(x & S)}.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Callable

import numpy as np

from .boolean import BooleanFunction

MAX_FOURIER_N = 16


class FourierError(ValueError):
    pass


def fwht(values: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform of a length-2^n vector."""
    a = np.array(values, dtype=float)
    n = a.size
    if n & (n - 1):
        raise FourierError("length must be a power of two")
    h = 1
    while h < n:
        a = a.reshape(-1, 2, h)
        a = np.stack([a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]], axis=1).reshape(-1)
        h *= 2
    return a


def _popcounts(n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    return np.array([int(i).bit_count() for i in idx], dtype=np.int64)


@dataclass(frozen=True)
class FourierSpectrum:
    n: int
    coefficients: np.ndarray

    def __post_init__(self) -> None:
        if self.coefficients.shape != (1 << self.n,):
            raise FourierError("need one coefficient per subset")

    def coefficient(self, subset) -> float:
        mask = 0
        for i in subset:
            mask |= 1 << (self.n - 1 - i)
        return float(self.coefficients[mask])

    def total(self) -> float:
        return float(np.sum(self.coefficients**2))


def spectrum(f: BooleanFunction | Callable, n: int | None = None) -> FourierSpectrum:
    if n is None:
        n = f.arity
    if n > MAX_FOURIER_N:
        raise FourierError(f"n = {n} exceeds the limit {MAX_FOURIER_N}")
    if isinstance(f, BooleanFunction):
        table = f.truth_table()
    else:
        table = np.array([f(tuple((k >> (n - 1 - j)) & 1 for j in range(n))) for k in range(1 << n)])
    signs = 1.0 - 2.0 * np.asarray(table, dtype=float)
    return FourierSpectrum(n, fwht(signs) / (1 << n))


def weight(spec: FourierSpectrum, pred: Callable[[int], bool] | int) -> float:
    """Sum of squared coefficients over subsets whose size satisfies ``pred``
    (an int k means |S| == k)."""
    if isinstance(pred, int):
        k = pred
        pred = lambda m: m == k  # noqa: E731
    sizes = _popcounts(spec.n)
    mask = np.array([bool(pred(int(m))) for m in sizes])
    return float(np.sum(spec.coefficients[mask] ** 2))


def weight_at_most(spec: FourierSpectrum, k: int) -> float:
    return weight(spec, lambda m: m <= k)


def majority_weight1_closed(n: int) -> float:
    """W^{=1}(MAJ_n) = 4n / 4^n * C(n-1, (n-1)/2)^2 for odd n."""
    if n < 1 or n % 2 == 0:
        raise FourierError("majority weight formula needs odd n")
    return 4 * n * comb(n - 1, (n - 1) // 2) ** 2 / 4**n


def balanced_assignment_prob(m: int) -> float:
    """Probability that m uniform bits contain exactly m/2 ones."""
    if m < 2 or m % 2:
        raise FourierError("m must be even and at least 2")
    return comb(m, m // 2) / 2**m
