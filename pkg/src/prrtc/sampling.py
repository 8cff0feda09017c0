"""Halton configuration sampling and the dynamic-domain rejection rule."""

from __future__ import annotations

import math

import numpy as np


def first_primes(n: int) -> list[int]:
    primes: list[int] = []
    k = 2
    while len(primes) < n:
        if all(k % p for p in primes if p * p <= k):
            primes.append(k)
        k += 1
    return primes


def halton_value(base: int, index: int) -> float:
    """Radical inverse of ``index`` in ``base``; lies in [0, 1)."""
    if base < 2 or index < 0:
        raise ValueError("halton_value needs base >= 2 and index >= 0")
    result = 0.0
    f = 1.0 / base
    i = index
    while i > 0:
        i, digit = divmod(i, base)
        result += digit * f
        f /= base
    return result


def _scale(unit: np.ndarray, limits: np.ndarray) -> np.ndarray:
    lo, hi = limits[:, 0], limits[:, 1]
    q = lo + unit * (hi - lo)
    # keep hi exclusive against rounding
    return np.minimum(q, np.nextafter(hi, lo))


class HaltonSampler:
    """Draws the Halton points at indices offset, offset + stride, offset + 2 stride, ...

    Workers sharing a stride and using distinct offsets never draw the same index.
    """

    def __init__(self, dof: int, offset: int = 1, stride: int = 1):
        if stride < 1 or offset < 0:
            raise ValueError("stride must be >= 1 and offset >= 0")
        self.bases = first_primes(dof)
        self.offset = offset
        self.stride = stride
        self.index = offset

    def next_unit(self) -> np.ndarray:
        u = np.array([halton_value(b, self.index) for b in self.bases])
        self.index += self.stride
        return u

    def sample(self, limits) -> np.ndarray:
        return _scale(self.next_unit(), np.asarray(limits, dtype=float))


class UniformSampler:
    """Seeded uniform sampler, for property tests and seeded benchmark trials."""

    def __init__(self, dof: int, seed=None):
        self.dof = dof
        self.rng = np.random.default_rng(seed)

    def sample(self, limits) -> np.ndarray:
        return _scale(self.rng.random(self.dof), np.asarray(limits, dtype=float))


def sample_config(sampler: HaltonSampler, limits) -> np.ndarray:
    """Next configuration from ``sampler`` scaled into ``limits`` (hi exclusive)."""
    return sampler.sample(limits)


class DynamicDomain:
    """Per-node sampling radii for one tree; ``inf`` marks an unbounded node.

    Fixed-radius variant: a node gets radius ``r`` on its first failed
    extension and keeps it. Concurrent writers all store the same value, so
    the unsynchronized check-then-set is benign.
    """

    def __init__(self, capacity: int, r: float):
        if not r > 0:
            raise ValueError("dynamic-domain radius must be > 0")
        self.r = float(r)
        self.radii = np.full(capacity, math.inf)

    def radius(self, node: int) -> float | None:
        r = self.radii[node]
        return None if math.isinf(r) else float(r)


def dynamic_domain_accept(sample, nn_index: int, nn_distance: float, dd: DynamicDomain) -> bool:
    """Accept unless the nearest node has a radius and the sample lies beyond it."""
    return bool(nn_distance <= dd.radii[nn_index])


def dynamic_domain_record_failure(nn_index: int, dd: DynamicDomain) -> DynamicDomain:
    if math.isinf(dd.radii[nn_index]):
        dd.radii[nn_index] = dd.r
    return dd
