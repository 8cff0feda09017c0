"""Exact nearest-neighbour search by linear scan, serial and partitioned with a tree reduction."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np


class NnResult(NamedTuple):
    index: int
    distance: float


def distance(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    # hypot rescales, so tiny differences do not underflow to zero
    return math.hypot(*(a - b).ravel().tolist())


def _check(nodes: np.ndarray, q: np.ndarray) -> None:
    if len(nodes) == 0:
        raise ValueError("nearest-neighbour query on an empty tree")
    if nodes.shape[1] != q.shape[0]:
        raise ValueError(f"dimension mismatch: nodes have {nodes.shape[1]} values, query has {q.shape[0]}")


def nearest_serial(nodes, q) -> NnResult:
    """Minimum-distance row of ``nodes`` (a snapshot, T x dof); ties go to the lowest index."""
    nodes = np.asarray(nodes, dtype=float)
    q = np.asarray(q, dtype=float)
    _check(nodes, q)
    d = nodes - q
    d2 = np.einsum("ij,ij->i", d, d)
    i = int(np.argmin(d2))  # argmin returns the first minimum
    return NnResult(i, math.sqrt(float(d2[i])))


class ParallelNnTrace(NamedTuple):
    result: NnResult
    lane_comparisons: list[int]
    reduction_depth: int


def nearest_parallel_traced(nodes, q, partitions: int) -> ParallelNnTrace:
    """Partitioned scan plus pairwise reduction, with per-lane comparison counts.

    Lane k scans the contiguous chunk [k*c, (k+1)*c), c = ceil(T/n), counting
    one comparison per node it visits; each reduction level costs one
    comparison for every lane still holding a candidate.
    """
    nodes = np.asarray(nodes, dtype=float)
    q = np.asarray(q, dtype=float)
    _check(nodes, q)
    if partitions < 1:
        raise ValueError("partitions must be >= 1")
    t = len(nodes)
    chunk = -(-t // partitions)
    d = nodes - q
    d2 = np.einsum("ij,ij->i", d, d)

    lanes: list[tuple[float, int] | None] = []
    counts = [0] * partitions
    for k in range(partitions):
        lo, hi = k * chunk, min((k + 1) * chunk, t)
        if lo >= hi:
            lanes.append(None)
            continue
        j = lo + int(np.argmin(d2[lo:hi]))
        lanes.append((float(d2[j]), j))
        counts[k] += hi - lo

    depth = 0
    stride = 1
    while stride < partitions:
        depth += 1
        for k in range(0, partitions, 2 * stride):
            other = k + stride
            if other >= partitions:
                continue
            counts[k] += 1
            a, b = lanes[k], lanes[other]
            if b is not None and (a is None or b < a):  # tuples: ties fall to the lower index
                lanes[k] = b
        stride *= 2

    best_d2, best = lanes[0]
    return ParallelNnTrace(NnResult(best, math.sqrt(best_d2)), counts, depth)


def nearest_parallel(nodes, q, partitions: int) -> NnResult:
    return nearest_parallel_traced(nodes, q, partitions).result
