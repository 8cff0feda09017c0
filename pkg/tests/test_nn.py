import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from prrtc.nn import distance, nearest_parallel, nearest_parallel_traced, nearest_serial

from oracles import argmin_nn


def test_distance_basics():
    assert distance([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert distance([0.0, 0.0], [3.0, 4.0]) == 5.0


def test_distance_dimension_mismatch():
    with pytest.raises(ValueError):
        distance([0.0, 0.0], [0.0, 0.0, 0.0])


finite = st.floats(-10.0, 10.0, allow_nan=False)


@given(arrays(float, 5, elements=finite), arrays(float, 5, elements=finite), arrays(float, 5, elements=finite))
def test_distance_metric_properties(a, b, c):
    assert distance(a, b) == distance(b, a)
    assert distance(a, c) <= distance(a, b) + distance(b, c) + 1e-12
    assert (distance(a, b) == 0.0) == bool(np.array_equal(a, b))


def test_singleton_tree():
    assert nearest_serial([[1.0, 1.0]], [5.0, 5.0]).index == 0
    assert nearest_parallel([[1.0, 1.0]], [5.0, 5.0], 4).index == 0


def test_tie_goes_to_lowest_index():
    nodes = np.array([[2.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    q = np.zeros(2)
    assert nearest_serial(nodes, q) == (1, 1.0)
    for n in (1, 2, 3, 4):
        assert nearest_parallel(nodes, q, n).index == 1


def test_ties_across_partitions():
    nodes = np.zeros((64, 3))
    nodes[[5, 20, 40, 63]] = 0.0
    nodes[np.arange(64) % 7 != 0] = 1.0
    q = np.zeros(3)
    for n in range(1, 65):
        assert nearest_parallel(nodes, q, n).index == 0


def test_empty_tree_rejected():
    with pytest.raises(ValueError):
        nearest_serial(np.empty((0, 3)), np.zeros(3))
    with pytest.raises(ValueError):
        nearest_parallel(np.empty((0, 3)), np.zeros(3), 4)


def test_bad_partitions():
    with pytest.raises(ValueError):
        nearest_parallel(np.zeros((3, 2)), np.zeros(2), 0)


def test_serial_matches_exhaustive_oracle():
    rng = np.random.default_rng(0)
    nodes = rng.uniform(-3, 3, size=(1000, 7))
    for _ in range(20):
        q = rng.uniform(-3, 3, size=7)
        idx, d = argmin_nn(nodes, q)
        res = nearest_serial(nodes, q)
        assert res.index == idx
        assert abs(res.distance - d) <= 1e-9


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 300), st.integers(1, 70), st.integers(0, 2**32 - 1))
def test_parallel_equals_serial(t, n, seed):
    rng = np.random.default_rng(seed)
    # coarse grid values make exact ties common
    nodes = rng.integers(-3, 4, size=(t, 4)).astype(float)
    q = rng.integers(-3, 4, size=4).astype(float)
    s, p = nearest_serial(nodes, q), nearest_parallel(nodes, q, n)
    assert p.index == s.index
    assert abs(p.distance - s.distance) <= 1e-9


def test_one_partition_is_serial():
    rng = np.random.default_rng(1)
    nodes = rng.normal(size=(50, 3))
    q = rng.normal(size=3)
    assert nearest_parallel(nodes, q, 1) == nearest_serial(nodes, q)


def test_snapshot_bound_respected():
    rng = np.random.default_rng(2)
    full = rng.normal(size=(100, 3))
    q = full[80].copy()
    snap = full[:50]
    assert nearest_serial(snap, q).index < 50
    assert nearest_parallel(snap, q, 8).index < 50


def test_comparison_accounting_1024_32():
    rng = np.random.default_rng(3)
    tr = nearest_parallel_traced(rng.normal(size=(1024, 7)), rng.normal(size=7), 32)
    bound = math.ceil(1024 / 32) + math.ceil(math.log2(32 / 2)) + 1
    assert max(tr.lane_comparisons) <= bound == 37
    assert tr.lane_comparisons[0] == 32 + 5
    assert tr.reduction_depth == 5


@pytest.mark.parametrize("t, n", [(1000, 7), (17, 32), (64, 1), (5, 2), (4096, 64)])
def test_comparison_accounting_general(t, n):
    rng = np.random.default_rng(t + n)
    tr = nearest_parallel_traced(rng.normal(size=(t, 3)), rng.normal(size=3), n)
    assert max(tr.lane_comparisons) <= math.ceil(t / n) + tr.reduction_depth
    assert tr.reduction_depth == math.ceil(math.log2(n)) if n > 1 else tr.reduction_depth == 0
