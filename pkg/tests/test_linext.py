import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gne.errors import CapacityError, ValidationError
from gne.graph import Dag
from gne.hybrid import HybridParams, gen_hybrid
from gne.linext import (brute_force_extensions, count_linear_extensions, extension_lower_bound,
                        log_factorial)


def random_dag(rng, n, p):
    edges = [(a, b) for a in range(n) for b in range(a) if rng.random() < p]
    perm = rng.permutation(n)  # relabel so edges are not always index-decreasing
    return Dag(n, np.array([(perm[a], perm[b]) for a, b in edges], dtype=np.int64).reshape(-1, 2))


def test_examples():
    assert count_linear_extensions(Dag(3)).count == 6
    assert count_linear_extensions(Dag(3, [[2, 1], [1, 0]])).count == 1
    assert count_linear_extensions(Dag(3, [[2, 0], [2, 1]])).count == 2
    assert brute_force_extensions(Dag(3, [[2, 0], [2, 1]])) == 2


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.floats(0, 1), st.integers(0, 10**6))
def test_dp_matches_brute_force(n, p, seed):
    dag = random_dag(np.random.default_rng(seed), n, p)
    assert count_linear_extensions(dag).count == brute_force_extensions(dag)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 7), st.integers(1, 7), st.integers(0, 10**6))
def test_disjoint_union_multiplicative(n1, n2, seed):
    rng = np.random.default_rng(seed)
    g1, g2 = random_dag(rng, n1, 0.4), random_dag(rng, n2, 0.4)
    union = Dag(n1 + n2, np.concatenate([g1.edges, g2.edges + n1]))
    m1, m2 = count_linear_extensions(g1).count, count_linear_extensions(g2).count
    assert count_linear_extensions(union).count == math.comb(n1 + n2, n1) * m1 * m2


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 16), st.floats(0, 0.5), st.integers(0, 10**6))
def test_log_bounded_by_factorial(n, p, seed):
    dag = random_dag(np.random.default_rng(seed), n, p)
    res = count_linear_extensions(dag)
    assert res.log_count <= log_factorial(n) + 1e-12
    if dag.edges.shape[0] == 0:
        assert res.count == math.factorial(n) and res.factorial_ratio == 1.0
    else:
        assert res.count < math.factorial(n)


def test_cycle_and_capacity():
    with pytest.raises(ValidationError):
        count_linear_extensions(Dag(3, [[0, 1], [1, 2], [2, 0]]))
    with pytest.raises(ValidationError):
        count_linear_extensions(Dag(2, [[1, 1]]))
    with pytest.raises(CapacityError):
        count_linear_extensions(Dag(25))
    with pytest.raises(CapacityError):
        brute_force_extensions(Dag(11))


def test_exact_at_24():
    res = count_linear_extensions(Dag(24, [[1, 0], [3, 2]]))
    assert res.count == math.factorial(24) // 4


def test_hybrid_dags_ratio():
    ratios = []
    for s in range(10):
        _, dag, _ = gen_hybrid(HybridParams(20, 1.0, 2.0, 2, seed=s))
        res = count_linear_extensions(dag)
        assert res.log_count <= log_factorial(20)
        ratios.append(res.factorial_ratio)
    assert np.mean(ratios) >= 0.5


def test_lower_bound():
    assert extension_lower_bound(10, 0.0, 1) == pytest.approx(log_factorial(10))
    assert extension_lower_bound(10, 0.0, 2) == pytest.approx(2 * log_factorial(5))
    assert extension_lower_bound(10, 100.0, 2) == 0.0
    with pytest.raises(ValidationError):
        extension_lower_bound(10, 1.0, 0)


def test_lower_bound_holds_when_blocks_sparse():
    # whenever every block has at most alpha N / K^2 internal edges the bound is valid
    N, alpha = 20, 1.0
    checked = 0
    for s in range(40):
        _, dag, _ = gen_hybrid(HybridParams(N, alpha, 2.0, 2, seed=s))
        lm = count_linear_extensions(dag).log_count
        for K in (2, 4, 5):
            size = N // K
            blk = dag.edges // size
            internal = np.bincount(blk[blk[:, 0] == blk[:, 1], 0], minlength=K) if dag.edges.size else np.zeros(K)
            if internal.max(initial=0) <= alpha * N / K**2:
                assert extension_lower_bound(N, alpha, K) <= lm + 1e-9
                checked += 1
    assert checked > 0
