import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leadsel import linalg
from leadsel.graph import Graph, gen_er, laplacian
from leadsel.oracle import (
    REFRESH_EVERY,
    CallCounter,
    OracleError,
    brute_force_optimum,
    commit,
    first_iteration_gains,
    initial_state,
    marginal_gain,
    objective,
    value_with,
)

K2 = Graph(2, ((0, 1),))
K3 = Graph(3, ((0, 1), (0, 2), (1, 2)))
P3 = Graph(3, ((0, 1), (1, 2)))
STAR4 = Graph(4, ((0, 1), (0, 2), (0, 3)))


def direct_objective(g, leaders):
    """Independent reference: numpy inverse of the follower block."""
    f = [v for v in range(g.n) if v not in set(leaders)]
    lap = laplacian(g)
    return 0.5 * np.trace(np.linalg.inv(lap[np.ix_(f, f)]))


def state_after(g, leaders, kind="accelerated"):
    lap = laplacian(g)
    pinv = linalg.pinv_laplacian(lap)
    st_ = initial_state(g, leaders[:1], kind, lap=lap, l_pinv=pinv)
    for v in leaders[1:]:
        st_ = commit(st_, v)
    return st_


class TestObjective:
    def test_p3(self):
        assert objective(P3, [1]) == pytest.approx(1.0)
        assert objective(P3, [0]) == pytest.approx(1.5)
        assert objective(K2, [0]) == pytest.approx(0.5)

    def test_undefined(self):
        with pytest.raises(OracleError, match="empty set"):
            objective(P3, [])
        with pytest.raises(OracleError):
            objective(P3, [0, 1, 2])
        with pytest.raises(OracleError):
            objective(P3, [0, 0])

    def test_matches_reference(self):
        g = gen_er(30, 0.2, 3)
        for s in ([0], [4, 9], [1, 2, 3, 17]):
            assert objective(g, s) == pytest.approx(direct_objective(g, s), rel=1e-12)


class TestFirstIteration:
    def test_p3(self):
        out = first_iteration_gains(P3)
        assert out == pytest.approx({0: 1.5, 1: 1.0, 2: 1.5})

    def test_k2_k3_symmetry(self):
        assert first_iteration_gains(K2) == pytest.approx({0: 0.5, 1: 0.5})
        vals = list(first_iteration_gains(K3).values())
        assert vals == pytest.approx([vals[0]] * 3)

    def test_matches_naive(self):
        g = gen_er(25, 0.2, 1)
        counter = CallCounter()
        out = first_iteration_gains(g, counter=counter)
        assert counter.calls == 25
        for m, val in out.items():
            assert val == pytest.approx(objective(g, [m]), rel=1e-10)

    def test_disconnected(self):
        with pytest.raises(OracleError):
            first_iteration_gains(Graph(4, ((0, 1), (2, 3))))


class TestState:
    @pytest.mark.parametrize("kind", ["naive", "accelerated"])
    def test_p3_gains(self, kind):
        s = initial_state(P3, [0], kind)
        # leaders {0,1}: follower {2}, block [1] -> 0.5; leaders {0,2}: block [2] -> 0.25
        assert marginal_gain(s, 1) == pytest.approx(1.0)
        assert marginal_gain(s, 2) == pytest.approx(1.25)
        assert s.call_count == 2
        with pytest.raises(OracleError):
            marginal_gain(s, 0)

    @pytest.mark.parametrize("kind", ["naive", "accelerated"])
    def test_p3_commit(self, kind):
        s = commit(initial_state(P3, [0], kind), 1)
        assert s.leaders == (0, 1)
        np.testing.assert_allclose(s.grounded_inverse, [[1.0]])
        assert s.index_map == (2,)
        assert s.check()

    def test_k2_cannot_commit(self):
        s = initial_state(K2, [0])
        with pytest.raises(OracleError):
            commit(s, 1)
        with pytest.raises(OracleError):
            marginal_gain(s, 1)

    def test_commit_is_pure(self):
        s = initial_state(P3, [0])
        before = s.grounded_inverse.copy()
        commit(s, 2)
        np.testing.assert_array_equal(s.grounded_inverse, before)
        assert s.leaders == (0,)

    @pytest.mark.parametrize("n", [8, 20, 50])
    def test_accelerated_matches_naive(self, n):
        rng = np.random.default_rng(n)
        g = gen_er(n, 0.3 if n == 8 else 0.15, seed=n)
        for _ in range(5):
            size = int(rng.integers(1, n - 1))
            leaders = [int(v) for v in rng.permutation(n)[:size]]
            acc = state_after(g, leaders)
            naive = objective(g, leaders)
            assert acc.value == pytest.approx(naive, rel=1e-8)
            assert set(acc.index_map) == set(range(n)) - set(leaders)
            assert acc.grounded_inverse.shape == (n - size, n - size)
            assert acc.check()

    def test_refresh_cadence(self):
        g = gen_er(90, 0.15, seed=4)
        order = [int(v) for v in np.random.default_rng(0).permutation(90)[:80]]
        s = state_after(g, order[:1])
        for i, v in enumerate(order[1:], start=1):
            s = commit(s, v)
            assert s.refresh_counter == i % REFRESH_EVERY
        assert s.value == pytest.approx(objective(g, order), rel=1e-8)
        assert s.check(1e-8)

    def test_call_count_tracks_evaluations(self):
        g = gen_er(15, 0.3, 2)
        s = initial_state(g, [3])
        for v in (0, 1, 2):
            value_with(s, v)
        s2 = commit(s, 0)
        marginal_gain(s2, 5)
        assert s2.call_count == s.call_count == 4


class TestBruteForce:
    def test_p3(self):
        assert brute_force_optimum(P3, 1) == ((1,), pytest.approx(1.0))

    def test_k3_tie(self):
        best, val = brute_force_optimum(K3, 1)
        assert best == (0,)
        assert val == pytest.approx(objective(K3, [1]))

    def test_star(self):
        vals = {v: direct_objective(STAR4, [v]) for v in range(4)}
        assert vals[0] == pytest.approx(1.5)
        assert all(vals[v] > vals[0] for v in (1, 2, 3))
        assert brute_force_optimum(STAR4, 1) == ((0,), pytest.approx(1.5))

    def test_matches_enumeration(self):
        g = gen_er(9, 0.4, 0)
        expected = min(itertools.combinations(range(9), 3),
                       key=lambda s: direct_objective(g, s))
        best, val = brute_force_optimum(g, 3)
        assert best == expected
        assert val == pytest.approx(direct_objective(g, expected))

    def test_guard(self):
        with pytest.raises(OracleError):
            brute_force_optimum(gen_er(21, 0.3, 0), 1)
        with pytest.raises(OracleError):
            brute_force_optimum(gen_er(12, 0.3, 0), 3, max_subsets=100)


@st.composite
def nested_sets(draw):
    seed = draw(st.integers(0, 50))
    n = draw(st.integers(4, 15))
    perm = np.random.default_rng(seed).permutation(n).tolist()
    t_size = draw(st.integers(1, n - 2))
    s_size = draw(st.integers(1, t_size))
    return seed, n, perm[:s_size], perm[:t_size], perm[t_size]


def _graph(seed, n):
    return gen_er(n, 0.4, seed)


@settings(max_examples=200, deadline=None)
@given(nested_sets())
def test_supermodular_decreasing_gains(case):
    seed, n, s, t, v = case
    g = _graph(seed, n)
    gain_s = objective(g, s) - objective(g, s + [v])
    gain_t = objective(g, t) - objective(g, t + [v])
    assert gain_s >= gain_t - 1e-10


@settings(max_examples=100, deadline=None)
@given(nested_sets())
def test_monotone_decreasing(case):
    seed, n, _, t, v = case
    g = _graph(seed, n)
    assert objective(g, t) > objective(g, t + [v])
