import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mqaoa.ising import (
    CapacityExceeded,
    Graph,
    IsingHamiltonian,
    Matching,
    brute_force_ground,
    cut_value,
    dumps,
    energy_of,
    loads,
    make_cycle,
    make_erdos_renyi,
    make_random_regular,
    max_cut,
    maximal_matching,
    maxcut_to_ising,
    partition_from_matching,
)


def all_bits(n):
    return [np.array(b, dtype=np.int8) for b in itertools.product((0, 1), repeat=n)]


def random_graph(seed, n, p=0.5, weighted=False):
    rng = np.random.default_rng(seed)
    edges = []
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < p:
            edges.append((i, j, rng.uniform(0.1, 2.0) if weighted else 1.0))
    return Graph.from_edges(n, edges)


def is_maximal(graph, matching, min_weight=0.0):
    covered = {v for e in matching.edges for v in e}
    return all(i in covered or j in covered for (i, j), w in graph.edges.items() if abs(w) >= min_weight)


class TestHamiltonian:
    def test_keys_normalised_and_merged(self):
        H = IsingHamiltonian(3, {(2, 0): 1.0, (0, 2): 0.5, (1, 2): 1e-14})
        assert H.couplings == {(0, 2): 1.5}

    def test_zero_weight_removed(self):
        H = IsingHamiltonian(2, {(0, 1): 0.0})
        assert H.couplings == {}

    @pytest.mark.parametrize("bad", [{(0, 0): 1.0}, {(0, 3): 1.0}, {(-1, 1): 1.0}])
    def test_invalid_couplings(self, bad):
        with pytest.raises(ValueError):
            IsingHamiltonian(3, bad)

    def test_fields_shape_checked(self):
        with pytest.raises(ValueError):
            IsingHamiltonian(3, {}, [1.0, 2.0])


class TestGenerators:
    def test_cycle_4(self):
        g = make_cycle(4)
        assert set(g.edges) == {(0, 1), (1, 2), (2, 3), (0, 3)}
        assert set(g.edges.values()) == {1.0}

    @pytest.mark.parametrize("n", [3, 2, 7])
    def test_cycle_rejects(self, n):
        with pytest.raises(ValueError):
            make_cycle(n)

    @pytest.mark.parametrize("n, expected", [(4, 4.0), (12, 12.0)])
    def test_even_cycle_fully_cut(self, n, expected):
        value, bits = max_cut(make_cycle(n))
        assert value == expected
        if n == 4:
            assert list(bits) == [0, 1, 0, 1]

    def test_regular_k4(self):
        g = make_random_regular(4, 3, seed=1)
        assert set(g.edges) == set(itertools.combinations(range(4), 2))

    def test_regular_degrees(self):
        g = make_random_regular(16, 3, seed=7)
        assert np.all(g.degrees() == 3)
        assert g.num_edges == 24

    def test_regular_deterministic(self):
        assert make_random_regular(16, 3, 5).edges == make_random_regular(16, 3, 5).edges

    def test_regular_infeasible(self):
        with pytest.raises(ValueError):
            make_random_regular(5, 3, 0)

    def test_erdos_renyi_forced_edge(self):
        g = make_erdos_renyi(2, 1.0, seed=0)
        assert g.edges == {(0, 1): 1.0}

    def test_erdos_renyi_connected(self):
        assert make_erdos_renyi(20, 0.1, seed=3).is_connected()

    def test_erdos_renyi_mean_edge_count(self):
        # Oracle: plain rejection sampling with its own connectivity check.
        # Conditioning on connectivity lifts the mean well above rho * C(20, 2) = 19.
        rng = np.random.default_rng(123)
        pairs = list(itertools.combinations(range(20), 2))
        reference = []
        while len(reference) < 1000:
            edges = [p for p in pairs if rng.random() < 0.1]
            if Graph.from_edges(20, edges).is_connected():
                reference.append(len(edges))
        counts = [make_erdos_renyi(20, 0.1, s).num_edges for s in range(200)]
        # standard error of the difference is about 0.25
        assert abs(np.mean(counts) - np.mean(reference)) < 1.0
        assert min(counts) >= 19

    def test_erdos_renyi_rejects(self):
        with pytest.raises(ValueError):
            make_erdos_renyi(1, 0.5, 0)
        with pytest.raises(ValueError):
            make_erdos_renyi(5, 0.0, 0)


class TestEnergies:
    def test_single_edge_coupling(self):
        H = maxcut_to_ising(Graph.from_edges(2, [(0, 1)]))
        assert H.couplings == {(0, 1): 0.5}

    def test_ring4_energies(self):
        H = maxcut_to_ising(make_cycle(4))
        assert energy_of(H, [0, 1, 0, 1]) == -2.0
        assert energy_of(H, [0, 0, 0, 0]) == 2.0

    def test_ring4_minimum_via_enumeration(self):
        H = maxcut_to_ising(make_cycle(4))
        assert min(energy_of(H, b) for b in all_bits(4)) == -2.0

    def test_empty_graph(self):
        H = maxcut_to_ising(Graph(3))
        assert all(energy_of(H, b) == 0.0 for b in all_bits(3))

    def test_offset_only(self):
        H = IsingHamiltonian(2, {}, None, 1.25)
        assert energy_of(H, [1, 0]) == 1.25

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            energy_of(maxcut_to_ising(make_cycle(4)), [0, 1])

    def test_diagonal_matches_energy_of(self):
        rng = np.random.default_rng(0)
        H = IsingHamiltonian(5, {(0, 3): 0.7, (1, 2): -0.4, (2, 4): 1.1}, rng.normal(size=5), 0.3)
        d = H.diagonal()
        for k in range(32):
            bits = [(k >> q) & 1 for q in range(5)]
            assert d[k] == pytest.approx(energy_of(H, bits), abs=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000), st.integers(2, 12))
    def test_cut_energy_round_trip(self, seed, n):
        g = random_graph(seed, n, weighted=True)
        H = maxcut_to_ising(g)
        rng = np.random.default_rng(seed)
        for _ in range(20):
            b = rng.integers(0, 2, n)
            assert cut_value(g, b) + energy_of(H, b) == pytest.approx(0.5 * g.total_weight, abs=1e-12)


class TestBruteForce:
    def test_ring4(self):
        e, mins = brute_force_ground(maxcut_to_ising(make_cycle(4)))
        assert e == -2.0
        assert [list(b) for b in mins] == [[0, 1, 0, 1], [1, 0, 1, 0]]

    def test_single_field(self):
        e, mins = brute_force_ground(IsingHamiltonian(1, {}, [1.0]))
        assert e == -1.0
        assert [list(b) for b in mins] == [[1]]

    def test_triangle_degenerate(self):
        e, mins = brute_force_ground(maxcut_to_ising(Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])))
        assert e == -0.5
        assert len(mins) == 6
        assert list(mins[0]) == [0, 0, 1]

    def test_cap(self):
        with pytest.raises(CapacityExceeded):
            brute_force_ground(IsingHamiltonian(6, {(0, 1): 1.0}), cap=5)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_independent_enumeration(self, seed):
        rng = np.random.default_rng(seed)
        n = 9
        H = IsingHamiltonian(
            n,
            {(i, j): rng.uniform(-1, 1) for i, j in itertools.combinations(range(n), 2) if rng.random() < 0.4},
            rng.uniform(-1, 1, n),
        )
        energies = {tuple(b): energy_of(H, b) for b in all_bits(n)}
        lo = min(energies.values())
        e, mins = brute_force_ground(H)
        assert e == pytest.approx(lo, abs=1e-12)
        assert [tuple(b) for b in mins] == sorted(k for k, v in energies.items() if v <= lo + 1e-12)


class TestMatching:
    def test_single_edge(self):
        g = Graph.from_edges(2, [(0, 1)])
        assert set(maximal_matching(g, 3).edges) == {(0, 1)}

    @pytest.mark.parametrize("seed", range(10))
    def test_path_size_one(self, seed):
        m = maximal_matching(Graph.from_edges(3, [(0, 1), (1, 2)]), seed)
        assert len(m) == 1

    @pytest.mark.parametrize("seed", range(20))
    def test_cycle8_maximal(self, seed):
        g = make_cycle(8)
        m = maximal_matching(g, seed)
        assert len(m) in (3, 4)
        assert is_maximal(g, m)

    def test_shared_vertex_rejected(self):
        with pytest.raises(ValueError):
            Matching(frozenset({(0, 1), (1, 2)}))

    def test_tiny_weights_excluded(self):
        g = Graph.from_edges(4, [(0, 1, 1e-9), (1, 2, 1.0), (2, 3, 1e-9)])
        m = maximal_matching(g, 0)
        assert set(m.edges) == {(1, 2)}
        m = maximal_matching(g, 0, min_weight=0.0)
        assert len(m) >= 1 and is_maximal(g, m)

    def test_shuffles_give_different_matchings(self):
        g = make_random_regular(16, 3, 0)
        assert len({maximal_matching(g, s).edges for s in range(10)}) > 1

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10_000), st.integers(2, 14), st.floats(0.1, 0.9))
    def test_maximal_property(self, seed, n, p):
        g = random_graph(seed, n, p, weighted=True)
        m = maximal_matching(g, seed)
        seen = [v for e in m.edges for v in e]
        assert len(seen) == len(set(seen))
        assert all(e in g.edges for e in m.edges)
        assert is_maximal(g, m)


class TestPartition:
    def test_perfect(self):
        p = partition_from_matching(4, Matching(frozenset({(2, 3), (0, 1)})))
        assert p.blocks == ((0, 1), (2, 3))
        assert p.unmatched == ()
        assert p.n_coarse == 2
        assert list(p.relabel) == [0, 0, 1, 1]

    def test_with_unmatched(self):
        p = partition_from_matching(3, Matching(frozenset({(0, 2)})))
        assert p.blocks == ((0, 2),)
        assert p.unmatched == (1,)
        assert p.n_coarse == 2
        assert list(p.relabel) == [0, 1, 0]

    def test_empty(self):
        p = partition_from_matching(5, Matching(frozenset()))
        assert p.n_coarse == 5
        assert list(p.relabel) == [0, 1, 2, 3, 4]

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            partition_from_matching(3, Matching(frozenset({(1, 4)})))


def test_serialization_round_trip():
    H = IsingHamiltonian(4, {(0, 1): 0.1 + 0.2, (2, 3): -1 / 3}, [0.0, np.pi, 0.0, -np.e], 1 / 7)
    assert loads(dumps(H)) == H
    g = make_random_regular(8, 3, 2)
    assert loads(dumps(g), kind="graph") == g
