import random

import pytest

from conftest import brute_max_independent_set
from pe_dse.errors import EmptyInput
from pe_dse.graph import DataflowGraph, Embedding, GraphNode, Pattern
from pe_dse.miner import MinedPattern, MiningConfig, mine_frequent_subgraphs
from pe_dse.mis import (
    analyze_patterns,
    build_overlap_graph,
    maximal_independent_set,
    rank_patterns,
    select_disjoint,
)


def fake_mined(node_sets):
    """MinedPattern whose embeddings have the given node sets."""
    pat = Pattern(DataflowGraph([GraphNode("n0", "add")], []))
    embs = []
    for s in node_sets:
        # node_map content beyond the set is irrelevant to overlap analysis
        embs.append(Embedding(pat, tuple((f"n{i}", v) for i, v in enumerate(sorted(s)))))
    return MinedPattern(pat, len(embs), embs)


class TestOverlapGraph:
    def test_convolution_three_node_pattern(self, conv_graph):
        mined = mine_frequent_subgraphs(
            conv_graph, MiningConfig(min_support=4, max_pattern_nodes=3)
        )
        (mp,) = [
            m
            for m in mined
            if sorted(m.pattern.graph.op(v) for v in m.pattern.graph.node_ids)
            == ["add", "add", "mul"]
        ]
        og = build_overlap_graph(mp)
        assert og.n == 4
        # embeddings sorted by node set: [a0,a1,m0], [a0,a1,m1],
        # [a1,a2,m2], [a2,a3,m3]
        assert og.edges == {(0, 1), (0, 2), (1, 2), (2, 3)}
        report = maximal_independent_set(og)
        assert report.mis_size == 2
        assert report.exact

    def test_single_embedding(self):
        og = build_overlap_graph(fake_mined([{"a"}]))
        assert og.n == 1 and og.edges == set()

    def test_disjoint_embeddings(self):
        og = build_overlap_graph(fake_mined([{"a"}, {"b"}]))
        assert og.edges == set()
        assert maximal_independent_set(og).mis_size == 2


class TestIndependentSet:
    def test_edgeless(self):
        og = build_overlap_graph(fake_mined([{f"x{i}"} for i in range(6)]))
        assert maximal_independent_set(og).mis_size == 6

    def test_chosen_pairwise_disjoint(self, conv_graph):
        mined = mine_frequent_subgraphs(
            conv_graph, MiningConfig(min_support=2, max_pattern_nodes=3)
        )
        for report in analyze_patterns(mined):
            chosen = report.chosen
            for i in range(len(chosen)):
                for j in range(i + 1, len(chosen)):
                    assert not chosen[i].node_set & chosen[j].node_set

    def test_exact_against_brute_force(self):
        rng = random.Random(9)
        for _ in range(60):
            n = rng.randint(1, 12)
            universe = list(range(2 * n))
            sets = [
                frozenset(rng.sample(universe, rng.randint(1, 3)))
                for _ in range(n)
            ]
            og = build_overlap_graph(fake_mined([{str(x) for x in s} for s in sets]))
            adj = [set() for _ in range(n)]
            for i, j in og.edges:
                adj[i].add(j)
                adj[j].add(i)
            assert maximal_independent_set(og).mis_size == (
                brute_max_independent_set(adj)
            )

    def test_greedy_above_threshold_is_maximal(self):
        rng = random.Random(4)
        sets = [
            frozenset(rng.sample(range(40), 2)) for _ in range(30)
        ]
        og = build_overlap_graph(
            fake_mined([{str(x) for x in s} for s in sets])
        )
        report = maximal_independent_set(og, exact_threshold=25)
        assert not report.exact
        chosen_sets = [sets[i] for i in report.chosen_indices]
        for i in range(len(chosen_sets)):
            for j in range(i + 1, len(chosen_sets)):
                assert not chosen_sets[i] & chosen_sets[j]
        # maximality: every unchosen embedding overlaps some chosen one
        for i, s in enumerate(sets):
            if i in report.chosen_indices:
                continue
            assert any(s & c for c in chosen_sets)


class TestRanking:
    def test_empty_raises(self):
        with pytest.raises(EmptyInput):
            rank_patterns([])

    def test_descending_mis_size(self, conv_graph):
        mined = mine_frequent_subgraphs(
            conv_graph, MiningConfig(min_support=2, max_pattern_nodes=3)
        )
        reports = analyze_patterns(mined)
        sizes = [r.mis_size for r in reports]
        assert sizes == sorted(sizes, reverse=True)

    def test_tie_break_by_node_count(self, conv_graph):
        mined = mine_frequent_subgraphs(
            conv_graph, MiningConfig(min_support=2, max_pattern_nodes=3)
        )
        reports = analyze_patterns(mined)
        for a, b in zip(reports, reports[1:]):
            if a.mis_size == b.mis_size:
                assert a.mined.pattern.node_count >= b.mined.pattern.node_count

    def test_mis_never_exceeds_frequency(self, conv_graph):
        mined = mine_frequent_subgraphs(
            conv_graph, MiningConfig(min_support=2, max_pattern_nodes=4)
        )
        for r in analyze_patterns(mined):
            assert r.mis_size <= r.mined.frequency


class TestSelectDisjoint:
    def test_basic(self):
        sets = [frozenset("ab"), frozenset("bc"), frozenset("cd"), frozenset("ef")]
        idx = select_disjoint(sets)
        assert idx == [0, 2, 3]

    def test_empty(self):
        assert select_disjoint([]) == []
