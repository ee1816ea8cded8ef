"""Non-overlapping occurrence counting via independent sets, and ranking.

Each mined pattern's occurrences become vertices of an overlap graph; edges
join occurrences sharing any application node. The size of a large
independent set of that graph is the number of fully utilizable PEs
implementing the pattern. Below `exact_threshold` vertices the set is a
true maximum independent set; above it a deterministic min-degree greedy
maximal set is used (the count only drives ranking).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EmptyInput
from .miner import MinedPattern


@dataclass
class OverlapGraph:
    mined: MinedPattern
    n: int
    edges: set[tuple[int, int]]  # i < j


@dataclass
class MisReport:
    mined: MinedPattern
    mis_size: int
    chosen_indices: list[int]
    exact: bool

    @property
    def chosen(self):
        return [self.mined.embeddings[i] for i in self.chosen_indices]


def build_overlap_graph(mp: MinedPattern) -> OverlapGraph:
    sets = [e.node_set for e in mp.embeddings]
    edges = set()
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            if sets[i] & sets[j]:
                edges.add((i, j))
    return OverlapGraph(mined=mp, n=len(sets), edges=edges)


def _adjacency(og: OverlapGraph) -> list[set[int]]:
    adj: list[set[int]] = [set() for _ in range(og.n)]
    for i, j in og.edges:
        adj[i].add(j)
        adj[j].add(i)
    return adj


def _max_independent_set(adj: list[set[int]], n: int) -> list[int]:
    """Exact maximum independent set; lexicographically smallest optimum.

    DFS over vertices in index order, include-before-exclude, keeping the
    first set of each record size, which is the lex-smallest maximum.
    """
    best: list[int] = []

    def rec(i: int, cur: list[int], banned: set[int], alive: list[int]) -> None:
        nonlocal best
        if len(cur) + len(alive) <= len(best):
            return
        if not alive:
            if len(cur) > len(best):
                best = list(cur)
            return
        v = alive[0]
        rest = alive[1:]
        if v not in banned:
            rec(i + 1, cur + [v], banned | adj[v], [u for u in rest if u not in adj[v]])
        rec(i + 1, cur, banned, rest)

    rec(0, [], set(), list(range(n)))
    return best


def _greedy_independent_set(adj: list[set[int]], n: int) -> list[int]:
    """Min-degree greedy maximal set; ties broken by lowest vertex index."""
    alive = set(range(n))
    chosen = []
    while alive:
        v = min(alive, key=lambda u: (len(adj[u] & alive), u))
        chosen.append(v)
        alive -= adj[v] | {v}
    return sorted(chosen)


def maximal_independent_set(
    og: OverlapGraph, exact_threshold: int = 25
) -> MisReport:
    adj = _adjacency(og)
    if og.n <= exact_threshold:
        chosen = _max_independent_set(adj, og.n)
        exact = True
    else:
        chosen = _greedy_independent_set(adj, og.n)
        exact = False
    return MisReport(
        mined=og.mined, mis_size=len(chosen), chosen_indices=sorted(chosen),
        exact=exact,
    )


def analyze_patterns(
    mined: list[MinedPattern], exact_threshold: int = 25
) -> list[MisReport]:
    """Per-pattern MIS reports, ranked."""
    reports = [
        maximal_independent_set(build_overlap_graph(mp), exact_threshold)
        for mp in mined
    ]
    return rank_patterns(reports) if reports else []


def rank_patterns(reports: list[MisReport]) -> list[MisReport]:
    """Descending MIS size; ties by (node count desc, canonical key asc)."""
    if not reports:
        raise EmptyInput("no pattern reports to rank")
    return sorted(
        reports,
        key=lambda r: (
            -r.mis_size,
            -r.mined.pattern.node_count,
            r.mined.pattern.key,
        ),
    )


def select_disjoint(
    node_sets: list[frozenset[str]], exact_threshold: int = 25
) -> list[int]:
    """Indices of a large pairwise-disjoint subfamily of node sets.

    Exact maximum below `exact_threshold` sets, min-degree greedy above;
    deterministic in both regimes.
    """
    n = len(node_sets)
    adj: list[set[int]] = [set() for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if node_sets[i] & node_sets[j]:
                adj[i].add(j)
                adj[j].add(i)
    if n <= exact_threshold:
        return sorted(_max_independent_set(adj, n))
    return _greedy_independent_set(adj, n)
