"""Shared fixtures and brute-force oracles.

The oracles here deliberately avoid the library's search machinery: they
enumerate permutations, subsets, and covers exhaustively so test failures
point at the implementation, not the oracle.
"""

from __future__ import annotations

import itertools
import random

import pytest

from pe_dse.graph import (
    ARITY,
    BLOCK_CLASS,
    DataflowGraph,
    GraphEdge,
    GraphNode,
    is_commutative,
)

# -- fixture graphs ------------------------------------------------------------


def build_conv_graph() -> DataflowGraph:
    """4-tap multiply-accumulate: out = sum(i_k * w_k) + c."""
    nodes, edges = [], []
    for k in range(4):
        nodes += [
            GraphNode(f"i{k}", "input"),
            GraphNode(f"w{k}", "const", k + 1),
            GraphNode(f"m{k}", "mul"),
        ]
        edges += [
            GraphEdge(f"i{k}", 0, f"m{k}", 0),
            GraphEdge(f"w{k}", 0, f"m{k}", 1),
        ]
    nodes += [GraphNode("c", "input")]
    nodes += [GraphNode(f"a{j}", "add") for j in range(4)]
    edges += [
        GraphEdge("m0", 0, "a0", 0),
        GraphEdge("m1", 0, "a0", 1),
        GraphEdge("a0", 0, "a1", 0),
        GraphEdge("m2", 0, "a1", 1),
        GraphEdge("a1", 0, "a2", 0),
        GraphEdge("m3", 0, "a2", 1),
        GraphEdge("a2", 0, "a3", 0),
        GraphEdge("c", 0, "a3", 1),
    ]
    nodes += [GraphNode("out", "output")]
    edges += [GraphEdge("a3", 0, "out", 0)]
    return DataflowGraph(nodes, edges)


def build_merge_example_a() -> DataflowGraph:
    """Two chained adds with a constant on the final add's other port."""
    return DataflowGraph(
        [
            GraphNode("a0", "const", None),
            GraphNode("a1", "add"),
            GraphNode("a2", "add"),
        ],
        [GraphEdge("a2", 0, "a1", 0), GraphEdge("a0", 0, "a1", 1)],
    )


def build_merge_example_b() -> DataflowGraph:
    """const -> mul -> add, with a second add feeding the final add."""
    return DataflowGraph(
        [
            GraphNode("b0", "const", None),
            GraphNode("b1", "mul"),
            GraphNode("b2", "add"),
            GraphNode("b3", "add"),
        ],
        [
            GraphEdge("b0", 0, "b1", 1),
            GraphEdge("b1", 0, "b2", 0),
            GraphEdge("b3", 0, "b2", 1),
        ],
    )


@pytest.fixture
def conv_graph() -> DataflowGraph:
    return build_conv_graph()


@pytest.fixture
def merge_example_a() -> DataflowGraph:
    return build_merge_example_a()


@pytest.fixture
def merge_example_b() -> DataflowGraph:
    return build_merge_example_b()


# -- random graph generation ----------------------------------------------------

DEFAULT_OPS = ["add", "mul", "sub", "xor", "min"]


def random_dag(
    rng: random.Random,
    n_nodes: int,
    ops: list[str] = DEFAULT_OPS,
    const_prob: float = 0.15,
    drive_prob: float = 0.75,
) -> DataflowGraph:
    """Random valid dataflow DAG; undriven ports stay external inputs."""
    nodes, edges = [], []
    ids = [f"v{i}" for i in range(n_nodes)]
    for i, vid in enumerate(ids):
        if i > 0 and rng.random() < const_prob:
            nodes.append(GraphNode(vid, "const", rng.randrange(1 << 16)))
            continue
        op = rng.choice(ops)
        nodes.append(GraphNode(vid, op))
        for p in range(ARITY[op]):
            if i > 0 and rng.random() < drive_prob:
                edges.append(GraphEdge(rng.choice(ids[:i]), 0, vid, p))
    return DataflowGraph(nodes, edges)


def connected_random_dag(rng: random.Random, n_nodes: int, **kw) -> DataflowGraph:
    """Largest weakly connected component of a random DAG, >= 2 nodes."""
    while True:
        g = random_dag(rng, n_nodes, **kw)
        und = {v: set() for v in g.node_ids}
        for e in g.edges:
            und[e.src].add(e.dst)
            und[e.dst].add(e.src)
        best: set = set()
        seen: set = set()
        for v in g.node_ids:
            if v in seen:
                continue
            comp, stack = set(), [v]
            while stack:
                u = stack.pop()
                if u in comp:
                    continue
                comp.add(u)
                stack.extend(und[u] - comp)
            seen |= comp
            if len(comp) > len(best):
                best = comp
        if len(best) >= 2:
            return g.induced_subgraph(best)


# -- isomorphism oracle ----------------------------------------------------------


def _ports_equal_mod_comm(
    g1: DataflowGraph, g2: DataflowGraph, phi: dict[str, str]
) -> bool:
    for v in g1.node_ids:
        ins1 = g1.in_edges(v)
        ins2 = g2.in_edges(phi[v])
        if len(ins1) != len(ins2):
            return False
        if is_commutative(g1.op(v)):
            srcs1 = sorted(phi[e.src] for e in ins1.values())
            srcs2 = sorted(e.src for e in ins2.values())
            if srcs1 != srcs2:
                return False
        else:
            for p, e in ins1.items():
                e2 = ins2.get(p)
                if e2 is None or e2.src != phi[e.src]:
                    return False
    return True


def brute_iso(g1: DataflowGraph, g2: DataflowGraph) -> bool:
    """Exhaustive isomorphism test: op labels must match, port labels modulo
    commutativity, const values ignored."""
    n1, n2 = g1.node_ids, g2.node_ids
    if len(n1) != len(n2):
        return False
    if sorted(g1.op(v) for v in n1) != sorted(g2.op(v) for v in n2):
        return False
    for perm in itertools.permutations(n2):
        phi = dict(zip(n1, perm))
        if all(g1.op(v) == g2.op(phi[v]) for v in n1) and _ports_equal_mod_comm(
            g1, g2, phi
        ):
            return True
    return False


def brute_embeddings(pg: DataflowGraph, g: DataflowGraph) -> set[frozenset]:
    """Node sets of all injective structure-preserving maps pattern -> g."""
    pn = pg.node_ids
    found = set()
    candidates = [
        [v for v in g.node_ids if g.op(v) == pg.op(p)] for p in pn
    ]
    for combo in itertools.product(*candidates):
        if len(set(combo)) != len(pn):
            continue
        phi = dict(zip(pn, combo))
        ok = True
        for p in pn:
            ins = pg.in_edges(p)
            gins = g.in_edges(phi[p])
            if is_commutative(pg.op(p)):
                want = sorted(phi[e.src] for e in ins.values())
                have = sorted(e.src for e in gins.values())
                cnt = {s: have.count(s) for s in set(have)}
                for s in want:
                    if cnt.get(s, 0) <= 0:
                        ok = False
                        break
                    cnt[s] -= 1
                if not ok:
                    break
            else:
                for port, e in ins.items():
                    e2 = gins.get(port)
                    if e2 is None or e2.src != phi[e.src]:
                        ok = False
                        break
                if not ok:
                    break
        if ok:
            found.add(frozenset(combo))
    return found


# -- subset-based oracles ----------------------------------------------------------


def is_weakly_connected(g: DataflowGraph, nodes: frozenset) -> bool:
    if not nodes:
        return False
    adj = {v: set() for v in nodes}
    for e in g.edges:
        if e.src in nodes and e.dst in nodes:
            adj[e.src].add(e.dst)
            adj[e.dst].add(e.src)
    seen = set()
    stack = [next(iter(sorted(nodes)))]
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        stack.extend(adj[v] - seen)
    return seen == set(nodes)


def brute_connected_subsets(
    g: DataflowGraph, allowed: set[str], max_size: int
) -> list[frozenset]:
    """Every connected induced node subset of `allowed`, by raw subset scan."""
    allowed = sorted(allowed)
    out = []
    for r in range(1, min(max_size, len(allowed)) + 1):
        for combo in itertools.combinations(allowed, r):
            s = frozenset(combo)
            if is_weakly_connected(g, s):
                out.append(s)
    return out


def brute_max_independent_set(adj: list[set[int]]) -> int:
    n = len(adj)
    best = 0
    for r in range(n, 0, -1):
        if r <= best:
            break
        for combo in itertools.combinations(range(n), r):
            if all(j not in adj[i] for i, j in itertools.combinations(combo, 2)):
                best = r
                break
        if best:
            break
    return best


def brute_max_weight_clique(weights: list[float], adj: list[set[int]]) -> float:
    n = len(weights)
    best = 0.0
    for r in range(1, n + 1):
        for combo in itertools.combinations(range(n), r):
            if all(j in adj[i] for i, j in itertools.combinations(combo, 2)):
                best = max(best, sum(weights[i] for i in combo))
    return best


def brute_min_cover(universe: frozenset, candidates: list[frozenset]) -> int:
    """Minimum number of pairwise-disjoint candidate sets that exactly
    partition the universe; DFS over the smallest uncovered element."""
    best = [len(universe) + 1]

    def rec(covered: frozenset, used: int) -> None:
        if used >= best[0]:
            return
        rest = universe - covered
        if not rest:
            best[0] = used
            return
        pivot = min(rest)
        for c in candidates:
            if pivot in c and not (c & covered) and c <= universe:
                rec(covered | c, used + 1)

    rec(frozenset(), 0)
    return best[0]


# -- datapath helpers ----------------------------------------------------------


def datapath_nodes(g: DataflowGraph) -> set[str]:
    return {v for v in g.node_ids if g.op(v) in BLOCK_CLASS}
