"""Frequent connected-subgraph mining over a single application graph.

Patterns are connected induced subgraphs over datapath nodes (hardware-block
ops; consts optional, mem/input/output never mined). Support is the number of
distinct node sets carrying the pattern. Note that this support measure is
not anti-monotone under extension (a fan-out node can make a larger pattern
strictly more frequent than all of its sub-patterns), so the search
enumerates all connected subsets up to the size cap and filters by support
at the end. This is exact and fast at the graph sizes this toolkit targets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graph import (
    BLOCK_CLASS,
    DataflowGraph,
    Embedding,
    Pattern,
    canonical_form,
)


@dataclass(frozen=True)
class MiningConfig:
    min_support: int = 2
    max_pattern_nodes: int = 8
    include_const_nodes: bool = True

    def __post_init__(self):
        if self.min_support < 1:
            raise ValueError("min_support must be >= 1")
        if self.max_pattern_nodes < 1:
            raise ValueError("max_pattern_nodes must be >= 1")


@dataclass
class MinedPattern:
    pattern: Pattern
    frequency: int
    embeddings: list[Embedding] = field(default_factory=list)


def minable_nodes(g: DataflowGraph, include_const: bool = True) -> set[str]:
    """Nodes eligible for mining: hardware-block ops, optionally consts."""
    out = set()
    for n in g.nodes:
        if n.op not in BLOCK_CLASS:
            continue
        if n.op == "const" and not include_const:
            continue
        out.add(n.id)
    return out


def _connected_subsets(
    g: DataflowGraph, allowed: set[str], seeds: set[str], max_size: int
) -> set[frozenset[str]]:
    """All connected node subsets within `allowed` containing >= 1 seed."""
    adj: dict[str, set[str]] = {v: set() for v in allowed}
    for e in g.edges:
        if e.src in allowed and e.dst in allowed:
            adj[e.src].add(e.dst)
            adj[e.dst].add(e.src)
    found: set[frozenset[str]] = set()
    stack = [frozenset([v]) for v in seeds]
    found.update(stack)
    while stack:
        s = stack.pop()
        if len(s) >= max_size:
            continue
        boundary = set()
        for v in s:
            boundary |= adj[v]
        for u in boundary - s:
            s2 = s | {u}
            if s2 not in found:
                found.add(s2)
                stack.append(s2)
    return found


def mine_frequent_subgraphs(
    g: DataflowGraph, cfg: MiningConfig
) -> list[MinedPattern]:
    """Exactly the connected patterns with support >= min_support.

    Const-only patterns carry no datapath value and are excluded; subsets
    are therefore grown from non-const seeds.
    """
    allowed = minable_nodes(g, cfg.include_const_nodes)
    seeds = {v for v in allowed if g.op(v) != "const"}
    groups: dict[bytes, list[frozenset[str]]] = {}
    orders: dict[frozenset[str], list[str]] = {}
    for s in _connected_subsets(g, allowed, seeds, cfg.max_pattern_nodes):
        if all(g.op(v) == "const" for v in s):
            continue
        sub = g.induced_subgraph(s)
        key, order = canonical_form(sub)
        groups.setdefault(key, []).append(s)
        orders[s] = order

    mined: list[MinedPattern] = []
    for key, node_sets in groups.items():
        if len(node_sets) < cfg.min_support:
            continue
        node_sets.sort(key=lambda s: sorted(s))
        # Canonical representative: relabel nodes n0..nk in canonical order,
        # so the pattern is independent of host node ids.
        rep = node_sets[0]
        pattern = Pattern(g.induced_subgraph(rep)).canonicalized()
        embeddings = []
        for s in node_sets:
            # canonical_form of isomorphic subgraphs aligns orders, so rank i
            # of the representative maps to rank i of each occurrence.
            phi = {f"n{i}": v for i, v in enumerate(orders[s])}
            embeddings.append(Embedding.make(pattern, phi))
        mined.append(MinedPattern(pattern, len(node_sets), embeddings))

    mined.sort(key=lambda mp: (-mp.pattern.node_count, mp.pattern.key))
    return mined
