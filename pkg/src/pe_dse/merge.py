"""Datapath merging: opportunities, compatibility graph, clique, reconstruction.

A MergedDatapath is a mux-free core: nodes carry op sets, and each named
configuration maps one source graph onto the core. Multiplexers are derived:
an input port whose sources differ across configurations gets a mux with one
leg per distinct source (the sentinel EXT marks an external PE input leg).
Merging folds pairwise: the accumulated datapath is merged with the next
source graph via a maximum-weight clique of merge opportunities.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .costs import CostTable
from .errors import (
    EmptyInput,
    EmptyPatternList,
    IncompatibleClique,
    UnknownConfig,
    ValidationError,
)
from .graph import (
    ARITY,
    BLOCK_CLASS,
    DataflowGraph,
    GraphEdge,
    GraphNode,
    block_classes,
    graph_from_json,
    graph_to_json,
    is_commutative,
)

log = logging.getLogger(__name__)

EXT = "<ext>"  # external-input source token

EdgeRef = tuple[str, str, int]  # (src node, dst node, dst port)


@dataclass(frozen=True)
class MergeOpportunity:
    kind: str  # "node" | "edge"
    left: object  # node id or EdgeRef in the accumulated datapath
    right: object  # node id or EdgeRef in the incoming graph
    weight: float

    @property
    def mapping(self) -> dict[str, str]:
        """Implied incoming-node -> accumulated-node identifications."""
        if self.kind == "node":
            return {self.right: self.left}
        (ls, ld, _), (rs, rd, _) = self.left, self.right
        return {rs: ls, rd: ld}


@dataclass
class CompatibilityGraph:
    opportunities: list[MergeOpportunity]
    adj: list[set[int]]

    @property
    def n(self) -> int:
        return len(self.opportunities)


@dataclass(frozen=True)
class DatapathConfig:
    """One realizable configuration of a merged datapath."""

    name: str
    source: DataflowGraph
    provenance: dict[str, str] = field(hash=False)  # source node -> merged node
    port_map: dict[tuple[str, int], int] = field(hash=False)

    def merged_port(self, src_node: str, port: int) -> int:
        return self.port_map.get((src_node, port), port)

    def translate_input_key(self, key):
        if isinstance(key, tuple):
            v, p = key
            return (self.provenance[v], self.merged_port(v, p))
        return self.provenance[key]

    def outputs(self) -> list[str]:
        return [self.provenance[s] for s in self.source.sinks()]


class MergedDatapath:
    """Mux-free merged core plus its configuration space."""

    def __init__(self, nodes: dict[str, frozenset[str]], configs: Sequence[DatapathConfig]):
        self.nodes: dict[str, frozenset[str]] = dict(nodes)
        self.configs: list[DatapathConfig] = list(configs)
        for cfg in self.configs:
            for s, m in cfg.provenance.items():
                if m not in self.nodes:
                    raise ValidationError(f"config {cfg.name!r} maps to unknown node {m!r}")
                if cfg.source.op(s) not in self.nodes[m] and cfg.source.op(s) in BLOCK_CLASS:
                    raise ValidationError(
                        f"config {cfg.name!r}: node {m!r} lacks op {cfg.source.op(s)!r}"
                    )

    def config(self, name: str) -> DatapathConfig:
        for cfg in self.configs:
            if cfg.name == name:
                return cfg
        raise UnknownConfig(f"no configuration named {name!r}")

    def active_graph(self, name: str) -> DataflowGraph:
        """The plain dataflow graph realized by one configuration."""
        cfg = self.config(name)
        nodes = [
            GraphNode(cfg.provenance[s], cfg.source.op(s), cfg.source.value(s))
            for s in cfg.source.node_ids
        ]
        edges = [
            GraphEdge(
                cfg.provenance[e.src],
                0,
                cfg.provenance[e.dst],
                cfg.merged_port(e.dst, e.dst_port),
            )
            for e in cfg.source.edges
        ]
        return DataflowGraph(nodes, edges)

    def config_edges(self, cfg: DatapathConfig) -> list[EdgeRef]:
        return [
            (
                cfg.provenance[e.src],
                cfg.provenance[e.dst],
                cfg.merged_port(e.dst, e.dst_port),
            )
            for e in cfg.source.edges
        ]

    def all_edges(self) -> list[EdgeRef]:
        """Union of configuration edges, deduplicated, deterministic order."""
        seen = set()
        for cfg in self.configs:
            seen.update(self.config_edges(cfg))
        return sorted(seen)

    def port_sources(self) -> dict[tuple[str, int], list[str]]:
        """Per (node, port): sorted distinct source tokens across configs."""
        sources: dict[tuple[str, int], set[str]] = {}
        for cfg in self.configs:
            for s in cfg.source.node_ids:
                m = cfg.provenance[s]
                ins = cfg.source.in_edges(s)
                for p in range(ARITY[cfg.source.op(s)]):
                    mp = cfg.merged_port(s, p)
                    tok = cfg.provenance[ins[p].src] if p in ins else EXT
                    sources.setdefault((m, mp), set()).add(tok)
        return {k: sorted(v) for k, v in sorted(sources.items())}

    def mux_map(self) -> dict[tuple[str, int], list[str]]:
        """Input ports needing a mux: >= 2 distinct sources."""
        return {k: v for k, v in self.port_sources().items() if len(v) > 1}

    def output_positions(self) -> list[list[str]]:
        """Per output position: sorted distinct driver nodes across configs."""
        width = max((len(cfg.outputs()) for cfg in self.configs), default=0)
        out: list[set[str]] = [set() for _ in range(width)]
        for cfg in self.configs:
            for j, v in enumerate(cfg.outputs()):
                out[j].add(v)
        return [sorted(s) for s in out]

    def block_multiset(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for ops in self.nodes.values():
            for block in block_classes(ops):
                counts[block] = counts.get(block, 0) + 1
        return dict(sorted(counts.items()))

    def to_json(self) -> dict:
        return {
            "nodes": [
                {"id": v, "ops": sorted(ops)} for v, ops in self.nodes.items()
            ],
            "configs": [
                {
                    "name": cfg.name,
                    "source": graph_to_json(cfg.source),
                    "provenance": dict(sorted(cfg.provenance.items())),
                    "port_map": {
                        f"{v}:{p}": mp for (v, p), mp in sorted(cfg.port_map.items())
                    },
                }
                for cfg in self.configs
            ],
        }

    @staticmethod
    def from_json(doc: dict) -> "MergedDatapath":
        nodes = {nd["id"]: frozenset(nd["ops"]) for nd in doc["nodes"]}
        configs = []
        for cd in doc["configs"]:
            port_map = {}
            for key, mp in cd.get("port_map", {}).items():
                v, _, p = key.rpartition(":")
                port_map[(v, int(p))] = int(mp)
            configs.append(
                DatapathConfig(
                    name=cd["name"],
                    source=graph_from_json(cd["source"]),
                    provenance=dict(cd["provenance"]),
                    port_map=port_map,
                )
            )
        return MergedDatapath(nodes, configs)

    def to_dot(self, name: str = "pe") -> str:
        lines = [f"digraph {name} {{"]
        for v, ops in self.nodes.items():
            lines.append(f'  "{v}" [label="{"/".join(sorted(ops))}"];')
        muxes = self.mux_map()
        sources = self.port_sources()
        for (v, p), toks in sources.items():
            if (v, p) in muxes:
                mid = f"mux_{v}_{p}"
                lines.append(f'  "{mid}" [label="MUX" shape=trapezium];')
                for t in toks:
                    if t != EXT:
                        lines.append(f'  "{t}" -> "{mid}";')
                lines.append(f'  "{mid}" -> "{v}" [label="{p}"];')
            else:
                (t,) = toks
                if t != EXT:
                    lines.append(f'  "{t}" -> "{v}" [label="{p}"];')
        lines.append("}")
        return "\n".join(lines)


def as_merged(g: DataflowGraph, name: str = "g0") -> MergedDatapath:
    """Wrap a plain graph as a single-configuration datapath (identity map)."""
    nodes = {v: frozenset([g.op(v)]) for v in g.node_ids}
    cfg = DatapathConfig(
        name=name,
        source=g,
        provenance={v: v for v in g.node_ids},
        port_map={(v, p): p for v in g.node_ids for p in range(ARITY[g.op(v)])},
    )
    return MergedDatapath(nodes, [cfg])


# -- opportunity enumeration -------------------------------------------------


def _node_mergeable(acc_ops: frozenset[str], b_op: str) -> frozenset[str]:
    """Shared hardware block classes, empty if unmergeable."""
    if b_op not in BLOCK_CLASS:
        return frozenset()
    return block_classes(acc_ops) & block_classes([b_op])


def _ports_match(acc_ops: frozenset[str], b_op: str, pa: int, pb: int) -> bool:
    if pa == pb:
        return True
    return all(is_commutative(op) for op in acc_ops) and is_commutative(b_op)


def opportunities_against(
    acc: MergedDatapath, b: DataflowGraph, costs: CostTable
) -> list[MergeOpportunity]:
    opps: list[MergeOpportunity] = []
    b_nodes = [v for v in b.node_ids if b.op(v) in BLOCK_CLASS]
    for an, aops in acc.nodes.items():
        for bn in b_nodes:
            shared = _node_mergeable(aops, b.op(bn))
            if shared:
                w = sum(costs.area(c) for c in sorted(shared))
                opps.append(MergeOpportunity("node", an, bn, w))
    acc_edges = acc.all_edges()
    for ae in acc_edges:
        asrc, adst, aport = ae
        for be in b.edges:
            if not _node_mergeable(acc.nodes[asrc], b.op(be.src)):
                continue
            if not _node_mergeable(acc.nodes[adst], b.op(be.dst)):
                continue
            if not _ports_match(acc.nodes[adst], b.op(be.dst), aport, be.dst_port):
                continue
            opps.append(
                MergeOpportunity(
                    "edge", ae, (be.src, be.dst, be.dst_port), costs.mux_leg_area
                )
            )
    return opps


def enumerate_opportunities(
    a: DataflowGraph, b: DataflowGraph, costs: CostTable
) -> list[MergeOpportunity]:
    """All node- and edge-merge opportunities between two datapath graphs."""
    return opportunities_against(as_merged(a), b, costs)


def _compatible(o1: MergeOpportunity, o2: MergeOpportunity) -> bool:
    fwd: dict[str, str] = {}
    rev: dict[str, str] = {}
    for opp in (o1, o2):
        for r, l in opp.mapping.items():
            if fwd.get(r, l) != l or rev.get(l, r) != r:
                return False
            fwd[r] = l
            rev[l] = r
    return True


def build_compatibility_graph(
    opps: list[MergeOpportunity],
) -> CompatibilityGraph:
    adj: list[set[int]] = [set() for _ in opps]
    for i in range(len(opps)):
        for j in range(i + 1, len(opps)):
            if _compatible(opps[i], opps[j]):
                adj[i].add(j)
                adj[j].add(i)
    return CompatibilityGraph(opportunities=list(opps), adj=adj)


def max_weight_clique(cg: CompatibilityGraph) -> list[MergeOpportunity]:
    """Exact maximum-weight clique via branch and bound.

    Ties on total weight are broken toward the lexicographically smallest
    vertex-index set, so downstream reconstruction is deterministic.
    """
    w = [o.weight for o in cg.opportunities]
    best: list[int] = []
    best_w = 0.0

    def expand(cur: list[int], cand: list[int], cur_w: float) -> None:
        nonlocal best, best_w
        if not cand:
            if cur_w > best_w or (cur_w == best_w and cur and (not best or cur < best)):
                best = list(cur)
                best_w = cur_w
            return
        remaining = sum(w[v] for v in cand)
        for i, v in enumerate(cand):
            if cur_w + remaining < best_w:
                return
            expand(
                cur + [v],
                [u for u in cand[i + 1 :] if u in cg.adj[v]],
                cur_w + w[v],
            )
            remaining -= w[v]

    expand([], list(range(cg.n)), 0.0)
    return [cg.opportunities[i] for i in best]


# -- reconstruction ----------------------------------------------------------


def _fresh_id(base: str, taken: set[str]) -> str:
    if base not in taken:
        return base
    k = 1
    while f"{base}~{k}" in taken:
        k += 1
    return f"{base}~{k}"


def merge_into(
    acc: MergedDatapath,
    b: DataflowGraph,
    name: str,
    clique: Sequence[MergeOpportunity],
) -> MergedDatapath:
    """Apply a merge clique, producing a new datapath with one more config."""
    for i, o1 in enumerate(clique):
        for o2 in list(clique)[i + 1 :]:
            if not _compatible(o1, o2):
                raise IncompatibleClique(f"{o1} conflicts with {o2}")

    node_map: dict[str, str] = {}  # b node -> merged node, from node merges only
    for opp in clique:
        if opp.kind == "node":
            node_map[opp.right] = opp.left

    # Edge merges take effect only when both endpoint node merges are present.
    applied_edges: list[MergeOpportunity] = []
    for opp in clique:
        if opp.kind != "edge":
            continue
        backed = all(node_map.get(r) == l for r, l in opp.mapping.items())
        if backed:
            applied_edges.append(opp)
        else:
            log.warning("dropping dangling edge merge %s (endpoints unmerged)", opp)

    nodes = dict(acc.nodes)
    taken = set(nodes)
    provenance: dict[str, str] = {}
    for bn in b.node_ids:
        if bn in node_map:
            m = node_map[bn]
            nodes[m] = nodes[m] | {b.op(bn)}
        else:
            m = _fresh_id(bn, taken)
            taken.add(m)
            nodes[m] = frozenset([b.op(bn)])
        provenance[bn] = m

    # Port assignment: forced by applied edge merges, then greedy alignment
    # of commutative destinations against existing per-port sources.
    forced: dict[str, dict[int, int]] = {}
    for opp in applied_edges:
        (_, _, pa), (_, bd, pb) = opp.left, opp.right
        slot = forced.setdefault(bd, {})
        if pb in slot and slot[pb] != pa:
            log.warning("conflicting edge-merge ports on %s; keeping first", bd)
            continue
        if pa in slot.values() and slot.get(pb) != pa:
            log.warning("conflicting edge-merge ports on %s; keeping first", bd)
            continue
        slot[pb] = pa

    acc_sources = {k: set(v) for k, v in acc.port_sources().items()}
    port_map: dict[tuple[str, int], int] = {}
    for bn in b.node_ids:
        arity = ARITY[b.op(bn)]
        perm = {p: p for p in range(arity)}
        if bn in forced:
            fixed = dict(forced[bn])
            free_src = [p for p in range(arity) if p not in fixed]
            free_dst = [p for p in range(arity) if p not in fixed.values()]
            for p, mp in zip(free_src, free_dst):
                fixed[p] = mp
            perm = fixed
        elif (
            bn in node_map
            and arity == 2
            and is_commutative(b.op(bn))
            and all(is_commutative(op) for op in acc.nodes[node_map[bn]])
        ):
            ins = b.in_edges(bn)
            m = node_map[bn]

            def score(pm: dict[int, int]) -> int:
                total = 0
                for p in range(arity):
                    tok = provenance[ins[p].src] if p in ins else EXT
                    if tok in acc_sources.get((m, pm[p]), set()):
                        total += 1
                return total

            swap = {0: 1, 1: 0}
            if score(swap) > score(perm):
                perm = swap
        for p in range(arity):
            port_map[(bn, p)] = perm[p]

    cfg = DatapathConfig(
        name=name, source=b, provenance=provenance, port_map=port_map
    )
    return MergedDatapath(nodes, acc.configs + [cfg])


def reconstruct_merged(
    a: DataflowGraph,
    b: DataflowGraph,
    clique: Sequence[MergeOpportunity],
    names: tuple[str, str] = ("g0", "g1"),
) -> MergedDatapath:
    """Merge two plain graphs under a chosen clique."""
    return merge_into(as_merged(a, names[0]), b, names[1], clique)


def merge_graph(
    acc: MergedDatapath, b: DataflowGraph, name: str, costs: CostTable
) -> MergedDatapath:
    """Full pairwise step: opportunities, compatibility, clique, reconstruct."""
    opps = opportunities_against(acc, b, costs)
    clique = max_weight_clique(build_compatibility_graph(opps))
    return merge_into(acc, b, name, clique)


def merge_many(
    graphs: Sequence[DataflowGraph],
    costs: CostTable,
    names: Optional[Sequence[str]] = None,
) -> MergedDatapath:
    """Left-fold pairwise merging in the given order."""
    if not graphs:
        raise EmptyInput("merge_many needs at least one graph")
    if names is None:
        names = [f"g{i}" for i in range(len(graphs))]
    acc = as_merged(graphs[0], names[0])
    for g, nm in zip(graphs[1:], names[1:]):
        acc = merge_graph(acc, g, nm, costs)
    return acc


# -- PE variant ladder -------------------------------------------------------


def make_baseline(op_set: Sequence[str]) -> MergedDatapath:
    """Single-node datapath exposing one configuration per op."""
    ops = sorted(set(op_set))
    if not ops:
        raise EmptyInput("baseline op set is empty")
    nodes = {"pe0": frozenset(ops)}
    configs = []
    for op in ops:
        src = DataflowGraph([GraphNode("x0", op)], [])
        configs.append(
            DatapathConfig(
                name=f"base-{op}",
                source=src,
                provenance={"x0": "pe0"},
                port_map={("x0", p): p for p in range(ARITY[op])},
            )
        )
    return MergedDatapath(nodes, configs)


def build_pe_variants(
    ranked_reports,
    baseline_ops: Sequence[str],
    k: int,
    costs: CostTable,
    app_ops: Sequence[str],
) -> list[MergedDatapath]:
    """Variant i merges the top i-1 ranked patterns into the pruned baseline.

    The pruned baseline keeps only baseline ops the application actually
    uses. Single-node patterns are skipped: the baseline already implements
    every op the application needs, so merging one is an identity merge and
    would waste a ladder slot. Returns min(k, 1 + #structural patterns)
    variants.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    datapath_ops = {
        op for op in app_ops if op in BLOCK_CLASS and op != "const"
    }
    pruned = sorted(set(baseline_ops) & datapath_ops)
    if not pruned:
        raise EmptyInput("baseline shares no ops with the application")
    structural = [
        r for r in ranked_reports if r.mined.pattern.node_count >= 2
    ]
    if k > 1 and not structural:
        raise EmptyPatternList("k > 1 requires at least one ranked pattern")
    acc = make_baseline(pruned)
    variants = [acc]
    for i, report in enumerate(structural[: k - 1], start=1):
        acc = merge_graph(acc, report.mined.pattern.graph, f"sub{i}", costs)
        variants.append(acc)
    return variants
