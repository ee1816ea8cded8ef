"""Dataflow-graph data model: validation, serialization, canonicalization, matching.

Graphs are directed multigraphs of primitive 16-bit ops with port-indexed
edges. The same representation serves as application IR, mined pattern, and
merged-datapath configuration source. All types are immutable after
construction and safe to share across workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import DisconnectedError, ParseError, ValidationError

WORD_MASK = 0xFFFF

# Fixed arity per op (data inputs). mem is opaque; it passes one word through.
ARITY = {
    "const": 0,
    "input": 0,
    "output": 1,
    "not": 1,
    "abs": 1,
    "sel": 3,
    "lut": 3,
    "mem": 1,
    "add": 2,
    "sub": 2,
    "mul": 2,
    "shl": 2,
    "shr": 2,
    "and": 2,
    "or": 2,
    "xor": 2,
    "eq": 2,
    "neq": 2,
    "lt": 2,
    "lte": 2,
    "gt": 2,
    "gte": 2,
    "min": 2,
    "max": 2,
    "absd": 2,
}

OP_KINDS = frozenset(ARITY)

COMMUTATIVE = frozenset(
    {"add", "mul", "and", "or", "xor", "eq", "neq", "min", "max", "absd"}
)

# Hardware block class per op. input/output/mem carry no hardware block.
BLOCK_CLASS = {
    "add": "ALU",
    "sub": "ALU",
    "shl": "ALU",
    "shr": "ALU",
    "eq": "ALU",
    "neq": "ALU",
    "lt": "ALU",
    "lte": "ALU",
    "gt": "ALU",
    "gte": "ALU",
    "min": "ALU",
    "max": "ALU",
    "abs": "ALU",
    "absd": "ALU",
    "sel": "ALU",
    "mul": "MUL",
    "and": "LUT",
    "or": "LUT",
    "xor": "LUT",
    "not": "LUT",
    "lut": "LUT",
    "const": "CONST",
}


def block_classes(ops: Iterable[str]) -> frozenset[str]:
    """Hardware block classes needed to implement a set of ops."""
    return frozenset(BLOCK_CLASS[op] for op in ops if op in BLOCK_CLASS)


def is_commutative(op: str) -> bool:
    return op in COMMUTATIVE


@dataclass(frozen=True)
class GraphNode:
    id: str
    op: str
    value: Optional[int] = None


@dataclass(frozen=True)
class GraphEdge:
    src: str
    src_port: int
    dst: str
    dst_port: int


class DataflowGraph:
    """Immutable DAG of primitive ops with port-indexed edges.

    Every (dst, dst_port) has at most one incoming edge. Undriven data ports
    are implicitly external inputs of the graph.
    """

    def __init__(self, nodes: Iterable[GraphNode], edges: Iterable[GraphEdge]):
        self._nodes: dict[str, GraphNode] = {}
        for n in nodes:
            if n.op not in OP_KINDS:
                raise ValidationError(f"unknown op {n.op!r} on node {n.id!r}")
            if n.id in self._nodes:
                raise ValidationError(f"duplicate node id {n.id!r}")
            self._nodes[n.id] = n
        self._edges: tuple[GraphEdge, ...] = tuple(edges)
        self._in: dict[str, dict[int, GraphEdge]] = {v: {} for v in self._nodes}
        self._out: dict[str, list[GraphEdge]] = {v: [] for v in self._nodes}
        for e in self._edges:
            if e.src not in self._nodes or e.dst not in self._nodes:
                raise ValidationError(f"edge {e} references a missing node")
            if e.src_port != 0:
                raise ValidationError(f"edge {e}: nodes have a single output port")
            dst_op = self._nodes[e.dst].op
            if not 0 <= e.dst_port < ARITY[dst_op]:
                raise ValidationError(
                    f"edge {e}: dst_port out of range for op {dst_op!r}"
                )
            if e.dst_port in self._in[e.dst]:
                raise ValidationError(
                    f"node {e.dst!r} port {e.dst_port} driven more than once"
                )
            self._in[e.dst][e.dst_port] = e
            self._out[e.src].append(e)
        self._check_acyclic()

    def _check_acyclic(self) -> None:
        indeg = {v: len(self._in[v]) for v in self._nodes}
        ready = [v for v, d in indeg.items() if d == 0]
        seen = 0
        while ready:
            v = ready.pop()
            seen += 1
            for e in self._out[v]:
                indeg[e.dst] -= 1
                if indeg[e.dst] == 0:
                    ready.append(e.dst)
        if seen != len(self._nodes):
            raise ValidationError("graph contains a cycle")

    # -- accessors ---------------------------------------------------------

    @property
    def node_ids(self) -> list[str]:
        return list(self._nodes)

    @property
    def nodes(self) -> list[GraphNode]:
        return list(self._nodes.values())

    @property
    def edges(self) -> tuple[GraphEdge, ...]:
        return self._edges

    def node(self, v: str) -> GraphNode:
        return self._nodes[v]

    def op(self, v: str) -> str:
        return self._nodes[v].op

    def value(self, v: str) -> Optional[int]:
        return self._nodes[v].value

    def in_edges(self, v: str) -> dict[int, GraphEdge]:
        return dict(self._in[v])

    def out_edges(self, v: str) -> list[GraphEdge]:
        return list(self._out[v])

    def __len__(self) -> int:
        return len(self._nodes)

    def __contains__(self, v: str) -> bool:
        return v in self._nodes

    def topological_order(self) -> list[str]:
        indeg = {v: len(self._in[v]) for v in self._nodes}
        ready = sorted(v for v, d in indeg.items() if d == 0)
        order: list[str] = []
        while ready:
            v = ready.pop(0)
            order.append(v)
            for e in self._out[v]:
                indeg[e.dst] -= 1
                if indeg[e.dst] == 0:
                    ready.append(e.dst)
            ready.sort()
        return order

    def undriven_ports(self) -> list[tuple[str, int]]:
        """Data ports with no incoming edge, in deterministic order."""
        out = []
        for v in self._nodes:
            for p in range(ARITY[self.op(v)]):
                if p not in self._in[v]:
                    out.append((v, p))
        return out

    def sinks(self) -> list[str]:
        return [v for v in self._nodes if not self._out[v]]

    def is_connected(self) -> bool:
        """Weak connectivity over all nodes."""
        if not self._nodes:
            return False
        adj: dict[str, set[str]] = {v: set() for v in self._nodes}
        for e in self._edges:
            adj[e.src].add(e.dst)
            adj[e.dst].add(e.src)
        start = next(iter(self._nodes))
        seen = {start}
        stack = [start]
        while stack:
            for u in adj[stack.pop()]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return len(seen) == len(self._nodes)

    def induced_subgraph(self, node_set: Iterable[str]) -> "DataflowGraph":
        keep = set(node_set)
        nodes = [self._nodes[v] for v in self._nodes if v in keep]
        edges = [e for e in self._edges if e.src in keep and e.dst in keep]
        return DataflowGraph(nodes, edges)

    def relabeled(self, mapping: dict[str, str]) -> "DataflowGraph":
        nodes = [
            GraphNode(mapping[n.id], n.op, n.value) for n in self._nodes.values()
        ]
        edges = [
            GraphEdge(mapping[e.src], e.src_port, mapping[e.dst], e.dst_port)
            for e in self._edges
        ]
        return DataflowGraph(nodes, edges)

    def structurally_equal(self, other: "DataflowGraph") -> bool:
        a = {(n.id, n.op, n.value) for n in self.nodes}
        b = {(n.id, n.op, n.value) for n in other.nodes}
        return a == b and set(self._edges) == set(other._edges)


# -- serialization -----------------------------------------------------------


def parse_graph(text: str) -> DataflowGraph:
    """Parse the dataflow-graph JSON format into a validated graph."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    return graph_from_json(doc)


def graph_from_json(doc: object) -> DataflowGraph:
    if not isinstance(doc, dict) or "nodes" not in doc or "edges" not in doc:
        raise ParseError("expected object with 'nodes' and 'edges'")
    nodes = []
    for nd in doc["nodes"]:
        try:
            nodes.append(GraphNode(str(nd["id"]), str(nd["op"]), nd.get("value")))
        except (TypeError, KeyError) as exc:
            raise ParseError(f"bad node entry {nd!r}") from exc
    edges = []
    for ed in doc["edges"]:
        try:
            edges.append(
                GraphEdge(
                    str(ed["src"]),
                    int(ed.get("src_port", 0)),
                    str(ed["dst"]),
                    int(ed["dst_port"]),
                )
            )
        except (TypeError, KeyError, ValueError) as exc:
            raise ParseError(f"bad edge entry {ed!r}") from exc
    return DataflowGraph(nodes, edges)


def graph_to_json(g: DataflowGraph) -> dict:
    nodes = []
    for n in g.nodes:
        nd: dict = {"id": n.id, "op": n.op}
        if n.value is not None:
            nd["value"] = n.value
        nodes.append(nd)
    edges = [
        {"src": e.src, "src_port": e.src_port, "dst": e.dst, "dst_port": e.dst_port}
        for e in g.edges
    ]
    return {"nodes": nodes, "edges": edges}


def serialize_graph(g: DataflowGraph) -> str:
    """Round-trip stable JSON document for a graph."""
    return json.dumps(graph_to_json(g), sort_keys=True, indent=2)


def graph_to_dot(g: DataflowGraph, name: str = "g") -> str:
    lines = [f"digraph {name} {{"]
    for n in g.nodes:
        label = n.op if n.value is None else f"{n.op}={n.value}"
        lines.append(f'  "{n.id}" [label="{label}"];')
    for e in g.edges:
        lines.append(f'  "{e.src}" -> "{e.dst}" [label="{e.dst_port}"];')
    lines.append("}")
    return "\n".join(lines)


# -- canonicalization --------------------------------------------------------


def _edge_label(g: DataflowGraph, e: GraphEdge) -> int:
    # Input ports of commutative ops are interchangeable; collapse the label.
    return -1 if is_commutative(g.op(e.dst)) else e.dst_port


def _refine(
    colors: dict[str, int],
    out_adj: dict[str, list[tuple[int, str]]],
    in_adj: dict[str, list[tuple[int, str]]],
) -> dict[str, int]:
    """Directed 1-WL color refinement to a fixpoint."""
    while True:
        sig = {
            v: (
                colors[v],
                tuple(sorted((lbl, colors[u]) for lbl, u in out_adj[v])),
                tuple(sorted((lbl, colors[u]) for lbl, u in in_adj[v])),
            )
            for v in colors
        }
        ranks = {s: i for i, s in enumerate(sorted(set(sig.values())))}
        new = {v: ranks[sig[v]] for v in colors}
        if len(set(new.values())) == len(set(colors.values())):
            return new
        colors = new


def canonical_form(g: DataflowGraph) -> tuple[bytes, list[str]]:
    """Canonical certificate and node ordering for a connected graph.

    The certificate is identical for two graphs iff they are isomorphic
    respecting op labels, dst-port labels on non-commutative inputs and
    port interchangeability on commutative inputs. Const values are ignored
    (consts match by kind). Uses individualization-refinement with the
    lexicographically smallest leaf certificate.
    """
    if len(g) == 0:
        raise DisconnectedError("empty graph has no canonical form")
    if not g.is_connected():
        raise DisconnectedError("graph is not connected")

    ids = g.node_ids
    out_adj: dict[str, list[tuple[int, str]]] = {v: [] for v in ids}
    in_adj: dict[str, list[tuple[int, str]]] = {v: [] for v in ids}
    for e in g.edges:
        lbl = _edge_label(g, e)
        out_adj[e.src].append((lbl, e.dst))
        in_adj[e.dst].append((lbl, e.src))

    op_rank = {op: i for i, op in enumerate(sorted({g.op(v) for v in ids}))}
    init = _refine({v: op_rank[g.op(v)] for v in ids}, out_adj, in_adj)

    best: list[Optional[tuple[bytes, list[str]]]] = [None]

    def encode(order: list[str]) -> bytes:
        rank = {v: i for i, v in enumerate(order)}
        ops = ",".join(g.op(v) for v in order)
        eds = sorted(
            (rank[e.src], rank[e.dst], _edge_label(g, e)) for e in g.edges
        )
        return f"{len(order)};{ops};{eds}".encode()

    def search(colors: dict[str, int]) -> None:
        cells: dict[int, list[str]] = {}
        for v in ids:
            cells.setdefault(colors[v], []).append(v)
        target = None
        for c in sorted(cells):
            if len(cells[c]) > 1:
                target = cells[c]
                break
        if target is None:
            order = sorted(ids, key=lambda v: colors[v])
            cert = encode(order)
            if best[0] is None or cert < best[0][0]:
                best[0] = (cert, order)
            return
        for v in sorted(target):
            indiv = {u: colors[u] * 2 + (0 if u == v else 1) for u in ids}
            search(_refine(indiv, out_adj, in_adj))

    search(init)
    assert best[0] is not None
    return best[0]


def canonical_key(g: DataflowGraph) -> bytes:
    """Isomorphism-invariant key; equal iff graphs are isomorphic."""
    return canonical_form(g)[0]


# -- patterns and embeddings -------------------------------------------------


class Pattern:
    """A connected subgraph shape with its canonical key.

    Patterns compare and hash by canonical key, i.e. up to isomorphism.
    """

    __slots__ = ("graph", "key")

    def __init__(self, graph: DataflowGraph):
        for n in graph.nodes:
            if n.op not in BLOCK_CLASS:
                raise ValidationError(
                    f"pattern node {n.id!r} has non-datapath op {n.op!r}"
                )
        self.graph = graph
        self.key = canonical_key(graph)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Pattern) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        ops = ",".join(n.op for n in self.graph.nodes)
        return f"Pattern({ops})"

    @property
    def node_count(self) -> int:
        return len(self.graph)

    @property
    def compute_node_count(self) -> int:
        return sum(1 for n in self.graph.nodes if n.op != "const")

    def canonicalized(self) -> "Pattern":
        """Relabel nodes n0..nk in canonical order, dropping const values."""
        _, order = canonical_form(self.graph)
        mapping = {v: f"n{i}" for i, v in enumerate(order)}
        nodes = [GraphNode(mapping[v], self.graph.op(v)) for v in order]
        edges = [
            GraphEdge(mapping[e.src], 0, mapping[e.dst], e.dst_port)
            for e in self.graph.edges
        ]
        edges.sort(key=lambda e: (e.src, e.dst, e.dst_port))
        return Pattern(DataflowGraph(nodes, edges))


@dataclass(frozen=True)
class Embedding:
    """Injective structure-preserving map pattern node id -> host node id."""

    pattern: Pattern
    node_map: tuple[tuple[str, str], ...]  # sorted (pattern_id, host_id) pairs

    @staticmethod
    def make(pattern: Pattern, node_map: dict[str, str]) -> "Embedding":
        return Embedding(pattern, tuple(sorted(node_map.items())))

    @property
    def mapping(self) -> dict[str, str]:
        return dict(self.node_map)

    @property
    def node_set(self) -> frozenset[str]:
        return frozenset(h for _, h in self.node_map)


def _check_map(pg: DataflowGraph, g: DataflowGraph, phi: dict[str, str]) -> bool:
    """Verify phi is a monomorphism modulo commutative-port interchange."""
    for v in pg.node_ids:
        ins = pg.in_edges(v)
        if not ins:
            continue
        host = phi[v]
        host_ins = g.in_edges(host)
        if is_commutative(pg.op(v)):
            # Injectively assign pattern in-edges to host in-edges by source.
            pat_srcs = sorted(phi[e.src] for e in ins.values())
            host_srcs = sorted(e.src for e in host_ins.values())
            # sub-multiset check
            pool = list(host_srcs)
            ok = True
            for s in pat_srcs:
                if s in pool:
                    pool.remove(s)
                else:
                    ok = False
                    break
            if not ok:
                return False
        else:
            for p, e in ins.items():
                he = host_ins.get(p)
                if he is None or he.src != phi[e.src]:
                    return False
    return True


def find_embeddings(pattern: Pattern, g: DataflowGraph) -> list[Embedding]:
    """All embeddings of a pattern, one per distinct host node set.

    Embeddings differing only by a pattern automorphism collapse to one.
    """
    pg = pattern.graph
    if len(pg) == 0 or len(g) == 0:
        return []
    # Connected matching order: each node after the first touches a prior one.
    order = [pg.node_ids[0]]
    placed = {order[0]}
    adj: dict[str, set[str]] = {v: set() for v in pg.node_ids}
    for e in pg.edges:
        adj[e.src].add(e.dst)
        adj[e.dst].add(e.src)
    while len(order) < len(pg):
        nxt = sorted(
            v for v in pg.node_ids if v not in placed and adj[v] & placed
        )
        order.append(nxt[0])
        placed.add(nxt[0])

    by_op: dict[str, list[str]] = {}
    for v in g.node_ids:
        by_op.setdefault(g.op(v), []).append(v)

    results: dict[frozenset[str], Embedding] = {}

    def extend(i: int, phi: dict[str, str], used: set[str]) -> None:
        if i == len(order):
            if _check_map(pg, g, phi):
                emb = Embedding.make(pattern, phi)
                results.setdefault(emb.node_set, emb)
            return
        v = order[i]
        for cand in by_op.get(pg.op(v), []):
            if cand in used:
                continue
            ok = True
            # Loose adjacency filter against already-placed neighbors.
            for e in pg.edges:
                if e.src == v and e.dst in phi:
                    hosts = g.in_edges(phi[e.dst])
                    if is_commutative(pg.op(e.dst)):
                        if not any(he.src == cand for he in hosts.values()):
                            ok = False
                    else:
                        he = hosts.get(e.dst_port)
                        if he is None or he.src != cand:
                            ok = False
                elif e.dst == v and e.src in phi:
                    hosts = g.in_edges(cand)
                    if is_commutative(pg.op(v)):
                        if not any(he.src == phi[e.src] for he in hosts.values()):
                            ok = False
                    else:
                        he = hosts.get(e.dst_port)
                        if he is None or he.src != phi[e.src]:
                            ok = False
                if not ok:
                    break
            if not ok:
                continue
            phi[v] = cand
            used.add(cand)
            extend(i + 1, phi, used)
            del phi[v]
            used.remove(cand)

    extend(0, {}, set())
    return [results[k] for k in sorted(results, key=lambda s: sorted(s))]
