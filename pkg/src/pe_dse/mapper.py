"""Application covering with PE configurations.

Greedy largest-pattern-first exact cover: configurations are tried in
descending pattern size, a maximal node-disjoint subset of their embeddings
is chosen via independent-set selection, and leftover nodes fall back to
single-op configurations. Const nodes are bound into const registers when a
pattern absorbs them and otherwise become constant drivers in the netlist;
mem nodes pass through as opaque instances.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .errors import UnmappableOp, ValidationError
from .graph import (
    ARITY,
    BLOCK_CLASS,
    DataflowGraph,
    Pattern,
    find_embeddings,
    graph_to_json,
    is_commutative,
)
from .mis import select_disjoint
from .pespec import PESpec, enumerate_configurations
from .sim import SimResult, _apply


@dataclass
class Instance:
    id: str
    config_name: str
    pattern: Pattern
    node_map: dict[str, str]  # pattern node -> app node
    const_values: dict[str, int | None] = field(default_factory=dict)

    @property
    def compute_nodes(self) -> frozenset[str]:
        return frozenset(
            a
            for p, a in self.node_map.items()
            if self.pattern.graph.op(p) != "const"
        )


# Per covered app node: for each input port, how the value arrives.
# ("internal", src app node) — along a pattern edge inside the instance
# ("external", src app node) — through a recorded inter-instance connection
# ("input", None)            — undriven application port (primary input)
PortFeed = tuple[str, str | None]


@dataclass
class Mapping:
    app: DataflowGraph
    spec: PESpec
    instances: list[Instance]
    mem_instances: list[str]
    port_feeds: dict[tuple[str, int], PortFeed]
    inter_instance_edges: list[dict]

    def owner(self, app_node: str) -> Instance | None:
        for inst in self.instances:
            if app_node in inst.compute_nodes:
                return inst
        return None


def _match_ports(
    pattern: Pattern,
    g: DataflowGraph,
    node_map: dict[str, str],
) -> dict[tuple[str, int], str]:
    """Assign pattern in-edges to app in-ports: (app node, port) -> app src.

    Non-commutative destinations keep their port; commutative ones match by
    source, choosing an injective assignment.
    """
    assign: dict[tuple[str, int], str] = {}
    for pv in pattern.graph.node_ids:
        av = node_map[pv]
        pat_ins = pattern.graph.in_edges(pv)
        if not pat_ins:
            continue
        app_ins = g.in_edges(av)
        if not is_commutative(pattern.graph.op(pv)):
            for p, e in pat_ins.items():
                assign[(av, p)] = node_map[e.src]
            continue
        wanted = sorted(
            (node_map[e.src], p) for p, e in pat_ins.items()
        )
        free = {p: e.src for p, e in app_ins.items()}
        for src, _ in wanted:
            hit = min((p for p, s in free.items() if s == src), default=None)
            if hit is None:
                raise ValidationError(
                    f"embedding on {av!r} lost a commutative edge assignment"
                )
            assign[(av, hit)] = src
            del free[hit]
    return assign


def map_application(app: DataflowGraph, spec: PESpec) -> Mapping:
    """Exact cover of the application's compute nodes by PE configurations."""
    compute = [
        v
        for v in app.node_ids
        if app.op(v) in BLOCK_CLASS and app.op(v) != "const"
    ]
    for v in compute:
        if app.op(v) not in spec.op_set:
            raise UnmappableOp(v, app.op(v))

    configs = sorted(
        enumerate_configurations(spec),
        key=lambda cp: (-cp[1].compute_node_count, -cp[1].node_count,
                        cp[0].name),
    )
    covered: set[str] = set()
    instances: list[Instance] = []
    counter = 0
    for cfg, pattern in configs:
        if pattern.compute_node_count == 0:
            continue
        if len(covered) == len(compute):
            break
        embs = [
            e
            for e in find_embeddings(pattern, app)
            if not (
                {a for p, a in e.node_map if pattern.graph.op(p) != "const"}
                & covered
            )
        ]
        if not embs:
            continue
        comp_sets = [
            frozenset(
                a for p, a in e.node_map if pattern.graph.op(p) != "const"
            )
            for e in embs
        ]
        for idx in select_disjoint(comp_sets):
            emb = embs[idx]
            nm = emb.mapping
            const_values = {
                p: app.value(a)
                for p, a in nm.items()
                if pattern.graph.op(p) == "const"
            }
            instances.append(
                Instance(f"pe{counter}", cfg.name, pattern, nm, const_values)
            )
            counter += 1
            covered |= comp_sets[idx]

    leftover = [v for v in compute if v not in covered]
    if leftover:
        # Cannot happen when the precondition holds: single-op fallbacks
        # exist for every op in the op set.
        raise UnmappableOp(leftover[0], app.op(leftover[0]))

    mem_instances = sorted(v for v in app.node_ids if app.op(v) == "mem")

    # Wiring: internal pattern edges vs. external (inter-instance) feeds.
    port_feeds: dict[tuple[str, int], PortFeed] = {}
    inter_edges: list[dict] = []
    owner_of: dict[str, Instance] = {}
    for inst in instances:
        for v in inst.compute_nodes:
            owner_of[v] = inst
    for inst in instances:
        internal = _match_ports(inst.pattern, app, inst.node_map)
        for av in sorted(inst.compute_nodes):
            app_ins = app.in_edges(av)
            for p in range(ARITY[app.op(av)]):
                key = (av, p)
                if key in internal:
                    port_feeds[key] = ("internal", internal[key])
                    continue
                e = app_ins.get(p)
                if e is None:
                    port_feeds[key] = ("input", None)
                    continue
                port_feeds[key] = ("external", e.src)
                src_op = app.op(e.src)
                if src_op == "const":
                    src_kind, src_inst = "const", None
                elif src_op == "input":
                    src_kind, src_inst = "input", None
                elif src_op == "mem":
                    src_kind, src_inst = "mem", None
                else:
                    src_kind = "instance"
                    src_inst = owner_of[e.src].id
                inter_edges.append(
                    {
                        "src_kind": src_kind,
                        "src_instance": src_inst,
                        "src_app_node": e.src,
                        "dst_instance": inst.id,
                        "dst_app_node": av,
                        "dst_port": p,
                    }
                )
    # Edges feeding mem and output nodes cross the fabric as well.
    for v in app.node_ids:
        if app.op(v) not in ("mem", "output"):
            continue
        for p, e in sorted(app.in_edges(v).items()):
            src_inst = owner_of[e.src].id if e.src in owner_of else None
            inter_edges.append(
                {
                    "src_kind": "instance" if src_inst else app.op(e.src),
                    "src_instance": src_inst,
                    "src_app_node": e.src,
                    "dst_instance": None,
                    "dst_app_node": v,
                    "dst_port": p,
                }
            )

    return Mapping(
        app=app,
        spec=spec,
        instances=instances,
        mem_instances=mem_instances,
        port_feeds=port_feeds,
        inter_instance_edges=inter_edges,
    )


def emit_netlist(m: Mapping) -> dict:
    """Self-contained JSON netlist: instances, connections, pass-throughs."""
    used_consts = set()
    for inst in m.instances:
        for p, a in inst.node_map.items():
            if inst.pattern.graph.op(p) == "const":
                used_consts.add(a)
    const_drivers = [
        {"id": v, "value": m.app.value(v)}
        for v in m.app.node_ids
        if m.app.op(v) == "const"
        and any(e["src_app_node"] == v for e in m.inter_instance_edges)
    ]
    return {
        "application": graph_to_json(m.app),
        "instances": [
            {
                "id": inst.id,
                "config": inst.config_name,
                "pattern": graph_to_json(inst.pattern.graph),
                "node_map": dict(sorted(inst.node_map.items())),
                "const_values": dict(sorted(inst.const_values.items())),
            }
            for inst in m.instances
        ],
        "mems": m.mem_instances,
        "const_drivers": const_drivers,
        "edges": m.inter_instance_edges,
    }


def simulate_mapping(m: Mapping, x) -> SimResult:
    """Evaluate the mapped netlist; values cross instance boundaries only
    along recorded connections, so missing wiring fails loudly."""
    g = m.app
    values: dict[str, int] = {}
    events: Counter = Counter()
    external = {
        (e["dst_app_node"], e["dst_port"]): e["src_app_node"]
        for e in m.inter_instance_edges
        if e["dst_instance"] is not None
    }
    for v in g.topological_order():
        op = g.op(v)
        if op == "input":
            values[v] = x[v] & 0xFFFF
            continue
        if op == "const":
            cv = g.value(v)
            values[v] = (cv if cv is not None else x[v]) & 0xFFFF
            continue
        if op in ("mem", "output"):
            e = g.in_edges(v).get(0)
            values[v] = values[e.src] if e else x[(v, 0)] & 0xFFFF
            continue
        args = []
        for p in range(ARITY[op]):
            kind, src = m.port_feeds[(v, p)]
            if kind == "internal":
                args.append(values[src])
            elif kind == "external":
                args.append(values[external[(v, p)]])
            else:
                args.append(x[(v, p)] & 0xFFFF)
        values[v] = _apply(op, args, g.value(v))
        events[op] += 1
    outputs = {v: values[v] for v in g.sinks()}
    return SimResult(outputs=outputs, op_event_count=events)
