"""PE specification: the measurable design-space view of a merged datapath.

Exposes the three PE design-space axes as attributes (op set, intraconnect
mux count / config bits, I/O and const registers) plus the per-configuration
rewrite patterns the mapper consumes. Single-op fallback configurations are
always available to the mapper so leftover nodes can be covered; they are
functional fallbacks riding on existing hardware and do not add mux legs or
area of their own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import NoConfigurations
from .graph import (
    ARITY,
    DataflowGraph,
    GraphNode,
    Pattern,
    graph_to_json,
)
from .merge import EXT, DatapathConfig, MergedDatapath

CONST_REG_WIDTH = 16


@dataclass
class PESpec:
    datapath: MergedDatapath
    inputs: list[tuple[str, int]]  # external input ports (node, port)
    outputs: list[list[str]]  # per output position: possible driver nodes
    const_registers: list[str]
    op_set: frozenset[str]
    mux_fanins: list[int]  # data muxes then output muxes
    config_bits: int
    rewrite_patterns: list[tuple[Pattern, str]]  # (pattern, config name)
    degenerate_configs: list[DatapathConfig] = field(default_factory=list)

    @property
    def mux_count(self) -> int:
        return len(self.mux_fanins)

    @property
    def input_count(self) -> int:
        return len(self.inputs)

    @property
    def output_count(self) -> int:
        return len(self.outputs)


def generate_pe_spec(dp: MergedDatapath) -> PESpec:
    """Derive I/O, const registers, mux space and rewrite patterns."""
    if not dp.configs:
        raise NoConfigurations("datapath has no configurations")
    sources = dp.port_sources()
    muxes = dp.mux_map()
    out_positions = dp.output_positions()

    inputs = sorted(k for k, toks in sources.items() if EXT in toks)
    const_registers = sorted(
        v for v, ops in dp.nodes.items() if ops == frozenset(["const"])
    )
    op_set = frozenset().union(*dp.nodes.values())

    mux_fanins = [len(toks) for _, toks in sorted(muxes.items())]
    mux_fanins += [len(drv) for drv in out_positions if len(drv) > 1]

    config_bits = sum(math.ceil(math.log2(f)) for f in mux_fanins)
    for ops in dp.nodes.values():
        real_ops = ops - frozenset(["const"])
        if len(real_ops) > 1:
            config_bits += math.ceil(math.log2(len(real_ops)))
    config_bits += CONST_REG_WIDTH * len(const_registers)

    rewrite_patterns = [(Pattern(cfg.source), cfg.name) for cfg in dp.configs]

    degenerate: list[DatapathConfig] = []
    for op in sorted(op_set - {"const"}):
        host = next(v for v, ops in dp.nodes.items() if op in ops)
        src = DataflowGraph([GraphNode("x0", op)], [])
        degenerate.append(
            DatapathConfig(
                name=f"op-{op}",
                source=src,
                provenance={"x0": host},
                port_map={("x0", p): p for p in range(ARITY[op])},
            )
        )

    return PESpec(
        datapath=dp,
        inputs=inputs,
        outputs=out_positions,
        const_registers=const_registers,
        op_set=op_set,
        mux_fanins=mux_fanins,
        config_bits=config_bits,
        rewrite_patterns=rewrite_patterns,
        degenerate_configs=degenerate,
    )


def enumerate_configurations(
    spec: PESpec,
) -> list[tuple[DatapathConfig, Pattern]]:
    """Named source configurations plus single-op fallbacks, deduplicated.

    No two returned configurations compute isomorphic patterns; named
    configurations win over fallbacks.
    """
    out: list[tuple[DatapathConfig, Pattern]] = []
    seen: set[bytes] = set()
    for cfg in spec.datapath.configs:
        pat = Pattern(cfg.source)
        if pat.key not in seen:
            seen.add(pat.key)
            out.append((cfg, pat))
    for cfg in spec.degenerate_configs:
        pat = Pattern(cfg.source)
        if pat.key not in seen:
            seen.add(pat.key)
            out.append((cfg, pat))
    return out


def _config_settings(spec: PESpec, cfg: DatapathConfig) -> dict:
    """Mux selections and op selections realizing one configuration."""
    muxes = spec.datapath.mux_map()
    inv = {m: s for s, m in cfg.provenance.items()}
    mux_settings: dict[str, int | None] = {}
    for (node, port), toks in sorted(muxes.items()):
        setting = None
        s = inv.get(node)
        if s is not None:
            op = cfg.source.op(s)
            for p in range(ARITY[op]):
                if cfg.merged_port(s, p) != port:
                    continue
                e = cfg.source.in_edges(s).get(p)
                tok = cfg.provenance[e.src] if e is not None else EXT
                if tok in toks:
                    setting = toks.index(tok)
        mux_settings[f"{node}:{port}"] = setting
    outs = cfg.outputs()
    for j, drivers in enumerate(spec.outputs):
        if len(drivers) > 1:
            sel = drivers.index(outs[j]) if j < len(outs) else None
            mux_settings[f"<out{j}>"] = sel
    op_selects = {}
    for s in cfg.source.node_ids:
        node = cfg.provenance[s]
        if len(spec.datapath.nodes[node] - frozenset(["const"])) > 1:
            op_selects[node] = cfg.source.op(s)
    return {"mux_settings": mux_settings, "op_selects": op_selects}


def pe_spec_to_json(spec: PESpec) -> dict:
    configs = []
    for cfg, pat in enumerate_configurations(spec):
        entry = {
            "name": cfg.name,
            "pattern": graph_to_json(pat.graph),
            "degenerate": cfg in spec.degenerate_configs,
        }
        entry.update(_config_settings(spec, cfg))
        configs.append(entry)
    return {
        "datapath": spec.datapath.to_json(),
        "inputs": [f"{n}:{p}" for n, p in spec.inputs],
        "outputs": spec.outputs,
        "const_registers": spec.const_registers,
        "op_set": sorted(spec.op_set),
        "mux_count": spec.mux_count,
        "mux_fanins": spec.mux_fanins,
        "config_bits": spec.config_bits,
        "configurations": configs,
    }


def pe_spec_from_json(doc: dict) -> PESpec:
    """Rebuild a spec from its datapath; derived fields are recomputed."""
    return generate_pe_spec(MergedDatapath.from_json(doc["datapath"]))
