"""Table-driven area/energy model.

All numbers are unit-free and come from a user-supplied table; the default
table is a declared fixture (ALU 80, CONST 12, mux leg 30, synthetic MUL 500
and LUT 40, energy = area/100 per activation). Mux select lines are static
configuration in a CGRA, so their default dynamic energy is zero. Every
report echoes the table version so no number reads as silicon truth.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import (
    DivisionByZeroOps,
    EmptyTraces,
    MissingCostEntry,
    ParseError,
)
from .graph import block_classes


@dataclass(frozen=True)
class CostTable:
    version: str = "fixture-v1"
    block_area: dict[str, float] = field(
        default_factory=lambda: {"ALU": 80.0, "MUL": 500.0, "LUT": 40.0, "CONST": 12.0}
    )
    block_energy: dict[str, float] = field(
        default_factory=lambda: {"ALU": 0.8, "MUL": 5.0, "LUT": 0.4, "CONST": 0.12}
    )
    mux_leg_area: float = 30.0
    mux_select_energy: float = 0.0
    config_bit_area: float = 0.0

    def __post_init__(self):
        entries = [self.mux_leg_area, self.mux_select_energy, self.config_bit_area]
        entries += list(self.block_area.values()) + list(self.block_energy.values())
        if any(v < 0 for v in entries):
            raise ValueError("cost table entries must be >= 0")

    def area(self, block: str) -> float:
        if block not in self.block_area:
            raise MissingCostEntry(f"no area entry for block class {block!r}")
        return self.block_area[block]

    def energy(self, block: str) -> float:
        if block not in self.block_energy:
            raise MissingCostEntry(f"no energy entry for block class {block!r}")
        return self.block_energy[block]

    def scaled(self, factor: float) -> "CostTable":
        return CostTable(
            version=f"{self.version}*{factor}",
            block_area={k: v * factor for k, v in self.block_area.items()},
            block_energy={k: v * factor for k, v in self.block_energy.items()},
            mux_leg_area=self.mux_leg_area * factor,
            mux_select_energy=self.mux_select_energy * factor,
            config_bit_area=self.config_bit_area * factor,
        )

    def to_json(self) -> dict:
        return {
            "version": self.version,
            "block_area": dict(sorted(self.block_area.items())),
            "block_energy": dict(sorted(self.block_energy.items())),
            "mux_leg_area": self.mux_leg_area,
            "mux_select_energy": self.mux_select_energy,
            "config_bit_area": self.config_bit_area,
        }

    @staticmethod
    def from_json(doc: dict) -> "CostTable":
        try:
            return CostTable(
                version=doc.get("version", "unversioned"),
                block_area={k: float(v) for k, v in doc["block_area"].items()},
                block_energy={k: float(v) for k, v in doc["block_energy"].items()},
                mux_leg_area=float(doc.get("mux_leg_area", 30.0)),
                mux_select_energy=float(doc.get("mux_select_energy", 0.0)),
                config_bit_area=float(doc.get("config_bit_area", 0.0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad cost table: {exc}") from exc


def default_cost_table() -> CostTable:
    return CostTable()


def load_cost_table(path: str) -> CostTable:
    with open(path) as f:
        return CostTable.from_json(json.load(f))


@dataclass
class CostReport:
    pe_area: float
    pe_count: int
    total_area: float
    energy_per_op: float
    table_version: str
    frequency_label: str = ""

    def to_json(self) -> dict:
        return {
            "pe_area": self.pe_area,
            "pe_count": self.pe_count,
            "total_area": self.total_area,
            "energy_per_op": self.energy_per_op,
            "table_version": self.table_version,
            "frequency_label": self.frequency_label,
        }


def pe_area(spec, costs: CostTable) -> float:
    """Block areas + mux legs + config-bit overhead for a PE spec."""
    total = 0.0
    for ops in spec.datapath.nodes.values():
        for block in sorted(block_classes(ops)):
            total += costs.area(block)
    for fanin in spec.mux_fanins:
        total += (fanin - 1) * costs.mux_leg_area
    total += spec.config_bits * costs.config_bit_area
    return total


def evaluate_mapping(mapping, spec, sim_traces, costs: CostTable,
                     frequency_label: str = "") -> CostReport:
    """Area and energy-per-op for a mapped application.

    Mux select energy is charged per instance per trace; with the default
    table it is zero (statically configured select lines).
    """
    if not sim_traces:
        raise EmptyTraces("need at least one simulation trace")
    area = pe_area(spec, costs)
    pe_count = len(mapping.instances)
    total_energy = 0.0
    total_ops = 0
    for trace in sim_traces:
        for op, count in sorted(trace.op_event_count.items()):
            if op == "const":
                continue
            (block,) = block_classes([op])
            total_energy += count * costs.energy(block)
            total_ops += count
        total_energy += pe_count * spec.mux_count * costs.mux_select_energy
    if total_ops == 0:
        raise DivisionByZeroOps("traces contain zero op activations")
    return CostReport(
        pe_area=area,
        pe_count=pe_count,
        total_area=area * pe_count,
        energy_per_op=total_energy / total_ops,
        table_version=costs.version,
        frequency_label=frequency_label,
    )
