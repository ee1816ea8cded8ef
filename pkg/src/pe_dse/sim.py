"""Reference interpreter for dataflow graphs and merged datapaths.

Combinational single-cycle semantics over 16-bit unsigned words with
wraparound. This is the equivalence oracle used by the merger, PE spec and
mapper tests.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Union

from .errors import MissingInput
from .graph import ARITY, BLOCK_CLASS, WORD_MASK, DataflowGraph

# Input vectors are keyed by node id (0-ary nodes: input kind, valueless
# consts) or by (node id, port) for undriven data ports.
InputKey = Union[str, tuple[str, int]]


def _signed(v: int) -> int:
    return v - 0x10000 if v & 0x8000 else v


def _apply(op: str, args: list[int], const_value: int | None) -> int:
    if op == "add":
        return (args[0] + args[1]) & WORD_MASK
    if op == "sub":
        return (args[0] - args[1]) & WORD_MASK
    if op == "mul":
        return (args[0] * args[1]) & WORD_MASK
    if op == "shl":
        return (args[0] << (args[1] & 15)) & WORD_MASK
    if op == "shr":
        return (args[0] >> (args[1] & 15)) & WORD_MASK
    if op == "and":
        return args[0] & args[1]
    if op == "or":
        return args[0] | args[1]
    if op == "xor":
        return args[0] ^ args[1]
    if op == "not":
        return ~args[0] & WORD_MASK
    if op == "eq":
        return int(args[0] == args[1])
    if op == "neq":
        return int(args[0] != args[1])
    if op == "lt":
        return int(args[0] < args[1])
    if op == "lte":
        return int(args[0] <= args[1])
    if op == "gt":
        return int(args[0] > args[1])
    if op == "gte":
        return int(args[0] >= args[1])
    if op == "min":
        return min(args[0], args[1])
    if op == "max":
        return max(args[0], args[1])
    if op == "abs":
        return abs(_signed(args[0])) & WORD_MASK
    if op == "absd":
        return max(args[0], args[1]) - min(args[0], args[1])
    if op == "sel":
        return args[1] if args[0] else args[2]
    if op == "lut":
        table = const_value or 0
        idx = ((args[2] & 1) << 2) | ((args[1] & 1) << 1) | (args[0] & 1)
        return (table >> idx) & 1
    if op in ("output", "mem"):
        return args[0]
    raise AssertionError(f"unhandled op {op!r}")


@dataclass
class SimResult:
    """Sink values plus per-op activation counts for the energy model."""

    outputs: dict[str, int]
    op_event_count: Counter = field(default_factory=Counter)


def simulate_graph(g: DataflowGraph, x: Mapping[InputKey, int]) -> SimResult:
    """Evaluate a graph on an input vector.

    The vector must supply every input-kind node, every valueless const and
    every undriven data port; missing entries raise MissingInput.
    """
    values: dict[str, int] = {}
    events: Counter = Counter()
    for v in g.topological_order():
        op = g.op(v)
        if op == "input":
            if v not in x:
                raise MissingInput(f"input node {v!r} not supplied")
            values[v] = x[v] & WORD_MASK
            continue
        if op == "const":
            cv = g.value(v)
            if cv is None:
                if v not in x:
                    raise MissingInput(f"const register {v!r} not supplied")
                cv = x[v]
            values[v] = cv & WORD_MASK
            continue
        ins = g.in_edges(v)
        args = []
        for p in range(ARITY[op]):
            e = ins.get(p)
            if e is not None:
                args.append(values[e.src])
            elif (v, p) in x:
                args.append(x[(v, p)] & WORD_MASK)
            else:
                raise MissingInput(f"port ({v!r}, {p}) not supplied")
        values[v] = _apply(op, args, g.value(v))
        if op in BLOCK_CLASS:
            events[op] += 1
    outputs = {v: values[v] for v in g.sinks()}
    return SimResult(outputs=outputs, op_event_count=events)


def random_input_vector(g: DataflowGraph, rng) -> dict[InputKey, int]:
    """Full input vector for a graph, drawn from an RNG."""
    x: dict[InputKey, int] = {}
    for n in g.nodes:
        if n.op == "input" or (n.op == "const" and n.value is None):
            x[n.id] = rng.randrange(WORD_MASK + 1)
    for v, p in g.undriven_ports():
        x[(v, p)] = rng.randrange(WORD_MASK + 1)
    return x
