"""Exception types shared across the toolkit."""


class PEDSEError(Exception):
    """Base class for all toolkit errors."""


class ParseError(PEDSEError):
    """Malformed input document."""


class ValidationError(PEDSEError):
    """Structurally invalid dataflow graph (cycle, bad port, duplicate id, ...)."""


class DisconnectedError(PEDSEError):
    """Operation requires a connected graph."""


class EmptyInput(PEDSEError):
    """Operation requires a nonempty input."""


class IncompatibleClique(PEDSEError):
    """Merge clique failed the defensive pairwise-compatibility re-check."""


class NoConfigurations(PEDSEError):
    """Merged datapath has an empty configuration space."""


class EmptyPatternList(PEDSEError):
    """PE variant generation needs at least one ranked pattern when k > 1."""


class UnmappableOp(PEDSEError):
    """Application contains an op the PE cannot execute."""

    def __init__(self, node_id: str, op: str):
        super().__init__(f"node {node_id!r}: op {op!r} not in PE op set")
        self.node_id = node_id
        self.op = op


class MissingInput(PEDSEError):
    """Simulation input vector does not cover an undriven port."""


class UnknownConfig(PEDSEError):
    """Referenced configuration name does not exist."""


class MissingCostEntry(PEDSEError):
    """Cost table lacks an entry for a required block class."""


class EmptyTraces(PEDSEError):
    """Cost evaluation needs at least one simulation trace."""


class DivisionByZeroOps(PEDSEError):
    """Traces contain zero op activations; energy per op is undefined."""


class PipelineError(PEDSEError):
    """A pipeline stage failed; message is tagged with the stage name."""
