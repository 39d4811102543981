class RFLabError(Exception):
    """Base class for errors raised by rflab."""


class DimensionError(RFLabError, ValueError):
    """Operands act on different numbers of qubits, or a qubit index is out of range."""


class EngineError(RFLabError):
    """The requested simulation engine cannot evaluate this circuit."""


class CapacityError(RFLabError):
    """The problem exceeds a dense-simulation or exact-diagonalization cap."""
