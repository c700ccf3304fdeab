"""Exception hierarchy shared by every module."""


class StabgroundError(Exception):
    """Base class for all library errors."""


class DimensionError(StabgroundError, ValueError):
    """Operands act on different numbers of qubits."""


class ParseError(StabgroundError, ValueError):
    """Malformed Pauli or Hamiltonian text."""


class ValidationError(StabgroundError, ValueError):
    """A value violates the invariants of its type."""


class CapacityError(StabgroundError):
    """Requested size exceeds a configured cap."""

    def __init__(self, what: str, n: int, cap: int):
        self.what = what
        self.n = n
        self.cap = cap
        super().__init__(f"{what}: n_qubits={n} exceeds the cap of {cap}")


class DomainError(StabgroundError, ValueError):
    """A closed-form calculator was evaluated outside its domain."""


class SearchFailure(StabgroundError):
    """The genetic search produced no feasible individual."""
