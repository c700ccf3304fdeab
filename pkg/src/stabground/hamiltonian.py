"""Pauli-sum Hamiltonians: construction, text I/O and built-in models."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import DimensionError, ParseError, ValidationError
from .pauli import PauliString, format_pauli, parse_pauli


@dataclass(frozen=True)
class Hamiltonian:
    """``H = sum_p coeff_p * P_p`` with unsigned, distinct Pauli strings.

    Use :meth:`from_terms` to build one; it merges duplicates, absorbs signs
    into the coefficients and drops zero terms.
    """

    n_qubits: int
    terms: tuple[tuple[float, PauliString], ...]

    def __post_init__(self):
        seen = set()
        for coeff, p in self.terms:
            if p.n_qubits != self.n_qubits:
                raise DimensionError(f"term {p!r} does not act on {self.n_qubits} qubits")
            if p.sign != 1 or p.phase_exp != p.unsigned().phase_exp:
                raise ValidationError("terms must be stored unsigned")
            if not math.isfinite(coeff) or coeff == 0:
                raise ValidationError(f"bad coefficient {coeff!r}")
            if p in seen:
                raise ValidationError(f"duplicate term {p}")
            seen.add(p)

    @classmethod
    def from_terms(cls, n_qubits: int, terms) -> Hamiltonian:
        merged: dict[PauliString, float] = {}
        for coeff, p in terms:
            if isinstance(p, str):
                p = parse_pauli(p)
            if p.n_qubits != n_qubits:
                raise DimensionError(f"term {p!r} does not act on {n_qubits} qubits")
            coeff = float(coeff) * p.sign
            key = p.unsigned()
            merged[key] = merged.get(key, 0.0) + coeff
        return cls(n_qubits, tuple((c, p) for p, c in merged.items() if c != 0.0))

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def identity_coeff(self) -> float:
        for c, p in self.terms:
            if p.is_identity:
                return c
        return 0.0

    @property
    def pauli_terms(self) -> tuple[tuple[float, PauliString], ...]:
        """Terms excluding the identity."""
        return tuple((c, p) for c, p in self.terms if not p.is_identity)

    @property
    def one_norm(self) -> float:
        """``sum |h_p|`` over non-identity terms."""
        return sum(abs(c) for c, _ in self.pauli_terms)

    def without(self, paulis) -> Hamiltonian:
        drop = {p.unsigned() for p in paulis}
        return Hamiltonian(self.n_qubits, tuple((c, p) for c, p in self.terms if p not in drop))

    def to_text(self) -> str:
        return "".join(f"{c!r} {format_pauli(p)[1:]}\n" for c, p in self.terms)

    def digest(self) -> str:
        """Git blob hash of :meth:`to_text`."""
        data = self.to_text().encode()
        return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def parse_hamiltonian(text: str) -> Hamiltonian:
    """Parse ``<coeff> <pauli>`` lines; ``#`` starts a comment."""
    terms = []
    n = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"line {lineno}: expected '<coeff> <pauli>', got {raw!r}")
        try:
            coeff = float(parts[0].replace("−", "-"))
        except ValueError:
            raise ParseError(f"line {lineno}: malformed coefficient {parts[0]!r}") from None
        if not math.isfinite(coeff):
            raise ParseError(f"line {lineno}: non-finite coefficient")
        p = parse_pauli(parts[1])
        if n is None:
            n = p.n_qubits
        elif p.n_qubits != n:
            raise DimensionError(f"line {lineno}: {p.n_qubits} qubits, expected {n}")
        terms.append((coeff, p))
    if n is None:
        raise ParseError("empty Hamiltonian file")
    return Hamiltonian.from_terms(n, terms)


def load_hamiltonian(path) -> Hamiltonian:
    return parse_hamiltonian(Path(path).read_text(encoding="utf-8"))


def tfim(L: int, lam: float) -> Hamiltonian:
    """Open transverse-field Ising chain ``sum Z_i Z_{i+1} + lam * sum X_j``."""
    if L < 2:
        raise ValidationError("tfim needs L >= 2")
    terms = [(1.0, PauliString.from_letters(L, {i: "Z", i + 1: "Z"})) for i in range(L - 1)]
    terms += [(lam, PauliString.from_letters(L, {j: "X"})) for j in range(L)]
    return Hamiltonian.from_terms(L, terms)


def candidate_generator_set(h: Hamiltonian) -> dict[PauliString, float]:
    """Map each Hamiltonian Pauli to ``Tr(P H) = 2**N * h_p``."""
    scale = float(2**h.n_qubits)
    return {p: scale * c for c, p in h.terms}
