"""Stabilizer tableaux and Clifford preparation circuits.

Synthesis reduces the stabilizer rows to ``+Z_q`` by conjugating with H, S,
CNOT and Pauli gates (row products are free because they leave the group
unchanged); the preparation circuit is the inverse of that gate list.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dense
from .errors import DimensionError, ParseError, ValidationError
from .gf2 import rank
from .pauli import PauliString, commutes, multiply
from .stabsearch import GeneratorSet

GATES = {"H": 1, "S": 1, "X": 1, "Z": 1, "CNOT": 2}


def conjugate(p: PauliString, gate: str, qubits: tuple[int, ...]) -> PauliString:
    """``U p U^dagger`` for a single gate, phase tracked exactly."""
    x, z, ph = p.x, p.z, p.phase_exp
    if gate == "CNOT":
        c, t = qubits
        x ^= (x >> c & 1) << t
        z ^= (z >> t & 1) << c
        return PauliString(p.n_qubits, x, z, ph)
    (q,) = qubits
    bx, bz = x >> q & 1, z >> q & 1
    if gate == "H":
        x = x & ~(1 << q) | bz << q
        z = z & ~(1 << q) | bx << q
        ph += 2 * (bx & bz)
    elif gate == "S":
        z ^= bx << q
        ph += bx
    elif gate == "X":
        ph += 2 * bz
    elif gate == "Z":
        ph += 2 * bx
    else:
        raise ValidationError(f"unknown gate {gate!r}")
    return PauliString(p.n_qubits, x, z, ph)


@dataclass(frozen=True)
class CliffordCircuit:
    n_qubits: int
    gates: tuple[tuple[str, tuple[int, ...]], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple((g, tuple(q)) for g, q in self.gates))
        for name, qs in self.gates:
            if GATES.get(name) != len(qs):
                raise ValidationError(f"bad gate {name} {qs}")
            if any(not 0 <= q < self.n_qubits for q in qs):
                raise ValidationError(f"gate {name} {qs} outside {self.n_qubits} qubits")
            if len(set(qs)) != len(qs):
                raise ValidationError(f"gate {name} repeats a qubit")

    def __len__(self) -> int:
        return len(self.gates)

    def to_text(self) -> str:
        return "".join(f"{name} {' '.join(map(str, qs))}\n" for name, qs in self.gates)

    @classmethod
    def from_text(cls, n_qubits: int, text: str) -> CliffordCircuit:
        gates = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            parts = raw.split()
            if not parts:
                continue
            try:
                gates.append((parts[0], tuple(int(v) for v in parts[1:])))
            except ValueError:
                raise ParseError(f"line {lineno}: bad qubit index in {raw!r}") from None
        try:
            return cls(n_qubits, tuple(gates))
        except ValidationError as exc:
            raise ParseError(str(exc)) from None

    def inverse(self) -> CliffordCircuit:
        out = []
        for name, qs in reversed(self.gates):
            if name == "S":
                out += [("S", qs), ("Z", qs)]
            else:
                out.append((name, qs))
        return CliffordCircuit(self.n_qubits, tuple(out))


@dataclass(frozen=True)
class Tableau:
    """Destabilizer rows ``0..n-1`` followed by stabilizer rows ``n..2n-1``."""

    n_qubits: int
    rows: tuple[PauliString, ...]

    def __post_init__(self):
        n = self.n_qubits
        if len(self.rows) != 2 * n:
            raise ValidationError(f"tableau needs {2 * n} rows")
        if any(not r.is_hermitian for r in self.rows):
            raise ValidationError("tableau rows must be Hermitian")
        if rank(r.vector for r in self.rows) != 2 * n:
            raise ValidationError("tableau rows are not symplectically independent")
        d, s = self.rows[:n], self.rows[n:]
        for i in range(n):
            for j in range(n):
                if not commutes(s[i], s[j]):
                    raise ValidationError("stabilizer rows anticommute")
                if commutes(d[i], s[j]) != (i != j):
                    raise ValidationError("destabilizer/stabilizer pairing broken")

    @classmethod
    def identity(cls, n: int) -> Tableau:
        destab = tuple(PauliString(n, 1 << q, 0) for q in range(n))
        stab = tuple(PauliString(n, 0, 1 << q) for q in range(n))
        return cls(n, destab + stab)

    def apply(self, circuit: CliffordCircuit) -> Tableau:
        if circuit.n_qubits != self.n_qubits:
            raise DimensionError("circuit and tableau sizes differ")
        rows = list(self.rows)
        for name, qs in circuit.gates:
            rows = [conjugate(r, name, qs) for r in rows]
        return Tableau(self.n_qubits, tuple(rows))

    @property
    def destabilizers(self) -> tuple[PauliString, ...]:
        return self.rows[: self.n_qubits]

    @property
    def stabilizers(self) -> tuple[PauliString, ...]:
        return self.rows[self.n_qubits :]

    @property
    def matrix(self) -> np.ndarray:
        """``2n x 2n`` binary (x|z) matrix."""
        n = self.n_qubits
        m = np.zeros((2 * n, 2 * n), dtype=np.uint8)
        for i, r in enumerate(self.rows):
            for q in range(n):
                m[i, q] = r.x >> q & 1
                m[i, n + q] = r.z >> q & 1
        return m

    @property
    def sign_bits(self) -> np.ndarray:
        return np.array([0 if r.sign > 0 else 1 for r in self.rows], dtype=np.uint8)

    def generator_set(self) -> GeneratorSet:
        return GeneratorSet(self.n_qubits, self.stabilizers)


def _reduce_to_zeros(gens: list[PauliString], n: int) -> list[tuple[str, tuple[int, ...]]]:
    """Gates U (in application order) with U g U^dagger generating <+Z_q>."""
    rows = list(gens)
    ops: list[tuple[str, tuple[int, ...]]] = []

    def gate(name, *qs):
        ops.append((name, qs))
        for i in range(n):
            rows[i] = conjugate(rows[i], name, qs)

    for q in range(n):
        pivot = next((i for i in range(q, n) if rows[i].x >> q & 1), None)
        if pivot is None:
            pivot = next((i for i in range(q, n) if rows[i].z >> q & 1), None)
            if pivot is None:
                raise ValidationError("generators are not independent")
            gate("H", q)
        rows[q], rows[pivot] = rows[pivot], rows[q]
        for j in range(n):
            if j != q and rows[j].x >> q & 1:
                rows[j] = multiply(rows[j], rows[q])
        for c in range(n):
            if c != q and rows[q].x >> c & 1:
                gate("CNOT", q, c)
        if rows[q].z >> q & 1:
            gate("S", q)
        for c in range(n):
            if c != q and rows[q].z >> c & 1:
                gate("H", c)
                gate("CNOT", q, c)
                gate("H", c)
    for q in range(n):
        gate("H", q)
    for q in range(n):
        if rows[q].sign < 0:
            gate("X", q)
    return ops


def synthesize_circuit(g: GeneratorSet) -> CliffordCircuit:
    """Circuit taking ``|0...0>`` to the state stabilized by ``g``."""
    if not isinstance(g, GeneratorSet):
        raise ValidationError("expected a GeneratorSet")
    ops = _reduce_to_zeros(list(g.generators), g.n_qubits)
    inv = CliffordCircuit(g.n_qubits, tuple(ops)).inverse()
    return CliffordCircuit(g.n_qubits, tuple(_cancel_pairs(inv.gates)))


def _cancel_pairs(gates):
    """Drop pairs of equal self-inverse gates separated only by disjoint gates."""
    out: list[tuple[str, tuple[int, ...]]] = []
    for gate in gates:
        name, qs = gate
        hit = None
        if name != "S":
            for k in range(len(out) - 1, -1, -1):
                if out[k] == gate:
                    hit = k
                    break
                if set(out[k][1]) & set(qs):
                    break
        if hit is None:
            out.append(gate)
        else:
            del out[hit]
    return out


def tableau_for(g: GeneratorSet) -> Tableau:
    """Full tableau (with destabilizers) of the prepared state."""
    return Tableau.identity(g.n_qubits).apply(synthesize_circuit(g))


_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_ONE_QUBIT = {
    "H": _H,
    "S": np.diag([1, 1j]),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
}


def apply_circuit(state: np.ndarray, circuit: CliffordCircuit) -> np.ndarray:
    """Apply the gates in order to a dense vector (qubit 0 most significant)."""
    n = dense.n_qubits_of(state)
    if n != circuit.n_qubits:
        raise DimensionError(f"{n}-qubit state, {circuit.n_qubits}-qubit circuit")
    psi = np.asarray(state, dtype=complex).reshape([2] * n).copy()
    for name, qs in circuit.gates:
        if name == "CNOT":
            c, t = qs
            idx = [slice(None)] * n
            idx[c] = 1
            sub = psi[tuple(idx)]
            axis = t if t < c else t - 1
            psi[tuple(idx)] = np.flip(sub, axis=axis)
        else:
            (q,) = qs
            psi = np.moveaxis(np.tensordot(_ONE_QUBIT[name], psi, axes=([1], [q])), 0, q)
    return psi.reshape(-1)


def prepare_state(g: GeneratorSet) -> np.ndarray:
    zero = np.zeros(1 << g.n_qubits, dtype=complex)
    zero[0] = 1.0
    return apply_circuit(zero, synthesize_circuit(g))


def verify_stabilized(state: np.ndarray, g: GeneratorSet, atol: float = 1e-9) -> bool:
    if dense.n_qubits_of(state) != g.n_qubits:
        raise DimensionError("state and generator sizes differ")
    return all(np.linalg.norm(dense.apply_pauli(p, state) - state) <= atol for p in g.generators)
