"""Dense-vector helpers: Pauli action on state vectors and small matrices.

Basis index convention: qubit 0 is the most significant bit, matching the
left-to-right text form.
"""

from __future__ import annotations

import numpy as np

from .errors import CapacityError, DimensionError
from .pauli import PauliString

DENSE_CAP = 12


def _index_mask(mask: int, n: int) -> int:
    out = 0
    for q in range(n):
        if mask >> q & 1:
            out |= 1 << (n - 1 - q)
    return out


def n_qubits_of(state: np.ndarray) -> int:
    n = int(state.shape[-1]).bit_length() - 1
    if n < 1 or 1 << n != state.shape[-1]:
        raise DimensionError(f"state length {state.shape[-1]} is not a power of two >= 2")
    return n


def pauli_action(p: PauliString):
    """Return ``(perm, phases)`` with ``(P psi)[perm] = phases * psi``."""
    n = p.n_qubits
    idx = np.arange(1 << n)
    xm = _index_mask(p.x, n)
    zm = _index_mask(p.z, n)
    parity = np.zeros(1 << n, dtype=np.int64)
    b = idx & zm
    while zm:
        parity ^= b & 1
        b = b >> 1
        zm >>= 1
    phases = (1j**p.phase_exp) * (1 - 2 * parity)
    return idx ^ xm, phases


def apply_pauli(p: PauliString, state: np.ndarray) -> np.ndarray:
    if n_qubits_of(state) != p.n_qubits:
        raise DimensionError("state and Pauli string sizes differ")
    perm, phases = pauli_action(p)
    out = np.empty_like(state, dtype=complex)
    out[perm] = phases * state
    return out


def pauli_matrix(p: PauliString) -> np.ndarray:
    if p.n_qubits > DENSE_CAP:
        raise CapacityError("dense Pauli matrix", p.n_qubits, DENSE_CAP)
    dim = 1 << p.n_qubits
    perm, phases = pauli_action(p)
    m = np.zeros((dim, dim), dtype=complex)
    m[perm, np.arange(dim)] = phases
    return m


def hamiltonian_matrix(h, cap: int = DENSE_CAP) -> np.ndarray:
    if h.n_qubits > cap:
        raise CapacityError("dense Hamiltonian", h.n_qubits, cap)
    dim = 1 << h.n_qubits
    m = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim)
    for c, p in h.terms:
        perm, phases = pauli_action(p)
        m[perm, cols] += c * phases
    return m


def expectation(h, state: np.ndarray) -> float:
    total = 0.0
    for c, p in h.terms:
        total += c * np.vdot(state, apply_pauli(p, state)).real
    return float(total)


def stabilizer_projector(generators, n_qubits: int) -> np.ndarray:
    """``prod_j (I + g_j) / 2`` as a dense matrix."""
    if n_qubits > DENSE_CAP:
        raise CapacityError("dense stabilizer projector", n_qubits, DENSE_CAP)
    rho = np.eye(1 << n_qubits, dtype=complex)
    for g in generators:
        rho = 0.5 * (rho + pauli_matrix(g) @ rho)
    return rho


def state_from_projector(rho: np.ndarray) -> np.ndarray:
    j = int(np.argmax(rho.diagonal().real))
    return rho[:, j] / np.sqrt(rho[j, j].real)

