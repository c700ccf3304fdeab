"""Exhaustive stabilizer-state search for small qubit counts.

Every pure stabilizer state is a maximal isotropic (Lagrangian) subspace of
the 2N-dimensional symplectic space plus one sign per basis row. Group energy
of a state is the signed sum of those Hamiltonian coefficients whose Pauli
string lies in the stabilizer group; :func:`group_energy_oracle` recomputes
the same number as ``Tr(H rho)`` with dense matrices.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from . import dense
from .errors import CapacityError, DimensionError, ValidationError
from .gf2 import EchelonBasis, kernel, rref
from .hamiltonian import Hamiltonian
from .pauli import PauliString, commutes, multiply, parse_pauli, popcount

log = logging.getLogger(__name__)

ENUMERATION_CAP = 4
ORACLE_CAP = 6


@dataclass(frozen=True, eq=False)
class GeneratorSet:
    """N independent, pairwise commuting, Hermitian signed Pauli strings."""

    n_qubits: int
    generators: tuple[PauliString, ...]

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        gens = self.generators
        if len(gens) != self.n_qubits:
            raise ValidationError(f"need {self.n_qubits} generators, got {len(gens)}")
        for g in gens:
            if g.n_qubits != self.n_qubits:
                raise DimensionError(f"generator {g!r} has the wrong size")
            if not g.is_hermitian:
                raise ValidationError(f"generator {g!r} is not Hermitian")
        for a, b in itertools.combinations(gens, 2):
            if not commutes(a, b):
                raise ValidationError(f"generators {a} and {b} anticommute")
        if len(self.basis) != self.n_qubits:
            raise ValidationError("generators are not independent")

    @classmethod
    def from_text(cls, texts) -> GeneratorSet:
        gens = [parse_pauli(t) for t in texts]
        if not gens:
            raise ValidationError("empty generator list")
        return cls(gens[0].n_qubits, tuple(gens))

    @classmethod
    def _from_rows(cls, n: int, rows, sign_mask: int) -> GeneratorSet:
        # rows come from enumeration and are already a valid Lagrangian basis
        g = object.__new__(cls)
        gens = tuple(
            PauliString.from_vector(n, r, -1 if sign_mask >> i & 1 else 1) for i, r in enumerate(rows)
        )
        object.__setattr__(g, "n_qubits", n)
        object.__setattr__(g, "generators", gens)
        return g

    def texts(self) -> list[str]:
        return [str(g) for g in self.generators]

    def __repr__(self) -> str:
        return f"GeneratorSet({self.texts()})"

    def __eq__(self, other) -> bool:
        """Equality of stabilized states, not of the generator lists."""
        if not isinstance(other, GeneratorSet):
            return NotImplemented
        return self.canonical_key == other.canonical_key

    def __hash__(self) -> int:
        return hash(self.canonical_key)

    @cached_property
    def basis(self) -> EchelonBasis:
        b = EchelonBasis()
        for g in self.generators:
            b.add(g.vector)
        return b

    def _product(self, combo: int) -> PauliString:
        out = PauliString.identity(self.n_qubits)
        i = 0
        while combo:
            if combo & 1:
                out = multiply(out, self.generators[i])
            combo >>= 1
            i += 1
        return out

    def sign_of(self, p: PauliString) -> int:
        """Sign (±1) with which ``p``'s letters occur in the group, 0 if absent."""
        combo = self.basis.decompose(p.vector)
        if combo is None:
            return 0
        return self._product(combo).sign

    def element(self, vec: int) -> PauliString | None:
        combo = self.basis.decompose(vec)
        return None if combo is None else self._product(combo)

    def elements(self) -> list[PauliString]:
        return [self._product(c) for c in range(1 << self.n_qubits)]

    @cached_property
    def canonical_key(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """RREF of the symplectic rows plus the sign each RREF row carries."""
        rows = rref(g.vector for g in self.generators)
        return rows, tuple(self.element(r).sign for r in rows)

    def canonical(self) -> GeneratorSet:
        rows, signs = self.canonical_key
        mask = sum(1 << i for i, s in enumerate(signs) if s < 0)
        return GeneratorSet._from_rows(self.n_qubits, rows, mask)

    def rebased(self, preferred) -> GeneratorSet:
        """Same group, generators drawn from ``preferred`` strings first.

        Each preferred string whose letters lie in the group (and are
        independent of those already chosen) is taken with its group sign; the
        remainder is filled from the canonical rows.
        """
        chosen: list[PauliString] = []
        b = EchelonBasis()
        candidates = [p.vector for p in preferred] + list(self.canonical_key[0])
        for vec in candidates:
            if len(chosen) == self.n_qubits:
                break
            el = self.element(vec)
            if el is not None and b.add(vec):
                chosen.append(el)
        return GeneratorSet(self.n_qubits, tuple(chosen))


@dataclass(frozen=True)
class GroupEnergyReport:
    energy: float
    generator_set: GeneratorSet
    contributing_terms: tuple[tuple[PauliString, int, float], ...]


def _check_dims(g: GeneratorSet, h: Hamiltonian) -> None:
    if g.n_qubits != h.n_qubits:
        raise DimensionError(f"{g.n_qubits}-qubit generators vs {h.n_qubits}-qubit Hamiltonian")


def group_energy(g: GeneratorSet, h: Hamiltonian) -> GroupEnergyReport:
    """Signed sum of coefficients of Hamiltonian terms inside the group."""
    _check_dims(g, h)
    energy = 0.0
    contrib = []
    for c, p in h.terms:
        s = g.sign_of(p)
        if s:
            energy += s * c
            contrib.append((p, s, c))
    return GroupEnergyReport(energy, g, tuple(contrib))


def group_energy_oracle(g: GeneratorSet, h: Hamiltonian) -> float:
    """``Tr(H rho)`` with ``rho = 2**-N prod_j (I + g_j)`` built densely."""
    _check_dims(g, h)
    if g.n_qubits > ORACLE_CAP:
        raise CapacityError("dense group-energy oracle", g.n_qubits, ORACLE_CAP)
    rho = dense.stabilizer_projector(g.generators, g.n_qubits)
    return float(np.trace(dense.hamiltonian_matrix(h) @ rho).real)


# --- enumeration -----------------------------------------------------------


def _subspaces(n: int):
    """RREF bases of every subspace of GF(2)**n (as tuples of n-bit ints)."""
    out = []
    for k in range(n + 1):
        for pivots in itertools.combinations(range(n - 1, -1, -1), k):
            # row i leads at pivots[i]; free bits are lower non-pivot positions
            frees = [[b for b in range(p) if b not in pivots] for p in pivots]
            for choice in itertools.product(*[range(1 << len(f)) for f in frees]):
                rows = []
                for p, f, c in zip(pivots, frees, choice):
                    r = 1 << p
                    for j, b in enumerate(f):
                        if c >> j & 1:
                            r |= 1 << b
                    rows.append(r)
                out.append(tuple(rows))
    return out


@lru_cache(maxsize=None)
def lagrangian_subspaces(n: int) -> tuple[tuple[int, ...], ...]:
    """Canonical RREF rows of every Lagrangian subspace, sorted.

    Parametrized by the X-projection ``V`` and a symmetric matrix ``S`` over
    ``V``: rows ``(v_i, sum_j S_ij e_{p_j})`` plus ``(0, u)`` for ``u`` in the
    orthogonal complement of ``V``.
    """
    found = []
    for vrows in _subspaces(n):
        k = len(vrows)
        pivots = [r.bit_length() - 1 for r in vrows]
        perp = kernel(vrows, n)
        z_only = [u for u in perp]
        pairs = [(i, j) for i in range(k) for j in range(i, k)]
        for bits in range(1 << len(pairs)):
            zs = [0] * k
            for t, (i, j) in enumerate(pairs):
                if bits >> t & 1:
                    zs[i] |= 1 << pivots[j]
                    if i != j:
                        zs[j] |= 1 << pivots[i]
            vecs = [(v << n) | z for v, z in zip(vrows, zs)] + z_only
            found.append(rref(vecs))
    found.sort()
    return tuple(found)


def count_stabilizer_states(n: int) -> int:
    total = 2**n
    for k in range(1, n + 1):
        total *= 2**k + 1
    return total


def _check_cap(n: int, cap: int) -> None:
    if n > cap:
        raise CapacityError("stabilizer enumeration", n, cap)


def enumerate_generator_sets(n: int, cap: int = ENUMERATION_CAP):
    """Yield every n-qubit stabilizer state once, in canonical order."""
    _check_cap(n, cap)
    for rows in lagrangian_subspaces(n):
        for mask in range(1 << n):
            yield GeneratorSet._from_rows(n, rows, mask)


@lru_cache(maxsize=None)
def _sign_table(n: int) -> np.ndarray:
    # entry [s, c] = (-1)**popcount(s & c)
    s = np.arange(1 << n)[:, None]
    c = np.arange(1 << n)[None, :]
    par = np.zeros((1 << n, 1 << n), dtype=np.int64)
    v = s & c
    for _ in range(n):
        par ^= v & 1
        v = v >> 1
    return 1.0 - 2.0 * par


def _subspace_energies(rows, n: int, terms, h_identity: float) -> np.ndarray:
    """Group energies of all 2**n sign choices for one Lagrangian subspace."""
    basis = EchelonBasis()
    gens = []
    for r in rows:
        basis.add(r)
        gens.append(PauliString.from_vector(n, r))
    combos = []
    weights = []
    for c, p in terms:
        combo = basis.decompose(p.vector)
        if combo is None:
            continue
        prod = PauliString.identity(n)
        cc, i = combo, 0
        while cc:
            if cc & 1:
                prod = multiply(prod, gens[i])
            cc >>= 1
            i += 1
        combos.append(combo)
        weights.append(prod.sign * c)
    if not combos:
        return np.full(1 << n, h_identity)
    return h_identity + _sign_table(n)[:, combos] @ np.asarray(weights)


def energy_tolerance(h: Hamiltonian) -> float:
    return 1e-9 * max(1.0, h.one_norm + abs(h.identity_coeff))


def find_min_groups(h: Hamiltonian, cap: int = ENUMERATION_CAP) -> tuple[float, list[GeneratorSet]]:
    """Exact minimum group energy and every stabilizer state attaining it."""
    n = h.n_qubits
    _check_cap(n, cap)
    terms = h.pauli_terms
    tol = energy_tolerance(h)
    best = np.inf
    winners: list[tuple[tuple[int, ...], np.ndarray]] = []
    for rows in lagrangian_subspaces(n):
        e = _subspace_energies(rows, n, terms, h.identity_coeff)
        lo = e.min()
        if lo < best - tol:
            best = lo
            winners = [(rows, e)]
        elif lo <= best + tol:
            winners.append((rows, e))
    groups = []
    for rows, e in winners:
        for mask in np.flatnonzero(e <= best + tol):
            groups.append(GeneratorSet._from_rows(n, rows, int(mask)))
    exact = min(group_energy(g, h).energy for g in groups)
    return exact, groups


# --- selection among degenerate minimizers ---------------------------------


def filter_xi(g: GeneratorSet, h: Hamiltonian) -> int:
    """1 if some listed generator commutes with every Hamiltonian term."""
    _check_dims(g, h)
    paulis = [p for _, p in h.terms]
    return int(any(all(commutes(gen, p) for p in paulis) for gen in g.generators))


def group_symmetries(g: GeneratorSet, h: Hamiltonian) -> list[PauliString]:
    """Non-identity group elements commuting with every Hamiltonian term."""
    _check_dims(g, h)
    paulis = [p for _, p in h.terms]
    return [e for e in g.elements() if not e.is_identity and all(commutes(e, p) for p in paulis)]


def _passes_filter(g: GeneratorSet, h: Hamiltonian) -> bool:
    # generator choice is free, so ask whether any generating set could pass
    return bool(group_symmetries(g, h))


def _signed_elements(g: GeneratorSet) -> set[tuple[int, int]]:
    return {(e.vector, e.sign) for e in g.elements() if not e.is_identity}


def common_subgroup(groups) -> set[tuple[int, int]]:
    """Signed non-identity elements shared by every group, as (vector, sign)."""
    it = iter(groups)
    try:
        common = _signed_elements(next(it))
    except StopIteration:
        return set()
    for g in it:
        common &= _signed_elements(g)
        if not common:
            break
    return common


def _presentable(g: GeneratorSet, h: Hamiltonian) -> GeneratorSet:
    ordered = sorted(h.pauli_terms, key=lambda t: -abs(t[0]))
    preferred = [p for _, p in ordered]
    preferred += sorted(group_symmetries(g, h), key=lambda p: (-p.weight, p.vector))
    return g.rebased(preferred)


def refine_optimal(h: Hamiltonian, cap: int = ENUMERATION_CAP, notes: list | None = None) -> list[GeneratorSet]:
    """Two-step selection of the best minimizers.

    Step 1 keeps minimizers whose group contains a symmetry of ``h``. Step 2
    strips the terms of the common subgroup from ``h``, minimizes the rest,
    filters those minimizers against the full ``h`` and keeps the step-1
    survivors sharing a signed element (outside the common subgroup) with
    one of them. Any step that would leave nothing falls back to its input;
    ``notes`` receives a string per fallback.
    """
    if notes is None:
        notes = []
    _, mins = find_min_groups(h, cap)
    keep = [g for g in mins if _passes_filter(g, h)]
    if not keep:
        notes.append("no minimizer passes the commuting-generator filter; kept all minimizers")
        log.warning(notes[-1])
        keep = mins

    common = common_subgroup(mins)
    common_paulis = [PauliString.from_vector(h.n_qubits, v) for v, _ in common]
    h_sub = h.without(common_paulis)
    if h_sub.pauli_terms and len(keep) > 1:
        _, sub_mins = find_min_groups(h_sub, cap)
        keep_sub = [g for g in sub_mins if _passes_filter(g, h)]
        if not keep_sub:
            notes.append("no sub-Hamiltonian minimizer passes the filter; using all of them")
            log.warning(notes[-1])
            keep_sub = sub_mins
        sub_elems = set()
        for s in keep_sub:
            sub_elems |= _signed_elements(s)
        sub_elems -= common
        chosen = [g for g in keep if _signed_elements(g) & sub_elems]
        if chosen:
            keep = chosen
        else:
            notes.append("sub-Hamiltonian step selected nothing; returning step-1 survivors")
            log.warning(notes[-1])
    if len(keep) > 1:
        notes.append(f"{len(keep)} optimal sets survive both steps")
    return [_presentable(g, h) for g in keep]


def ground_space_fidelity(g: GeneratorSet, ground_vectors: np.ndarray) -> float:
    """Squared norm of the stabilizer state's projection on a ground space."""
    psi = dense.state_from_projector(dense.stabilizer_projector(g.generators, g.n_qubits))
    amps = ground_vectors.conj().T @ psi
    return float(np.real(np.vdot(amps, amps)))


def stabilizer_weight(p: PauliString) -> int:
    return popcount(p.x | p.z)
