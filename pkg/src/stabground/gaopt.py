"""Genetic search for a low-energy commuting subset of Hamiltonian terms.

Individuals are bitstrings over the non-identity terms. A commuting
selection is scored by the lowest group energy it can carry: the selected
strings span a GF(2) subspace, every Hamiltonian term inside that span is
counted, and the signs of an independent basis are chosen to minimize the
total. Selections with anticommuting pairs get a large penalty so they are
always worse than any commuting one.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import SearchFailure, ValidationError
from .gf2 import EchelonBasis, kernel
from .hamiltonian import Hamiltonian
from .pauli import PauliString, multiply, popcount, symplectic_product
from .stabsearch import GeneratorSet, group_energy

log = logging.getLogger(__name__)

EXHAUSTIVE_SIGN_RANK = 16


@dataclass(frozen=True)
class CommutationMatrix:
    """Symmetric 0/1 matrix, entry 1 iff terms i and j anticommute."""

    paulis: tuple[PauliString, ...]
    matrix: np.ndarray

    def __post_init__(self):
        m = self.matrix
        if m.shape != (len(self.paulis),) * 2:
            raise ValidationError("matrix shape does not match the term list")
        if not np.array_equal(m, m.T) or np.any(np.diag(m)):
            raise ValidationError("commutation matrix must be symmetric with zero diagonal")

    def anticommuting_pairs(self, selection: np.ndarray) -> int:
        sel = selection.astype(bool)
        return int(self.matrix[np.ix_(sel, sel)].sum()) // 2


def commutation_matrix(h: Hamiltonian, include_identity: bool = True) -> CommutationMatrix:
    terms = h.terms if include_identity else h.pauli_terms
    paulis = tuple(p for _, p in terms)
    if not paulis:
        raise ValidationError("Hamiltonian has no terms")
    n = h.n_qubits
    vecs = [p.vector for p in paulis]
    m = np.zeros((len(vecs), len(vecs)), dtype=np.uint8)
    for i, j in itertools.combinations(range(len(vecs)), 2):
        m[i, j] = m[j, i] = symplectic_product(vecs[i], vecs[j], n)
    return CommutationMatrix(paulis, m)


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 64
    generations: int | None = None
    crossover_rate: float = 0.7
    mutation_rate: float | None = None
    penalty_weight: float | None = None
    rng_seed: int = 0
    elitism_count: int = 2
    tournament_size: int = 3

    def __post_init__(self):
        if self.population_size < 2:
            raise ValidationError("population_size must be at least 2")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ValidationError("crossover_rate must lie in [0, 1]")
        if self.mutation_rate is not None and not 0.0 <= self.mutation_rate <= 1.0:
            raise ValidationError("mutation_rate must lie in [0, 1]")
        if self.generations is not None and self.generations < 0:
            raise ValidationError("generations must be non-negative")
        if not 0 <= self.elitism_count <= self.population_size:
            raise ValidationError("elitism_count must lie in [0, population_size]")
        if self.tournament_size < 1:
            raise ValidationError("tournament_size must be positive")

    def resolved(self, h: Hamiltonian) -> GaConfig:
        """Fill size-dependent defaults and check the penalty bound."""
        p = len(h.pauli_terms)
        penalty = 2.0 * h.one_norm + 1.0 if self.penalty_weight is None else self.penalty_weight
        if penalty <= h.one_norm:
            raise ValidationError(f"penalty_weight {penalty} must exceed sum|h| = {h.one_norm}")
        return GaConfig(
            population_size=self.population_size,
            generations=200 * h.n_qubits if self.generations is None else self.generations,
            crossover_rate=self.crossover_rate,
            mutation_rate=1.0 / max(p, 1) if self.mutation_rate is None else self.mutation_rate,
            penalty_weight=penalty,
            rng_seed=self.rng_seed,
            elitism_count=self.elitism_count,
            tournament_size=self.tournament_size,
        )


@dataclass(frozen=True)
class CliqueResult:
    n_qubits: int
    selected_terms: tuple[int, ...]
    signs: dict[int, int] = field(hash=False)
    energy: float
    is_maximal: bool
    paulis: tuple[PauliString, ...] = ()

    def signed_terms(self) -> list[PauliString]:
        out = []
        for i in self.selected_terms:
            p = self.paulis[i]
            out.append(p if self.signs[i] > 0 else -p)
        return out


# --- fitness ---------------------------------------------------------------


def _sign_vectors(r: int) -> np.ndarray:
    s = np.arange(1 << r)[:, None]
    bits = (s >> np.arange(r)[None, :]) & 1
    return bits.astype(np.int64)


class _Scorer:
    """Exact sign-optimized energy of commuting selections, with a cache."""

    def __init__(self, h: Hamiltonian, penalty: float):
        self.h = h
        self.n = h.n_qubits
        self.terms = h.pauli_terms
        self.coeffs = np.array([c for c, _ in self.terms])
        self.paulis = tuple(p for _, p in self.terms)
        self.cmat = commutation_matrix(h, include_identity=False) if self.terms else None
        self.penalty = penalty
        self.cache: dict[bytes, tuple[float, dict[int, int]]] = {}

    def fitness(self, bits: np.ndarray) -> float:
        key = bits.tobytes()
        hit = self.cache.get(key)
        if hit is not None:
            return hit[0]
        pairs = self.cmat.anticommuting_pairs(bits)
        if pairs:
            val = -float(np.abs(self.coeffs[bits.astype(bool)]).sum()) + self.penalty * pairs
            self.cache[key] = (val, {})
            return val
        val, signs = self.exact(np.flatnonzero(bits))
        self.cache[key] = (val, signs)
        return val

    def signs_of(self, bits: np.ndarray) -> dict[int, int]:
        self.fitness(bits)
        return self.cache[bits.tobytes()][1]

    def exact(self, selected) -> tuple[float, dict[int, int]]:
        """Minimum energy over sign choices for a commuting selection.

        Returns the energy (identity term included) and the sign of every
        term lying in the span of the selection.
        """
        n = self.n
        basis = EchelonBasis()
        gens: list[PauliString] = []
        for i in selected:
            if basis.add(self.paulis[i].vector):
                gens.append(self.paulis[i])
        r = len(gens)
        idx, combos, betas = [], [], []
        for t, p in enumerate(self.paulis):
            combo = basis.decompose(p.vector)
            if combo is None:
                continue
            prod = PauliString.identity(n)
            for j in range(r):
                if combo >> j & 1:
                    prod = multiply(prod, gens[j])
            idx.append(t)
            combos.append(combo)
            betas.append(prod.sign)
        h_i = self.h.identity_coeff
        if not idx:
            return h_i, {}
        w = self.coeffs[idx] * np.array(betas)
        cm = np.array(combos, dtype=np.int64)
        if r <= EXHAUSTIVE_SIGN_RANK:
            svec = _sign_vectors(r)
            smask = svec @ (1 << np.arange(r, dtype=np.int64))
            par = _parity(smask[:, None] & cm[None, :])
            energies = (1.0 - 2.0 * par) @ w
            best = int(np.argmin(energies))
            s = int(smask[best])
            energy = float(energies[best])
        else:
            s, energy = _local_sign_search(cm, w, r)
        signs = {}
        for t, c, b in zip(idx, combos, betas):
            signs[t] = b * (-1 if popcount(c & s) & 1 else 1)
        return h_i + energy, signs


def _parity(a: np.ndarray) -> np.ndarray:
    out = np.zeros(a.shape, dtype=np.int64)
    a = a.copy()
    while np.any(a):
        out ^= a & 1
        a >>= 1
    return out


def _local_sign_search(cm: np.ndarray, w: np.ndarray, r: int) -> tuple[int, float]:
    # start from signs that make every basis term negative, then single flips
    s = 0
    for j in range(r):
        single = np.flatnonzero(cm == (1 << j))
        if single.size and w[single].sum() > 0:
            s |= 1 << j

    def energy(mask):
        return float(((1.0 - 2.0 * _parity(mask & cm)) * w).sum())

    cur = energy(s)
    improved = True
    while improved:
        improved = False
        for j in range(r):
            e = energy(s ^ (1 << j))
            if e < cur - 1e-15:
                s ^= 1 << j
                cur = e
                improved = True
    return s, cur


# --- genetic algorithm -----------------------------------------------------


def _greedy_extend(scorer: _Scorer, bits: np.ndarray) -> np.ndarray:
    """Add commuting terms by descending |h| while energy does not rise."""
    bits = bits.copy()
    m = scorer.cmat.matrix
    cur = scorer.fitness(bits)
    for t in np.argsort(-np.abs(scorer.coeffs), kind="stable"):
        if bits[t]:
            continue
        if np.any(m[t, bits.astype(bool)]):
            continue
        trial = bits.copy()
        trial[t] = 1
        e = scorer.fitness(trial)
        if e <= cur + 1e-12:
            bits, cur = trial, e
    return bits


def _is_maximal(scorer: _Scorer, bits: np.ndarray) -> bool:
    sel = bits.astype(bool)
    free = ~sel & ~np.any(scorer.cmat.matrix[:, sel], axis=1)
    return not np.any(free)


def ga_search(h: Hamiltonian, cfg: GaConfig | None = None) -> CliqueResult:
    """Minimum-energy commuting term subset found by a seeded GA."""
    cfg = (cfg or GaConfig()).resolved(h)
    scorer = _Scorer(h, cfg.penalty_weight)
    p = len(scorer.terms)
    if p == 0:
        return CliqueResult(h.n_qubits, (), {}, h.identity_coeff, True, ())
    rng = np.random.default_rng(cfg.rng_seed)
    pop_size = cfg.population_size

    pop = np.zeros((pop_size, p), dtype=np.uint8)
    n_single = min(p, pop_size)
    order = np.argsort(-np.abs(scorer.coeffs), kind="stable")
    for k in range(n_single):
        pop[k, order[k]] = 1
    if pop_size > n_single:
        pop[n_single:] = rng.random((pop_size - n_single, p)) < 0.5

    fit = np.array([scorer.fitness(ind) for ind in pop])
    for _ in range(cfg.generations):
        elite = np.argsort(fit, kind="stable")[: cfg.elitism_count]
        m = pop_size - len(elite)
        picks = rng.integers(0, pop_size, size=(m, 2, cfg.tournament_size))
        winners = np.take_along_axis(picks, np.argmin(fit[picks], axis=2)[..., None], axis=2)[..., 0]
        cross = rng.random(m) < cfg.crossover_rate
        mix = rng.random((m, p)) < 0.5
        flip = rng.random((m, p)) < cfg.mutation_rate
        a, b = pop[winners[:, 0]], pop[winners[:, 1]]
        kids = np.where(cross[:, None] & mix, b, a) ^ flip.astype(np.uint8)
        children = np.concatenate([pop[elite], kids.astype(np.uint8)])
        pop = children
        # scoring happens after all draws of the generation
        fit = np.array([scorer.fitness(ind) for ind in pop])

    feasible = [i for i in range(pop_size) if scorer.cmat.anticommuting_pairs(pop[i]) == 0]
    if not feasible:
        raise SearchFailure("no commuting individual survived the search")
    best = min(feasible, key=lambda i: (fit[i], pop[i].tobytes()))
    bits = _greedy_extend(scorer, pop[best])
    energy = scorer.fitness(bits)
    signs = scorer.signs_of(bits)
    selected = tuple(int(i) for i in np.flatnonzero(bits))
    return CliqueResult(
        h.n_qubits,
        selected,
        {i: signs[i] for i in selected},
        energy,
        _is_maximal(scorer, bits),
        scorer.paulis,
    )


# --- completion to a full generator set ------------------------------------


_LETTER_RANK = {"X": 0, "Y": 1, "Z": 2, "I": 3}


def _preference(p: PauliString):
    return (-p.weight, tuple(_LETTER_RANK[p.letter(q)] for q in range(p.n_qubits)))


def _group_energy_of(gens: list[PauliString], h: Hamiltonian) -> float:
    basis = EchelonBasis()
    for g in gens:
        basis.add(g.vector)
    total = 0.0
    for c, p in h.terms:
        combo = basis.decompose(p.vector)
        if combo is None:
            continue
        prod = PauliString.identity(h.n_qubits)
        for j, g in enumerate(gens):
            if combo >> j & 1:
                prod = multiply(prod, g)
        total += prod.sign * c
    return total


def _span_elements(gens: list[PauliString], n: int) -> list[PauliString]:
    out = []
    for combo in range(1, 1 << len(gens)):
        prod = PauliString.identity(n)
        for j, g in enumerate(gens):
            if combo >> j & 1:
                prod = multiply(prod, g)
        out.append(prod)
    return out


def _commuting_with(vecs, n: int) -> list[int]:
    """Basis of symplectic vectors commuting with every vector in ``vecs``."""
    # symplectic form of u with v equals the dot product of u with swapped v
    mask = (1 << n) - 1
    swapped = [((v & mask) << n) | (v >> n) for v in vecs]
    return kernel(swapped, 2 * n)


def _max_commuting_subset(paulis: list[PauliString], h: Hamiltonian) -> list[PauliString]:
    """Greedy G^max: a maximal mutually commuting subset, largest |h| first."""
    coeff = {p: abs(c) for c, p in h.terms}
    chosen: list[PauliString] = []
    for p in sorted(paulis, key=lambda q: (-coeff.get(q.unsigned(), 0.0), _preference(q))):
        if all(_commute(p, g) for g in chosen):
            chosen.append(p)
    return chosen


def _commute(a: PauliString, b: PauliString) -> bool:
    return popcount((a.x & b.z) ^ (a.z & b.x)) % 2 == 0


@dataclass(frozen=True)
class CompletionStep:
    generator: PauliString
    source: str  # "clique", "gmax", "symmetry" or "complement"


def completion_steps(clique: CliqueResult, h: Hamiltonian) -> list[CompletionStep]:
    """Generators for the clique plus appended ones, each tagged by origin."""
    n = h.n_qubits
    steps: list[CompletionStep] = []
    basis = EchelonBasis()
    for p in clique.signed_terms():
        if basis.add(p.vector):
            steps.append(CompletionStep(p, "clique"))
    gens = [s.generator for s in steps]

    clique_set = {clique.paulis[i] for i in clique.selected_terms}
    remaining = [p for _, p in h.pauli_terms if p not in clique_set]
    gmax = _max_commuting_subset(remaining, h)
    gmax_signed = _signed_gmax(gmax, h)
    all_terms = [p for _, p in h.pauli_terms]

    while len(gens) < n:
        pick = None
        source = None
        # (a) an element of <G^max> that commutes with H and the current set
        cands = [e for e in _span_elements(gmax_signed, n) if not e.is_identity] if gmax_signed else []
        cands = [
            e for e in cands
            if not basis.contains(e.vector)
            and all(_commute(e, g) for g in gens)
            and all(_commute(e, t) for t in all_terms)
        ]
        if cands:
            pick, source = min(cands, key=_preference), "gmax"
        if pick is None:
            # (b) exact symmetry search: commute with the set and every term
            sym = _commuting_with([g.vector for g in gens] + [t.vector for t in all_terms], n)
            pick = _best_outside(sym, basis, n)
            source = "symmetry"
        if pick is None:
            # (c) any vector commuting with the current set
            pick = _best_outside(_commuting_with([g.vector for g in gens], n), basis, n)
            source = "complement"
        if pick is None:
            raise SearchFailure("symplectic complement failed to extend the set")
        signed = _choose_sign(pick, gens, h, gmax_signed)
        gens.append(signed)
        basis.add(signed.vector)
        steps.append(CompletionStep(signed, source))
    return steps


def _signed_gmax(gmax: list[PauliString], h: Hamiltonian) -> list[PauliString]:
    """Independent G^max generators with energy-minimizing signs."""
    if not gmax:
        return []
    sub = Hamiltonian.from_terms(h.n_qubits, [(c, p) for c, p in h.pauli_terms if p in set(gmax)])
    scorer = _Scorer(sub, 1.0)
    _, signs = scorer.exact(range(len(scorer.paulis)))
    out, basis = [], EchelonBasis()
    for t, p in enumerate(scorer.paulis):
        if basis.add(p.vector):
            out.append(p if signs.get(t, 1) > 0 else -p)
    return out


def _best_outside(span_basis: list[int], basis: EchelonBasis, n: int) -> PauliString | None:
    """Preferred element of ``span(span_basis)`` not in ``basis``'s span."""
    outside = [v for v in span_basis if not basis.contains(v)]
    if not outside:
        return None
    best = None
    if len(span_basis) <= 16:
        for combo in range(1, 1 << len(span_basis)):
            v = 0
            for j, b in enumerate(span_basis):
                if combo >> j & 1:
                    v ^= b
            if basis.contains(v):
                continue
            p = PauliString.from_vector(n, v)
            if best is None or _preference(p) < _preference(best):
                best = p
        return best
    return min((PauliString.from_vector(n, v) for v in outside), key=_preference)


def _choose_sign(p: PauliString, gens: list[PauliString], h: Hamiltonian, gmax_signed) -> PauliString:
    plus = _group_energy_of(gens + [p], h)
    minus = _group_energy_of(gens + [-p], h)
    if plus < minus:
        return p
    if minus < plus:
        return -p
    # tie: inherit the sign the optimal G^max signs induce on p, else '+'
    for e in _span_elements(gmax_signed, h.n_qubits) if gmax_signed else []:
        if e.vector == p.vector:
            return e
    return p


def complete_generators(clique: CliqueResult, h: Hamiltonian, cfg: GaConfig | None = None) -> GeneratorSet:
    """Extend a commuting clique to N independent signed generators."""
    steps = completion_steps(clique, h)
    return GeneratorSet(h.n_qubits, tuple(s.generator for s in steps))


def degeneracy_count(n: int, l: int) -> int:
    """Number of stabilizer groups extending a fixed rank-``l`` signed subgroup."""
    if not 0 <= l <= n:
        raise ValidationError("need 0 <= l <= n")
    out = 2 ** (n - l)
    for i in range(1, n - l + 1):
        out *= 2**i + 1
    return out


def osgs_via_ga(h: Hamiltonian, cfg: GaConfig | None = None):
    """GA clique plus completion; returns (clique, generator set, energy)."""
    clique = ga_search(h, cfg)
    g = complete_generators(clique, h, cfg)
    return clique, g, group_energy(g, h).energy
