"""OSGS stage shared by the command-line tools: search, pick, diagnose."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import dense
from .gaopt import GaConfig, completion_steps, degeneracy_count, ga_search
from .gf2 import rank
from .hamiltonian import Hamiltonian
from .stabsearch import ENUMERATION_CAP, GeneratorSet, find_min_groups, group_energy, refine_optimal

FIDELITY_CONVENTION = "squared overlap: |<E0|psi>|^2, summed over a degenerate ground space"


@dataclass
class OsgsResult:
    method: str
    energy: float
    chosen: GeneratorSet
    alternatives: list[GeneratorSet]
    degeneracy: int
    notes: list[str] = field(default_factory=list)
    clique: list[str] | None = None
    completion: list[dict] | None = None
    fidelity: float | None = None

    def to_json(self) -> dict:
        out = {
            "method": self.method,
            "E_min_S": self.energy,
            "generators": self.chosen.texts(),
            "optimal_sets": [g.texts() for g in self.alternatives],
            "degeneracy_count": self.degeneracy,
            "fidelity": self.fidelity,
            "fidelity_convention": FIDELITY_CONVENTION,
            "notes": list(self.notes),
        }
        if self.clique is not None:
            out["clique"] = self.clique
            out["completion"] = self.completion
        return out


def solve_osgs(
    h: Hamiltonian,
    method: str = "auto",
    cap: int = ENUMERATION_CAP,
    ga: GaConfig | None = None,
    with_fidelity: bool = True,
) -> OsgsResult:
    """Run the exact search (n <= cap) or the GA and pick one generator set."""
    if method == "auto":
        method = "exact" if h.n_qubits <= cap else "ga"
    if method == "exact":
        notes: list[str] = []
        sets = refine_optimal(h, cap, notes)
        sets = sorted(sets, key=lambda g: g.canonical_key)
        _, mins = find_min_groups(h, cap)
        res = OsgsResult("exact", group_energy(sets[0], h).energy, sets[0], sets, len(mins), notes)
    elif method == "ga":
        cfg = ga or GaConfig()
        clique = ga_search(h, cfg)
        steps = completion_steps(clique, h)
        g = GeneratorSet(h.n_qubits, tuple(s.generator for s in steps))
        l_rank = rank(clique.paulis[i].vector for i in clique.selected_terms)
        notes = [f"generator {s.generator} appended via {s.source}" for s in steps if s.source != "clique"]
        if any(s.source == "complement" for s in steps):
            notes.append("no appended generator commuting with H was found; used the symplectic complement")
        res = OsgsResult(
            "ga",
            group_energy(g, h).energy,
            g,
            [g],
            degeneracy_count(h.n_qubits, l_rank),
            notes,
            clique=[str(p) for p in clique.signed_terms()],
            completion=[{"generator": str(s.generator), "source": s.source} for s in steps],
        )
    else:
        raise ValueError(f"unknown method {method!r}")
    if with_fidelity and h.n_qubits <= dense.DENSE_CAP:
        from .mite import eigensolve
        from .tableau import prepare_state

        eig = eigensolve(h)
        res.fidelity = eig.fidelity(prepare_state(res.chosen))
    return res


def initial_state(kind: str, chosen: GeneratorSet | None, n: int):
    """Initial vector for the MITE stage; ``"random"`` is resolved per trial."""
    if kind == "osgs":
        from .tableau import prepare_state

        return prepare_state(chosen)
    if kind == "zeros":
        psi = np.zeros(1 << n, dtype=complex)
        psi[0] = 1.0
        return psi
    if kind == "random":
        return "random"
    raise ValueError(f"unknown initial state kind {kind!r}")
