"""Dense simulation of measurement-based imaginary time evolution.

Both Kraus operators are functions of H, so they act diagonally in its
eigenbasis: an eigen-amplitude ``c_n`` picks up ``cos(eps E_n + pi/4)`` on
outcome 0 and ``sin(eps E_n + pi/4)`` on outcome 1. Trajectories therefore
only need the populations ``|c_n|**2``, which is what the ensemble engine
propagates (vectorized over trials). :func:`weak_measure` works on full
state vectors and is the reference single-step operation.

Randomness: trial ``t`` of seed ``s`` draws its outcomes from
``default_rng([s, t, 0])`` and, for random initial states, its state from
``default_rng([s, t, 1])``, so results do not depend on how trials are
split across threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import dense
from .analysis import SpectralParams, k_prime
from .errors import CapacityError, DimensionError, ValidationError
from .hamiltonian import Hamiltonian

QUARTER_PI = math.pi / 4
CONVERGED = 0.999
RESET_POLICIES = ("balance", "per_gap", "none")
THREADS_ENV = "STABGROUND_THREADS"
_BLOCK = 4096


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    ground_space_dim: int

    @property
    def n_qubits(self) -> int:
        return dense.n_qubits_of(self.eigenvalues)

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    def populations(self, state: np.ndarray) -> np.ndarray:
        amps = self.eigenvectors.conj().T @ state
        return np.abs(amps) ** 2

    def fidelity(self, state: np.ndarray) -> float:
        """Squared norm of the projection onto the ground space."""
        return float(self.populations(state)[: self.ground_space_dim].sum())


def eigensolve(h: Hamiltonian, cap: int = dense.DENSE_CAP) -> EigenDecomposition:
    if h.n_qubits > cap:
        raise CapacityError("dense eigensolve", h.n_qubits, cap)
    vals, vecs = np.linalg.eigh(dense.hamiltonian_matrix(h, cap))
    tol = 1e-9 * max(1.0, abs(vals[0]))
    gdim = int(np.count_nonzero(vals <= vals[0] + tol))
    return EigenDecomposition(vals, vecs, gdim)


def kraus_diagonals(eig: EigenDecomposition, epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues of (M0, M1); completeness is checked to 1e-12."""
    a = epsilon * eig.eigenvalues + QUARTER_PI
    m0 = (np.cos(epsilon * eig.eigenvalues) - np.sin(epsilon * eig.eigenvalues)) / math.sqrt(2)
    m1 = (np.cos(epsilon * eig.eigenvalues) + np.sin(epsilon * eig.eigenvalues)) / math.sqrt(2)
    if np.max(np.abs(m0 - np.cos(a))) > 1e-12 or np.max(np.abs(m0**2 + m1**2 - 1.0)) > 1e-12:
        raise ValidationError("Kraus pair is not complete")
    return m0, m1


def kraus_matrices(eig: EigenDecomposition, epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    m0, m1 = kraus_diagonals(eig, epsilon)
    v = eig.eigenvectors
    return (v * m0) @ v.conj().T, (v * m1) @ v.conj().T


def _check_epsilon(eig: EigenDecomposition, epsilon: float) -> None:
    if epsilon * np.max(np.abs(eig.eigenvalues)) > QUARTER_PI * (1 + 1e-12):
        raise ValidationError("epsilon * max|E| exceeds pi/4")


def weak_measure(state: np.ndarray, eig: EigenDecomposition, epsilon: float, rng):
    """One weak measurement: returns (outcome, new state, p0)."""
    if state.shape != eig.eigenvalues.shape:
        raise DimensionError("state does not match the eigendecomposition")
    _check_epsilon(eig, epsilon)
    m0, m1 = kraus_diagonals(eig, epsilon)
    c = eig.eigenvectors.conj().T @ state
    p0 = float(np.sum(np.abs(c) ** 2 * m0**2))
    outcome = 0 if rng.random() < p0 else 1
    m = m0 if outcome == 0 else m1
    c = m * c
    c /= np.linalg.norm(c)
    return outcome, eig.eigenvectors @ c, p0


def default_epsilon(h: Hamiltonian) -> float:
    return QUARTER_PI / (h.one_norm + abs(h.identity_coeff))


@dataclass(frozen=True)
class MiteConfig:
    epsilon: float
    max_steps: int
    trials: int
    threshold_energy: float
    rng_seed: int = 0
    reset_policy: str = "balance"
    record_stride: int = 1
    gap_guess: float = 0.0
    energy_bound: float | None = None

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValidationError("epsilon must be positive")
        if self.energy_bound is not None and self.epsilon * self.energy_bound > QUARTER_PI * (1 + 1e-12):
            raise ValidationError("epsilon * max|E| exceeds pi/4")
        if self.max_steps < 0 or self.trials < 1 or self.record_stride < 1:
            raise ValidationError("need max_steps >= 0, trials >= 1, record_stride >= 1")
        if self.reset_policy not in RESET_POLICIES:
            raise ValidationError(f"reset_policy must be one of {RESET_POLICIES}")
        if self.gap_guess < 0:
            raise ValidationError("gap_guess must be non-negative")

    @classmethod
    def for_hamiltonian(cls, h: Hamiltonian, threshold_energy: float, **kw) -> MiteConfig:
        """Config with the safe default epsilon and matching energy bound."""
        bound = h.one_norm + abs(h.identity_coeff)
        kw.setdefault("epsilon", default_epsilon(h))
        kw.setdefault("max_steps", 1000)
        kw.setdefault("trials", 1)
        return cls(threshold_energy=threshold_energy, energy_bound=bound, **kw)

    @property
    def k_prime(self) -> float:
        """Zeros required per outcome-1, from E0 <- E_th, E1 <- E_th + gap_guess."""
        e0 = self.threshold_energy
        if self.epsilon * e0 + QUARTER_PI <= 1e-15:
            # a state at the threshold can never yield a one: any one resets
            return math.inf
        p = SpectralParams(e0, e0 + self.gap_guess, e0, self.epsilon, 1.0, 0.0)
        return k_prime(p)

    def recorded_steps(self) -> np.ndarray:
        steps = np.arange(0, self.max_steps + 1, self.record_stride)
        if steps[-1] != self.max_steps:
            steps = np.append(steps, self.max_steps)
        return steps


@dataclass(frozen=True)
class Trajectory:
    steps: np.ndarray
    outcomes: np.ndarray
    fidelity: np.ndarray
    energy_expectation: np.ndarray
    reset: np.ndarray
    converged_at: int | None

    def to_json(self) -> dict:
        return {
            "steps": self.steps.tolist(),
            "outcomes": self.outcomes.tolist(),
            "fidelity": self.fidelity.tolist(),
            "energy_expectation": self.energy_expectation.tolist(),
            "reset": self.reset.astype(int).tolist(),
            "converged_at": self.converged_at,
        }


@dataclass(frozen=True)
class EnsembleResult:
    steps: np.ndarray
    mean_fidelity: np.ndarray
    stderr: np.ndarray
    reset_rate: np.ndarray
    fidelity: np.ndarray  # trials x recorded steps
    converged_at: np.ndarray  # -1 when never converged
    total_resets: np.ndarray
    outcomes: np.ndarray = field(repr=False)
    energy_expectation: np.ndarray = field(repr=False)
    resets: np.ndarray = field(repr=False)

    @property
    def trials(self) -> int:
        return self.fidelity.shape[0]

    @property
    def min_fidelity(self) -> float:
        return float(self.fidelity.min())

    def trajectory(self, t: int) -> Trajectory:
        conv = int(self.converged_at[t])
        return Trajectory(
            self.steps,
            self.outcomes[t],
            self.fidelity[t],
            self.energy_expectation[t],
            self.resets[t],
            None if conv < 0 else conv,
        )


def random_product_state(n: int, rng) -> np.ndarray:
    """Product of Bloch-uniform single-qubit states, qubit 0 most significant."""
    theta = np.arccos(1.0 - 2.0 * rng.random(n))
    phi = 2.0 * np.pi * rng.random(n)
    psi = np.ones(1, dtype=complex)
    for q in range(n):
        psi = np.kron(psi, [np.cos(theta[q] / 2), np.exp(1j * phi[q]) * np.sin(theta[q] / 2)])
    return psi


def _initial_populations(eig: EigenDecomposition, initial, trials: np.ndarray, seed: int) -> np.ndarray:
    if isinstance(initial, str):
        if initial != "random":
            raise ValidationError(f"unknown initial state {initial!r}")
        n = eig.n_qubits
        vc = eig.eigenvectors.conj()
        # one vector product per trial keeps results independent of chunking
        pops = np.array(
            [np.abs(random_product_state(n, np.random.default_rng([seed, int(t), 1])) @ vc) ** 2 for t in trials]
        )
    else:
        state = np.asarray(initial, dtype=complex)
        if state.shape != eig.eigenvalues.shape:
            raise DimensionError("initial state does not match the Hamiltonian")
        if abs(np.linalg.norm(state) - 1.0) > 1e-9:
            raise ValidationError("initial state is not normalized")
        pops = np.tile(eig.populations(state), (len(trials), 1))
    return pops / pops.sum(axis=1, keepdims=True)


def _run_chunk(eig, m0sq, m1sq, initial, trials, cfg: MiteConfig, kp: float, pinned_p1: float | None):
    """Propagate populations of the given trial indices; returns recorded arrays."""
    T = len(trials)
    steps = cfg.recorded_steps()
    rec_index = {int(s): i for i, s in enumerate(steps)}
    R = len(steps)
    E = eig.eigenvalues
    g = eig.ground_space_dim

    p_init = _initial_populations(eig, initial, trials, cfg.rng_seed)
    p = p_init.copy()
    rngs = [np.random.default_rng([cfg.rng_seed, int(t), 0]) for t in trials]

    fid = np.empty((T, R))
    energy = np.empty((T, R))
    outcomes = np.zeros((T, R), dtype=np.int8)
    resets = np.zeros((T, R), dtype=bool)
    fid[:, 0] = p[:, :g].sum(axis=1)
    energy[:, 0] = (p * E).sum(axis=1)
    converged = np.where(fid[:, 0] >= CONVERGED, 0, -1)
    total_resets = np.zeros(T, dtype=np.int64)

    need = math.ceil(kp - 1e-12) if math.isfinite(kp) else np.iinfo(np.int64).max
    balance = np.zeros(T)
    zeros_since_one = np.full(T, need, dtype=np.int64)

    u = None
    for k in range(1, cfg.max_steps + 1):
        j = (k - 1) % _BLOCK
        if j == 0:
            width = min(_BLOCK, cfg.max_steps - k + 1)
            u = np.stack([r.random(width) for r in rngs])
        p0 = np.clip((p * m0sq).sum(axis=1), 0.0, 1.0)
        thresh = p0 if pinned_p1 is None else np.full(T, 1.0 - pinned_p1)
        one = u[:, j] >= thresh
        p = np.where(one[:, None], p * m1sq, p * m0sq)
        p /= p.sum(axis=1, keepdims=True)

        if cfg.reset_policy == "balance":
            balance = np.where(one, balance - kp, balance + 1.0)
            rst = balance < -1e-12
            balance[rst] = 0.0
        elif cfg.reset_policy == "per_gap":
            rst = one & (zeros_since_one < need)
            zeros_since_one = np.where(one, 0, zeros_since_one + 1)
            zeros_since_one[rst] = need
        else:
            rst = np.zeros(T, dtype=bool)
        if rst.any():
            p[rst] = p_init[rst]
            total_resets += rst

        f = p[:, :g].sum(axis=1)
        newly = (converged < 0) & (f >= CONVERGED)
        converged[newly] = k
        i = rec_index.get(k)
        if i is not None:
            fid[:, i] = f
            energy[:, i] = (p * E).sum(axis=1)
            outcomes[:, i] = one
            resets[:, i] = rst
    return fid, energy, outcomes, resets, converged, total_resets


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValidationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def run_ensemble(
    h: Hamiltonian,
    initial,
    cfg: MiteConfig,
    eig: EigenDecomposition | None = None,
    threads: int | None = None,
    pinned_p1: float | None = None,
) -> EnsembleResult:
    """Run ``cfg.trials`` trajectories; ``initial`` is a vector or ``"random"``.

    ``pinned_p1`` replaces Born-rule sampling by i.i.d. outcomes with the
    given probability of a one (used to probe the error-rate formula).
    """
    eig = eig or eigensolve(h)
    _check_epsilon(eig, cfg.epsilon)
    m0, m1 = kraus_diagonals(eig, cfg.epsilon)
    kp = cfg.k_prime if cfg.reset_policy != "none" else math.inf
    threads = threads or _thread_count()
    all_trials = np.arange(cfg.trials)
    chunks = [c for c in np.array_split(all_trials, min(threads, cfg.trials)) if len(c)]
    args = (eig, m0**2, m1**2, initial)
    if len(chunks) == 1:
        parts = [_run_chunk(*args, chunks[0], cfg, kp, pinned_p1)]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(lambda c: _run_chunk(*args, c, cfg, kp, pinned_p1), chunks))
    fid, energy, outcomes, resets, conv, total = (np.concatenate(x) for x in zip(*parts))
    T = cfg.trials
    mean = fid.mean(axis=0)
    stderr = fid.std(axis=0, ddof=1) / math.sqrt(T) if T > 1 else np.zeros_like(mean)
    return EnsembleResult(
        steps=cfg.recorded_steps(),
        mean_fidelity=mean,
        stderr=stderr,
        reset_rate=resets.mean(axis=0),
        fidelity=fid,
        converged_at=conv,
        total_resets=total,
        outcomes=outcomes,
        energy_expectation=energy,
        resets=resets,
    )


def run_trajectory(
    h: Hamiltonian, initial, cfg: MiteConfig, eig: EigenDecomposition | None = None, trial: int = 0
) -> Trajectory:
    """Single trajectory; identical to trial ``trial`` of :func:`run_ensemble`."""
    eig = eig or eigensolve(h)
    _check_epsilon(eig, cfg.epsilon)
    m0, m1 = kraus_diagonals(eig, cfg.epsilon)
    kp = cfg.k_prime if cfg.reset_policy != "none" else math.inf
    fid, energy, outcomes, resets, conv, _ = _run_chunk(
        eig, m0**2, m1**2, initial, np.array([trial]), cfg, kp, None
    )
    c = int(conv[0])
    return Trajectory(cfg.recorded_steps(), outcomes[0], fid[0], energy[0], resets[0], None if c < 0 else c)


def with_trials(cfg: MiteConfig, trials: int) -> MiteConfig:
    return replace(cfg, trials=trials)
