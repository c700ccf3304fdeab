"""End-to-end acceptance checks; each test records one PASS/FAIL line."""

import json
import math
import os
import subprocess
import sys
import time

import numpy as np

from stabground.cli import main
from stabground.gaopt import GaConfig, complete_generators, ga_search
from stabground.hamiltonian import Hamiltonian, tfim
from stabground.mite import MiteConfig, eigensolve, kraus_matrices, run_ensemble
from stabground.pipeline import initial_state, solve_osgs
from stabground.stabsearch import (
    GeneratorSet,
    enumerate_generator_sets,
    find_min_groups,
    group_energy,
    group_energy_oracle,
)

from oracle import ground_fidelity, random_hamiltonian, stabilizer_vector

TOY = Hamiltonian.from_terms(1, [(-1.0, "Z")])


def _osgs_json(capsys, *argv):
    assert main(["osgs", *argv, "--json"]) == 0
    return json.loads(capsys.readouterr().out)


def test_01_enumeration_counts(record_acceptance):
    t0 = time.perf_counter()
    counts = [len(set(enumerate_generator_sets(n))) for n in range(1, 5)]
    dt = time.perf_counter() - t0
    expected = [2**n * math.prod(2**k + 1 for k in range(1, n + 1)) for n in range(1, 5)]
    ok = counts == expected == [6, 60, 1080, 36720] and dt < 10
    record_acceptance(1, "enumeration counts", ok, f"{counts} in {dt:.1f}s")
    assert ok


def test_02_group_energy_identity(record_acceptance):
    t0 = time.perf_counter()
    sets = list(enumerate_generator_sets(3))
    worst = 0.0
    for seed in range(20):
        h = random_hamiltonian(np.random.default_rng(200 + seed), 3, 8)
        for g in sets:
            worst = max(worst, abs(group_energy(g, h).energy - group_energy_oracle(g, h)))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-10 and dt < 60
    record_acceptance(2, "group energy identity", ok, f"max diff {worst:.2e} over 20x{len(sets)} in {dt:.1f}s")
    assert ok


def test_03_ga_exactness(record_acceptance):
    t0 = time.perf_counter()
    hits, retried = 0, 0
    for i in range(50):
        h = random_hamiltonian(np.random.default_rng(3000 + i), 3, 8)
        exact, _ = find_min_groups(h)
        for attempt, seed in enumerate((0, 10_000 + i)):
            clique = ga_search(h, GaConfig(rng_seed=seed))
            energy = group_energy(complete_generators(clique, h), h).energy
            if abs(energy - exact) <= 1e-9:
                hits += 1
                retried += attempt
                break
    dt = time.perf_counter() - t0
    ok = hits >= 49 and dt < 120
    record_acceptance(3, "GA exactness", ok, f"{hits}/50 exact ({retried} after retry) in {dt:.1f}s")
    assert ok


def test_04_tfim_osgs(capsys, record_acceptance):
    # sum ZZ is minimized by antialigned neighbours, so each ZZ generator carries a minus sign
    zz_set = GeneratorSet.from_text(["-ZZIII", "-IZZII", "-IIZZI", "-IIIZZ", "-XXXXX"])
    x_set = GeneratorSet.from_text(["-XIIII", "-IXIII", "-IIXII", "-IIIXI", "-IIIIX"])
    a = _osgs_json(capsys, "--tfim", "5,0.6")
    b = _osgs_json(capsys, "--tfim", "5,0.9")
    ok_a = abs(a["E_min_S"] + 4) < 1e-12 and GeneratorSet.from_text(a["generators"]) == zz_set
    ok_b = abs(b["E_min_S"] + 4.5) < 1e-12 and GeneratorSet.from_text(b["generators"]) == x_set
    branch = {}
    for lam in (0.5, 0.7, 0.79, 0.81, 0.9, 1.2):
        d = _osgs_json(capsys, "--tfim", f"5,{lam}")
        g = GeneratorSet.from_text(d["generators"])
        name = "ZZ" if g == zz_set else "X" if g == x_set else "other"
        if abs(d["E_min_S"] - min(-4.0, -5 * lam)) > 1e-12:
            name = "wrong energy"
        branch[lam] = name
    ok_c = list(branch.values()) == ["ZZ", "ZZ", "ZZ", "X", "X", "X"]
    ok = ok_a and ok_b and ok_c
    record_acceptance(4, "TFIM OSGS", ok, f"5,0.6 -> {a['E_min_S']:g} {a['generators']}; "
                      f"5,0.9 -> {b['E_min_S']:g}; branches {branch}")
    assert ok


def test_05_fidelity_floor(tmp_path, capsys, record_acceptance):
    t0 = time.perf_counter()
    out = tmp_path / "run"
    assert main(["mite", "--tfim", "5,0.6", "--init", "osgs", "--trials", "1000", "--seed", "7",
                 "--out", str(out)]) == 0
    capsys.readouterr()
    manifest = json.loads((out / "manifest.json").read_text())
    s = manifest["summary"]
    # independent check of the starting overlap against a Kronecker-product eigensolve
    psi = stabilizer_vector(manifest["osgs"]["generators"])
    oracle_f = ground_fidelity(tfim(5, 0.6), psi)
    dt = time.perf_counter() - t0
    ok = (abs(s["initial_mean_fidelity"] - 0.707) <= 0.01 and abs(oracle_f - s["initial_mean_fidelity"]) < 1e-9
          and s["min_fidelity"] >= 0.70 and "squared overlap" in manifest["fidelity_convention"] and dt < 300)
    record_acceptance(5, "fidelity floor", ok, f"initial {s['initial_mean_fidelity']:.5f} (oracle {oracle_f:.5f}), "
                      f"min {s['min_fidelity']:.5f}, {manifest['fidelity_convention']}, {dt:.1f}s")
    assert ok


def _dominance(L, lam, seed):
    h = tfim(L, lam)
    osgs = solve_osgs(h, with_fidelity=False)
    eig = eigensolve(h)
    cfg = MiteConfig.for_hamiltonian(h, osgs.energy, max_steps=1000, trials=1000, rng_seed=seed)
    a = run_ensemble(h, initial_state("osgs", osgs.chosen, L), cfg, eig=eig)
    b = run_ensemble(h, "random", cfg, eig=eig)
    dominates = bool(np.all(a.mean_fidelity >= b.mean_fidelity))
    reach = np.flatnonzero(a.mean_fidelity >= 0.99)
    return dominates, (int(a.steps[reach[0]]) if len(reach) else None), a, b


def test_06_convergence_dominance(record_acceptance):
    t0 = time.perf_counter()
    parts, ok = [], True
    for L, seed in ((5, 61), (7, 62)):
        dom, reach, a, b = _dominance(L, 0.6, seed)
        ok &= dom and reach is not None
        parts.append(f"L={L}: dominates={dom}, mean>=0.99 at step {reach}, "
                     f"final {a.mean_fidelity[-1]:.4f} vs {b.mean_fidelity[-1]:.4f}")
    dt = time.perf_counter() - t0
    ok &= dt < 900
    record_acceptance(6, "convergence dominance", ok, "; ".join(parts) + f"; {dt:.1f}s")
    assert ok


def test_07_lambda_zero(capsys, record_acceptance):
    d = _osgs_json(capsys, "--tfim", "5,0")
    h = tfim(5, 0.0)
    oracle_f = ground_fidelity(h, stabilizer_vector(d["generators"]))
    osgs = solve_osgs(h, with_fidelity=False)
    cfg = MiteConfig.for_hamiltonian(h, osgs.energy, max_steps=0, trials=1)
    step0 = run_ensemble(h, initial_state("osgs", osgs.chosen, 5), cfg).mean_fidelity[0]
    ok = abs(d["fidelity"] - 1) <= 1e-9 and abs(oracle_f - 1) <= 1e-9 and abs(step0 - 1) <= 1e-9
    record_acceptance(7, "lambda = 0 exactness", ok,
                      f"fidelity {d['fidelity']:.12f}, oracle {oracle_f:.12f}, step 0 {step0:.12f}")
    assert ok


def test_08_kraus_and_fixed_point(record_acceptance):
    worst = 0.0
    rng = np.random.default_rng(8)
    hams = [TOY, tfim(3, 0.4), tfim(5, 0.6)] + [random_hamiltonian(rng, 3, 8) for _ in range(5)]
    for h in hams:
        eig = eigensolve(h)
        bound = math.pi / 4 / max(abs(eig.eigenvalues[0]), abs(eig.eigenvalues[-1]))
        for eps in (0.1 * bound, 0.5 * bound, bound):
            m0, m1 = kraus_matrices(eig, eps)
            worst = max(worst, np.abs(m0.conj().T @ m0 + m1.conj().T @ m1 - np.eye(len(m0))).max())
    lines, ok = [f"completeness error {worst:.1e}"], worst <= 1e-12
    frustration_free = Hamiltonian.from_terms(3, [(-1.0, "ZII"), (-1.0, "IZI"), (-1.0, "IIZ")])
    for name, h in (("-sum Z", frustration_free), ("TFIM(5,0.6)", tfim(5, 0.6))):
        eig = eigensolve(h)
        osgs = solve_osgs(h, with_fidelity=False)
        cfg = MiteConfig.for_hamiltonian(h, osgs.energy, max_steps=10_000, trials=20, rng_seed=88)
        res = run_ensemble(h, eig.eigenvectors[:, 0], cfg, eig=eig)
        dev = float(np.abs(res.fidelity - 1).max())
        resets = int(res.total_resets.sum())
        ok &= dev <= 1e-9 and resets == 0
        p1 = math.sin(cfg.epsilon * eig.ground_energy + math.pi / 4) ** 2
        lines.append(f"{name}: max |F-1| {dev:.1e}, resets {resets} (ground-state P(one) = {p1:.3g})")
    record_acceptance(8, "Kraus completeness and ground-state fixed point", ok, "; ".join(lines))
    assert ok


def _pinned_slope(eps, e_th, steps=200, trials=2000, seed=9):
    cfg = MiteConfig(epsilon=eps, max_steps=steps, trials=trials, threshold_energy=e_th,
                     rng_seed=seed, reset_policy="none")
    plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
    # outcomes drawn at the rate a state at the threshold energy would produce them
    p1 = math.sin(eps * e_th + math.pi / 4) ** 2
    res = run_ensemble(TOY, plus, cfg, pinned_p1=p1)
    f = res.fidelity
    log_ratio = np.log1p(-f) - np.log(f)  # ln(w1/w0)
    k = res.steps.astype(float)
    slope = np.polyfit(k, log_ratio.mean(axis=0), 1)[0]
    per_trial = (log_ratio[:, -1] - log_ratio[:, 0]) / k[-1]
    return slope, per_trial.std(ddof=1) / math.sqrt(trials)


def test_09_error_formula_trend(record_acceptance):
    t0 = time.perf_counter()
    eps, e0, e1 = 0.1, -1.0, 1.0
    parts, ok = [], True
    for e_th in (-0.5, -0.2, 0.3, 0.6):
        predicted = 2 * eps**2 * (e0 - e1) * (e0 + e1 - 2 * e_th)
        slope, err = _pinned_slope(eps, e_th)
        ratio = slope / predicted
        ok &= 0.5 <= ratio <= 2.0
        parts.append(f"E_th={e_th}: fit {slope:.5f} vs {predicted:.5f}")
    mid, err = _pinned_slope(eps, 0.0)
    ok &= abs(mid) <= 3 * err + 1e-12
    dt = time.perf_counter() - t0
    ok &= dt < 120
    record_acceptance(9, "error-formula trend", ok, "; ".join(parts) + f"; midpoint {mid:.2e} +- {err:.1e}")
    assert ok


def _cli(tmp_path, tag, threads, *argv):
    env = dict(os.environ, STABGROUND_THREADS=str(threads), SOURCE_DATE_EPOCH="0")
    proc = subprocess.run([sys.executable, "-m", "stabground", *argv], capture_output=True, env=env,
                          cwd=tmp_path, check=True)
    return proc.stdout


def test_10_determinism(tmp_path, record_acceptance):
    files = ("curve.csv", "manifest.json", "trajectories.jsonl")
    runs = {}
    for tag, threads in (("a", 1), ("b", 4), ("c", 3)):
        stdout = _cli(tmp_path, tag, threads, "mite", "--tfim", "5,0.6", "--trials", "300", "--steps", "300",
                      "--seed", "7", "--init", "random", "--out", tag, "--save-trajectories", "--json")
        osgs = _cli(tmp_path, tag, threads, "osgs", "--tfim", "5,0.6", "--json")
        runs[tag] = [stdout, osgs] + [(tmp_path / tag / f).read_bytes() for f in files]
    same = all(runs["a"][i] == runs[t][i] for t in ("b", "c") for i in range(len(runs["a"])))
    record_acceptance(10, "determinism", same, "mite (curve, manifest, trajectories, stdout) and osgs "
                      "byte-identical across 1, 3 and 4 threads")
    assert same
