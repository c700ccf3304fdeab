"""Command-line interface: ``stabground {osgs,mite,analyze,enumerate}``."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .analysis import SpectralParams, report
from .errors import CapacityError, SearchFailure, StabgroundError
from .gaopt import GaConfig
from .hamiltonian import Hamiltonian, load_hamiltonian, tfim
from .mite import MiteConfig, eigensolve, run_ensemble
from .pipeline import FIDELITY_CONVENTION, initial_state, solve_osgs
from .stabsearch import ENUMERATION_CAP, count_stabilizer_states, enumerate_generator_sets
from .tableau import synthesize_circuit

EXIT_OK, EXIT_USER, EXIT_CAPACITY, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(StabgroundError):
    pass


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = float(epoch) if epoch else time.time()
    return datetime.fromtimestamp(t, tz=timezone.utc).isoformat()


def _parse_tfim(spec: str) -> tuple[int, float]:
    try:
        l_txt, lam_txt = spec.split(",")
        return int(l_txt), float(lam_txt)
    except ValueError:
        raise UsageError(f"--tfim expects L,lambda; got {spec!r}") from None


def _hamiltonian(args) -> tuple[Hamiltonian, dict]:
    if args.tfim and args.hamiltonian:
        raise UsageError("give either --tfim or --hamiltonian, not both")
    if args.tfim:
        L, lam = _parse_tfim(args.tfim)
        return tfim(L, lam), {"tfim": [L, lam]}
    if args.hamiltonian:
        return load_hamiltonian(args.hamiltonian), {"hamiltonian": str(args.hamiltonian)}
    raise UsageError("a Hamiltonian is required (--tfim L,lambda or --hamiltonian PATH)")


def _method(args) -> str:
    if args.exact and args.ga:
        raise UsageError("--exact and --ga are exclusive")
    return "exact" if args.exact else "ga" if args.ga else "auto"


def _ga_config(args) -> GaConfig:
    return GaConfig(population_size=args.pop, generations=args.gens, rng_seed=args.seed)


def _emit(obj, args, text_lines) -> None:
    if args.json:
        print(json.dumps(obj, indent=2, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def cmd_osgs(args) -> int:
    h, source = _hamiltonian(args)
    res = solve_osgs(h, _method(args), args.cap, _ga_config(args))
    if res.method == "exact" and len(res.alternatives) > 1:
        res.notes.append("several optimal sets; reporting the canonically first")
    out = {"source": source, "n_qubits": h.n_qubits, "hamiltonian_digest": h.digest(), **res.to_json()}
    if args.emit_circuit:
        circ = synthesize_circuit(res.chosen)
        Path(args.emit_circuit).write_text(circ.to_text(), encoding="utf-8")
        out["circuit"] = str(args.emit_circuit)
        out["circuit_gates"] = len(circ)
    lines = [
        f"method: {res.method}",
        f"E_min^S = {res.energy:.12g}",
        "generators: " + " ".join(res.chosen.texts()),
        f"degeneracy count: {res.degeneracy}",
    ]
    if len(res.alternatives) > 1:
        lines.append(f"optimal sets: {len(res.alternatives)}")
        lines += ["  " + " ".join(g.texts()) for g in res.alternatives]
    if res.fidelity is not None:
        lines.append(f"fidelity: {res.fidelity:.12g} ({FIDELITY_CONVENTION})")
    lines += [f"note: {n}" for n in res.notes]
    _emit(out, args, lines)
    return EXIT_OK


def _mite_config_dict(args, source) -> dict:
    return {
        "source": source,
        "method": _method(args),
        "cap": args.cap,
        "seed": args.seed,
        "pop": args.pop,
        "gens": args.gens,
        "trials": args.trials,
        "steps": args.steps,
        "init": args.init,
        "epsilon": args.epsilon,
        "gap_guess": args.gap_guess,
        "reset_policy": args.reset_policy,
        "record_stride": args.record_stride,
    }


def _apply_replay(args) -> None:
    manifest = json.loads(Path(args.replay).read_text(encoding="utf-8"))
    cfg = manifest["config"]
    src = cfg["source"]
    args.tfim = ",".join(map(str, src["tfim"])) if "tfim" in src else None
    args.hamiltonian = src.get("hamiltonian")
    args.exact = cfg["method"] == "exact"
    args.ga = cfg["method"] == "ga"
    for key in ("cap", "seed", "pop", "gens", "trials", "steps", "init", "epsilon", "gap_guess", "reset_policy", "record_stride"):
        setattr(args, key, cfg[key])


def cmd_mite(args) -> int:
    started = _timestamp()
    if args.replay:
        _apply_replay(args)
    h, source = _hamiltonian(args)
    osgs = solve_osgs(h, _method(args), args.cap, _ga_config(args), with_fidelity=False)
    eig = eigensolve(h)
    kw = {"max_steps": args.steps, "trials": args.trials, "rng_seed": args.seed,
          "reset_policy": args.reset_policy, "record_stride": args.record_stride, "gap_guess": args.gap_guess}
    if args.epsilon is not None:
        kw["epsilon"] = args.epsilon
    cfg = MiteConfig.for_hamiltonian(h, osgs.energy, **kw)
    init = initial_state(args.init, osgs.chosen, h.n_qubits)
    res = run_ensemble(h, init, cfg, eig=eig)

    out_dir = Path(args.out) if args.out else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "curve.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "mean_fidelity", "stderr", "reset_rate"])
            for s, m, e, r in zip(res.steps, res.mean_fidelity, res.stderr, res.reset_rate):
                w.writerow([int(s), repr(float(m)), repr(float(e)), repr(float(r))])
        if args.save_trajectories:
            with open(out_dir / "trajectories.jsonl", "w", encoding="utf-8") as fh:
                for t in range(res.trials):
                    fh.write(json.dumps({"trial": t, **res.trajectory(t).to_json()}) + "\n")

    conv = res.converged_at[res.converged_at >= 0]
    quantiles = {f"q{q}": (float(sorted(conv)[int(q / 100 * (len(conv) - 1))]) if len(conv) else None) for q in (10, 50, 90)}
    summary = {
        "final_mean_fidelity": float(res.mean_fidelity[-1]),
        "initial_mean_fidelity": float(res.mean_fidelity[0]),
        "min_fidelity": res.min_fidelity,
        "reset_rate": float(res.total_resets.sum() / max(1, res.trials * cfg.max_steps)),
        "converged_trials": int(len(conv)),
        "convergence_step_quantiles": quantiles,
    }
    manifest = {
        "tool": "stabground",
        "version": __version__,
        "config": _mite_config_dict(args, source),
        "hamiltonian_digest": h.digest(),
        "n_qubits": h.n_qubits,
        "osgs": {"method": osgs.method, "generators": osgs.chosen.texts(), "E_min_S": osgs.energy,
                 "notes": osgs.notes},
        "epsilon": cfg.epsilon,
        "threshold_energy": cfg.threshold_energy,
        "k_prime": cfg.k_prime,
        "k_prime_note": "heuristic: evaluated at E0 = E_th and E1 = E_th + gap_guess",
        "seed": args.seed,
        "fidelity_convention": FIDELITY_CONVENTION,
        "summary": summary,
        "timestamps": {"started": started, "finished": _timestamp()},
    }
    if out_dir:
        (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    lines = [
        f"E_th = E_min^S = {osgs.energy:.12g}; epsilon = {cfg.epsilon:.12g}; k' = {cfg.k_prime:.6g}",
        f"initial mean fidelity {summary['initial_mean_fidelity']:.6f}, final {summary['final_mean_fidelity']:.6f}",
        f"min fidelity {summary['min_fidelity']:.6f}, reset rate {summary['reset_rate']:.6f}",
        f"converged {summary['converged_trials']}/{res.trials}; quantiles {quantiles}",
    ]
    _emit(manifest, args, lines)
    return EXIT_OK


def cmd_analyze(args) -> int:
    raw = args.params
    text = Path(raw).read_text(encoding="utf-8") if Path(raw).is_file() else raw
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--params is neither a JSON file nor JSON text: {exc}") from None
    try:
        p = SpectralParams.from_dict(data)
    except (KeyError, TypeError) as exc:
        raise UsageError(f"bad params: {exc}") from None
    k = int(data.get("k", args.k))
    print(json.dumps(report(p, k), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_enumerate(args) -> int:
    n = args.n
    if n > args.cap:
        raise CapacityError("stabilizer enumeration", n, args.cap)
    sets = list(enumerate_generator_sets(n, args.cap)) if args.list else None
    out = {"n_qubits": n, "count": count_stabilizer_states(n)}
    if sets is not None:
        out["count"] = len(sets)
        out["sets"] = [g.texts() for g in sets]
    lines = [f"{out['count']} stabilizer states on {n} qubits"]
    if sets is not None:
        lines += [" ".join(g.texts()) for g in sets]
    _emit(out, args, lines)
    return EXIT_OK


def _add_source(p) -> None:
    p.add_argument("--tfim", metavar="L,LAMBDA", help="open transverse-field Ising chain")
    p.add_argument("--hamiltonian", metavar="PATH", help="text file of '<coeff> <pauli>' lines")
    p.add_argument("--exact", action="store_true", help="exhaustive search (n <= cap)")
    p.add_argument("--ga", action="store_true", help="genetic search")
    p.add_argument("--cap", type=int, default=ENUMERATION_CAP, help="enumeration cap (qubits)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pop", type=int, default=64, help="GA population size")
    p.add_argument("--gens", type=int, default=None, help="GA generations (default 200*N)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stabground", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("osgs", help="optimal stabilizer ground state")
    _add_source(p)
    p.add_argument("--emit-circuit", metavar="PATH")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_osgs)

    p = sub.add_parser("mite", help="weak-measurement ensemble")
    _add_source(p)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--init", choices=("osgs", "zeros", "random"), default="osgs")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--gap-guess", type=float, default=0.0)
    p.add_argument("--reset-policy", choices=("balance", "per_gap", "none"), default="balance")
    p.add_argument("--record-stride", type=int, default=1)
    p.add_argument("--out", metavar="DIR")
    p.add_argument("--save-trajectories", action="store_true")
    p.add_argument("--replay", metavar="MANIFEST", help="re-run the configuration of a manifest.json")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_mite)

    p = sub.add_parser("analyze", help="closed-form estimates")
    p.add_argument("--params", required=True, help="JSON file or inline JSON")
    p.add_argument("--k", type=int, default=0, help="iterations for the error estimate")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("enumerate", help="count or list stabilizer states")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--cap", type=int, default=ENUMERATION_CAP)
    p.add_argument("--list", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_enumerate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    want_json = getattr(args, "json", False)

    def fail(code: int, exc: BaseException) -> int:
        if want_json:
            print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}))
        else:
            print(f"error: {exc}", file=sys.stderr)
        return code

    try:
        return args.func(args)
    except CapacityError as exc:
        return fail(EXIT_CAPACITY, exc)
    except SearchFailure as exc:
        return fail(EXIT_INTERNAL, exc)
    except (StabgroundError, ValueError, OSError) as exc:
        return fail(EXIT_USER, exc)
    except AssertionError as exc:
        return fail(EXIT_INTERNAL, exc)


if __name__ == "__main__":
    sys.exit(main())
