"""Command-line entry point.

Subcommands: optimize, met-scan, certify, dyson. Each takes an experiment
config (TOML) plus flag overrides; flags win. Exit codes: 0 success,
2 configuration/file error, 3 numerical failure, 4 capacity error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io
from .analysis import (bang_bang_certificate, dyson_amplitudes, dyson_channel_traces,
                       met_scan, saturation_fraction)
from .errors import CapacityError, ConfigError, CtrlVqeError, NumericalAbort
from .model import basis_label
from .objective import ObjectiveConfig
from .optimizer import OptimizerConfig
from .problem import PulseProblem, PulseSettings
from .propagator import evolve
from .pulsegrid import pack


def build_experiment(cfg: dict, args) -> tuple:
    """Resolve config + CLI overrides into (PulseProblem, extras dict)."""
    base = Path(getattr(args, "config_dir", "."))

    def resolve(p):
        p = Path(p)
        return p if p.is_absolute() else base / p

    for key in ("device", "hamiltonian"):
        if key not in cfg:
            raise ConfigError(f"config missing required key {key!r}")
    spec = io.read_device(resolve(cfg["device"]))
    levels = getattr(args, "levels", None) or cfg.get("levels")
    if levels:
        spec = spec.with_levels(int(levels))
    pauli = io.read_pauli_hamiltonian(resolve(cfg["hamiltonian"]))

    p = cfg.get("pulse", {})
    duration = getattr(args, "duration", None) or p.get("duration_ns")
    if duration is None:
        raise ConfigError("pulse duration missing (config [pulse].duration_ns or --duration)")
    pulse = PulseSettings(
        duration_ns=float(duration),
        n_segments=int(p.get("n_segments", 100)),
        amp_bound=float(p.get("amp_bound_ghz", 0.020)),
        detuning_bound=float(p.get("detuning_bound_ghz", 1.0)),
        n_trotter=int(p.get("n_trotter", 1000)),
    )
    o = cfg.get("objective", {})
    objective = ObjectiveConfig(
        penalty_rate=float(o.get("penalty_rate", 0.0)),
        leakage_threshold=float(o.get("leakage_threshold", 1.0)),
        normalize=bool(o.get("normalize", True)),
    )
    frame = o.get("frame", cfg.get("frame", "dressed"))
    initial = cfg.get("initial_state", "01")
    problem = PulseProblem(spec, pauli, pulse, objective, frame, initial)

    s = cfg.get("optimizer", {})
    opt = OptimizerConfig(
        memory_pairs=int(s.get("memory_pairs", 10)),
        max_iters=int(s.get("max_iters", 5000)),
        grad_tol=float(s.get("grad_tol", 1e-9)),
        cost_tol=float(s.get("cost_tol", 1e-10)),
        energy_success_threshold=float(s.get("energy_success_threshold", 1e-8)),
    )
    extras = {
        "optimizer": opt,
        "analysis": cfg.get("analysis", {}),
        "seed": int(getattr(args, "seed", None) or cfg.get("seed", 0)),
        "threads": getattr(args, "threads", None) or cfg.get("threads"),
    }
    return problem, extras


def _outdir(args, cfg) -> Path:
    out = getattr(args, "out", None) or cfg.get("out", "runs/out")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_optimize(args) -> int:
    cfg = io.read_experiment_config(args.config)
    args.config_dir = Path(args.config).parent
    problem, extras = build_experiment(cfg, args)
    out = _outdir(args, cfg)
    seed = extras["seed"]
    result = problem.run_single(seed, extras["optimizer"], keep_history=True)

    io.write_schedule(out / "final_schedule.pulse", result.schedule)
    io.write_json(out / "result.json", {
        **result.summary(),
        "reference_ground_energy_hartree": problem.e_ground,
        "duration_ns": problem.pulse.duration_ns,
        "levels": problem.spec.levels,
        "saturation": saturation_fraction(result.schedule),
    })
    io.write_jsonl(out / "iterations.jsonl", [
        {"iteration": i, "cost": c, **rep.to_dict()}
        for i, c, rep in result.history
    ])
    psi_T, trace = evolve(problem.spec, result.schedule, problem.psi0,
                          problem.pulse.n_trotter,
                          record=[basis_label(b, problem.spec)
                                  for b in range(problem.spec.dim)],
                          ws=problem.ws)
    header, data = trace.as_columns()
    io.write_csv(out / "populations.csv", header, data)
    print(f"optimize: seed {seed} success={result.success} "
          f"energy_error={result.energy_error:.3e} Ha "
          f"leakage={result.report.leakage_fraction:.4f} -> {out}")
    return 0


def cmd_evolve(args) -> int:
    cfg = io.read_experiment_config(args.config)
    args.config_dir = Path(args.config).parent
    schedule = io.read_schedule(args.schedule)
    args.duration = schedule.duration_ns
    problem, extras = build_experiment(cfg, args)
    if schedule.n_qubits != problem.spec.n_transmons:
        raise ConfigError(
            f"schedule drives {schedule.n_qubits} qubits but the device has "
            f"{problem.spec.n_transmons} transmons")
    out = _outdir(args, cfg)
    labels = [basis_label(b, problem.spec) for b in range(problem.spec.dim)]
    psi_T, trace = evolve(problem.spec, schedule, problem.psi0,
                          problem.pulse.n_trotter, record=labels, ws=problem.ws)
    header, data = trace.as_columns()
    io.write_csv(out / "populations.csv", header, data)
    rows = np.column_stack([np.arange(problem.spec.dim), psi_T.real, psi_T.imag])
    io.write_csv(out / "final_state.csv", ["bare_index", "re", "im"], rows)
    rep = energy_report(problem, psi_T)
    io.write_json(out / "evolution.json", {
        "duration_ns": schedule.duration_ns,
        "n_trotter": problem.pulse.n_trotter,
        "levels": problem.spec.levels,
        "initial_state": problem.initial_label,
        **rep.to_dict(),
    })
    print(f"evolve: energy={rep.energy:.10f} Ha leakage={rep.leakage_fraction:.4f} "
          f"-> {out}")
    return 0


def energy_report(problem, psi_T):
    from .objective import energy
    return energy(psi_T, problem.h_emb, problem.ws.proj, problem.objective)


def cmd_met_scan(args) -> int:
    cfg = io.read_experiment_config(args.config)
    args.config_dir = Path(args.config).parent
    problem, extras = build_experiment(cfg, args)
    out = _outdir(args, cfg)
    a = extras["analysis"]
    if args.durations:
        durations = [float(v) for v in args.durations.split(",")]
    elif "durations" in a:
        durations = [float(v) for v in a["durations"]]
    elif {"duration_min", "duration_max", "duration_step"} <= set(a):
        durations = list(np.arange(a["duration_min"],
                                   a["duration_max"] + 1e-9, a["duration_step"]))
    else:
        raise ConfigError("met-scan needs durations ([analysis].durations, "
                          "duration_min/max/step, or --durations)")
    n_starts = int(args.starts or a.get("n_starts", 100))
    scan = met_scan(problem, durations, n_starts, extras["seed"],
                    extras["optimizer"], threads=extras["threads"])
    header, data = scan.as_columns()
    io.write_csv(out / "met_scan.csv", header, data)
    io.write_json(out / "met_scan.json", {
        "met_estimate_ns": scan.met_estimate,
        "n_starts": n_starts,
        "levels": problem.spec.levels,
        "seed0": extras["seed"],
        "success_probabilities": dict(zip(map(str, scan.durations.tolist()),
                                          scan.success_probabilities.tolist())),
    })
    for t in scan.solutions:
        for r in scan.solutions[t][:1]:
            io.write_schedule(out / f"solution_T{t:g}.pulse", r.schedule)
    print(f"met-scan: levels={problem.spec.levels} met_estimate={scan.met_estimate} ns "
          f"({n_starts} starts/duration) -> {out}")
    return 0


def cmd_certify(args) -> int:
    cfg = io.read_experiment_config(args.config)
    args.config_dir = Path(args.config).parent
    schedule = io.read_schedule(args.schedule)
    args.duration = schedule.duration_ns
    problem, extras = build_experiment(cfg, args)
    if schedule.n_qubits != problem.spec.n_transmons:
        raise ConfigError(
            f"schedule drives {schedule.n_qubits} qubits but the device has "
            f"{problem.spec.n_transmons} transmons")
    out = _outdir(args, cfg)
    report, trace = bang_bang_certificate(problem, schedule,
                                          normalize_costate=args.normalized_costate)
    header, data = trace.as_columns()
    io.write_csv(out / "switching.csv", header, data)
    io.write_json(out / "certificate.json", report.to_dict())
    print(f"certify: sign_agreement={report.sign_agreement:.4f} "
          f"saturation={report.saturation:.3f} "
          f"max_flip_offset={report.max_flip_offset_segments:.2f} segments -> {out}")
    return 0


def cmd_dyson(args) -> int:
    cfg = io.read_experiment_config(args.config)
    args.config_dir = Path(args.config).parent
    schedule = io.read_schedule(args.schedule)
    args.duration = schedule.duration_ns
    problem, extras = build_experiment(cfg, args)
    out = _outdir(args, cfg)
    n_quad = args.quad or problem.pulse.n_trotter
    report = dyson_amplitudes(problem, schedule, args.initial, args.final, n_quad)
    io.write_json(out / "dyson.json", report.to_dict())
    times, a1, traces = dyson_channel_traces(problem, schedule, args.initial,
                                             args.final, n_quad)
    labels = sorted(traces)
    header = (["time_ns", "p_first_order"]
              + [f"p_via_{m}" for m in labels] + ["p_total"])
    total = sum(traces[m] for m in labels)
    data = np.column_stack([times, np.abs(a1) ** 2]
                           + [np.abs(traces[m]) ** 2 for m in labels]
                           + [np.abs(total) ** 2])
    io.write_csv(out / "dyson_channels.csv", header, data)
    top = report.dominant_channels(2)
    print(f"dyson: {args.initial}->{args.final} |A1|={abs(report.first_order):.3e} "
          f"P2={report.second_order_probability:.4f} dominant={top} -> {out}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ctrlvqe",
        description="Pulse-level variational state preparation on transmon qudits")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="experiment TOML")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--levels", type=int, default=None)

    p_opt = sub.add_parser("optimize", help="single seeded optimization")
    common(p_opt)
    p_opt.add_argument("--duration", type=float, default=None)
    p_opt.set_defaults(func=cmd_optimize)

    p_ev = sub.add_parser("evolve", help="propagate a schedule file")
    common(p_ev)
    p_ev.add_argument("--schedule", required=True, help="pulse schedule file")
    p_ev.set_defaults(func=cmd_evolve)

    p_met = sub.add_parser("met-scan", help="success probability vs duration")
    common(p_met)
    p_met.add_argument("--starts", type=int, default=None)
    p_met.add_argument("--durations", default=None,
                       help="comma-separated list, overrides config")
    p_met.set_defaults(func=cmd_met_scan)

    p_cert = sub.add_parser("certify", help="switching-function certificate")
    common(p_cert)
    p_cert.add_argument("--schedule", required=True, help="pulse schedule file")
    p_cert.add_argument("--normalized-costate", action="store_true")
    p_cert.set_defaults(func=cmd_certify)

    p_dys = sub.add_parser("dyson", help="second-order transition channels")
    common(p_dys)
    p_dys.add_argument("--schedule", required=True)
    p_dys.add_argument("--initial", default="01")
    p_dys.add_argument("--final", default="10")
    p_dys.add_argument("--quad", type=int, default=None)
    p_dys.set_defaults(func=cmd_dyson)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except NumericalAbort as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, CtrlVqeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
