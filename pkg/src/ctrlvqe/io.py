"""File formats.

* Device file: TOML with n_transmons, levels, omega[], delta[], couplings
  (list of [p, q, g] with p < q); frequencies in GHz, ordinary convention.
* Molecular Hamiltonian file: '# key: value' header lines, then one
  'PAULI_WORD  coefficient' per line (hartree); word character q acts on
  transmon q.
* Schedule file: '# key = value' header (duration, segment count, drive
  frequencies, bounds), then columns 'segment t_start_ns amp_ghz[q]...'.
* Traces and scans: CSV with a self-describing header row (units in the
  column names). Reports: JSON. Iteration logs: JSON lines.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .model import DeviceSpec, PauliHamiltonian
from .pulsegrid import PulseSchedule


def read_device(path) -> DeviceSpec:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"device file not found: {path}")
    try:
        raw = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"device file {path}: {exc}") from exc
    try:
        couplings = tuple((int(p), int(q), float(g)) for p, q, g in raw.get("couplings", []))
        return DeviceSpec(
            n_transmons=int(raw["n_transmons"]),
            levels=int(raw["levels"]),
            omega=tuple(float(v) for v in raw["omega"]),
            delta=tuple(float(v) for v in raw["delta"]),
            couplings=couplings,
        )
    except KeyError as exc:
        raise ConfigError(f"device file {path}: missing field {exc}") from exc


def read_pauli_hamiltonian(path) -> PauliHamiltonian:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"hamiltonian file not found: {path}")
    terms = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ConfigError(f"{path}:{lineno}: expected 'WORD coefficient', got {line!r}")
        try:
            terms.append((parts[0], float(parts[1])))
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad coefficient {parts[1]!r}") from exc
    if not terms:
        raise ConfigError(f"{path}: no terms found")
    return PauliHamiltonian.from_terms(terms)


def write_schedule(path, schedule: PulseSchedule) -> None:
    path = Path(path)
    lines = [
        f"# duration_ns = {float(schedule.duration_ns)!r}",
        f"# n_segments = {schedule.n_segments}",
        "# drive_freq_ghz = " + ", ".join(repr(float(v)) for v in schedule.drive_freq),
        f"# amp_bound_ghz = {float(schedule.amp_bound)!r}",
        f"# detuning_bound_ghz = {float(schedule.detuning_bound)!r}",
        "# omega_ref_ghz = " + ", ".join(repr(float(v)) for v in schedule.omega_ref),
        "# columns: segment t_start_ns " +
        " ".join(f"amp_ghz_q{q}" for q in range(schedule.n_qubits)),
    ]
    seg_len = schedule.segment_length
    for k in range(schedule.n_segments):
        amps = " ".join(repr(float(schedule.amplitudes[q, k]))
                        for q in range(schedule.n_qubits))
        lines.append(f"{k} {k * seg_len:.6f} {amps}")
    path.write_text("\n".join(lines) + "\n")


def read_schedule(path) -> PulseSchedule:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"schedule file not found: {path}")
    header: dict = {}
    rows = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                header[key.strip()] = value.strip()
            continue
        parts = line.split()
        if len(parts) < 3:
            raise ConfigError(f"{path}:{lineno}: expected 'segment t_start amps...'")
        rows.append([float(v) for v in parts])
    required = ["duration_ns", "n_segments", "drive_freq_ghz",
                "amp_bound_ghz", "detuning_bound_ghz", "omega_ref_ghz"]
    for key in required:
        if key not in header:
            raise ConfigError(f"{path}: missing header line '# {key} = ...'")
    nu = np.array([float(v) for v in header["drive_freq_ghz"].split(",")])
    omega_ref = np.array([float(v) for v in header["omega_ref_ghz"].split(",")])
    n_segments = int(header["n_segments"])
    if len(rows) != n_segments:
        raise ConfigError(f"{path}: header says {n_segments} segments, file has {len(rows)}")
    data = np.asarray(rows)
    order = np.argsort(data[:, 0])
    amps = data[order, 2:].T  # (n_qubits, n_segments)
    if amps.shape[0] != nu.size:
        raise ConfigError(f"{path}: {amps.shape[0]} amplitude columns but "
                          f"{nu.size} drive frequencies")
    return PulseSchedule(
        duration_ns=float(header["duration_ns"]), amplitudes=amps, drive_freq=nu,
        amp_bound=float(header["amp_bound_ghz"]),
        detuning_bound=float(header["detuning_bound_ghz"]), omega_ref=omega_ref)


def write_csv(path, header, data) -> None:
    data = np.atleast_2d(np.asarray(data, dtype=float))
    if data.size and data.shape[1] != len(header):
        raise ConfigError(f"csv {path}: {len(header)} header fields, "
                          f"{data.shape[1]} data columns")
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in data:
            f.write(",".join(f"{v:.12g}" for v in row) + "\n")


def read_csv(path):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"csv not found: {path}")
    with open(path) as f:
        header = f.readline().strip().split(",")
        data = np.loadtxt(f, delimiter=",", ndmin=2)
    return header, data


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_jsonl(path, records) -> None:
    with open(path, "w") as f:
        for rec in records:
            f.write(json.dumps(rec, sort_keys=True) + "\n")


def read_experiment_config(path) -> dict:
    """Experiment TOML: paths, pulse/objective/optimizer/analysis tables.

    Returns the raw dict; interpretation lives in cli.build_experiment."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        return tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path}: {exc}") from exc
