"""Readers for the toolkit's on-disk formats, implemented from the format
documentation alone (this package deliberately shares no code with the
main implementation).

Device file: TOML with n_transmons, levels, omega[], delta[] (GHz) and
couplings = [[p, q, g], ...]. Hamiltonian file: '# key: value' headers then
'WORD coefficient' lines; word character q acts on transmon q. Schedule
file: '# key = value' headers then 'segment t_start amp_q0 amp_q1 ...'
rows. Basis indexing everywhere: index = sum_q level_q * levels**q
(transmon 0 fastest); a label 'ab' puts transmon 0 in a.
"""
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib


def load_device(path):
    raw = tomllib.loads(Path(path).read_text())
    return {
        "n": int(raw["n_transmons"]),
        "levels": int(raw["levels"]),
        "omega": np.asarray(raw["omega"], dtype=float),
        "delta": np.asarray(raw["delta"], dtype=float),
        "couplings": [(int(p), int(q), float(g)) for p, q, g in raw.get("couplings", [])],
    }


def load_hamiltonian(path):
    terms = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        word, coeff = line.split()
        terms.append((word, float(coeff)))
    return terms


def load_schedule(path):
    header = {}
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                header[key.strip()] = value.strip()
            continue
        rows.append([float(v) for v in line.split()])
    rows.sort(key=lambda r: r[0])
    amps = np.asarray(rows)[:, 2:].T  # (n_qubits, n_segments)
    return {
        "duration": float(header["duration_ns"]),
        "amps": amps,
        "nu": np.asarray([float(v) for v in header["drive_freq_ghz"].split(",")]),
    }


def load_state_csv(path):
    """final_state.csv from the main CLI: bare_index, re, im."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    order = np.argsort(data[:, 0])
    return data[order, 1] + 1j * data[order, 2]
