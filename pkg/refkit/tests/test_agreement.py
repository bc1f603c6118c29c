"""Cross-implementation agreement: the oracle versus the main toolkit's
`evolve` CLI, on randomly generated devices and schedules, talking only
through files."""
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from refkit import io, oracle
from test_oracle import write_schedule

REPO = Path(__file__).resolve().parent.parent.parent
DATA = REPO / "data"
N_PAIRS = 20


def make_device_file(path, rng, levels):
    w0 = float(rng.uniform(4.0, 5.2))
    w1 = float(w0 + rng.uniform(0.1, 0.6) * rng.choice([-1.0, 1.0]))
    d0, d1 = (float(v) for v in rng.uniform(0.2, 0.35, size=2))
    g = float(rng.uniform(0.0, 0.4) * abs(w1 - w0))
    path.write_text(
        f"n_transmons = 2\nlevels = {levels}\n"
        f"omega = [{w0!r}, {w1!r}]\ndelta = [{d0!r}, {d1!r}]\n"
        f"couplings = [[0, 1, {g!r}]]\n")
    return np.array([w0, w1])


def make_config_file(path, device_path, levels, n_trotter=1000):
    path.write_text(
        f'device = "{device_path}"\n'
        f'hamiltonian = "{DATA / "h2_1.5A_sto3g_parity_z2.ham"}"\n'
        f"levels = {levels}\n"
        f"[pulse]\nduration_ns = 1.0\nn_trotter = {n_trotter}\n")


def run_primary_evolve(config, schedule, out):
    cmd = [sys.executable, "-m", "ctrlvqe.cli", "evolve",
           "--config", str(config), "--schedule", str(schedule),
           "--out", str(out)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return io.load_state_csv(out / "final_state.csv")


class TestAgreement:
    def test_twenty_random_pairs(self, tmp_path):
        """Segment counts divide the main implementation's 1000 uniform
        Trotter steps: its fixed-step midpoint sampling quantizes segment
        boundaries to the step grid, which is a sampling convention rather
        than a propagation property, and exact cross-checks need the two
        sides to integrate the same piecewise drive."""
        rng = np.random.default_rng(2024)
        worst = 1.0
        for i in range(N_PAIRS):
            levels = int(rng.choice([2, 3]))
            dev_path = tmp_path / f"dev{i}.toml"
            omega = make_device_file(dev_path, rng, levels)
            duration = float(rng.uniform(3.0, 8.0))
            n_seg = int(rng.choice([4, 5, 8, 10, 20, 25]))
            amps = rng.uniform(-0.02, 0.02, size=(2, n_seg))
            nu = omega + rng.uniform(-1.0, 1.0, size=2)
            sched_path = tmp_path / f"s{i}.pulse"
            write_schedule(sched_path, duration, amps, nu, omega)
            cfg_path = tmp_path / f"c{i}.toml"
            make_config_file(cfg_path, dev_path, levels)

            psi_primary = run_primary_evolve(cfg_path, sched_path,
                                             tmp_path / f"out{i}")
            device = io.load_device(dev_path)
            sched = io.load_schedule(sched_path)
            _, vectors = oracle.dressed_states(device)
            psi0 = vectors[:, oracle.label_index("01", levels)]
            psi_oracle = oracle.propagate(device, sched, psi0, 10_000)
            fid = abs(np.vdot(psi_oracle, psi_primary)) ** 2
            worst = min(worst, fid)
        print(f"\nworst cross-implementation fidelity over {N_PAIRS} pairs: "
              f"{worst:.12f}")
        assert worst >= 1.0 - 1e-9

    def test_energy_agreement_on_shipped_device(self, tmp_path):
        rng = np.random.default_rng(5)
        amps = rng.uniform(-0.02, 0.02, size=(2, 10))
        omega = np.array([4.8080, 4.8333])
        nu = omega + rng.uniform(-0.5, 0.5, size=2)
        sched_path = tmp_path / "s.pulse"
        write_schedule(sched_path, 7.0, amps, nu, omega)
        cfg_path = tmp_path / "c.toml"
        make_config_file(cfg_path, DATA / "device_2transmon.toml", 3)
        out = tmp_path / "out"
        run_primary_evolve(cfg_path, sched_path, out)
        primary = json.loads((out / "evolution.json").read_text())
        result = oracle.oracle_evolve(DATA / "device_2transmon.toml",
                                      DATA / "h2_1.5A_sto3g_parity_z2.ham",
                                      sched_path, n_steps=10_000, levels=3)
        # energies are first-order sensitive to the two integrators'
        # residual discretization difference, unlike the fidelity
        assert result["energy_hartree"] == pytest.approx(
            primary["energy_hartree"], abs=5e-7)
        assert result["leakage_fraction"] == pytest.approx(
            primary["leakage_fraction"], abs=5e-7)
