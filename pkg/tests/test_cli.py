"""End-to-end CLI behavior on small, fast experiment configs."""
import json
from pathlib import Path

import numpy as np
import pytest

from ctrlvqe.cli import main
from ctrlvqe.io import read_csv, read_schedule

REPO = Path(__file__).resolve().parent.parent


def small_config(tmp_path, levels=2, duration=12.0, extra=""):
    cfg = tmp_path / "exp.toml"
    cfg.write_text(f"""
device = "{REPO / 'data' / 'device_2transmon.toml'}"
hamiltonian = "{REPO / 'data' / 'h2_1.5A_sto3g_parity_z2.ham'}"
levels = {levels}
seed = 3

[pulse]
duration_ns = {duration}
n_segments = 10
n_trotter = 150

[optimizer]
max_iters = 120
{extra}
""")
    return cfg


class TestOptimize:
    def test_writes_artifacts(self, tmp_path):
        cfg = small_config(tmp_path)
        out = tmp_path / "out"
        assert main(["optimize", "--config", str(cfg), "--out", str(out)]) == 0
        assert (out / "final_schedule.pulse").exists()
        result = json.loads((out / "result.json").read_text())
        assert "energy_hartree" in result
        header, data = read_csv(out / "populations.csv")
        assert header[0] == "time_ns"
        assert data.shape[0] == 151
        np.testing.assert_allclose(data[:, 1:].sum(axis=1), 1.0, atol=1e-9)

    def test_deterministic_outputs(self, tmp_path):
        cfg = small_config(tmp_path)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["optimize", "--config", str(cfg), "--out", str(out1)])
        main(["optimize", "--config", str(cfg), "--out", str(out2)])
        for name in ("final_schedule.pulse", "result.json", "iterations.jsonl"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_missing_hamiltonian_exit_2(self, tmp_path, capsys):
        cfg = tmp_path / "exp.toml"
        cfg.write_text(f"""
device = "{REPO / 'data' / 'device_2transmon.toml'}"
hamiltonian = "{tmp_path / 'missing.ham'}"
[pulse]
duration_ns = 10.0
""")
        assert main(["optimize", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
        assert "missing.ham" in capsys.readouterr().err

    def test_capacity_error_exit_4(self, tmp_path):
        cfg = small_config(tmp_path)
        code = main(["optimize", "--config", str(cfg), "--levels", "70",
                     "--out", str(tmp_path / "o")])
        assert code == 4


class TestMetScan:
    def test_single_duration(self, tmp_path):
        cfg = small_config(tmp_path, duration=16.0)
        out = tmp_path / "scan"
        code = main(["met-scan", "--config", str(cfg), "--out", str(out),
                     "--durations", "16.0", "--starts", "2", "--threads", "2"])
        assert code == 0
        header, data = read_csv(out / "met_scan.csv")
        assert data.shape == (1, 4)
        payload = json.loads((out / "met_scan.json").read_text())
        assert "met_estimate_ns" in payload


class TestCertify:
    def test_reports_without_judging(self, tmp_path):
        cfg = small_config(tmp_path)
        out = tmp_path / "out"
        main(["optimize", "--config", str(cfg), "--out", str(out)])
        cert_out = tmp_path / "cert"
        code = main(["certify", "--config", str(cfg),
                     "--schedule", str(out / "final_schedule.pulse"),
                     "--out", str(cert_out)])
        assert code == 0
        payload = json.loads((cert_out / "certificate.json").read_text())
        assert 0.0 <= payload["sign_agreement"] <= 1.0
        header, _ = read_csv(cert_out / "switching.csv")
        assert header == ["time_ns", "phi_q0", "omega_ghz_q0", "phi_q1", "omega_ghz_q1"]

    def test_device_mismatch_exit_2(self, tmp_path):
        cfg = small_config(tmp_path)
        bad = tmp_path / "bad.pulse"
        bad.write_text("""# duration_ns = 10.0
# n_segments = 1
# drive_freq_ghz = 4.8
# amp_bound_ghz = 0.02
# detuning_bound_ghz = 1.0
# omega_ref_ghz = 4.8
0 0.0 0.01
""")
        code = main(["certify", "--config", str(cfg), "--schedule", str(bad),
                     "--out", str(tmp_path / "o")])
        assert code == 2


class TestDyson:
    def test_channel_csv(self, tmp_path):
        cfg = small_config(tmp_path, levels=3)
        out = tmp_path / "out"
        main(["optimize", "--config", str(cfg), "--out", str(out)])
        dy_out = tmp_path / "dy"
        code = main(["dyson", "--config", str(cfg),
                     "--schedule", str(out / "final_schedule.pulse"),
                     "--initial", "01", "--final", "10",
                     "--quad", "2000", "--out", str(dy_out)])
        assert code == 0
        payload = json.loads((dy_out / "dyson.json").read_text())
        assert abs(complex(*payload["first_order"])) < 1e-12
        header, data = read_csv(dy_out / "dyson_channels.csv")
        assert header[0] == "time_ns" and header[-1] == "p_total"
