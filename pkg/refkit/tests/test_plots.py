"""Figure scripts: render from synthetic artifacts, diagnostics, no-ops."""
import warnings
from pathlib import Path

import numpy as np
import pytest

from refkit import plots
from test_oracle import write_schedule


def write_csv(path, header, rows):
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(f"{v:.8g}" for v in row) + "\n")


@pytest.fixture()
def results_dir(tmp_path):
    d = tmp_path / "results"
    d.mkdir()
    t = np.linspace(0, 10, 51)
    write_csv(d / "met_scan.csv",
              ["duration_ns", "success_probability", "n_success", "n_starts"],
              [[8 + 0.5 * k, min(1.0, 0.2 * k), 2 * k, 10] for k in range(6)])
    write_csv(d / "switching.csv",
              ["time_ns", "phi_q0", "omega_ghz_q0", "phi_q1", "omega_ghz_q1"],
              np.column_stack([t, np.sin(t), 0.02 * np.sign(np.sin(t)),
                               np.cos(t), -0.02 * np.sign(np.cos(t))]))
    write_csv(d / "populations.csv",
              ["time_ns", "p01", "p10", "p02"],
              np.column_stack([t, np.cos(0.1 * t) ** 2,
                               0.5 * np.sin(0.1 * t) ** 2,
                               0.5 * np.sin(0.1 * t) ** 2]))
    write_csv(d / "dyson_channels.csv",
              ["time_ns", "p_first_order", "p_via_00", "p_via_11", "p_total"],
              np.column_stack([t, 0 * t, 0.01 * t, 0.02 * t, 0.03 * t]))
    write_schedule(d / "solution.pulse", 10.0,
                   np.array([[0.02, -0.02, 0.01], [0.0, 0.02, -0.02]]),
                   [4.8, 4.83], [4.8, 4.83])
    return d


class TestPlotSuite:
    def test_renders_every_artifact(self, results_dir):
        written = plots.plot_suite(results_dir)
        names = {p.name for p in written}
        assert names == {"met_scan.png", "switching.png", "populations.png",
                         "dyson_channels.png", "solution.png"}
        for p in written:
            assert p.stat().st_size > 1000

    def test_empty_dir_warns_and_noops(self, tmp_path):
        empty = tmp_path / "none"
        empty.mkdir()
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            written = plots.plot_suite(empty)
        assert written == []
        assert any("nothing to plot" in str(w.message) for w in caught)

    def test_missing_column_is_named(self, tmp_path):
        d = tmp_path / "r"
        d.mkdir()
        write_csv(d / "met_scan.csv", ["duration_ns", "wrong_name"],
                  [[10.0, 0.5]])
        with pytest.raises(plots.MissingColumn, match="success_probability"):
            plots.plot_suite(d)

    def test_cli_exit_codes(self, results_dir, tmp_path, capsys):
        assert plots.main([str(results_dir), "--out", str(tmp_path / "figs")]) == 0
        d = tmp_path / "bad"
        d.mkdir()
        write_csv(d / "switching.csv", ["time_ns", "nonsense"], [[0.0, 1.0]])
        assert plots.main([str(d)]) == 2
