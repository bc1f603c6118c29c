"""MET scans, bang-bang certification, Dyson channels, interference."""
import numpy as np
import pytest

from ctrlvqe.analysis import (bang_bang_certificate, control_matrix_grid,
                              dyson_amplitudes, dyson_channel_traces,
                              interference_test, met_scan, population_comparison,
                              saturation_fraction, second_order_state)
from ctrlvqe.errors import ConfigError
from ctrlvqe.model import all_labels
from ctrlvqe.objective import ObjectiveConfig
from ctrlvqe.optimizer import OptimizerConfig
from ctrlvqe.problem import PulseProblem, PulseSettings
from ctrlvqe.propagator import evolve
from ctrlvqe.pulsegrid import PulseSchedule, random_schedule


@pytest.fixture(scope="module")
def prob3(device3, h2):
    return PulseProblem(device3, h2, PulseSettings(duration_ns=9.0, n_segments=10,
                                                   n_trotter=400))


@pytest.fixture(scope="module")
def sched3(prob3):
    return prob3.random_schedule(17)


class TestDyson:
    def test_first_order_vanishes(self, prob3, sched3):
        """<10|H_IC|01> = 0 exactly: the drive changes the total excitation
        number by one while the device Hamiltonian conserves it."""
        rep = dyson_amplitudes(prob3, sched3, "01", "10", n_quad=300)
        assert abs(rep.first_order) < 1e-14

    def test_channel_sum_identity(self, prob3, sched3):
        rep = dyson_amplitudes(prob3, sched3, "01", "10", n_quad=300)
        total = sum(rep.channel_amplitudes.values())
        assert abs(total - rep.second_order_total) < 1e-8

    def test_quadrature_self_convergence(self, prob3, sched3):
        from ctrlvqe.analysis import DYSON_DEFAULT_QUAD
        a = dyson_amplitudes(prob3, sched3, "01", "10")
        b = dyson_amplitudes(prob3, sched3, "01", "10", n_quad=2 * DYSON_DEFAULT_QUAD)
        scale = max(abs(b.second_order_total), 1e-12)
        assert abs(a.second_order_total - b.second_order_total) / scale < 1e-6

    def test_trace_final_matches_report(self, prob3, sched3):
        times, a1, traces = dyson_channel_traces(prob3, sched3, "01", "10", 400)
        rep = dyson_amplitudes(prob3, sched3, "01", "10", 400)
        for m, tr in traces.items():
            assert tr[-1] == pytest.approx(rep.channel_amplitudes[m], abs=1e-12)

    def test_hermitian_grid(self, prob3, sched3):
        grid = control_matrix_grid(prob3.ws, sched3, np.array([0.0, 1.3, 4.5]))
        for h in grid:
            np.testing.assert_allclose(h, h.conj().T, atol=1e-12)


class TestSecondOrderState:
    def test_zero_drive_returns_initial(self, prob3, device3):
        from ctrlvqe.model import basis_index
        s = random_schedule(1, device3, 0.0, 0.0, 5, 6.0)
        psi2, fid, infid = second_order_state(prob3, s)
        expected = np.zeros(device3.dim)
        expected[basis_index("01", device3)] = 1.0
        np.testing.assert_allclose(psi2, expected, atol=1e-12)
        assert fid == pytest.approx(1.0, abs=1e-10)

    def test_weak_drive_high_fidelity(self, prob3, device3):
        s = random_schedule(23, device3, 0.0002, 1.0, 8, 9.0)
        _, fid, infid = second_order_state(prob3, s)
        assert infid < 1e-6

    def test_perturbative_scaling(self, prob3, device3):
        def infid_at(amp, seed=23):
            s = random_schedule(seed, device3, amp, 1.0, 8, 9.0)
            return second_order_state(prob3, s)[2]

        i1 = infid_at(0.002)
        i2 = infid_at(0.008)
        # truncation error grows as a high power of the drive strength
        # (cubic in amplitude, so >= quartic in probability terms)
        assert i2 > 16 * i1
        assert i1 < 1e-7


class TestInterference:
    def test_neutral_when_one_amplitude_zero(self, prob3, sched3):
        rep = dyson_amplitudes(prob3, sched3, "01", "10", 300)
        rep.channel_amplitudes["22"] = 0.0 + 0.0j
        verdict = interference_test(rep, "00", "22")
        assert not verdict.constructive
        assert verdict.margin == pytest.approx(0.0, abs=1e-18)

    def test_missing_channel_raises(self, prob3, sched3):
        rep = dyson_amplitudes(prob3, sched3, "01", "10", 300)
        with pytest.raises(ConfigError):
            interference_test(rep, "00", "99")

    def test_cross_term_sign_decides(self, prob3, sched3):
        rep = dyson_amplitudes(prob3, sched3, "01", "10", 300)
        labels = list(rep.channel_amplitudes)
        for m1 in labels[:3]:
            for m2 in labels[3:6]:
                v = interference_test(rep, m1, m2)
                assert v.constructive == (v.cross_term > 0 and v.margin > 0)


class TestCertificate:
    def test_random_schedule_agreement_near_half(self, prob3, sched3):
        report, trace = bang_bang_certificate(prob3, sched3)
        assert 0.2 < report.sign_agreement < 0.8
        assert trace.phi.shape[0] == prob3.pulse.n_trotter + 1

    def test_hand_built_violation_reported(self, prob3, device3):
        """A pulse pinned at the wrong bound everywhere must show violations."""
        report, trace = bang_bang_certificate(prob3, prob3.random_schedule(3))
        # flip the pulse against phi wherever phi is significant
        phi = trace.phi
        amps = np.where(phi[:-1:40, :].T > 0, -0.02, 0.02)[:, :10]
        bad = PulseSchedule(prob3.pulse.duration_ns, amps,
                            np.asarray(device3.omega), 0.02, 1.0,
                            np.asarray(device3.omega))
        rep2, _ = bang_bang_certificate(prob3, bad)
        assert rep2.sign_agreement < 0.9
        assert len(rep2.violating_intervals) >= 1
        assert rep2.saturation == 1.0

    def test_saturation_counting(self, device3):
        amps = np.array([[0.02, -0.02, 0.01, 0.0, 0.02]])
        s = PulseSchedule(5.0, amps, np.array([4.8]), 0.02, 1.0, np.array([4.8]))
        assert saturation_fraction(s) == pytest.approx(0.6)

    def test_shipped_extremal_certifies(self, device3, h2, data_dir):
        """The shipped bound-limited three-level pulse (driven against the
        reachability frontier) satisfies the maximum-principle sign rule
        when phi uses the costate of the optimized (normalized) objective."""
        from ctrlvqe.io import read_schedule
        sched = read_schedule(data_dir / "qutrit_T7_extremal.pulse")
        prob = PulseProblem(device3, h2, PulseSettings(duration_ns=sched.duration_ns))
        rep, _ = bang_bang_certificate(prob, sched, normalize_costate=True)
        assert rep.saturation >= 0.9
        assert rep.sign_agreement >= 0.97
        assert rep.max_flip_offset_segments <= 1.0


class TestMetScan:
    def test_single_duration_degenerates_to_multistart(self, device2, h2):
        prob = PulseProblem(device2, h2, PulseSettings(duration_ns=16.0,
                                                       n_segments=20, n_trotter=200))
        scan = met_scan(prob, [16.0], n_starts=3, seed0=42,
                        cfg=OptimizerConfig(max_iters=300), threads=2)
        assert scan.durations.tolist() == [16.0]
        if scan.success_probabilities[0] > 0:
            assert scan.met_estimate == 16.0
        else:
            assert scan.met_estimate is None

    def test_grid_must_not_be_empty(self, device2, h2):
        prob = PulseProblem(device2, h2, PulseSettings(duration_ns=16.0))
        with pytest.raises(ConfigError):
            met_scan(prob, [], 2, 0)

    def test_csv_columns(self, device2, h2):
        prob = PulseProblem(device2, h2, PulseSettings(duration_ns=16.0,
                                                       n_segments=10, n_trotter=100))
        scan = met_scan(prob, [14.0, 16.0], n_starts=2, seed0=7,
                        cfg=OptimizerConfig(max_iters=60), threads=2)
        header, data = scan.as_columns()
        assert header[0] == "duration_ns"
        assert data.shape == (2, 4)
        assert np.all(np.diff(data[:, 0]) > 0)


class TestPopulationComparison:
    def test_qubit_raw_equals_normalized(self, device2, h2):
        prob = PulseProblem(device2, h2, PulseSettings(duration_ns=10.0,
                                                       n_segments=10, n_trotter=150))
        s = prob.random_schedule(3)
        _, trace = evolve(device2, s, prob.psi0, 150, record=all_labels(device2),
                          ws=prob.ws)
        header, data = population_comparison(trace, trace, label="10")
        np.testing.assert_allclose(data[:, 1], data[:, 2], atol=1e-12)
