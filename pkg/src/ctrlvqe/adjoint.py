"""Costate (adjoint) machinery: exact gradients of the Trotterized cost
with respect to all pulse parameters, and the Pontryagin switching
function used for bang-bang certification.

Sign map (fixed once, here): the cost J is minimized. With the costate
terminal condition lam(T) below, the switching function is defined as

    phi_q(t) = 2 Re <lam(t)| +i V_q(t) |psi(t)>,

V_q(t) the interaction-picture drive quadrature of transmon q. The exact
amplitude gradient then satisfies dJ/dc_{q,k} = -2*pi * int_seg phi_q dt,
so at a converged bound-constrained minimum the control saturates the
bound whose sign MATCHES phi_q (positive phi -> upper bound), which is
the bang-bang maximum-principle statement the certificate checks.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import kernels
from .errors import ConfigError, SingularProjectionError
from .objective import ObjectiveConfig, energy
from .propagator import Workspace, backward_trajectory, evolve_trajectory
from .pulsegrid import PulseSchedule


@dataclass
class SwitchingTrace:
    """phi_q and the drive amplitude on a common time grid."""

    times: np.ndarray
    phi: np.ndarray            # (n_times, n_qubits)
    pulse_values: np.ndarray   # (n_times, n_qubits), GHz

    @property
    def n_qubits(self) -> int:
        return self.phi.shape[1]

    def as_columns(self):
        header = ["time_ns"]
        cols = [self.times]
        for q in range(self.n_qubits):
            header += [f"phi_q{q}", f"omega_ghz_q{q}"]
            cols += [self.phi[:, q], self.pulse_values[:, q]]
        return header, np.column_stack(cols)


def terminal_costate(psi_T: np.ndarray, h_embedded: np.ndarray, proj: np.ndarray,
                     cfg: ObjectiveConfig = ObjectiveConfig()) -> np.ndarray:
    """lam(T) such that dJ = 2 Re <lam(T)|d psi(T)> for the chosen cost.

    Unnormalized mode: lam(T) = P+ H_mol P psi(T). Normalized mode adds the
    Rayleigh-quotient correction [A - E P] / <psi|P|psi>. An active leakage
    penalty contributes -(d penalty/d leakage) P psi(T).
    """
    psi = np.asarray(psi_T, dtype=np.complex128)
    a_psi = h_embedded @ psi
    p_psi = proj @ psi
    weight = float(np.real(np.vdot(psi, p_psi)))
    if cfg.normalize:
        if weight < 1e-12:
            raise SingularProjectionError("singular projection in costate")
        e = float(np.real(np.vdot(psi, a_psi))) / weight
        lam = (a_psi - e * p_psi) / weight
    else:
        lam = a_psi.copy()
    leak = 1.0 - weight
    if cfg.penalty_rate > 0 and leak > cfg.leakage_threshold:
        # d penalty / d leakage = 100 * rate above the threshold
        lam += -(100.0 * cfg.penalty_rate) * p_psi
    return lam


def backpropagate_costate(spec, schedule: PulseSchedule, lam_T: np.ndarray,
                          n_trotter: int, ws: Workspace | None = None) -> np.ndarray:
    """Costate at every grid time (exact inverses of the forward steps)."""
    ws = ws if ws is not None else Workspace(spec)
    return backward_trajectory(ws, schedule, lam_T, n_trotter)


def switching_function(spec, schedule: PulseSchedule, psi_traj: np.ndarray,
                       lam_traj: np.ndarray, ws: Workspace | None = None) -> SwitchingTrace:
    """Evaluate phi_q on the trajectory grid (see module sign note)."""
    ws = ws if ws is not None else Workspace(spec)
    if psi_traj.shape != lam_traj.shape:
        raise ConfigError("state and costate trajectories disagree in shape")
    n_steps = psi_traj.shape[0] - 1
    times = np.linspace(0.0, schedule.duration_ns, n_steps + 1)
    phi = kernels.switching_pass(
        ws.W, ws.Wd, ws.E, ws.xs, ws.digits,
        np.ascontiguousarray(schedule.drive_freq), times,
        np.ascontiguousarray(psi_traj), np.ascontiguousarray(lam_traj))
    return SwitchingTrace(times=times, phi=phi,
                          pulse_values=schedule.sample_grid(times))


def cost_and_gradient(spec, schedule: PulseSchedule, h_embedded: np.ndarray,
                      cfg: ObjectiveConfig, n_trotter: int, psi0: np.ndarray,
                      ws: Workspace | None = None):
    """One forward + one adjoint pass.

    Returns (EnergyReport, packed gradient d total_cost / d [amps, nus]) in
    hartree per GHz, using the exact per-step derivative of the Trotterized
    cost (midpoint-frozen operators; divided differences for the drive
    frequencies).
    """
    ws = ws if ws is not None else Workspace(spec)
    psi_traj = evolve_trajectory(ws, schedule, np.asarray(psi0, np.complex128), n_trotter)
    report = energy(psi_traj[-1], h_embedded, ws.proj, cfg)
    lam_T = terminal_costate(psi_traj[-1], h_embedded, ws.proj, cfg)
    dt, tms, amps, seg_of_step = ws.grid(schedule, n_trotter)
    grad_amps, grad_nu = kernels.gradient_pass(
        ws.W, ws.Wd, ws.E, ws.Vx, ws.xs, ws.Cnu, ws.digits,
        np.ascontiguousarray(amps), np.ascontiguousarray(schedule.drive_freq),
        tms, dt, psi_traj, lam_T, seg_of_step, schedule.n_segments)
    grad = np.concatenate([grad_amps.ravel(), grad_nu])
    return report, grad


def gradient(spec, schedule: PulseSchedule, h_embedded: np.ndarray,
             cfg: ObjectiveConfig, n_trotter: int, psi0: np.ndarray,
             ws: Workspace | None = None) -> np.ndarray:
    """Packed gradient only (same packing as pulsegrid.pack)."""
    _, grad = cost_and_gradient(spec, schedule, h_embedded, cfg, n_trotter, psi0, ws)
    if not np.all(np.isfinite(grad)):
        raise ConfigError("gradient contains non-finite entries")
    return grad
