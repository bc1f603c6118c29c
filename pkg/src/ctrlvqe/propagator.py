"""Interaction-picture Trotter propagation of qudit states under a
piecewise-constant drive, with population recording and computational-
subspace projection.

The free evolution is removed exactly: each step applies
exp(-i H_IC(tm) dt) with H_IC(t) = e^{i H_D t} H_C(t) e^{-i H_D t} frozen
at the step midpoint, and the step exponential is evaluated exactly (the
per-transmon drive terms commute; see _kernels_numpy). With the drive off
the state therefore does not move.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import kernels
from .errors import ConfigError, SingularProjectionError
from .model import (DeviceSpec, DressedFrame, basis_index, computational_basis_vectors,
                    dress, embed_site_operator, lowering_op)
from .pulsegrid import PulseSchedule

NORM_TOL = 1e-8


@dataclass
class EvolutionTrace:
    """Populations of selected basis labels on the propagation grid."""

    times: np.ndarray
    populations: dict          # label -> array over times
    frame: str

    def as_columns(self):
        labels = sorted(self.populations)
        cols = [self.times] + [self.populations[lab] for lab in labels]
        header = ["time_ns"] + [f"p{lab}" for lab in labels]
        return header, np.column_stack(cols)


class Workspace:
    """Precomputed arrays shared by every propagation of one device.

    Holds the dressed eigendecomposition of the device Hamiltonian, the
    constant eigendecomposition of the single-transmon quadrature a + a+,
    and index tables consumed by the kernels.
    """

    def __init__(self, spec: DeviceSpec, frame: str = "dressed",
                 dressed: DressedFrame | None = None):
        if frame not in ("bare", "dressed"):
            raise ConfigError(f"unknown frame {frame!r}")
        self.spec = spec
        self.frame = frame
        self.dressed = dressed if dressed is not None else dress(spec)
        self.W = np.ascontiguousarray(self.dressed.vectors.astype(np.complex128))
        self.Wd = np.ascontiguousarray(self.W.conj().T)
        self.E = np.ascontiguousarray(self.dressed.energies.astype(np.float64))
        a = lowering_op(spec.levels)
        x = (a + a.conj().T).real
        xs, Vx = np.linalg.eigh(x)
        self.xs = np.ascontiguousarray(xs)
        self.Vx = np.ascontiguousarray(Vx)
        self.Cnu = np.ascontiguousarray(Vx.T @ (1j * (a - a.conj().T)) @ Vx)
        digits = np.empty((spec.dim, spec.n_transmons), dtype=np.int64)
        for i in range(spec.dim):
            rem = i
            for q in range(spec.n_transmons):
                digits[i, q] = rem % spec.levels
                rem //= spec.levels
        self.digits = digits
        self.comp_vectors = computational_basis_vectors(spec, frame, self.dressed)
        self.proj = self.comp_vectors @ self.comp_vectors.conj().T

    def basis_vector(self, label: str) -> np.ndarray:
        """Full-space vector for a basis label in this workspace's frame."""
        idx = basis_index(label, self.spec)
        if self.frame == "bare":
            v = np.zeros(self.spec.dim, dtype=np.complex128)
            v[idx] = 1.0
            return v
        return self.dressed.dressed_vector(idx).astype(np.complex128)

    def populations(self, states: np.ndarray) -> np.ndarray:
        """|<label_b | psi>|^2 rows for stacked states, frame-consistent."""
        if self.frame == "bare":
            return np.abs(states) ** 2
        amp = states @ self.W.conj()  # <dressed_j|psi> for each j
        pops = np.abs(amp) ** 2
        # reorder columns so column b is the dressed state labelled b
        return pops[:, self.dressed.bare_to_dressed]

    def grid(self, schedule: PulseSchedule, n_trotter: int):
        dt = schedule.duration_ns / n_trotter
        tms = (np.arange(n_trotter) + 0.5) * dt
        amps = schedule.sample_grid(tms)
        seg_of_step = np.minimum((tms / schedule.segment_length).astype(np.int64),
                                 schedule.n_segments - 1)
        return dt, tms, amps, seg_of_step


def control_hamiltonian_at(spec: DeviceSpec, schedule: PulseSchedule, t: float,
                           ws: Workspace | None = None) -> np.ndarray:
    """Dense interaction-picture control Hamiltonian H_IC(t) in rad/ns."""
    ws = ws if ws is not None else Workspace(spec)
    if t < 0 or t > schedule.duration_ns:
        raise ConfigError(f"t = {t} outside the schedule")
    a = lowering_op(spec.levels)
    hc = np.zeros((spec.dim, spec.dim), dtype=complex)
    for q in range(spec.n_transmons):
        omega_amp = 2 * np.pi * schedule.sample_at(q, t)
        theta = 2 * np.pi * schedule.drive_freq[q] * t
        aq = embed_site_operator(a, q, spec)
        hc += omega_amp * (np.exp(1j * theta) * aq + np.exp(-1j * theta) * aq.conj().T)
    u = (ws.W * np.exp(1j * ws.E * t)[None, :]) @ ws.Wd  # e^{+i H_D t}
    return u @ hc @ u.conj().T


def evolve(spec: DeviceSpec, schedule: PulseSchedule, psi0: np.ndarray,
           n_trotter: int = 1000, record=None, frame: str = "dressed",
           ws: Workspace | None = None):
    """Propagate psi0 across the schedule; returns (psi_T, EvolutionTrace).

    record is an iterable of basis labels whose populations are stored at
    every grid time (in the workspace frame).
    """
    ws = ws if ws is not None else Workspace(spec, frame)
    psi0 = np.asarray(psi0, dtype=np.complex128)
    if psi0.shape != (spec.dim,):
        raise ConfigError(f"psi0 has shape {psi0.shape}, expected ({spec.dim},)")
    if abs(np.linalg.norm(psi0) - 1.0) > NORM_TOL:
        raise ConfigError("psi0 is not normalized")
    if n_trotter < 1:
        raise ConfigError("n_trotter must be >= 1")
    traj = evolve_trajectory(ws, schedule, psi0, n_trotter)
    times = np.linspace(0.0, schedule.duration_ns, n_trotter + 1)
    populations = {}
    if record:
        pops = ws.populations(traj)
        for label in record:
            populations[label] = pops[:, basis_index(label, spec)].copy()
    trace = EvolutionTrace(times=times, populations=populations, frame=ws.frame)
    return traj[-1], trace


def evolve_trajectory(ws: Workspace, schedule: PulseSchedule, psi0: np.ndarray,
                      n_trotter: int) -> np.ndarray:
    """All grid states of the forward evolution, shape (n_trotter+1, dim)."""
    dt, tms, amps, _ = ws.grid(schedule, n_trotter)
    return kernels.evolve_trajectory(
        ws.W, ws.Wd, ws.E, ws.Vx, ws.xs, ws.digits,
        np.ascontiguousarray(amps), np.ascontiguousarray(schedule.drive_freq),
        tms, dt, psi0)


def backward_trajectory(ws: Workspace, schedule: PulseSchedule, lam_T: np.ndarray,
                        n_trotter: int) -> np.ndarray:
    """Costate at all grid times, given its terminal value."""
    dt, tms, amps, _ = ws.grid(schedule, n_trotter)
    return kernels.backward_trajectory(
        ws.W, ws.Wd, ws.E, ws.Vx, ws.xs, ws.digits,
        np.ascontiguousarray(amps), np.ascontiguousarray(schedule.drive_freq),
        tms, dt, np.asarray(lam_T, dtype=np.complex128))


def project_and_normalize(psi: np.ndarray, ws: Workspace):
    """(P psi / ||P psi||, leakage fraction); errors out when the state is
    entirely outside the computational subspace."""
    proj = ws.proj @ psi
    weight = float(np.real(np.vdot(proj, proj)))
    if weight < 1e-12:
        raise SingularProjectionError(
            "state has no computational-subspace weight to normalize")
    leakage = 1.0 - weight
    return proj / np.sqrt(weight), leakage
