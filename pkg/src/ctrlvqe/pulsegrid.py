"""Bounded piecewise-constant drive schedules on a uniform segment grid,
plus the flat parameter packing consumed by the optimizer.

Amplitudes and drive frequencies are ordinary frequencies in GHz
(Omega/2pi convention); the 2*pi enters in the control Hamiltonian.
Sampling is right-continuous at segment boundaries; t = T returns the
last segment's value.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .model import DeviceSpec


@dataclass(frozen=True)
class PulseSchedule:
    duration_ns: float
    amplitudes: np.ndarray      # (n_qubits, n_segments), GHz
    drive_freq: np.ndarray      # (n_qubits,), GHz
    amp_bound: float            # symmetric bound, GHz
    detuning_bound: float       # |nu_q - omega_q| cap, GHz
    omega_ref: np.ndarray       # device omegas the detuning is measured from

    def __post_init__(self):
        amps = np.atleast_2d(np.asarray(self.amplitudes, dtype=float))
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "drive_freq", np.asarray(self.drive_freq, dtype=float))
        object.__setattr__(self, "omega_ref", np.asarray(self.omega_ref, dtype=float))
        if self.duration_ns <= 0:
            raise ConfigError("duration must be positive")
        if self.amplitudes.shape[0] != self.drive_freq.shape[0]:
            raise ConfigError("amplitudes and drive_freq disagree on qubit count")
        tol = 1e-12
        if np.any(np.abs(self.amplitudes) > self.amp_bound + tol):
            raise ConfigError("amplitude exceeds bound")
        if np.any(np.abs(self.drive_freq - self.omega_ref) > self.detuning_bound + tol):
            raise ConfigError("drive frequency exceeds detuning bound")

    @property
    def n_qubits(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def n_segments(self) -> int:
        return self.amplitudes.shape[1]

    @property
    def segment_length(self) -> float:
        return self.duration_ns / self.n_segments

    def segment_of(self, t: float) -> int:
        if t < 0 or t > self.duration_ns:
            raise ConfigError(f"t = {t} outside [0, {self.duration_ns}]")
        k = int(t / self.segment_length)
        return min(k, self.n_segments - 1)

    def sample_at(self, qubit: int, t: float) -> float:
        """Amplitude of the segment containing t (right-continuous)."""
        return float(self.amplitudes[qubit, self.segment_of(t)])

    def sample_grid(self, times: np.ndarray) -> np.ndarray:
        """Amplitudes of all qubits at an array of times, shape (len(times), n_qubits)."""
        times = np.asarray(times, dtype=float)
        if times.size and (times.min() < 0 or times.max() > self.duration_ns):
            raise ConfigError("times outside [0, T]")
        segs = np.minimum((times / self.segment_length).astype(np.int64),
                          self.n_segments - 1)
        return self.amplitudes[:, segs].T.copy()


def random_schedule(seed, spec: DeviceSpec, amp_bound: float, detuning_bound: float,
                    n_segments: int, duration_ns: float) -> PulseSchedule:
    """Uniform i.i.d. amplitudes in [-amp_bound, amp_bound] and drive
    frequencies in [omega_q - detuning_bound, omega_q + detuning_bound];
    deterministic for a given seed."""
    if amp_bound < 0 or detuning_bound < 0:
        raise ConfigError("bounds must be non-negative")
    rng = np.random.default_rng(seed)
    n_q = spec.n_transmons
    amps = rng.uniform(-amp_bound, amp_bound, size=(n_q, n_segments))
    omega = np.asarray(spec.omega, dtype=float)
    nu = rng.uniform(omega - detuning_bound, omega + detuning_bound)
    return PulseSchedule(duration_ns, amps, nu, amp_bound, detuning_bound, omega)


@dataclass(frozen=True)
class ParameterVector:
    """Flat packing [amps qubit-major, then drive freqs] with box bounds."""

    x: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    n_qubits: int
    n_segments: int
    duration_ns: float
    amp_bound: float
    detuning_bound: float
    omega_ref: np.ndarray

    @property
    def n_params(self) -> int:
        return self.x.size


def pack(schedule: PulseSchedule) -> ParameterVector:
    n_q, n_s = schedule.n_qubits, schedule.n_segments
    x = np.concatenate([schedule.amplitudes.ravel(), schedule.drive_freq])
    lower = np.concatenate([
        np.full(n_q * n_s, -schedule.amp_bound),
        schedule.omega_ref - schedule.detuning_bound,
    ])
    upper = np.concatenate([
        np.full(n_q * n_s, schedule.amp_bound),
        schedule.omega_ref + schedule.detuning_bound,
    ])
    return ParameterVector(x, lower, upper, n_q, n_s, schedule.duration_ns,
                           schedule.amp_bound, schedule.detuning_bound,
                           schedule.omega_ref.copy())


def unpack(pv: ParameterVector, x: np.ndarray | None = None) -> PulseSchedule:
    x = pv.x if x is None else np.asarray(x, dtype=float)
    n_amp = pv.n_qubits * pv.n_segments
    amps = x[:n_amp].reshape(pv.n_qubits, pv.n_segments)
    nu = x[n_amp:]
    return PulseSchedule(pv.duration_ns, amps, nu, pv.amp_bound,
                         pv.detuning_bound, pv.omega_ref)


def clip_to_bounds(pv: ParameterVector, x: np.ndarray | None = None) -> ParameterVector:
    """Componentwise projection of the packed vector onto [lower, upper]."""
    x = pv.x if x is None else np.asarray(x, dtype=float)
    clipped = np.clip(x, pv.lower, pv.upper)
    return ParameterVector(clipped, pv.lower, pv.upper, pv.n_qubits, pv.n_segments,
                           pv.duration_ns, pv.amp_bound, pv.detuning_bound, pv.omega_ref)
