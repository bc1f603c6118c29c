"""Wiring of device, molecular Hamiltonian, pulse settings, and objective
into an optimizable problem: the object every experiment-level operation
(optimize, multistart, scans, certificates) consumes.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .adjoint import cost_and_gradient
from .errors import ConfigError
from .model import DeviceSpec, PauliHamiltonian, embed_molecular_hamiltonian
from .objective import ObjectiveConfig
from .optimizer import OptimizerConfig, RunResult, minimize
from .propagator import Workspace
from .pulsegrid import PulseSchedule, pack, random_schedule, unpack


@dataclass(frozen=True)
class PulseSettings:
    duration_ns: float
    n_segments: int = 100
    amp_bound: float = 0.020       # GHz, Omega/2pi convention
    detuning_bound: float = 1.0    # GHz
    n_trotter: int = 1000


class PulseProblem:
    """A device + molecular Hamiltonian + pulse/objective configuration.

    Pure value object: picklable, safe to share across worker processes.
    """

    def __init__(self, spec: DeviceSpec, pauli: PauliHamiltonian,
                 pulse: PulseSettings, objective: ObjectiveConfig = ObjectiveConfig(),
                 frame: str = "dressed", initial_label: str = "01"):
        if pauli.n_qubits != spec.n_transmons:
            raise ConfigError("hamiltonian and device disagree on qubit count")
        self.spec = spec
        self.pauli = pauli
        self.pulse = pulse
        self.objective = objective
        self.frame = frame
        self.initial_label = initial_label
        self.ws = Workspace(spec, frame)
        self.h_emb = embed_molecular_hamiltonian(pauli, spec, frame, self.ws.dressed)
        self.psi0 = self.ws.basis_vector(initial_label)
        self.e_ground = pauli.ground_energy()

    def with_duration(self, duration_ns: float) -> "PulseProblem":
        return PulseProblem(self.spec, self.pauli,
                            replace(self.pulse, duration_ns=duration_ns),
                            self.objective, self.frame, self.initial_label)

    def with_levels(self, levels: int) -> "PulseProblem":
        return PulseProblem(self.spec.with_levels(levels), self.pauli, self.pulse,
                            self.objective, self.frame, self.initial_label)

    def with_objective(self, objective: ObjectiveConfig) -> "PulseProblem":
        return PulseProblem(self.spec, self.pauli, self.pulse, objective,
                            self.frame, self.initial_label)

    def random_schedule(self, seed) -> PulseSchedule:
        return random_schedule(seed, self.spec, self.pulse.amp_bound,
                               self.pulse.detuning_bound, self.pulse.n_segments,
                               self.pulse.duration_ns)

    def evaluate(self, schedule: PulseSchedule):
        """(EnergyReport, packed gradient) at one schedule."""
        return cost_and_gradient(self.spec, schedule, self.h_emb, self.objective,
                                 self.pulse.n_trotter, self.psi0, self.ws)

    def objective_closure(self, template):
        """fun(x) -> (total cost, gradient, EnergyReport) for minimize()."""

        def fun(x):
            report, grad = self.evaluate(unpack(template, x))
            return report.total_cost, grad, report

        return fun

    def run_schedule(self, schedule: PulseSchedule, cfg: OptimizerConfig = OptimizerConfig(),
                     seed=None, keep_history: bool = False) -> RunResult:
        """Minimize starting from the given schedule."""
        template = pack(schedule)
        x_opt, cost, report, info = minimize(
            self.objective_closure(template), template.x, template.lower,
            template.upper, cfg, keep_history=keep_history)
        energy_error = abs(report.energy - self.e_ground)
        success = info["converged"] and energy_error < cfg.energy_success_threshold
        return RunResult(
            schedule=unpack(template, x_opt), report=report,
            iterations=info["iterations"], n_evaluations=info["n_evaluations"],
            converged=info["converged"], success=success, seed=seed,
            energy_error=energy_error, grad_norm=info["grad_norm"],
            history=info["history"])

    def run_single(self, seed, cfg: OptimizerConfig = OptimizerConfig(),
                   keep_history: bool = False) -> RunResult:
        """Minimize from the seeded random initialization."""
        return self.run_schedule(self.random_schedule(seed), cfg, seed=seed,
                                 keep_history=keep_history)

    def __getstate__(self):
        # Workspace / embeddings are derived; rebuild them on unpickle to
        # keep worker payloads small and consistent.
        return {
            "spec": self.spec, "pauli": self.pauli, "pulse": self.pulse,
            "objective": self.objective, "frame": self.frame,
            "initial_label": self.initial_label,
        }

    def __setstate__(self, state):
        self.__init__(state["spec"], state["pauli"], state["pulse"],
                      state["objective"], state["frame"], state["initial_label"])
