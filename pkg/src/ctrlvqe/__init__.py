"""Pulse-level variational state preparation on coupled transmon qudits.

Optimizes bounded piecewise-constant drive schedules against a projected
molecular-energy objective, scans for minimum evolution times, certifies
bound saturation against the Pontryagin switching function, and explains
qudit speedups through second-order transition-channel analysis.
"""
from ._accel import BACKEND
from .model import DeviceSpec, DressedFrame, PauliHamiltonian
from .objective import EnergyReport, ObjectiveConfig
from .optimizer import OptimizerConfig, RunResult
from .problem import PulseProblem, PulseSettings
from .pulsegrid import ParameterVector, PulseSchedule

__all__ = [
    "BACKEND",
    "DeviceSpec",
    "DressedFrame",
    "EnergyReport",
    "ObjectiveConfig",
    "OptimizerConfig",
    "ParameterVector",
    "PauliHamiltonian",
    "PulseProblem",
    "PulseSchedule",
    "PulseSettings",
    "RunResult",
]

__version__ = "0.1.0"
