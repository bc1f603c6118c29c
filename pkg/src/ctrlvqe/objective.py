"""Projected molecular-energy cost with an optional one-sided leakage
penalty.

energy = <psi|P+ H_mol P|psi> / <psi|P|psi> (normalized mode, the default)
penalty = penalty_rate * max(0, 100 * (leakage - leakage_threshold))

i.e. the penalty is linear in percentage points of leakage above the
threshold and zero below it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SingularProjectionError


@dataclass(frozen=True)
class ObjectiveConfig:
    penalty_rate: float = 0.0        # hartree per percentage point of leakage
    leakage_threshold: float = 1.0   # fraction in [0, 1]; 1.0 disables the penalty
    normalize: bool = True

    def __post_init__(self):
        if self.penalty_rate < 0:
            raise ConfigError("penalty_rate must be >= 0")
        if not 0.0 <= self.leakage_threshold <= 1.0:
            raise ConfigError("leakage_threshold must be in [0, 1]")


@dataclass(frozen=True)
class EnergyReport:
    energy: float
    leakage_fraction: float
    penalty: float

    @property
    def total_cost(self) -> float:
        return self.energy + self.penalty

    def to_dict(self) -> dict:
        return {
            "energy_hartree": self.energy,
            "leakage_fraction": self.leakage_fraction,
            "penalty_hartree": self.penalty,
            "total_cost_hartree": self.total_cost,
        }


def leakage_penalty(leakage: float, cfg: ObjectiveConfig) -> float:
    over = max(0.0, 100.0 * (leakage - cfg.leakage_threshold))
    return cfg.penalty_rate * over


def energy(psi_final: np.ndarray, h_embedded: np.ndarray, proj: np.ndarray,
           cfg: ObjectiveConfig = ObjectiveConfig()) -> EnergyReport:
    """Evaluate the cost pieces for a normalized full-space state."""
    psi = np.asarray(psi_final, dtype=np.complex128)
    expect = float(np.real(np.vdot(psi, h_embedded @ psi)))
    weight = float(np.real(np.vdot(psi, proj @ psi)))
    leak = min(max(1.0 - weight, 0.0), 1.0)
    if cfg.normalize:
        if weight < 1e-12:
            raise SingularProjectionError(
                "cannot normalize: no computational-subspace weight")
        e = expect / weight
    else:
        e = expect
    return EnergyReport(energy=e, leakage_fraction=leak,
                        penalty=leakage_penalty(leak, cfg))
