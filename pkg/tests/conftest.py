from pathlib import Path

import numpy as np
import pytest

from ctrlvqe.io import read_device, read_pauli_hamiltonian
from ctrlvqe.model import DeviceSpec
from ctrlvqe.objective import ObjectiveConfig
from ctrlvqe.problem import PulseProblem, PulseSettings

REPO = Path(__file__).resolve().parent.parent
DATA = REPO / "data"

# frozen reference values for the shipped H2 file (exact diagonalization
# of the 4x4 operator; see tests/test_model.py for the recomputation)
H2_E_FCI = -0.9981493545123428
H2_E_HF = -0.9108735552240000
H2_P_RATIO = 6.916935  # FCI population ratio p01/p10


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def device2():
    return read_device(DATA / "device_2transmon.toml")


@pytest.fixture(scope="session")
def device3(device2):
    return device2.with_levels(3)


@pytest.fixture(scope="session")
def h2(data_dir):
    return read_pauli_hamiltonian(data_dir / "h2_1.5A_sto3g_parity_z2.ham")


@pytest.fixture(scope="session")
def problem2(device2, h2):
    """Qubit problem at a relaxed duration with a light grid for fast tests."""
    return PulseProblem(device2, h2, PulseSettings(duration_ns=10.0, n_segments=10,
                                                   n_trotter=200))


@pytest.fixture(scope="session")
def problem3(device3, h2):
    return PulseProblem(device3, h2, PulseSettings(duration_ns=10.0, n_segments=10,
                                                   n_trotter=200))
