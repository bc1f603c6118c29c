"""Device model: qudit ladder algebra, static Hamiltonian, dressed frame,
and the embedding of a qubit-space molecular Hamiltonian into the full
qudit product space.

Conventions used everywhere in this package:

* Frequencies are ordinary frequencies in GHz (omega/2pi values); times are
  in ns. Hamiltonians carry the 2*pi factor, so matrix elements are in
  rad/ns and phases omega*t are dimensionless.
* Basis ordering is little-endian: transmon 0 varies fastest, i.e. basis
  index = sum_q level_q * levels**q. A basis label string "ab..." means
  transmon 0 in level a, transmon 1 in level b, and so on.
* Pauli words follow the same rule: word character q acts on transmon q.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, ConfigError, DegeneracyError

# dense kernels only; keep dimensions honest
DIMENSION_CAP = 4096

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class DeviceSpec:
    """Static description of a chain of coupled transmons.

    omega / delta are GHz (ordinary frequency); couplings are (p, q, g)
    triples with p < q and g in GHz.
    """

    n_transmons: int
    levels: int
    omega: tuple
    delta: tuple
    couplings: tuple = ()

    def __post_init__(self):
        if self.n_transmons < 1:
            raise ConfigError("n_transmons must be positive")
        if self.levels < 2:
            raise ConfigError("levels must be >= 2")
        if len(self.omega) != self.n_transmons or len(self.delta) != self.n_transmons:
            raise ConfigError("omega/delta length must equal n_transmons")
        seen = set()
        for p, q, g in self.couplings:
            if not (0 <= p < q < self.n_transmons):
                raise ConfigError(f"bad coupling indices ({p}, {q})")
            if (p, q) in seen:
                raise ConfigError(f"duplicate coupling ({p}, {q})")
            if isinstance(g, complex):
                raise ConfigError("coupling g must be real")
            seen.add((p, q))
        if self.levels ** self.n_transmons > DIMENSION_CAP:
            raise CapacityError(
                f"levels**n_transmons = {self.levels ** self.n_transmons} "
                f"exceeds the dense-propagation cap {DIMENSION_CAP}"
            )

    @property
    def dim(self) -> int:
        return self.levels ** self.n_transmons

    def with_levels(self, levels: int) -> "DeviceSpec":
        return DeviceSpec(self.n_transmons, levels, self.omega, self.delta, self.couplings)


@dataclass(frozen=True)
class DressedFrame:
    """Eigendecomposition of the device Hamiltonian with a bare-label map.

    ``energies[j]`` (rad/ns) goes with eigenvector column ``vectors[:, j]``;
    ``bare_to_dressed[b]`` is the dressed index whose eigenvector has
    maximum overlap with bare basis state b.
    """

    energies: np.ndarray
    vectors: np.ndarray
    bare_to_dressed: np.ndarray

    def dressed_vector(self, bare_index: int) -> np.ndarray:
        return self.vectors[:, self.bare_to_dressed[bare_index]]


def lowering_op(levels: int) -> np.ndarray:
    """Truncated harmonic lowering operator a with <k-1|a|k> = sqrt(k)."""
    a = np.zeros((levels, levels), dtype=complex)
    for k in range(1, levels):
        a[k - 1, k] = np.sqrt(k)
    return a


def embed_site_operator(op: np.ndarray, site: int, spec: DeviceSpec) -> np.ndarray:
    """Kronecker-embed a single-transmon operator at the given site."""
    full = np.array([[1.0 + 0j]])
    for q in range(spec.n_transmons):
        factor = op if q == site else np.eye(spec.levels, dtype=complex)
        # transmon 0 varies fastest -> it is the rightmost kron factor
        full = np.kron(factor, full)
    return full


def basis_index(label: str, spec: DeviceSpec) -> int:
    """Map a label like '01' (transmon0=0, transmon1=1) to a basis index."""
    if len(label) != spec.n_transmons:
        raise ConfigError(f"label {label!r} does not match {spec.n_transmons} transmons")
    idx = 0
    for q, ch in enumerate(label):
        k = int(ch)
        if not 0 <= k < spec.levels:
            raise ConfigError(f"label {label!r} has level {k} >= levels={spec.levels}")
        idx += k * spec.levels ** q
    return idx


def basis_label(index: int, spec: DeviceSpec) -> str:
    digits = []
    for _ in range(spec.n_transmons):
        digits.append(str(index % spec.levels))
        index //= spec.levels
    return "".join(digits)


def all_labels(spec: DeviceSpec) -> list:
    return [basis_label(i, spec) for i in range(spec.dim)]


def computational_indices(spec: DeviceSpec) -> np.ndarray:
    """Full-space indices of the computational basis states (all transmons
    in level 0 or 1), ordered by the qubit-space index sum_q bit_q * 2**q."""
    keep = []
    for m in range(2 ** spec.n_transmons):
        idx = 0
        for q in range(spec.n_transmons):
            idx += ((m >> q) & 1) * spec.levels ** q
        keep.append(idx)
    return np.array(keep, dtype=np.int64)


def build_device_hamiltonian(spec: DeviceSpec) -> np.ndarray:
    """Assemble the static device Hamiltonian in rad/ns (bare basis).

    Number term 2*pi*omega_q a+a, anharmonic term -2*pi*(delta_q/2) a+a+aa,
    and exchange coupling 2*pi*g (a+_p a_q + a+_q a_p).
    """
    dim = spec.dim
    h = np.zeros((dim, dim), dtype=complex)
    a = lowering_op(spec.levels)
    num = a.conj().T @ a
    kerr = a.conj().T @ a.conj().T @ a @ a
    for q in range(spec.n_transmons):
        h += 2 * np.pi * spec.omega[q] * embed_site_operator(num, q, spec)
        h -= 2 * np.pi * (spec.delta[q] / 2.0) * embed_site_operator(kerr, q, spec)
    for p, q, g in spec.couplings:
        ap = embed_site_operator(a, p, spec)
        aq = embed_site_operator(a, q, spec)
        h += 2 * np.pi * g * (ap.conj().T @ aq + aq.conj().T @ ap)
    return h


def dress(spec: DeviceSpec, tie_tol: float = 1e-9) -> DressedFrame:
    """Diagonalize the device Hamiltonian and label eigenvectors by the
    bare state of maximum overlap.

    Raises DegeneracyError when two dressed states tie in overlap for the
    same bare label within ``tie_tol``, and ConfigError if the resulting
    assignment is not a bijection.
    """
    h = build_device_hamiltonian(spec)
    energies, vectors = np.linalg.eigh(h)
    overlaps = np.abs(vectors) ** 2  # overlaps[b, j] = |<b|eig_j>|^2
    assignment = np.full(spec.dim, -1, dtype=np.int64)
    for b in range(spec.dim):
        order = np.argsort(overlaps[b])[::-1]
        best, second = order[0], order[1] if spec.dim > 1 else order[0]
        if spec.dim > 1 and abs(overlaps[b, best] - overlaps[b, second]) < tie_tol:
            raise DegeneracyError(
                f"bare state |{basis_label(b, spec)}> overlaps dressed states "
                f"{best} and {second} equally (|.|^2 = {overlaps[b, best]:.6f})"
            )
        assignment[b] = best
    if len(set(assignment.tolist())) != spec.dim:
        raise DegeneracyError("max-overlap assignment is not a bijection")
    # store columns in assignment order (dressed index b = the eigenstate
    # adiabatically connected to bare label b); eigenvalues follow and are
    # therefore not ascending in general
    return DressedFrame(energies=energies[assignment],
                        vectors=vectors[:, assignment],
                        bare_to_dressed=np.arange(spec.dim, dtype=np.int64))


@dataclass(frozen=True)
class PauliHamiltonian:
    """Weighted Pauli words on the computational (qubit) space, in hartree."""

    terms: tuple  # of (word, coefficient)
    n_qubits: int

    @classmethod
    def from_terms(cls, terms) -> "PauliHamiltonian":
        merged: dict = {}
        n_qubits = None
        for word, coeff in terms:
            word = word.upper()
            if n_qubits is None:
                n_qubits = len(word)
            if len(word) != n_qubits:
                raise ConfigError(f"inconsistent word length in {word!r}")
            if any(ch not in _PAULI for ch in word):
                raise ConfigError(f"bad pauli word {word!r}")
            coeff = float(coeff)
            merged[word] = merged.get(word, 0.0) + coeff
        if not merged:
            raise ConfigError("empty Hamiltonian")
        return cls(terms=tuple(sorted(merged.items())), n_qubits=n_qubits)

    def qubit_matrix(self) -> np.ndarray:
        """Dense 2^n x 2^n matrix; word character q acts on transmon q."""
        dim = 2 ** self.n_qubits
        h = np.zeros((dim, dim), dtype=complex)
        for word, coeff in self.terms:
            m = np.array([[1.0 + 0j]])
            for ch in word:
                m = np.kron(_PAULI[ch], m)
            h += coeff * m
        return h

    def ground_energy(self) -> float:
        return float(np.linalg.eigvalsh(self.qubit_matrix())[0])


def computational_basis_vectors(spec: DeviceSpec, frame: str,
                                dressed: DressedFrame | None = None) -> np.ndarray:
    """Columns: the computational basis states as full-space vectors.

    Column order follows the qubit-space index (sum_q bit_q * 2**q), so the
    result is the embedding isometry P with P+ P = identity on 2^n.
    """
    if frame not in ("bare", "dressed"):
        raise ConfigError(f"unknown frame {frame!r}")
    comp = computational_indices(spec)
    cols = np.zeros((spec.dim, len(comp)), dtype=complex)
    for col, b in enumerate(comp):
        if frame == "bare":
            cols[b, col] = 1.0
        else:
            if dressed is None:
                raise ConfigError("dressed frame requires a DressedFrame")
            cols[:, col] = dressed.dressed_vector(b)
    return cols


def embed_molecular_hamiltonian(h: PauliHamiltonian, spec: DeviceSpec, frame: str = "dressed",
                                dressed: DressedFrame | None = None) -> np.ndarray:
    """P H_mol P+ on the full qudit space; zero on any leakage basis state."""
    if h.n_qubits != spec.n_transmons:
        raise ConfigError(
            f"hamiltonian acts on {h.n_qubits} qubits but device has "
            f"{spec.n_transmons} transmons"
        )
    if frame == "dressed" and dressed is None:
        dressed = dress(spec)
    p = computational_basis_vectors(spec, frame, dressed)
    return p @ h.qubit_matrix() @ p.conj().T


def projector(spec: DeviceSpec, frame: str = "dressed",
              dressed: DressedFrame | None = None) -> np.ndarray:
    """Orthogonal projector onto the computational subspace."""
    if frame == "dressed" and dressed is None:
        dressed = dress(spec)
    p = computational_basis_vectors(spec, frame, dressed)
    return p @ p.conj().T
