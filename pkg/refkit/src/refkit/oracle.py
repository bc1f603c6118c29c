"""Brute-force reference propagator.

Straightforward dense construction: build the static Hamiltonian, take its
eigenbasis (labelled by maximum overlap with the bare states), and
integrate the interaction-picture Schroedinger equation with a
fourth-order commutator-free Magnus integrator whose step exponentials are
dense scipy expm calls. Defaults to ten times the main implementation's
1000-step resolution. Slow on purpose; exists to disagree loudly if the
fast path is wrong.
"""
import argparse
import json
import math
from pathlib import Path

import numpy as np
import scipy.linalg as sla

from . import io

TWO_PI = 2.0 * math.pi

# two-point Gauss nodes and the standard fourth-order commutator-free weights
_C1 = 0.5 - math.sqrt(3.0) / 6.0
_C2 = 0.5 + math.sqrt(3.0) / 6.0
_A1 = (3.0 - 2.0 * math.sqrt(3.0)) / 12.0
_A2 = (3.0 + 2.0 * math.sqrt(3.0)) / 12.0


def lowering(levels):
    a = np.zeros((levels, levels), dtype=complex)
    for k in range(1, levels):
        a[k - 1, k] = math.sqrt(k)
    return a


def site_op(op, site, n, levels):
    full = np.eye(1, dtype=complex)
    for q in range(n):
        full = np.kron(op if q == site else np.eye(levels, dtype=complex), full)
    return full


def static_hamiltonian(device):
    n, levels = device["n"], device["levels"]
    dim = levels ** n
    a = lowering(levels)
    num = a.conj().T @ a
    kerr = a.conj().T @ a.conj().T @ a @ a
    h = np.zeros((dim, dim), dtype=complex)
    for q in range(n):
        h += TWO_PI * device["omega"][q] * site_op(num, q, n, levels)
        h -= TWO_PI * 0.5 * device["delta"][q] * site_op(kerr, q, n, levels)
    for p, q, g in device["couplings"]:
        ap = site_op(a, p, n, levels)
        aq = site_op(a, q, n, levels)
        h += TWO_PI * g * (ap.conj().T @ aq + aq.conj().T @ ap)
    return h


def dressed_states(device):
    """Eigenvectors labelled by max-overlap bare state, column b <-> label b."""
    h = static_hamiltonian(device)
    vals, vecs = np.linalg.eigh(h)
    dim = h.shape[0]
    order = np.empty(dim, dtype=int)
    for b in range(dim):
        order[b] = int(np.argmax(np.abs(vecs[b, :]) ** 2))
    if len(set(order.tolist())) != dim:
        raise RuntimeError("ambiguous dressed-state labelling")
    return vals[order], vecs[:, order]


def label_index(label, levels):
    return sum(int(ch) * levels ** q for q, ch in enumerate(label))


def drive_amplitudes(schedule, t):
    n_seg = schedule["amps"].shape[1]
    seg = min(int(t / (schedule["duration"] / n_seg)), n_seg - 1)
    return schedule["amps"][:, seg]


def control_hamiltonian(device, schedule, energies, vectors, t):
    """Interaction-picture drive at time t (rad/ns, bare basis)."""
    n, levels = device["n"], device["levels"]
    dim = levels ** n
    a = lowering(levels)
    amps = drive_amplitudes(schedule, t)
    hc = np.zeros((dim, dim), dtype=complex)
    for q in range(n):
        theta = TWO_PI * schedule["nu"][q] * t
        aq = site_op(a, q, n, levels)
        hc += TWO_PI * amps[q] * (np.exp(1j * theta) * aq
                                  + np.exp(-1j * theta) * aq.conj().T)
    u = vectors @ np.diag(np.exp(1j * energies * t)) @ vectors.conj().T
    return u @ hc @ u.conj().T


def propagate(device, schedule, psi0, n_steps):
    """CF4 Magnus integration of the interaction-picture dynamics.

    Steps are laid out per segment (never straddling an amplitude jump),
    with at least ceil(n_steps / n_segments) steps in each segment."""
    energies, vectors = dressed_states(device)
    n_seg = schedule["amps"].shape[1]
    seg_len = schedule["duration"] / n_seg
    per_seg = max(1, math.ceil(n_steps / n_seg))
    psi = psi0.astype(complex)
    for s in range(n_seg):
        dt = seg_len / per_seg
        for k in range(per_seg):
            t0 = s * seg_len + k * dt
            h1 = control_hamiltonian(device, schedule, energies, vectors,
                                     t0 + _C1 * dt)
            h2 = control_hamiltonian(device, schedule, energies, vectors,
                                     t0 + _C2 * dt)
            psi = sla.expm(-1j * dt * (_A1 * h1 + _A2 * h2)) @ (
                sla.expm(-1j * dt * (_A2 * h1 + _A1 * h2)) @ psi)
    return psi


def molecular_matrix(terms, levels, n):
    """Pauli sum embedded on the dressed computational states."""
    pauli = {
        "I": np.eye(2, dtype=complex),
        "X": np.array([[0, 1], [1, 0]], dtype=complex),
        "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
        "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    }
    dim_q = 2 ** n
    m = np.zeros((dim_q, dim_q), dtype=complex)
    for word, coeff in terms:
        acc = np.eye(1, dtype=complex)
        for ch in word:
            acc = np.kron(pauli[ch], acc)
        m += coeff * acc
    return m


def computational_columns(vectors, levels, n):
    """Dressed vectors of the all-binary labels, qubit-index order."""
    cols = []
    for mbits in range(2 ** n):
        label = sum(((mbits >> q) & 1) * levels ** q for q in range(n))
        cols.append(vectors[:, label])
    return np.stack(cols, axis=1)


def projected_energy(psi, device, terms):
    _, vectors = dressed_states(device)
    p = computational_columns(vectors, device["levels"], device["n"])
    amp = p.conj().T @ psi
    weight = float(np.real(np.vdot(amp, amp)))
    m = molecular_matrix(terms, device["levels"], device["n"])
    value = float(np.real(np.vdot(amp, m @ amp)))
    return value / weight, 1.0 - weight


def oracle_evolve(device_path, hamiltonian_path, schedule_path, n_steps=10_000,
                  initial="01", compute_gradient=False, fd_step=1e-6,
                  levels=None):
    """Propagate and evaluate; returns a plain dict (the OracleResult)."""
    device = io.load_device(device_path)
    if levels is not None:
        device["levels"] = int(levels)
    terms = io.load_hamiltonian(hamiltonian_path)
    schedule = io.load_schedule(schedule_path)
    _, vectors = dressed_states(device)
    psi0 = vectors[:, label_index(initial, device["levels"])]
    psi = propagate(device, schedule, psi0, n_steps)
    e, leak = projected_energy(psi, device, terms)
    result = {
        "final_state": [[float(z.real), float(z.imag)] for z in psi],
        "norm": float(np.linalg.norm(psi)),
        "energy_hartree": e,
        "leakage_fraction": leak,
        "n_steps": n_steps,
        "initial_state": initial,
    }
    if compute_gradient:
        result["fd_gradient"] = finite_difference_gradient(
            device, terms, schedule, psi0, n_steps, fd_step)
    return result


def finite_difference_gradient(device, terms, schedule, psi0, n_steps, eps):
    """Central differences of the projected energy in every amplitude and
    each drive frequency (same packing as the schedule file columns)."""
    def cost(sched):
        psi = propagate(device, sched, psi0, n_steps)
        return projected_energy(psi, device, terms)[0]

    grads = []
    n_q, n_seg = schedule["amps"].shape
    for q in range(n_q):
        for k in range(n_seg):
            up = {**schedule, "amps": schedule["amps"].copy()}
            dn = {**schedule, "amps": schedule["amps"].copy()}
            up["amps"][q, k] += eps
            dn["amps"][q, k] -= eps
            grads.append((cost(up) - cost(dn)) / (2 * eps))
    for q in range(n_q):
        up = {**schedule, "nu": schedule["nu"].copy()}
        dn = {**schedule, "nu": schedule["nu"].copy()}
        up["nu"][q] += eps
        dn["nu"][q] -= eps
        grads.append((cost(up) - cost(dn)) / (2 * eps))
    return grads


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="refkit-oracle",
        description="independent dense propagation oracle")
    parser.add_argument("--device", required=True)
    parser.add_argument("--hamiltonian", required=True)
    parser.add_argument("--schedule", required=True)
    parser.add_argument("--steps", type=int, default=10_000)
    parser.add_argument("--initial", default="01")
    parser.add_argument("--levels", type=int, default=None)
    parser.add_argument("--gradient", action="store_true")
    parser.add_argument("--out", required=True, help="output JSON path")
    args = parser.parse_args(argv)
    result = oracle_evolve(args.device, args.hamiltonian, args.schedule,
                           n_steps=args.steps, initial=args.initial,
                           compute_gradient=args.gradient, levels=args.levels)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(json.dumps(result, indent=1))
    print(f"oracle: energy={result['energy_hartree']:.10f} Ha "
          f"leakage={result['leakage_fraction']:.4f} norm={result['norm']:.12f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
