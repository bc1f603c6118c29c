"""Compare the numba-compiled kernels against the pure-numpy fallback.

Run:  python benchmarks/bench_backends.py [--trotter 1000] [--repeat 20]

Times the forward propagation and the combined cost+gradient evaluation
for the shipped two-transmon device at 2 and 3 levels, and checks that
both backends produce identical trajectories.
"""
import argparse
import time

import numpy as np

from ctrlvqe import _kernels_numba as knb
from ctrlvqe import _kernels_numpy as knp
from ctrlvqe.adjoint import terminal_costate
from ctrlvqe.io import read_device, read_pauli_hamiltonian
from ctrlvqe.model import embed_molecular_hamiltonian
from ctrlvqe.objective import ObjectiveConfig, energy
from ctrlvqe.propagator import Workspace
from ctrlvqe.pulsegrid import random_schedule


def bench(fn, repeat):
    fn()  # warm (and JIT-compile on the numba path)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--trotter", type=int, default=1000)
    parser.add_argument("--repeat", type=int, default=20)
    parser.add_argument("--device", default="data/device_2transmon.toml")
    parser.add_argument("--hamiltonian", default="data/h2_1.5A_sto3g_parity_z2.ham")
    args = parser.parse_args()

    base = read_device(args.device)
    pauli = read_pauli_hamiltonian(args.hamiltonian)
    print(f"{'case':<26}{'numba':>12}{'numpy':>12}{'speedup':>10}")
    for levels in (2, 3):
        spec = base.with_levels(levels)
        ws = Workspace(spec, "dressed")
        h_emb = embed_molecular_hamiltonian(pauli, spec, "dressed", ws.dressed)
        sched = random_schedule(1, spec, 0.02, 1.0, 100, 12.0)
        psi0 = ws.basis_vector("01")
        dt, tms, amps, seg = ws.grid(sched, args.trotter)
        amps = np.ascontiguousarray(amps)
        nu = np.ascontiguousarray(sched.drive_freq)

        def evolve(k):
            return lambda: k.evolve_trajectory(ws.W, ws.Wd, ws.E, ws.Vx, ws.xs,
                                               ws.digits, amps, nu, tms, dt, psi0)

        traj_nb = evolve(knb)()
        traj_np = evolve(knp)()
        assert np.max(np.abs(traj_nb - traj_np)) < 1e-12, "backends disagree"

        lam_T = terminal_costate(traj_nb[-1], h_emb, ws.proj, ObjectiveConfig())

        def grad(k):
            def run():
                traj = k.evolve_trajectory(ws.W, ws.Wd, ws.E, ws.Vx, ws.xs,
                                           ws.digits, amps, nu, tms, dt, psi0)
                energy(traj[-1], h_emb, ws.proj)
                k.gradient_pass(ws.W, ws.Wd, ws.E, ws.Vx, ws.xs, ws.Cnu, ws.digits,
                                amps, nu, tms, dt, traj, lam_T, seg,
                                sched.n_segments)
            return run

        for name, maker in (("evolve", evolve), ("cost+gradient", grad)):
            t_nb = bench(maker(knb), args.repeat)
            t_np = bench(maker(knp), max(2, args.repeat // 5))
            print(f"{levels}-level {name:<18}{1e3 * t_nb:>10.2f}ms"
                  f"{1e3 * t_np:>10.2f}ms{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
