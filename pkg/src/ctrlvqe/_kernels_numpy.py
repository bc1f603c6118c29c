"""Reference (pure numpy) implementations of the propagation kernels.

Math used by every kernel: the interaction-picture step generator over
[t_j, t_j + dt] is frozen at the midpoint tm and factorizes exactly,

    exp(-i H_IC(tm) dt) = e^{i H_D tm} (kron_q U_q) e^{-i H_D tm},
    U_q = D(th_q) Vx diag(e^{-i a_q xs dt}) Vx^T D(th_q)^+,

with a_q = 2*pi*Omega_q(tm), th_q = 2*pi*nu_q*tm, D(th) = diag(e^{-i k th}),
and Vx, xs the (constant) eigendecomposition of (a + a^+) on one transmon.
The drive terms of different transmons commute, so the factorization is
exact, and e^{i H_D tm} is applied through the dressed eigenbasis (W, E).

Shapes: W (N, N); E (N,); Vx (L, L); xs (L,); digits (N, n_q) giving the
level of transmon q in basis state a; amps (n_steps, n_q) midpoint
amplitudes in GHz; tms (n_steps,) midpoint times; trajectories
(n_steps + 1, N).
"""
import numpy as np

TWO_PI = 2.0 * np.pi


def _site_matrices(Vx, xs, amps_j, nu, tm, dt, sign):
    """Per-transmon step factors U_q (stacked, shape (n_q, L, L));
    sign=+1 for a forward step, -1 for its inverse."""
    n_q = amps_j.shape[0]
    L = xs.shape[0]
    out = np.empty((n_q, L, L), dtype=np.complex128)
    k = np.arange(L)
    for q in range(n_q):
        alpha = sign * TWO_PI * amps_j[q] * dt
        theta = TWO_PI * nu[q] * tm
        core = (Vx * np.exp(-1j * alpha * xs)) @ Vx.T
        phase = np.exp(-1j * k * theta)
        out[q] = phase[:, None] * core * phase.conj()[None, :]
    return out


def _apply_sites(mats, v, L, n_q):
    """Apply kron_{q}(mats[q]) to v (transmon 0 = fastest axis)."""
    t = v.reshape((L,) * n_q)  # axis 0 is the slowest transmon (n_q - 1)
    for q in range(n_q):
        axis = n_q - 1 - q
        t = np.moveaxis(np.tensordot(mats[q], t, axes=(1, axis)), 0, axis)
    return t.reshape(-1)


def _dressed_phase_apply(W, Wd, E, t, v, sign):
    """Apply exp(sign * i * H_D * t) through the eigenbasis."""
    return W @ (np.exp(sign * 1j * E * t) * (Wd @ v))


def evolve_trajectory(W, Wd, E, Vx, xs, digits, amps, nu, tms, dt, psi0):
    """Forward Trotter evolution; returns states at all grid times."""
    n_steps = amps.shape[0]
    n_q = nu.shape[0]
    L = xs.shape[0]
    traj = np.empty((n_steps + 1, W.shape[0]), dtype=np.complex128)
    traj[0] = psi0
    psi = psi0.astype(np.complex128)
    for j in range(n_steps):
        tm = tms[j]
        psi = _dressed_phase_apply(W, Wd, E, tm, psi, -1.0)
        mats = _site_matrices(Vx, xs, amps[j], nu, tm, dt, +1.0)
        psi = _apply_sites(mats, psi, L, n_q)
        psi = _dressed_phase_apply(W, Wd, E, tm, psi, +1.0)
        traj[j + 1] = psi
    return traj


def backward_trajectory(W, Wd, E, Vx, xs, digits, amps, nu, tms, dt, lam_T):
    """Apply the exact inverses of the forward steps in reverse order;
    traj[j] is the costate at grid time j."""
    n_steps = amps.shape[0]
    n_q = nu.shape[0]
    L = xs.shape[0]
    traj = np.empty((n_steps + 1, W.shape[0]), dtype=np.complex128)
    traj[n_steps] = lam_T
    lam = lam_T.astype(np.complex128)
    for j in range(n_steps - 1, -1, -1):
        tm = tms[j]
        lam = _dressed_phase_apply(W, Wd, E, tm, lam, -1.0)
        mats = _site_matrices(Vx, xs, amps[j], nu, tm, dt, -1.0)
        lam = _apply_sites(mats, lam, L, n_q)
        lam = _dressed_phase_apply(W, Wd, E, tm, lam, +1.0)
        traj[j] = lam
    return traj


def _sinc(z):
    # sin(z)/z, stable near 0 (z real array)
    return np.sinc(z / np.pi)


def gradient_pass(W, Wd, E, Vx, xs, Cnu, digits, amps, nu, tms, dt,
                  psi_traj, lam_T, seg_of_step, n_segments):
    """Exact derivatives of the Trotterized cost functional.

    Returns (grad_amps (n_q, n_segments), grad_nu (n_q,)) for the real cost
    whose terminal sensitivity is lam_T (i.e. dJ = 2 Re <lam_T | d psi_T>).

    Per step, in the step eigenbasis (Q = e^{i H_D tm} kron(D_q Vx),
    eigenvalues mu_a = sum_q 2*pi*amp_q*xs[digit_q(a)]):

    * amplitude: dH/dc commutes with H_IC(tm), so the Frechet derivative
      collapses to -i*2*pi*dt * diag(xs at digit q) past the exponential;
    * drive frequency: full divided-difference (Loewner) formula with the
      single-site operator Cnu = Vx^T (i(a - a^+)) Vx and prefactor
      (2*pi)^2 * amp_q * tm.
    """
    n_steps = amps.shape[0]
    n_q = nu.shape[0]
    L = xs.shape[0]
    N = W.shape[0]
    grad_amps = np.zeros((n_q, n_segments))
    grad_nu = np.zeros(n_q)
    k = np.arange(L)
    lam = lam_T.astype(np.complex128)
    for j in range(n_steps - 1, -1, -1):
        tm = tms[j]
        # into the step eigenbasis
        psi_t = _dressed_phase_apply(W, Wd, E, tm, psi_traj[j], -1.0)
        lam_t = _dressed_phase_apply(W, Wd, E, tm, lam, -1.0)
        site_dag = np.empty((n_q, L, L), dtype=np.complex128)
        for q in range(n_q):
            theta = TWO_PI * nu[q] * tm
            phase = np.exp(-1j * k * theta)
            site_dag[q] = Vx.T * phase.conj()[None, :]  # (D Vx)^+
        psi_e = _apply_sites(site_dag, psi_t, L, n_q)
        lam_e = _apply_sites(site_dag, lam_t, L, n_q)

        mu = TWO_PI * (xs[digits] @ amps[j])  # (N,)
        step_phase = np.exp(-1j * mu * dt)

        seg = seg_of_step[j]
        for q in range(n_q):
            xq = xs[digits[:, q]]
            val = np.vdot(lam_e, step_phase * (-1j * dt * TWO_PI * xq) * psi_e)
            grad_amps[q, seg] += 2.0 * val.real

        # nu derivative: pairs differing only in transmon q's digit
        dmu = 0.5 * dt * (mu[:, None] - mu[None, :])
        exp1 = np.exp(-0.5j * dt * (mu[:, None] + mu[None, :])) * _sinc(dmu)
        for q in range(n_q):
            scale = TWO_PI * TWO_PI * amps[j, q] * tm
            same_others = np.ones((N, N), dtype=bool)
            for p in range(n_q):
                if p != q:
                    same_others &= digits[:, p][:, None] == digits[:, p][None, :]
            B = np.zeros((N, N), dtype=np.complex128)
            B[same_others] = Cnu[digits[:, q][:, None], digits[:, q][None, :]][same_others]
            M = exp1 * (-1j * dt * scale) * B
            grad_nu[q] += 2.0 * np.real(np.vdot(lam_e, M @ psi_e))

        # back-step the costate within the eigenbasis, then out
        lam_e = np.exp(+1j * mu * dt) * lam_e
        site = np.empty((n_q, L, L), dtype=np.complex128)
        for q in range(n_q):
            theta = TWO_PI * nu[q] * tm
            phase = np.exp(-1j * k * theta)
            site[q] = phase[:, None] * Vx  # D Vx
        lam = _apply_sites(site, lam_e, L, n_q)
        lam = _dressed_phase_apply(W, Wd, E, tm, lam, +1.0)
    return grad_amps, grad_nu


def switching_pass(W, Wd, E, xs, digits, nu, times, psi_traj, lam_traj):
    """phi_q(t) = 2 Re <lam(t)| i V_q(t) |psi(t)> on the stored grid, with
    V_q(t) the interaction-picture drive quadrature of transmon q."""
    n_t = times.shape[0]
    n_q = nu.shape[0]
    L = xs.shape[0]
    N = W.shape[0]
    n_sites = digits.shape[1]
    phi = np.empty((n_t, n_q))
    for it in range(n_t):
        t = times[it]
        u = _dressed_phase_apply(W, Wd, E, t, lam_traj[it], -1.0)
        v = _dressed_phase_apply(W, Wd, E, t, psi_traj[it], -1.0)
        for q in range(n_q):
            stride = L ** q
            # <u| a_q |v> summed over basis states with digit_q < L-1
            av = np.zeros(N, dtype=np.complex128)
            mask = digits[:, q] < L - 1
            idx = np.nonzero(mask)[0]
            av[idx] = np.sqrt(digits[idx, q] + 1.0) * v[idx + stride]
            amp_a = np.vdot(u, av)
            theta = TWO_PI * nu[q] * t
            sandwich = np.exp(1j * theta) * amp_a
            # a^+ part is the conjugate-transpose pairing of the same elements
            au = np.zeros(N, dtype=np.complex128)
            au[idx] = np.sqrt(digits[idx, q] + 1.0) * u[idx + stride]
            sandwich += np.exp(-1j * theta) * np.conj(np.vdot(v, au))
            phi[it, q] = 2.0 * np.real(1j * sandwich)
    return phi
